"""Command-line entry point: ``csipla run | ingest | selftest``."""
import argparse
import json
import logging
import sys
from dataclasses import replace

from .harness import ConfigError, ExperimentConfig, emit_csv, ingest_csi, load_config, parse_sweep, run_experiment

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="csipla", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment")
    run.add_argument("--config", help="YAML config file (defaults apply when omitted)")
    run.add_argument("--seed", type=_seed)
    run.add_argument("--out", help="CSV output path (stdout when omitted)")
    run.add_argument("--sweep", help="e.g. snr=5,10,15 | rate=0.1:0.4:0.1 | k=0:10:2")
    run.add_argument("--trials", type=int)
    run.add_argument("--preprocessing", choices=["none", "pca", "rpca", "arpca"])
    run.add_argument("--timing", action="store_true", help="add runtime_seconds to the CSV")

    ingest = sub.add_parser("ingest", help="parse a CSI CSV file")
    ingest.add_argument("--file", required=True)
    ingest.add_argument("--nb", type=int)
    ingest.add_argument("--group", type=int, help="snapshots per CSI matrix")
    ingest.add_argument("--out", help="save the matrices to this .npz file")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def _run(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: v for k, v in (("seed", args.seed), ("sweep", args.sweep),
                                   ("trials", args.trials),
                                   ("preprocessing", args.preprocessing)) if v is not None}
    cfg = replace(cfg, **overrides).validate()
    parse_sweep(cfg.sweep)
    rows = run_experiment(cfg)
    emit_csv(rows, args.out or "/dev/stdout", include_runtime=args.timing)
    return EXIT_OK


def _ingest(args):
    import numpy as np

    mats = ingest_csi(args.file, nb=args.nb, group_size=args.group)
    if args.out:
        np.savez(args.out, *mats)
    print(json.dumps({"matrices": len(mats), "shape": list(mats[0].shape)}))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        if args.command == "ingest":
            return _ingest(args)
        from .selftest import run_selftest
        return EXIT_OK if run_selftest() else EXIT_RUNTIME
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print("runtime error: %s" % exc, file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
