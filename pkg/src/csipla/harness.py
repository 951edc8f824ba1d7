"""Seeded Monte-Carlo experiments, CSI ingestion and CSV output."""
from dataclasses import asdict, dataclass, field, fields, replace
import csv
import logging
import math
import time

import numpy as np
import yaml

from . import channel
from .metrics import H0, H1, TrialRecord, eer, pd_at_pfa, post_recon_error, roc
from .polar import construct
from .preprocess import AdaptiveRobustPCA, PCADenoiser, RobustPCA, estimate_beta
from .quantizer import LloydMaxQuantizer, quantize_to_blocks
from .reconcile import authenticate, enroll, estimate_crossover, hamming

log = logging.getLogger(__name__)

SCHEMES = ("none", "pca", "rpca", "arpca")
SWEEP_AXES = {"snr": ("snr_db",), "rate": ("rate",), "k": ("k_factor_1", "k_factor_2"),
              "beta": ("beta",)}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    nb: int = 32
    n_snapshots: int = 16
    k_factor_1: float = 0.0
    k_factor_2: float = 0.0
    beta: float = 0.9
    snr_db: float = 10.0
    n_code: int = 128
    rate: float = 0.1
    n_bits: int = 1
    crc_len: int = 8
    crc_poly: int = 0x07
    list_size: int = 8
    preprocessing: str = "none"
    pca_d: int = 10
    trials: int = 500
    seed: int = 0
    design_snr_db: float = None
    p_channel: float = None
    reconcile: bool = True
    sweep: str = None

    @property
    def k_unfrozen(self):
        return int(round(self.rate * self.n_code))

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.trials >= 1, "empty experiment: trials must be >= 1")
        need(self.nb >= 1 and self.n_snapshots >= 1, "nb and n_snapshots must be positive")
        need(self.k_factor_1 >= 0 and self.k_factor_2 >= 0, "K-factors must be nonnegative")
        need(0.0 <= self.beta <= 1.0, "beta must lie in [0, 1]")
        need(math.isfinite(self.snr_db) or self.snr_db == math.inf, "snr_db must be finite or inf")
        need(self.n_code >= 1 and not self.n_code & (self.n_code - 1),
             "n_code must be a power of two")
        need(0.0 < self.rate <= 1.0, "rate must lie in (0, 1]")
        need(self.k_unfrozen > self.crc_len, "rate * n_code must exceed crc_len")
        need(self.n_bits >= 1, "n_bits must be positive")
        need(self.list_size >= 1, "list_size must be positive")
        need(self.preprocessing in SCHEMES, "preprocessing must be one of %s" % (SCHEMES,))
        need(1 <= self.pca_d <= self.nb, "pca_d must lie in [1, nb]")
        need(0 <= self.seed < 2 ** 64, "seed must be an unsigned 64-bit integer")
        need(self.p_channel is None or 0.0 < self.p_channel < 0.5, "p_channel must lie in (0, 0.5)")
        need(2 * self.n_snapshots * self.nb * self.n_bits >= self.n_code,
             "insufficient data: one CSI matrix yields fewer bits than n_code")
        if self.sweep:
            parse_sweep(self.sweep)
        return self


@dataclass
class MetricsRow:
    preprocessing: str
    snr_db: float
    k_factor_1: float
    k_factor_2: float
    beta: float
    rate: float
    n_code: int
    k_unfrozen: int
    trials: int
    seed: int
    n_compared_bits: int
    bmr_h0: float
    bmr_h1: float
    err_recon_h0: float = math.nan
    err_recon_h1: float = math.nan
    pd_at_005: float = math.nan
    eer: float = math.nan
    mean_iterations: float = 0.0
    runtime_seconds: float = field(default=0.0, compare=False)


CSV_FIELDS = [f.name for f in fields(MetricsRow)]


def _coerce(name, value):
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in types:
        raise ConfigError("unknown config key %r" % name)
    if value is None or name == "sweep":
        return value
    try:
        if name in ("preprocessing",):
            return str(value)
        if name == "reconcile":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if types[name] in (int, "int"):
            if isinstance(value, str):
                return int(value, 0)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError("bad value for %s: %r" % (name, value)) from None


def _flatten(mapping, out):
    for key, value in mapping.items():
        if isinstance(value, dict) and key != "sweep":
            _flatten(value, out)
        else:
            if key in out:
                raise ConfigError("duplicate config key %r" % key)
            out[key] = value
    return out


def config_from_mapping(mapping):
    flat = _flatten(mapping or {}, {})
    if isinstance(flat.get("sweep"), dict):
        flat["sweep"] = ";".join("%s=%s" % (k, ",".join(str(x) for x in v) if isinstance(v, list)
                                            else v) for k, v in flat["sweep"].items())
    kwargs = {k: _coerce(k, v) for k, v in flat.items()}
    return ExperimentConfig(**kwargs).validate()


def load_config(path):
    """Read a YAML config; nested sections are flattened onto field names."""
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("cannot parse %s: %s" % (path, exc)) from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_mapping(data)


def _parse_values(text):
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be start:stop:step, got %r" % text)
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("range step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(n, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


def parse_sweep(spec):
    """``"snr=5,10,15"`` or ``"rate=0.1:0.4:0.1"`` -> list of override dicts.

    Several axes separated by ``;`` form a grid.
    """
    if not spec:
        return [{}]
    points = [{}]
    for part in str(spec).split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError("sweep must look like axis=values, got %r" % part)
        axis, values = part.split("=", 1)
        axis = axis.strip()
        if axis not in SWEEP_AXES:
            raise ConfigError("unknown sweep axis %r (expected one of %s)" % (axis, sorted(SWEEP_AXES)))
        try:
            vals = _parse_values(values)
        except ValueError:
            raise ConfigError("bad sweep values %r" % values) from None
        if not vals:
            raise ConfigError("sweep axis %r has no values" % axis)
        points = [dict(p, **{name: v for name in SWEEP_AXES[axis]}) for p in points for v in vals]
    return points


def trial_rng(seed, trial):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def simulate_trial(cfg, rng):
    """Enrollment matrix plus one H0 and one H1 authentication matrix."""
    p1 = channel.RicianParams(cfg.k_factor_1)
    p2 = channel.RicianParams(cfg.k_factor_2)
    n, nb = cfg.n_snapshots, cfg.nb
    x1 = channel.complex_gaussian((n, nb), rng)
    h_enroll = channel.to_real(channel.observe(channel.rician(x1, p1), cfg.snr_db, rng))
    x1_next = channel.evolve_markov(x1, cfg.beta, rng)
    h_legit = channel.to_real(channel.observe(channel.rician(x1_next, p1), cfg.snr_db, rng))
    x2_next = channel.complex_gaussian((n, nb), rng)
    h_other = channel.to_real(channel.observe(channel.rician(x2_next, p2), cfg.snr_db, rng))
    return h_enroll, h_legit, h_other


def preprocess_pair(scheme, h_enroll, h_auths, pca_d=10):
    """Apply one preprocessing scheme to the enrollment and authentication data.

    Returns ``(l_enroll, [l_auth, ...], admm_iterations)``.
    """
    if scheme == "none":
        return h_enroll, list(h_auths), []
    if scheme == "pca":
        pca = lambda h: PCADenoiser(n_components=pca_d).fit_transform(h)  # noqa: E731
        return pca(h_enroll), [pca(h) for h in h_auths], []
    if scheme == "rpca":
        est = RobustPCA()
        decs = [est.decompose(h) for h in (h_enroll, *h_auths)]
        return decs[0].l, [d.l for d in decs[1:]], [d.iterations for d in decs]
    if scheme == "arpca":
        est = AdaptiveRobustPCA().fit(h_enroll)
        decs = [est.decompose(h) for h in h_auths]
        iters = [est.n_iter_] + [d.iterations for d in decs]
        return est.low_rank_, [d.l for d in decs], iters
    raise ValueError("unknown preprocessing scheme %r" % scheme)


@dataclass
class PairOutcome:
    mismatches: list
    n_bits: int
    records: list
    iterations: list


def authenticate_matrices(h_enroll, h_auths, hypotheses, cfg, polar_spec=None):
    """Run preprocessing, quantization and reconciliation on real CSI matrices.

    ``h_auths`` and ``hypotheses`` are parallel sequences; the quantizer is
    designed once on the (preprocessed) enrollment matrix and reused for
    every authentication matrix.
    """
    l_enroll, l_auths, iters = preprocess_pair(cfg.preprocessing, h_enroll, h_auths, cfg.pca_d)
    quant = LloydMaxQuantizer(n_bits=cfg.n_bits).fit(l_enroll)
    qspec = quant.spec_
    bits_enroll = qspec.bits(l_enroll)
    mismatches = []
    records = []
    blocks_enroll = None
    if cfg.reconcile:
        polar_spec = polar_spec or build_polar_spec(cfg)
        blocks_enroll = quantize_to_blocks(l_enroll, qspec, cfg.n_code)
        enrolled = [enroll(q, polar_spec) for q in blocks_enroll]
    for h_raw, l_auth, hyp in zip(h_auths, l_auths, hypotheses):
        # the enrollment-side quantizer is frozen and shared by every phase
        assert quant.spec_ is qspec
        bits = qspec.bits(l_auth)
        mismatches.append(int(np.count_nonzero(bits != bits_enroll)))
        if not cfg.reconcile:
            continue
        if cfg.p_channel is not None:
            p = cfg.p_channel
        else:
            p = estimate_crossover(estimate_beta(h_enroll, h_raw), cfg.snr_db)
        blocks = quantize_to_blocks(l_auth, qspec, cfg.n_code)
        for (r1, side), qu in zip(enrolled, blocks):
            r_auth, ok = authenticate(qu, side, polar_spec, p)
            records.append(TrialRecord(hypothesis=hyp, eta=hamming(r1, r_auth),
                                       k_bits=polar_spec.k_unfrozen, crc_pass=bool(ok)))
    return PairOutcome(mismatches=mismatches, n_bits=int(bits_enroll.size), records=records,
                       iterations=iters)


def build_polar_spec(cfg):
    design = cfg.snr_db if cfg.design_snr_db is None else cfg.design_snr_db
    if not math.isfinite(design):
        design = 30.0
    return construct(cfg.n_code, cfg.k_unfrozen, crc_len=cfg.crc_len, crc_poly=cfg.crc_poly,
                     list_size=cfg.list_size, design_snr_db=design)


def run_point(cfg):
    """All trials of one sweep point aggregated into a :class:`MetricsRow`."""
    cfg.validate()
    t0 = time.perf_counter()
    polar_spec = build_polar_spec(cfg) if cfg.reconcile else None
    mism = np.zeros(2, dtype=np.int64)
    total_bits = 0
    records = []
    iters = []
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        h_enroll, h_legit, h_other = simulate_trial(cfg, rng)
        out = authenticate_matrices(h_enroll, [h_legit, h_other], [H0, H1], cfg, polar_spec)
        mism += out.mismatches
        total_bits += out.n_bits
        records.extend(out.records)
        iters.extend(out.iterations)

    row = MetricsRow(preprocessing=cfg.preprocessing, snr_db=cfg.snr_db,
                     k_factor_1=cfg.k_factor_1, k_factor_2=cfg.k_factor_2, beta=cfg.beta,
                     rate=cfg.rate, n_code=cfg.n_code, k_unfrozen=cfg.k_unfrozen,
                     trials=cfg.trials, seed=cfg.seed, n_compared_bits=total_bits,
                     bmr_h0=mism[0] / total_bits, bmr_h1=mism[1] / total_bits,
                     mean_iterations=float(np.mean(iters)) if iters else 0.0)
    if records:
        k = cfg.k_unfrozen
        h0 = [r.eta for r in records if r.hypothesis == H0]
        h1 = [r.eta for r in records if r.hypothesis == H1]
        curve = roc(h0, h1, k)
        row.err_recon_h0 = post_recon_error(records, H0)
        row.err_recon_h1 = post_recon_error(records, H1)
        row.pd_at_005 = pd_at_pfa(curve, 0.05)
        row.eer = eer(curve)
    row.runtime_seconds = time.perf_counter() - t0
    log.info("%s snr=%g k=%g rate=%g: bmr_h0=%.4f bmr_h1=%.4f (%.1fs)", cfg.preprocessing,
             cfg.snr_db, cfg.k_factor_1, cfg.rate, row.bmr_h0, row.bmr_h1, row.runtime_seconds)
    return row, records


def run_experiment(cfg):
    """One :class:`MetricsRow` per sweep point of ``cfg``."""
    cfg.validate()
    rows = []
    for override in parse_sweep(cfg.sweep):
        point = replace(cfg, sweep=None, **override)
        rows.append(run_point(point)[0])
    return rows


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.6g" % value
    return str(value)


def emit_csv(rows, path, include_runtime=False):
    """Header plus one line per row; floats carry 6 significant digits.

    Wall-clock runtime is left out unless requested so that identical
    configurations produce byte-identical files.
    """
    names = [n for n in CSV_FIELDS if include_runtime or n != "runtime_seconds"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            d = asdict(row)
            writer.writerow([_fmt(d[n]) for n in names])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def ingest_csi(path, nb=None, layout="csv_complex_interleaved", group_size=None):
    """Parse complex CSI snapshots into real CSI matrices.

    Each CSV row holds one snapshot as ``re, im`` pairs for every antenna.
    Rows are grouped ``group_size`` at a time (all rows by default) and each
    group becomes one ``(2 * rows, nb)`` matrix with real parts on top.
    """
    if layout != "csv_complex_interleaved":
        raise ValueError("unsupported layout %r" % layout)
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                vals = [float(c) for c in rec]
            except ValueError:
                raise ValueError("line %d: non-numeric field" % lineno) from None
            if len(vals) % 2:
                raise ValueError("line %d: odd number of fields (%d)" % (lineno, len(vals)))
            if nb is not None and len(vals) != 2 * nb:
                raise ValueError("line %d: expected %d fields for nb=%d, got %d"
                                 % (lineno, 2 * nb, nb, len(vals)))
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ValueError("line %d: inconsistent antenna count (%d fields, expected %d)"
                                 % (lineno, len(vals), width))
            if not all(math.isfinite(v) for v in vals):
                raise ValueError("line %d: non-finite value" % lineno)
            rows.append(vals)
    if not rows:
        raise ValueError("%s contains no CSI rows" % path)
    arr = np.asarray(rows)
    block = arr[:, 0::2] + 1j * arr[:, 1::2]
    size = group_size or block.shape[0]
    if size < 1:
        raise ValueError("group_size must be positive")
    n_groups = block.shape[0] // size
    if n_groups == 0:
        raise ValueError("fewer rows (%d) than group_size (%d)" % (block.shape[0], size))
    return [channel.to_real(block[g * size:(g + 1) * size]) for g in range(n_groups)]
