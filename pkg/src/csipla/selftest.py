"""Fast invariant checks runnable without pytest (``csipla selftest``)."""
import itertools

import numpy as np

from . import polar
from .numkernel import svt
from .preprocess import AdmmOptions, arpca, rpca_pcp
from .reconcile import authenticate, enroll


def _svt_nonexpansive(rng):
    for _ in range(20):
        a, b = rng.standard_normal((2, 6, 5))
        tau = rng.uniform(0.1, 2)
        if np.linalg.norm(svt(a, tau) - svt(b, tau)) > np.linalg.norm(a - b) + 1e-12:
            return False
    return True


def _pcp_recovery(rng):
    l0 = rng.standard_normal((60, 3)) @ rng.standard_normal((3, 60))
    s0 = np.zeros_like(l0)
    mask = rng.random(l0.shape) < 0.05
    s0[mask] = rng.choice([-5.0, 5.0], mask.sum())
    dec = rpca_pcp(l0 + s0)
    return dec.converged and np.linalg.norm(dec.l - l0) / np.linalg.norm(l0) < 1e-4


def _gamma_zero(rng):
    h = rng.standard_normal((16, 8))
    a = rpca_pcp(h)
    b = arpca(h, rng.standard_normal((16, 8)), 0.7, AdmmOptions(gamma=0.0))
    return np.array_equal(a.l, b.l) and np.array_equal(a.s, b.s)


def _involution(rng):
    u = rng.integers(0, 2, (200, 128), dtype=np.uint8)
    return np.array_equal(polar.polar_transform(polar.polar_transform(u)), u)


def _reconcile_identity(rng):
    spec = polar.construct(8, 2, crc_len=1, crc_poly=0x1, list_size=4)
    for q in itertools.product([0, 1], repeat=8):
        r1, side = enroll(q, spec)
        r, ok = authenticate(q, side, spec, 0.05)
        if not (ok and np.array_equal(r, r1)):
            return False
    return True


CHECKS = {
    "svt nonexpansive": _svt_nonexpansive,
    "pcp exact recovery": _pcp_recovery,
    "arpca(gamma=0) == pcp": _gamma_zero,
    "polar transform involution": _involution,
    "reconciliation identity N=8": _reconcile_identity,
}


def run_selftest(seed=0):
    ok = True
    for name, check in CHECKS.items():
        passed = bool(check(np.random.default_rng(seed)))
        ok &= passed
        print("%-32s %s" % (name, "PASS" if passed else "FAIL"))
    return ok
