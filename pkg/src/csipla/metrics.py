"""Hypothesis test on reconciled outputs and ROC / EER summaries.

Conventions: ``eta`` is the Hamming distance between the reconciled
vectors and the user is accepted (H0) iff ``eta <= eta_th``. P_FA is the
fraction of H0 trials rejected, P_D the fraction of H1 trials rejected.
"""
from dataclasses import dataclass

import numpy as np

H0 = "H0"
H1 = "H1"


@dataclass(frozen=True)
class TrialRecord:
    hypothesis: str
    eta: int
    k_bits: int
    crc_pass: bool

    def __post_init__(self):
        if self.hypothesis not in (H0, H1):
            raise ValueError("hypothesis must be 'H0' or 'H1'")
        if not 0 <= self.eta <= self.k_bits:
            raise ValueError("eta must lie in [0, k_bits]")


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    p_fa: np.ndarray
    p_d: np.ndarray

    @property
    def points(self):
        return list(zip(self.p_fa.tolist(), self.p_d.tolist()))


def decide(eta, eta_th):
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return H0 if eta <= eta_th else H1


def roc(h0_etas, h1_etas, k):
    """Operating points for every integer threshold ``-1..k``.

    Threshold ``-1`` rejects everything and supplies the (1, 1) corner.
    Points come back with ``p_fa`` strictly ascending; where several
    thresholds share a P_FA only the one with the highest P_D is kept.
    """
    h0 = np.asarray(h0_etas)
    h1 = np.asarray(h1_etas)
    if h0.size == 0 or h1.size == 0:
        raise ValueError("both hypotheses need at least one sample")
    th = np.arange(-1, k + 1)
    p_fa = np.array([np.mean(h0 > t) for t in th])
    p_d = np.array([np.mean(h1 > t) for t in th])
    order = np.lexsort((p_d, p_fa))
    th, p_fa, p_d = th[order], p_fa[order], p_d[order]
    # one point per distinct P_FA, keeping the best P_D
    last = np.append(p_fa[1:] != p_fa[:-1], True)
    return RocCurve(thresholds=th[last], p_fa=p_fa[last], p_d=p_d[last])


def pd_at_pfa(curve, pfa_target):
    """Best P_D among operating points with P_FA <= target (no interpolation)."""
    ok = curve.p_fa <= pfa_target + 1e-12
    if not np.any(ok):
        return float(curve.p_d[0])
    return float(np.max(curve.p_d[ok]))


def eer(curve):
    """Equal error rate: where P_FA meets the miss rate 1 - P_D.

    Located between the bracketing operating points by linear
    interpolation.
    """
    diff = curve.p_fa - (1.0 - curve.p_d)
    zero = np.flatnonzero(diff == 0)
    if zero.size:
        return float(curve.p_fa[zero[0]])
    for j in range(diff.size - 1):
        if diff[j] * diff[j + 1] < 0:
            w = diff[j] / (diff[j] - diff[j + 1])
            return float(curve.p_fa[j] + w * (curve.p_fa[j + 1] - curve.p_fa[j]))
    # no sign change: crossing sits beyond the sampled points
    j = int(np.argmin(np.abs(diff)))
    return float(0.5 * (curve.p_fa[j] + 1.0 - curve.p_d[j]))


def post_recon_error(records, hypothesis):
    sel = [r for r in records if r.hypothesis == hypothesis]
    if not sel:
        raise ValueError("no records for hypothesis %s" % hypothesis)
    return float(np.mean([r.eta / r.k_bits for r in sel]))
