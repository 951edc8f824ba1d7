"""Dense linear-algebra primitives used by the ADMM solvers."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def _check_finite(m):
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def svd(m):
    """Thin SVD with singular values in descending order.

    Returns ``SvdResult(u, sigma, v)`` such that ``m = u @ diag(sigma) @ v.T``.
    """
    m = _check_finite(m)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix, got shape %r" % (m.shape,))
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return SvdResult(u=u, sigma=s, v=vt.T)


def svt(m, tau, return_sigma=False):
    """Singular-value thresholding ``U max(S - tau, 0) V^T``.

    This is the proximal map of ``tau * ||X||_*``. With ``return_sigma``
    the shrunk singular values are returned as well.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative, got %r" % tau)
    r = svd(m)
    shrunk = np.maximum(r.sigma - tau, 0.0)
    keep = shrunk > 0
    out = (r.u[:, keep] * shrunk[keep]) @ r.v[:, keep].T
    if return_sigma:
        return out, shrunk
    return out


def soft_threshold(m, theta):
    """Entrywise ``sign(c) * max(|c| - theta, 0)``."""
    if theta < 0:
        raise ValueError("theta must be nonnegative, got %r" % theta)
    m = np.asarray(m, dtype=float)
    return np.sign(m) * np.maximum(np.abs(m) - theta, 0.0)


def norms(m):
    m = _check_finite(m)
    if m.size == 0:
        return {"frobenius": 0.0, "nuclear": 0.0, "l1": 0.0, "linf": 0.0}
    return {
        "frobenius": float(np.linalg.norm(m)),
        "nuclear": float(np.sum(svd(m).sigma)),
        "l1": float(np.abs(m).sum()),
        "linf": float(np.abs(m).max()),
    }


def spectral_norm(m):
    m = _check_finite(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))
