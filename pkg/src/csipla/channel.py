"""Synthetic Rician CSI with first-order Gauss-Markov time evolution.

Complex snapshot blocks are ``(n_snapshots, nb)`` complex arrays; the real
CSI matrices consumed by the preprocessors are ``(2 * n_snapshots, nb)``
arrays with real parts stacked above imaginary parts.
"""
from dataclasses import dataclass, field
import math

import numpy as np


@dataclass(frozen=True)
class RicianParams:
    k_factor: float
    nu: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        k = float(self.k_factor)
        if not math.isfinite(k) or k < 0:
            raise ValueError("k_factor must be finite and nonnegative, got %r" % self.k_factor)
        object.__setattr__(self, "nu", math.sqrt(k / (k + 1.0)))
        object.__setattr__(self, "sigma", math.sqrt(1.0 / (k + 1.0)))


def complex_gaussian(shape, rng):
    """Standard circularly-symmetric complex Gaussian samples, CN(0, 1)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def gen_rician(n_snapshots, nb, params, rng, return_scatter=False):
    """Draw ``nu + sigma * x`` with ``x ~ CN(0, 1)`` i.i.d. per entry."""
    if n_snapshots < 1 or nb < 1:
        raise ValueError("n_snapshots and nb must be positive")
    scatter = complex_gaussian((n_snapshots, nb), rng)
    block = rician(scatter, params)
    if return_scatter:
        return block, scatter
    return block


def rician(scatter, params):
    return params.nu + params.sigma * np.asarray(scatter)


def evolve_markov(scatter, beta, rng):
    """One step of ``x(t+1) = beta x(t) + sqrt(1 - beta^2) w``."""
    beta = float(beta)
    if not (0.0 <= beta <= 1.0):
        raise ValueError("beta must lie in [0, 1], got %r" % beta)
    scatter = np.asarray(scatter)
    if beta == 1.0:
        return scatter.copy()
    w = complex_gaussian(scatter.shape, rng)
    return beta * scatter + math.sqrt(1.0 - beta * beta) * w


def noise_variance(snr_db):
    return 10.0 ** (-float(snr_db) / 10.0)


def observe(block, snr_db, rng):
    """Add CN(0, 10^(-snr_db/10)) estimation noise; ``snr_db=inf`` is noiseless."""
    block = np.asarray(block)
    snr_db = float(snr_db)
    if math.isinf(snr_db) and snr_db > 0:
        return block.astype(complex, copy=True)
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite or +inf")
    return block + math.sqrt(noise_variance(snr_db)) * complex_gaussian(block.shape, rng)


def to_real(block):
    block = np.asarray(block)
    if block.ndim != 2:
        raise ValueError("expected a 2-D snapshot block")
    return np.vstack([block.real, block.imag]).astype(float)


def to_complex(h):
    """Inverse of :func:`to_real`."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] % 2:
        raise ValueError("CSI matrix must be 2-D with an even number of rows")
    n = h.shape[0] // 2
    return h[:n] + 1j * h[n:]


def pearson(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("shape mismatch: %r vs %r" % (a.shape, b.shape))
    da = a - a.mean()
    db = b - b.mean()
    na = math.sqrt(float(da @ da))
    nb = math.sqrt(float(db @ db))
    if na == 0.0 or nb == 0.0:
        raise ValueError("degenerate input: zero variance")
    return float(np.clip((da @ db) / (na * nb), -1.0, 1.0))
