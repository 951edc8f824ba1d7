"""CSI preprocessing: PCA reconstruction, PCP and time-regularized PCP.

All three schemes are exposed twice: as plain functions operating on one
real CSI matrix (``pca_denoise``, ``rpca_pcp``, ``arpca``) and as
scikit-learn transformers (``PCADenoiser``, ``RobustPCA``,
``AdaptiveRobustPCA``) so they drop into pipelines and grid searches.

The ADMM solver for the time-regularized problem

    min ||L||_* + lam ||S||_1 + gamma ||L - beta L_prev||_F^2
    s.t. L + S = H

is shared by both robust variants; plain PCP is the ``gamma = 0`` case.
"""
from dataclasses import dataclass, field, replace
import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .channel import pearson
from .numkernel import soft_threshold, spectral_norm, svt

# slack on the dual-variable bound |Y|_inf <= lam, absorbs rounding in Y + mu * residual
DUAL_BOUND_SLACK = 1e-8
MU_MAX_FACTOR = 1e7


class DualBoundError(RuntimeError):
    """Raised when a multiplier iterate leaves the box [-lam, lam]."""


@dataclass(frozen=True)
class AdmmOptions:
    lam: float = None
    gamma: float = None
    rho: float = 1.5
    mu0: float = None
    mu_max: float = None
    tol: float = 1e-7
    max_iter: int = 500
    check_dual_bound: bool = True

    def __post_init__(self):
        if not self.rho > 1:
            raise ValueError("rho must exceed 1, got %r" % self.rho)
        if not self.tol > 0:
            raise ValueError("tol must be positive, got %r" % self.tol)
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lam must be positive, got %r" % self.lam)
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative, got %r" % self.gamma)
        if self.mu0 is not None and not self.mu0 > 0:
            raise ValueError("mu0 must be positive, got %r" % self.mu0)
        if self.mu0 is not None and self.mu_max is not None and self.mu_max < self.mu0:
            raise ValueError("mu_max must be at least mu0")

    def resolve(self, h, gamma_default=0.0):
        """Fill data-dependent defaults for the matrix ``h``."""
        lam = self.lam if self.lam is not None else 1.0 / math.sqrt(max(h.shape))
        gamma = self.gamma if self.gamma is not None else gamma_default
        mu0 = self.mu0
        if mu0 is None:
            smax = spectral_norm(h)
            mu0 = 3.0 / smax if smax > 0 else 1.0
        mu_max = self.mu_max if self.mu_max is not None else MU_MAX_FACTOR * mu0
        return replace(self, lam=lam, gamma=gamma, mu0=mu0, mu_max=max(mu_max, mu0))


@dataclass
class Decomposition:
    l: np.ndarray
    s: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    options: AdmmOptions
    residual_history: list = field(default_factory=list)
    dual_inf_norm_history: list = field(default_factory=list)
    mu_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    feasibility_sum: float = 0.0
    bounded: bool = True


def l_update(h, s, y, mu, gamma=0.0, beta=0.0, l_prev=None):
    """Closed-form L-step: SVT of the blended target at level 1/(mu + 2 gamma).

    Returns ``(L, T, shrunk_singular_values)``.
    """
    b = h - s + y / mu
    if l_prev is None:
        t = b
    else:
        # equals (mu B + 2 gamma beta L_prev) / (mu + 2 gamma), and is exactly B when gamma == 0
        t = b + (2.0 * gamma / (mu + 2.0 * gamma)) * (beta * l_prev - b)
    l, shrunk = svt(t, 1.0 / (mu + 2.0 * gamma), return_sigma=True)
    return l, t, shrunk


def s_update(h, l, y, mu, lam):
    return soft_threshold(h - l + y / mu, lam / mu)


def _solve(h, opts, l_prev=None, beta=0.0):
    nh = float(np.linalg.norm(h))
    lam, gamma, rho = opts.lam, opts.gamma, opts.rho
    if nh == 0.0:
        z = np.zeros_like(h)
        return Decomposition(l=z, s=z.copy(), iterations=1, final_residual=0.0,
                             converged=True, options=opts, residual_history=[0.0],
                             dual_inf_norm_history=[0.0], mu_history=[opts.mu0],
                             objective_history=[0.0])
    if l_prev is None:
        gamma = 0.0

    s = np.zeros_like(h)
    y = np.zeros_like(h)
    mu = opts.mu0
    res_hist, dual_hist, mu_hist, obj_hist = [], [], [], []
    feas = 0.0
    converged = False
    it = 0
    residual = math.inf
    l = np.zeros_like(h)
    while it < opts.max_iter:
        it += 1
        mu_hist.append(mu)
        l, _, shrunk = l_update(h, s, y, mu, gamma, beta, l_prev)
        s = s_update(h, l, y, mu, lam)
        p = h - l - s
        y = y + mu * p
        dual = float(np.abs(y).max())
        dual_hist.append(dual)
        if opts.check_dual_bound and dual > lam + DUAL_BOUND_SLACK:
            raise DualBoundError(
                "iteration %d: |Y|_inf = %.3e exceeds lambda = %.3e" % (it, dual, lam))
        pn = float(np.linalg.norm(p))
        feas += mu * pn * pn
        residual = pn / nh
        res_hist.append(residual)
        obj = float(shrunk.sum()) + lam * float(np.abs(s).sum())
        if gamma:
            obj += gamma * float(np.linalg.norm(l - beta * l_prev) ** 2)
        obj_hist.append(obj)
        mu = min(rho * mu, opts.mu_max)
        if residual < opts.tol:
            converged = True
            break

    # both L = H and S = H are feasible; iterates should never stray far above either
    feasible = lam * float(np.abs(h).sum())
    if gamma:
        feasible += gamma * float(np.linalg.norm(beta * l_prev) ** 2)
    bound = 2.0 * max(obj_hist[0], feasible) + 1e-12
    return Decomposition(l=l, s=s, iterations=it, final_residual=residual,
                         converged=converged, options=opts, residual_history=res_hist,
                         dual_inf_norm_history=dual_hist, mu_history=mu_hist,
                         objective_history=obj_hist, feasibility_sum=feas,
                         bounded=max(obj_hist) <= bound)


def _as_csi(h, name="h"):
    return check_array(h, dtype=np.float64, ensure_min_samples=1, input_name=name)


def rpca_pcp(h, opts=None):
    """Principal component pursuit by inexact ALM (ADMM).

    Non-convergence within ``max_iter`` is reported through
    ``Decomposition.converged`` rather than raised.
    """
    h = _as_csi(h)
    opts = (opts or AdmmOptions()).resolve(h, gamma_default=0.0)
    return _solve(h, opts)


def enrollment_decompose(h_t, opts=None):
    return rpca_pcp(h_t, opts)


def arpca(h_next, l_prev, beta_hat, opts=None):
    """Time-regularized PCP of ``h_next`` anchored to ``beta_hat * l_prev``.

    ``gamma`` defaults to ``beta_hat``.
    """
    h_next = _as_csi(h_next, "h_next")
    l_prev = _as_csi(l_prev, "l_prev")
    if h_next.shape != l_prev.shape:
        raise ValueError("shape mismatch: h_next %r vs l_prev %r" % (h_next.shape, l_prev.shape))
    beta_hat = float(beta_hat)
    if not abs(beta_hat) <= 1.0:
        raise ValueError("beta_hat must lie in [-1, 1], got %r" % beta_hat)
    opts = (opts or AdmmOptions()).resolve(h_next, gamma_default=max(beta_hat, 0.0))
    return _solve(h_next, opts, l_prev=l_prev, beta=beta_hat)


def estimate_beta(h_prev, h_next):
    """Pearson correlation of the raw observations, clamped to [0, 1]."""
    try:
        return min(max(pearson(h_prev, h_next), 0.0), 1.0)
    except ValueError:
        return 0.0


def pca_denoise(h, d):
    return PCADenoiser(n_components=d).fit_transform(h)


class PCADenoiser(TransformerMixin, BaseEstimator):
    """Projection onto the top principal axes of the column covariance.

    The column mean is removed before projection and added back after
    reconstruction so deterministic (line-of-sight) offsets survive.
    """

    def __init__(self, n_components=10):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = _as_csi(X, "X")
        d = self.n_components
        if not (isinstance(d, (int, np.integer)) and 1 <= d <= X.shape[1]):
            raise ValueError("n_components must be an integer in [1, %d], got %r"
                             % (X.shape[1], d))
        self.mean_ = X.mean(axis=0)
        xc = X - self.mean_
        cov = xc.T @ xc / max(X.shape[0] - 1, 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1][:d]
        self.components_ = evecs[:, order].T
        self.explained_variance_ = evals[order]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = _as_csi(X, "X")
        w = (X - self.mean_) @ self.components_.T
        return w @ self.components_ + self.mean_

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class RobustPCA(TransformerMixin, BaseEstimator):
    """Low-rank part of a PCP decomposition, computed per matrix."""

    def __init__(self, lam=None, rho=1.5, mu0=None, mu_max=None, tol=1e-7, max_iter=500):
        self.lam = lam
        self.rho = rho
        self.mu0 = mu0
        self.mu_max = mu_max
        self.tol = tol
        self.max_iter = max_iter

    def _options(self, gamma=None):
        return AdmmOptions(lam=self.lam, gamma=gamma, rho=self.rho, mu0=self.mu0,
                           mu_max=self.mu_max, tol=self.tol, max_iter=self.max_iter)

    def fit(self, X, y=None):
        dec = rpca_pcp(X, self._options())
        self.decomposition_ = dec
        self.low_rank_ = dec.l
        self.sparse_ = dec.s
        self.n_iter_ = dec.iterations
        self.n_features_in_ = dec.l.shape[1]
        return self

    def decompose(self, X):
        return rpca_pcp(X, self._options())

    def transform(self, X):
        return self.decompose(X).l

    def fit_transform(self, X, y=None):
        return self.fit(X).low_rank_


class AdaptiveRobustPCA(RobustPCA):
    """PCP at enrollment, time-regularized PCP at authentication.

    ``fit`` decomposes the enrollment matrix and keeps its low-rank part.
    ``transform`` decomposes a later observation of the same shape while
    pulling its low-rank part toward ``beta * low_rank_``. When ``beta``
    is None it is estimated as the clamped Pearson correlation between
    the raw enrollment and authentication matrices; ``gamma`` defaults to
    that same estimate.
    """

    def __init__(self, lam=None, rho=1.5, mu0=None, mu_max=None, tol=1e-7, max_iter=500,
                 gamma=None, beta=None):
        super().__init__(lam=lam, rho=rho, mu0=mu0, mu_max=mu_max, tol=tol,
                         max_iter=max_iter)
        self.gamma = gamma
        self.beta = beta

    def fit(self, X, y=None):
        super().fit(X)
        self.enrollment_ = _as_csi(X, "X").copy()
        return self

    def estimate_beta(self, X):
        check_is_fitted(self, "low_rank_")
        if self.beta is not None:
            return float(self.beta)
        return estimate_beta(self.enrollment_, _as_csi(X, "X"))

    def decompose(self, X):
        check_is_fitted(self, "low_rank_")
        beta_hat = self.estimate_beta(X)
        return arpca(X, self.low_rank_, beta_hat, self._options(gamma=self.gamma))
