"""Lloyd-Max scalar quantization with Gray-coded bit labels."""
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


@dataclass(frozen=True, eq=False)
class QuantizerSpec:
    n_bits: int
    thresholds: np.ndarray
    levels: np.ndarray
    gray_codes: np.ndarray
    mse_history: tuple = ()
    iterations: int = 0

    def index(self, x):
        """Cell index of every entry of ``x``; ties go to the lower cell."""
        return np.searchsorted(self.thresholds, np.asarray(x, dtype=float), side="left")

    def reconstruct(self, x):
        return self.levels[self.index(x)]

    def bits(self, x):
        """Row-major flattening of ``x`` mapped to concatenated Gray labels."""
        idx = self.index(np.asarray(x, dtype=float).ravel())
        return self.gray_codes[idx].reshape(-1)


def gray_encode(index, n_bits):
    """Reflected Gray code of ``index`` as an MSB-first bit array."""
    if n_bits < 1:
        raise ValueError("n_bits must be positive")
    if not 0 <= index < (1 << n_bits):
        raise ValueError("index %r out of range for %d bits" % (index, n_bits))
    g = index ^ (index >> 1)
    return np.array([(g >> (n_bits - 1 - j)) & 1 for j in range(n_bits)], dtype=np.uint8)


def gray_table(n_bits):
    return np.array([gray_encode(i, n_bits) for i in range(1 << n_bits)], dtype=np.uint8)


def _cells(x, levels):
    thresholds = 0.5 * (levels[1:] + levels[:-1])
    return thresholds, np.searchsorted(thresholds, x, side="left")


def _mse(x, levels):
    _, idx = _cells(x, levels)
    return float(np.mean((x - levels[idx]) ** 2))


def lloyd_max_design(samples, n_bits, max_iter=200, tol=1e-8, init_levels=None):
    """Design a ``2**n_bits``-level quantizer on an empirical distribution.

    Starts from evenly spaced sample quantiles (or ``init_levels``) and
    alternates nearest-neighbour thresholds and cell centroids until no
    level moves by more than ``tol``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValueError("samples must be a nonempty finite array")
    n_levels = 1 << n_bits
    if np.unique(x).size < n_levels:
        raise ValueError("degenerate input: need at least %d distinct sample values" % n_levels)

    if init_levels is None:
        probs = (np.arange(n_levels) + 0.5) / n_levels
        levels = np.quantile(x, probs)
        # quantiles can coincide on heavily repeated data
        if np.unique(levels).size < n_levels:
            levels = np.linspace(x[0], x[-1], n_levels)
    else:
        levels = np.sort(np.asarray(init_levels, dtype=float))
        if levels.size != n_levels:
            raise ValueError("init_levels must have %d entries" % n_levels)

    history = [_mse(x, levels)]
    it = 0
    for it in range(1, max_iter + 1):
        thresholds, idx = _cells(x, levels)
        sums = np.bincount(idx, weights=x, minlength=n_levels)
        counts = np.bincount(idx, minlength=n_levels)
        new = levels.copy()
        filled = counts > 0
        new[filled] = sums[filled] / counts[filled]
        shift = float(np.max(np.abs(new - levels)))
        levels = new
        history.append(_mse(x, levels))
        if shift < tol:
            break

    thresholds = 0.5 * (levels[1:] + levels[:-1])
    return QuantizerSpec(n_bits=n_bits, thresholds=thresholds, levels=levels,
                         gray_codes=gray_table(n_bits), mse_history=tuple(history),
                         iterations=it)


def quantize_to_blocks(l, spec, n_code):
    """Quantize, concatenate bit labels and cut into full ``n_code`` blocks.

    Returns an ``(n_blocks, n_code)`` uint8 array; trailing bits that do
    not fill a block are dropped.
    """
    bits = spec.bits(l)
    n_blocks = bits.size // n_code
    if n_blocks == 0:
        raise ValueError("insufficient data: %d bits for block length %d" % (bits.size, n_code))
    return bits[: n_blocks * n_code].reshape(n_blocks, n_code)


def bmr(a, b):
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError("length mismatch: %d vs %d" % (a.size, b.size))
    if a.size == 0:
        raise ValueError("empty bit vectors")
    return float(np.count_nonzero(a != b)) / a.size


class LloydMaxQuantizer(TransformerMixin, BaseEstimator):
    """Scalar quantizer fitted on all entries of the training matrix.

    ``transform`` returns the Gray-coded bit stream (row-major).
    """

    def __init__(self, n_bits=1, max_iter=200, tol=1e-8):
        self.n_bits = n_bits
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        self.spec_ = lloyd_max_design(X, self.n_bits, self.max_iter, self.tol)
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        return self.spec_.bits(X)

    def to_blocks(self, X, n_code):
        check_is_fitted(self, "spec_")
        return quantize_to_blocks(check_array(X, dtype=np.float64), self.spec_, n_code)
