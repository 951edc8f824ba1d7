"""Polar codes: Gaussian-approximation construction and CRC-aided SCL decoding.

Conventions used throughout the module:

* the transform is ``x = u F^{(x)n}`` over GF(2) with ``F = [[1, 0], [1, 1]]``
  and no bit-reversal permutation, so ``polar_transform`` is an involution;
* bit-channel ``i`` is decoded ``i``-th by successive cancellation, and its
  GA mean is obtained by reading the binary expansion of ``i`` MSB first,
  0 selecting the check-node ("minus") and 1 the variable-node ("plus")
  branch;
* LLRs are ``log P(y|0) / P(y|1)``; path metrics are the accumulated
  ``log(1 + exp(-(1 - 2u) llr))`` penalties, so smaller is more likely.
"""
from dataclasses import dataclass
import math

import numpy as np

PHI_SPLIT = 10.0
PHI_FLOOR = 1e-300
# input LLRs are clipped here so that +-inf channel observations stay finite in f/g
LLR_CLIP = 1e6
DEFAULT_CRC_POLY = 0x07


def phi(mu):
    """Empirical GA check-node function, clamped to ``[1e-300, 1]``."""
    mu = float(mu)
    if mu < 0 or math.isnan(mu):
        raise ValueError("phi is defined for mu >= 0, got %r" % mu)
    if mu <= PHI_SPLIT:
        val = math.exp(-0.4527 * mu ** 0.86 + 0.0218)
    else:
        val = math.sqrt(math.pi / mu) * (1.0 - 10.0 / mu) * math.exp(-mu / 4.0)
    return min(max(val, PHI_FLOOR), 1.0)


def _phi_branch1(mu):
    return min(math.exp(-0.4527 * mu ** 0.86 + 0.0218), 1.0)


def _log_surrogate(mu):
    # log of exp(-mu/4) sqrt(pi/mu): monotone stand-in for the large-mu branch
    return -mu / 4.0 + 0.5 * math.log(math.pi / mu)


def phi_monotone(mu):
    """Forward map matching :func:`phi_inv` (surrogate above ``mu = 10``)."""
    mu = float(mu)
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if mu <= PHI_SPLIT:
        return _phi_branch1(mu)
    return max(math.exp(_log_surrogate(mu)), PHI_FLOOR)


def _bisect(fn, lo, hi, target, iters=200):
    # fn decreasing on [lo, hi], fn(lo) >= target >= fn(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def phi_inv(y):
    y = float(y)
    if not (0.0 < y <= 1.0):
        raise ValueError("phi_inv is defined on (0, 1], got %r" % y)
    if y >= 1.0:
        return 0.0
    if y >= _phi_branch1(PHI_SPLIT):
        return _bisect(_phi_branch1, 0.0, PHI_SPLIT, y)
    target = math.log(y)
    hi = 2 * PHI_SPLIT
    while _log_surrogate(hi) > target:
        hi *= 2.0
    return _bisect(_log_surrogate, PHI_SPLIT, hi, target)


def ga_split(mu):
    """GA means of the (bad, good) channels synthesized from a mean-``mu`` pair."""
    p = phi_monotone(mu)
    # 1 - (1 - p)^2 written without cancellation
    y = max(min(p * (2.0 - p), 1.0), PHI_FLOOR)
    return phi_inv(y), 2.0 * mu


def ga_reliabilities(n_code, mu0):
    _check_pow2(n_code)
    if not mu0 > 0:
        raise ValueError("mu0 must be positive")
    mus = [float(mu0)]
    for _ in range(int(math.log2(n_code))):
        nxt = []
        for m in mus:
            nxt.extend(ga_split(m))
        mus = nxt
    return np.array(mus)


def _check_pow2(n):
    if n < 1 or n & (n - 1):
        raise ValueError("length must be a power of two, got %r" % n)


def polar_transform(u):
    u = np.asarray(u, dtype=np.uint8)
    n = u.shape[-1]
    _check_pow2(n)
    x = u.copy()
    step = 1
    while step < n:
        view = x.reshape(x.shape[:-1] + (n // (2 * step), 2, step))
        view[..., 0, :] ^= view[..., 1, :]
        step *= 2
    return x


def crc_compute(bits, poly=DEFAULT_CRC_POLY, m=8):
    """CRC remainder of ``bits(x) * x^m`` modulo ``x^m + poly(x)``.

    ``poly`` is given without its leading ``x^m`` term (0x07 for
    ``x^8 + x^2 + x + 1``). Zero initial register, no final XOR.
    """
    if m < 1:
        return np.zeros(0, dtype=np.uint8)
    if poly >> m:
        raise ValueError("poly must have degree below m")
    top = 1 << (m - 1)
    mask = (1 << m) - 1
    reg = 0
    for b in np.asarray(bits, dtype=np.uint8).ravel():
        fb = ((reg & top) != 0) ^ bool(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return np.array([(reg >> (m - 1 - j)) & 1 for j in range(m)], dtype=np.uint8)


def llr_from_bsc(bits, p):
    if not (0.0 < p < 0.5):
        raise ValueError("crossover probability must lie in (0, 0.5), got %r" % p)
    bits = np.asarray(bits)
    return (1.0 - 2.0 * bits) * math.log((1.0 - p) / p)


@dataclass(frozen=True, eq=False)
class PolarSpec:
    n_code: int
    k_unfrozen: int
    reliabilities: np.ndarray
    frozen_set: np.ndarray
    info_set: np.ndarray
    crc_len: int = 8
    crc_poly: int = DEFAULT_CRC_POLY
    list_size: int = 8
    mu0: float = 20.0

    @property
    def frozen_mask(self):
        mask = np.zeros(self.n_code, dtype=bool)
        mask[self.frozen_set] = True
        return mask


def construct(n_code, k_unfrozen, crc_len=8, crc_poly=DEFAULT_CRC_POLY, list_size=8,
              design_snr_db=10.0, mu0=None):
    """Build a :class:`PolarSpec` by GA at ``mu0 = 2 / sigma^2``.

    ``sigma^2`` is the noise variance ``10^(-design_snr_db / 10)`` unless
    ``mu0`` is given directly.
    """
    _check_pow2(n_code)
    if not (crc_len <= k_unfrozen <= n_code) or k_unfrozen < 1:
        raise ValueError("need max(1, crc_len) <= k_unfrozen <= n_code")
    if list_size < 1:
        raise ValueError("list_size must be positive")
    if mu0 is None:
        mu0 = 2.0 / (10.0 ** (-float(design_snr_db) / 10.0))
    rel = ga_reliabilities(n_code, mu0)
    # ascending reliability, lower index first on ties
    order = np.lexsort((np.arange(n_code), rel))
    frozen = np.sort(order[: n_code - k_unfrozen])
    info = np.sort(order[n_code - k_unfrozen:])
    return PolarSpec(n_code=n_code, k_unfrozen=k_unfrozen, reliabilities=rel,
                     frozen_set=frozen, info_set=info, crc_len=crc_len, crc_poly=crc_poly,
                     list_size=list_size, mu0=float(mu0))


def _f(a, b):
    # LLR of the XOR of two bits with LLRs a, b
    return np.logaddexp(0.0, a + b) - np.logaddexp(a, b)


def _g(a, b, u):
    return b + (1.0 - 2.0 * u) * a


def _penalty(llr, bit):
    return np.logaddexp(0.0, -(1.0 - 2.0 * bit) * llr)


@dataclass
class DecodeResult:
    bits: np.ndarray
    crc_pass: bool
    path_metric: float
    u: np.ndarray
    list_metrics: np.ndarray


def scl_decode(llr, spec, frozen_values, crc_target=None, list_size=None):
    """Successive-cancellation list decoding with optional CRC selection.

    Frozen positions are forced to ``frozen_values``. Each surviving path
    is split at every unfrozen position and the ``list_size`` paths with
    the smallest metric are kept. With ``crc_target`` the most likely final
    path whose unfrozen bits have that CRC is returned; otherwise, or if no
    path matches, the most likely path is returned with ``crc_pass=False``.
    """
    n_code = spec.n_code
    llr = np.asarray(llr, dtype=float)
    frozen_values = np.asarray(frozen_values, dtype=np.uint8)
    if llr.shape != (n_code,):
        raise ValueError("expected %d LLRs, got shape %r" % (n_code, llr.shape))
    if frozen_values.shape != (n_code - spec.k_unfrozen,):
        raise ValueError("expected %d frozen values, got %d"
                         % (n_code - spec.k_unfrozen, frozen_values.size))
    if np.any(np.isnan(llr)):
        raise ValueError("LLRs must not be NaN")
    if crc_target is not None and len(crc_target) != spec.crc_len:
        raise ValueError("crc_target must have %d bits" % spec.crc_len)
    lmax = spec.list_size if list_size is None else list_size

    n = int(math.log2(n_code))
    fixed = np.full(n_code, -1, dtype=np.int8)
    fixed[spec.frozen_set] = frozen_values

    # alpha[d]: LLRs of the active node at depth d (length 2^(n-d)), one row per path
    alpha = [np.clip(llr, -LLR_CLIP, LLR_CLIP)[None, :]]
    alpha += [np.zeros((1, 1 << (n - d))) for d in range(1, n + 1)]
    # left[d]: re-encoded bits of the left child at depth d, kept until its sibling is done
    left = [np.zeros((1, 1 << (n - d)), dtype=np.uint8) for d in range(n + 1)]
    u = np.zeros((1, n_code), dtype=np.uint8)
    pm = np.zeros(1)

    for i in range(n_code):
        if i == 0:
            start = 1
        else:
            tz = (i & -i).bit_length() - 1
            start = n - tz
            half = alpha[start - 1].shape[1] // 2
            a = alpha[start - 1]
            alpha[start] = _g(a[:, :half], a[:, half:], left[start])
            start += 1
        for d in range(start, n + 1):
            a = alpha[d - 1]
            half = a.shape[1] // 2
            alpha[d] = _f(a[:, :half], a[:, half:])
        leaf = alpha[n][:, 0]

        if fixed[i] >= 0:
            bit = int(fixed[i])
            pm = pm + _penalty(leaf, bit)
            u[:, i] = bit
            dec = np.full(pm.shape, bit, dtype=np.uint8)
        else:
            cand = np.stack([pm + _penalty(leaf, 0), pm + _penalty(leaf, 1)], axis=1).ravel()
            keep = np.argsort(cand, kind="stable")[: min(lmax, cand.size)]
            parent = keep // 2
            dec = (keep % 2).astype(np.uint8)
            pm = cand[keep]
            alpha = [a[parent] for a in alpha]
            left = [b[parent] for b in left]
            u = u[parent]
            u[:, i] = dec

        # propagate the decided bit up while the current node is a right child
        bits = dec[:, None]
        d = n
        idx = i
        while idx & 1:
            bits = np.concatenate([left[d] ^ bits, bits], axis=1)
            d -= 1
            idx >>= 1
        if d > 0:
            left[d] = bits

    order = np.argsort(pm, kind="stable")
    pm = pm[order]
    u = u[order]
    info = u[:, spec.info_set]
    choice = 0
    crc_pass = False
    if crc_target is not None:
        target = np.asarray(crc_target, dtype=np.uint8)
        for j in range(info.shape[0]):
            if np.array_equal(crc_compute(info[j], spec.crc_poly, spec.crc_len), target):
                choice = j
                crc_pass = True
                break
    return DecodeResult(bits=info[choice].copy(), crc_pass=crc_pass,
                        path_metric=float(pm[choice]), u=u[choice].copy(), list_metrics=pm)


def sc_decode(llr, frozen_mask, frozen_values):
    """Plain recursive successive-cancellation decoder (hard decisions).

    Independent of :func:`scl_decode`; returns the full estimate of ``u``.
    """
    llr = np.clip(np.asarray(llr, dtype=float), -LLR_CLIP, LLR_CLIP)
    frozen_mask = np.asarray(frozen_mask, dtype=bool)
    fixed = np.zeros(llr.size, dtype=np.uint8)
    fixed[frozen_mask] = np.asarray(frozen_values, dtype=np.uint8)

    def boxplus(a, b):
        s = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        return s + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))

    def rec(lv, offset):
        size = lv.size
        if size == 1:
            if frozen_mask[offset]:
                b = fixed[offset]
            else:
                b = np.uint8(0 if lv[0] >= 0 else 1)
            return np.array([b], dtype=np.uint8), np.array([b], dtype=np.uint8)
        h = size // 2
        u_left, x_left = rec(boxplus(lv[:h], lv[h:]), offset)
        u_right, x_right = rec(lv[h:] + (1.0 - 2.0 * x_left) * lv[:h], offset + h)
        return np.concatenate([u_left, u_right]), np.concatenate([x_left ^ x_right, x_right])

    return rec(llr, 0)[0]
