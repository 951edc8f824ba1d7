"""Slepian-Wolf reconciliation of quantized CSI blocks over polar codes.

At enrollment the block ``q1`` is mapped through the (self-inverse) polar
transform to ``u``; the frozen part of ``u`` and a CRC over its unfrozen
part are published as side information, and the unfrozen part is kept as
the reference ``r1``. At authentication a fresh block is decoded against
that side information and the decoded unfrozen bits are compared with
``r1``.
"""
from dataclasses import dataclass
import math
import struct

import numpy as np

from .polar import crc_compute, llr_from_bsc, polar_transform, scl_decode

P_MIN = 0.01
P_MAX = 0.49


@dataclass(frozen=True, eq=False)
class SideInfo:
    frozen_values: np.ndarray
    crc: np.ndarray
    spec_id: int = 0

    @property
    def n_bits(self):
        return int(self.frozen_values.size + self.crc.size)

    def to_bytes(self):
        """``>HH`` header (N - K, m) followed by the packed bits, MSB first."""
        payload = np.concatenate([self.frozen_values, self.crc]).astype(np.uint8)
        header = struct.pack(">HH", self.frozen_values.size, self.crc.size)
        return header + np.packbits(payload, bitorder="big").tobytes()

    @classmethod
    def from_bytes(cls, data, spec_id=0):
        if len(data) < 4:
            raise ValueError("side information too short")
        n_frozen, m = struct.unpack(">HH", data[:4])
        need = math.ceil((n_frozen + m) / 8)
        if len(data) - 4 != need:
            raise ValueError("expected %d payload bytes, got %d" % (need, len(data) - 4))
        bits = np.unpackbits(np.frombuffer(data[4:], dtype=np.uint8), bitorder="big")
        return cls(frozen_values=bits[:n_frozen].copy(), crc=bits[n_frozen:n_frozen + m].copy(),
                   spec_id=spec_id)


@dataclass(frozen=True)
class ReconOutcome:
    r_enroll: np.ndarray
    r_auth: np.ndarray
    crc_pass: bool
    eta: int


def _block(q, n_code):
    q = np.asarray(q, dtype=np.uint8).ravel()
    if q.size != n_code:
        raise ValueError("block length %d does not match code length %d" % (q.size, n_code))
    if np.any(q > 1):
        raise ValueError("blocks must contain only 0/1")
    return q


def enroll(q1, spec):
    """Return ``(r1, side)`` for the enrollment block ``q1``."""
    q1 = _block(q1, spec.n_code)
    u = polar_transform(q1)
    r1 = u[spec.info_set].copy()
    side = SideInfo(frozen_values=u[spec.frozen_set].copy(),
                    crc=crc_compute(r1, spec.crc_poly, spec.crc_len), spec_id=id(spec))
    return r1, side


def reassemble(r, frozen_values, spec):
    u = np.zeros(spec.n_code, dtype=np.uint8)
    u[spec.info_set] = r
    u[spec.frozen_set] = frozen_values
    return u


def authenticate(qu, side, spec, p_channel):
    """Decode ``qu`` against ``side``; returns ``(r_auth, crc_pass)``."""
    qu = _block(qu, spec.n_code)
    if side.frozen_values.size != spec.n_code - spec.k_unfrozen or side.crc.size != spec.crc_len:
        raise ValueError("side information does not match the polar spec")
    llr = llr_from_bsc(qu, p_channel)
    target = side.crc if spec.crc_len else None
    res = scl_decode(llr, spec, side.frozen_values, target)
    return res.bits, res.crc_pass


def hamming(a, b):
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    return int(np.count_nonzero(a != b))


def reconcile(q1, qu, spec, p_channel):
    """Enroll ``q1``, authenticate ``qu`` and compare the two outputs."""
    r1, side = enroll(q1, spec)
    r_auth, ok = authenticate(qu, side, spec, p_channel)
    return ReconOutcome(r_enroll=r1, r_auth=r_auth, crc_pass=ok, eta=hamming(r1, r_auth))


def estimate_crossover(beta_hat, snr_db):
    """Sign-mismatch probability of two correlated noisy Gaussians, clamped."""
    ratio = float(beta_hat) / (1.0 + 10.0 ** (-float(snr_db) / 10.0))
    p = math.acos(min(max(ratio, -1.0), 1.0)) / math.pi
    return min(max(p, P_MIN), P_MAX)
