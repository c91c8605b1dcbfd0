"""Binary error-correcting codes with an honest worst-case radius.

Two families:
  * ``repetition(k, l)``: every message bit repeated l times.
  * ``rs_repetition(N, K, l)``: shortened Reed-Solomon over GF(256)
    (K data bytes, N - K parity bytes) whose output bits are each repeated
    l times. Inner majority ties become RS erasures.

Each spec reports ``alpha``: the largest fraction of bit flips that is
guaranteed to decode, however the flips are placed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import reedsolo

from .f2core import BitVector


@dataclass(frozen=True)
class EccSpec:
    name: str
    k: int
    n_out: int
    radius: int  # worst-case correctable bit flips
    family: str
    rs_n: int = 0
    rs_k: int = 0
    rep: int = 1

    def __post_init__(self):
        if not 0 < self.k <= self.n_out:
            raise ValueError("need 0 < k <= n_out")
        if not 0 <= self.radius < self.n_out / 2:
            raise ValueError("radius must stay below half the block length")

    @property
    def alpha(self) -> float:
        return self.radius / self.n_out

    @property
    def supports_erasures(self) -> bool:
        return self.family == "rsrep"


def repetition(k: int, rep: int) -> EccSpec:
    if k < 1 or rep < 1:
        raise ValueError("k and rep must be positive")
    return EccSpec(f"rep:k={k}:l={rep}", k, k * rep, (rep - 1) // 2, "rep", rep=rep)


def _rsrep_radius(parity: int, rep: int) -> int:
    """Fewest flips that can exceed 2*errors + erasures <= parity, minus one.

    With odd rep a byte needs (rep+1)/2 flips in one bit position to turn
    into an error. With even rep, rep/2 flips give a tie (an erasure) and
    rep/2 + 1 give an error.
    """
    units = parity + 1
    if rep % 2:
        cost_err, cost_era = (rep + 1) // 2, None
    else:
        cost_err, cost_era = rep // 2 + 1, rep // 2
    best = None
    for errors in range(units // 2 + 2):
        erasures = max(0, units - 2 * errors)
        if erasures and cost_era is None:
            continue
        cost = errors * cost_err + erasures * (cost_era or 0)
        best = cost if best is None else min(best, cost)
    return best - 1


def rs_repetition(rs_n: int, rs_k: int, rep: int = 1) -> EccSpec:
    if not 0 < rs_k < rs_n <= 255:
        raise ValueError("need 0 < K < N <= 255")
    if rep < 1:
        raise ValueError("rep must be positive")
    radius = _rsrep_radius(rs_n - rs_k, rep)
    return EccSpec(f"rsrep:N={rs_n}:K={rs_k}:l={rep}", 8 * rs_k, 8 * rs_n * rep,
                   radius, "rsrep", rs_n, rs_k, rep)


def from_name(name: str) -> EccSpec:
    m = re.fullmatch(r"rep:k=(\d+):l=(\d+)", name)
    if m:
        return repetition(int(m[1]), int(m[2]))
    m = re.fullmatch(r"rsrep:N=(\d+):K=(\d+):l=(\d+)", name)
    if m:
        return rs_repetition(int(m[1]), int(m[2]), int(m[3]))
    raise ValueError(f"unknown ECC spec {name!r}")


_codecs: dict[int, reedsolo.RSCodec] = {}


def _codec(parity: int) -> reedsolo.RSCodec:
    if parity not in _codecs:
        _codecs[parity] = reedsolo.RSCodec(parity)
    return _codecs[parity]


def ecc_encode(spec: EccSpec, m: BitVector) -> BitVector:
    if m.n != spec.k:
        raise ValueError(f"message has {m.n} bits, spec expects {spec.k}")
    if spec.family == "rep":
        return BitVector.from_bits(np.repeat(m.to_bits(), spec.rep))
    data = m.to_bytes()
    cw = bytes(_codec(spec.rs_n - spec.rs_k).encode(data))
    bits = np.unpackbits(np.frombuffer(cw, dtype=np.uint8), bitorder="little")
    return BitVector.from_bits(np.repeat(bits, spec.rep))


def _majority(bits: np.ndarray, erased: np.ndarray | None, rep: int):
    """Per-group majority over rep copies, ignoring erased copies.

    Returns (value, tie) arrays; tie marks groups with no strict majority.
    """
    ones = bits.reshape(-1, rep).astype(np.int64)
    live = np.ones_like(ones)
    if erased is not None:
        live = 1 - erased.reshape(-1, rep).astype(np.int64)
        ones = ones * live
    n1 = ones.sum(axis=1)
    n0 = live.sum(axis=1) - n1
    return (n1 > n0).astype(np.uint8), n1 == n0


def ecc_decode(spec: EccSpec, x: BitVector,
               erasures: np.ndarray | None = None) -> BitVector | None:
    """Decode x, or None on failure.

    ``erasures`` optionally marks input bits whose value is unknown.
    """
    if x.n != spec.n_out:
        raise ValueError(f"word has {x.n} bits, spec expects {spec.n_out}")
    bits = x.to_bits()
    if erasures is not None:
        erasures = np.asarray(erasures, dtype=bool).reshape(-1)
        if erasures.shape[0] != spec.n_out:
            raise ValueError("erasure mask length mismatch")
    value, tie = _majority(bits, erasures, spec.rep)
    if spec.family == "rep":
        if tie.any():
            return None
        return BitVector.from_bits(value)
    # bits -> bytes; a byte with any tied bit is an RS erasure
    byte_vals = np.packbits(value, bitorder="little")
    byte_erased = tie.reshape(-1, 8).any(axis=1)
    erase_pos = np.flatnonzero(byte_erased).tolist()
    if len(erase_pos) > spec.rs_n - spec.rs_k:
        return None
    try:
        msg = _codec(spec.rs_n - spec.rs_k).decode(bytearray(byte_vals.tobytes()),
                                                   erase_pos=erase_pos or None)[0]
    except reedsolo.ReedSolomonError:
        return None
    return BitVector.from_bytes(bytes(msg), spec.k)
