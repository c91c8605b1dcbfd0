"""Zero-bit and single-bit pseudorandom codes from sparse parity checks.

A key is a random t-row-sparse H, a generator G whose columns lie in
ker H, and a one-time pad z. Codewords are G u + z + e with e of fixed
weight; decoding counts the checks of H violated by x + z.

Decoders return ``None`` for the reject symbol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .f2core import (BitVector, DenseMatrix, SparseParityMatrix, kernel_basis,
                     sample_fixed_weight_batch, sample_kernel_matrix)
from .primitives import LAMBDA

_DENOM_LIMIT = 10**9


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(_DENOM_LIMIT)


def round_even(x: float) -> int:
    """Nearest even integer, never below 2."""
    return max(2, 2 * round(x / 2))


@dataclass(frozen=True)
class SchemeParams:
    n: int
    d: int
    t: int
    r: int
    eta: Fraction
    zeta: Fraction
    delta: Fraction
    lam: int = LAMBDA

    def __post_init__(self):
        for name in ("eta", "zeta", "delta"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.n < 2 or self.r < 1 or self.d < 0:
            raise ValueError("need n >= 2, r >= 1, d >= 0")
        if self.t % 2 or self.t < 2:
            raise ValueError(f"t must be even and at least 2, got {self.t}")
        if self.t * self.t > self.n / 2:
            raise ValueError(f"t={self.t} exceeds sqrt(n/2) for n={self.n}")
        if self.c <= 0:
            raise ValueError(f"d={self.d} is not below t*log2(n)/2")
        if not (0 <= self.eta < Fraction(1, 2) and 0 <= self.zeta < Fraction(1, 2)):
            raise ValueError("eta and zeta must lie in [0, 1/2)")
        if self.delta < 0 or self.eta + self.delta >= Fraction(1, 2):
            raise ValueError("need 0 <= eta + delta < 1/2")
        if self.lam % 8 or self.lam <= 0:
            raise ValueError("lambda must be a positive multiple of 8")

    @property
    def c(self) -> float:
        """Slack in d <= (1/2 - c) t log2 n."""
        return 0.5 - self.d / (self.t * math.log2(self.n))

    @property
    def noise_weight(self) -> int:
        return math.floor(self.eta * self.n)

    @property
    def threshold(self) -> Fraction:
        """Decode accepts iff wt(H(x + z)) < threshold."""
        return (Fraction(1, 2) - self.zeta) * self.r

    @property
    def flip_budget(self) -> int:
        return math.floor(self.delta * self.n)


def derive_params_zero_bit(n: int, r: int, delta: float, lam: int = LAMBDA) -> SchemeParams:
    if not 0 < delta < 0.5:
        raise ValueError("zero-bit parameters need 0 < delta < 1/2")
    if r < 16:
        raise ValueError("r must be at least 16")
    delta = as_fraction(delta)
    t_raw = math.log2(4 * r ** -0.25) / math.log2(0.5 - float(delta))
    t = round_even(t_raw)
    d = math.ceil(t * math.log2(n) / 3)
    zeta = as_fraction(r ** -0.25)
    eta = Fraction(1, 4) - delta / 2
    return SchemeParams(n, d, t, r, eta, zeta, delta, lam)


class SingleBitDerivation(NamedTuple):
    params: SchemeParams
    delta_prime: float
    epsilon: float


def derive_single_bit(n: int, r: int, delta: float, lam: int = LAMBDA) -> SingleBitDerivation:
    if not 0 < delta < 0.25:
        raise ValueError("single-bit parameters need 0 < delta < 1/4")
    delta = as_fraction(delta)
    t = round_even(math.log2(r) / 5)
    delta_prime = math.log2(1 / (0.25 + float(delta))) - 1
    epsilon = min(t * delta_prime / (4 * math.log2(n)), 1 / 17)
    d = math.ceil(epsilon * t * math.log2(n))
    zeta = as_fraction(1.5 * r ** -0.2)
    eta = Fraction(1, 8) - delta / 2
    return SingleBitDerivation(SchemeParams(n, d, t, r, eta, zeta, delta, lam),
                               delta_prime, epsilon)


def derive_params_single_bit(n: int, r: int, delta: float, lam: int = LAMBDA) -> SchemeParams:
    return derive_single_bit(n, r, delta, lam).params


@dataclass(frozen=True, eq=False)
class LdpcPair:
    H: SparseParityMatrix
    G: DenseMatrix


def sample_ldpc(params: SchemeParams, rng: np.random.Generator,
                require_full_rank: bool = False, max_tries: int = 100) -> LdpcPair:
    """H uniform over t-row-sparse matrices, G uniform over (ker H)^d.

    With require_full_rank, H is resampled until dim ker H >= d and G is
    redrawn until its columns are independent.
    """
    for _ in range(max_tries):
        H = SparseParityMatrix.random(params.n, params.r, params.t, rng)
        basis = kernel_basis(H)
        if require_full_rank and basis.d < params.d:
            continue
        for _ in range(max_tries):
            G = sample_kernel_matrix(H, params.d, rng, basis)
            if not require_full_rank or G.rank() == params.d:
                return LdpcPair(H, G)
    raise RuntimeError("could not sample a full-rank LDPC pair")


# zero-bit

@dataclass(frozen=True, eq=False)
class ZeroBitPublicKey:
    params: SchemeParams
    G: DenseMatrix
    z: BitVector


@dataclass(frozen=True, eq=False)
class ZeroBitSecretKey:
    params: SchemeParams
    H: SparseParityMatrix
    z: BitVector


@dataclass(frozen=True, eq=False)
class ZeroBitKeys:
    sk: ZeroBitSecretKey
    pk: ZeroBitPublicKey


def keygen_zero_bit(params: SchemeParams, rng: np.random.Generator) -> ZeroBitKeys:
    pair = sample_ldpc(params, rng)
    z = BitVector.random(params.n, rng)
    return ZeroBitKeys(ZeroBitSecretKey(params, pair.H, z), ZeroBitPublicKey(params, pair.G, z))


class EncodeTrace(NamedTuple):
    x: BitVector
    u: BitVector
    e: BitVector


def _encode_zero_bit_batch(pk: ZeroBitPublicKey, count: int, rng: np.random.Generator):
    p = pk.params
    u = rng.integers(0, 2, size=(count, p.d), dtype=np.uint8)
    e = sample_fixed_weight_batch(count, p.n, p.noise_weight, rng)
    x = pk.G.mul_vec_bits(u) ^ pk.z.to_bits()[None, :] ^ e
    return x, u, e


def encode_zero_bit_traced(pk: ZeroBitPublicKey, rng: np.random.Generator) -> EncodeTrace:
    """Test hook: also returns the encoder's u and e."""
    x, u, e = _encode_zero_bit_batch(pk, 1, rng)
    return EncodeTrace(BitVector.from_bits(x[0]), BitVector.from_bits(u[0]), BitVector.from_bits(e[0]))


def encode_zero_bit(pk: ZeroBitPublicKey, rng: np.random.Generator) -> BitVector:
    return encode_zero_bit_traced(pk, rng).x


def encode_zero_bit_many(pk: ZeroBitPublicKey, count: int, rng: np.random.Generator) -> np.ndarray:
    return _encode_zero_bit_batch(pk, count, rng)[0]


def syndrome_weights(H: SparseParityMatrix, z: BitVector, x_bits: np.ndarray) -> np.ndarray:
    """wt(H(x + z)) for each row of x_bits."""
    y = np.asarray(x_bits, dtype=np.uint8) ^ z.to_bits()
    return H.syndrome_bits(y).sum(axis=-1)


def _compare(weights: np.ndarray, params: SchemeParams) -> np.ndarray:
    """Sign of wt - (1/2 - zeta) r per entry, in exact arithmetic."""
    thr = params.threshold
    w = np.asarray(weights, dtype=np.int64)
    if params.r * thr.denominator < 2**62 and abs(thr.numerator) < 2**62:
        return np.sign(w * thr.denominator - thr.numerator)
    return np.array([(int(v) * thr.denominator > thr.numerator) - (int(v) * thr.denominator < thr.numerator)
                     for v in w.reshape(-1)]).reshape(w.shape)


def _fires(weights: np.ndarray, params: SchemeParams) -> np.ndarray:
    return _compare(weights, params) < 0


def decode_zero_bit_many(sk: ZeroBitSecretKey, x_bits: np.ndarray) -> np.ndarray:
    """Boolean array: True where the decoder outputs 1."""
    x_bits = np.atleast_2d(x_bits)
    if x_bits.shape[-1] != sk.params.n:
        raise ValueError("codeword length mismatch")
    return _fires(syndrome_weights(sk.H, sk.z, x_bits), sk.params)


def decode_zero_bit(sk: ZeroBitSecretKey, x: BitVector) -> int | None:
    if x.n != sk.params.n:
        raise ValueError(f"expected length {sk.params.n}, got {x.n}")
    return 1 if decode_zero_bit_many(sk, x.to_bits()[None, :])[0] else None


# single-bit

@dataclass(frozen=True, eq=False)
class SingleBitPublicKey:
    params: SchemeParams
    G0: DenseMatrix
    G1: DenseMatrix
    z: BitVector

    def G(self, m: int) -> DenseMatrix:
        return self.G1 if m else self.G0


@dataclass(frozen=True, eq=False)
class SingleBitSecretKey:
    params: SchemeParams
    H0: SparseParityMatrix
    H1: SparseParityMatrix
    z: BitVector

    def H(self, m: int) -> SparseParityMatrix:
        return self.H1 if m else self.H0


@dataclass(frozen=True, eq=False)
class SingleBitKeys:
    sk: SingleBitSecretKey
    pk: SingleBitPublicKey


def keygen_single_bit(params: SchemeParams, rng: np.random.Generator) -> SingleBitKeys:
    a = sample_ldpc(params, rng, require_full_rank=True)
    b = sample_ldpc(params, rng, require_full_rank=True)
    z = BitVector.random(params.n, rng)
    return SingleBitKeys(SingleBitSecretKey(params, a.H, b.H, z),
                         SingleBitPublicKey(params, a.G, b.G, z))


def _nonzero_u(count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 0:
        raise ValueError("single-bit encoding needs d >= 1")
    u = rng.integers(0, 2, size=(count, d), dtype=np.uint8)
    bad = ~u.any(axis=1)
    while bad.any():
        u[bad] = rng.integers(0, 2, size=(int(bad.sum()), d), dtype=np.uint8)
        bad = ~u.any(axis=1)
    return u


def _encode_single_bit_batch(pk: SingleBitPublicKey, bits: np.ndarray, rng: np.random.Generator):
    p = pk.params
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size and bits.max() > 1:
        raise ValueError("messages must be bits")
    count = bits.shape[0]
    u = _nonzero_u(count, p.d, rng)
    e = sample_fixed_weight_batch(count, p.n, p.noise_weight, rng)
    gu = np.where(bits[:, None] == 1, pk.G1.mul_vec_bits(u), pk.G0.mul_vec_bits(u))
    x = gu.astype(np.uint8) ^ pk.z.to_bits()[None, :] ^ e
    return x, u, e


def encode_single_bit_many(pk: SingleBitPublicKey, bits: np.ndarray,
                           rng: np.random.Generator) -> np.ndarray:
    """One codeword row per message bit, as a (len(bits), n) uint8 array."""
    return _encode_single_bit_batch(pk, bits, rng)[0]


def encode_single_bit_traced(pk: SingleBitPublicKey, m: int, rng: np.random.Generator) -> EncodeTrace:
    """Test hook: also returns the encoder's u and e."""
    if m not in (0, 1):
        raise ValueError("message must be 0 or 1")
    x, u, e = _encode_single_bit_batch(pk, np.array([m]), rng)
    return EncodeTrace(BitVector.from_bits(x[0]), BitVector.from_bits(u[0]), BitVector.from_bits(e[0]))


def encode_single_bit(pk: SingleBitPublicKey, m: int, rng: np.random.Generator) -> BitVector:
    return encode_single_bit_traced(pk, m, rng).x


BOT = -1


def decode_single_bit_many(sk: SingleBitSecretKey, x_bits: np.ndarray) -> np.ndarray:
    """Per-row decode: 0, 1, or BOT (-1)."""
    x_bits = np.atleast_2d(x_bits)
    if x_bits.shape[-1] != sk.params.n:
        raise ValueError("codeword length mismatch")
    s0 = _compare(syndrome_weights(sk.H0, sk.z, x_bits), sk.params)
    s1 = _compare(syndrome_weights(sk.H1, sk.z, x_bits), sk.params)
    # m needs its own detector strictly below and the other strictly above
    out = np.full(x_bits.shape[0], BOT, dtype=np.int8)
    out[(s0 < 0) & (s1 > 0)] = 0
    out[(s1 < 0) & (s0 > 0)] = 1
    return out


def decode_single_bit(sk: SingleBitSecretKey, x: BitVector) -> int | None:
    if x.n != sk.params.n:
        raise ValueError(f"expected length {sk.params.n}, got {x.n}")
    out = int(decode_single_bit_many(sk, x.to_bits()[None, :])[0])
    return None if out == BOT else out
