"""Multi-bit transforms built on the single-bit scheme.

sk-rate    lam inner encodings of the bits of a fresh seed r, then
           PRG(r) xor Enc(m), all scattered by a secret permutation.
pk-rate    inner encodings of the bits of Enc1(r), then PRG(r) xor Enc2(m);
           both halves have the same length.
sharp      re-encryption check on top of sk-rate, randomness from a PRF.
cca        the same check on top of pk-rate, randomness from a hash.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .ecc import EccSpec, ecc_decode, ecc_encode
from .f2core import BitVector, Permutation
from .ldpc import (BOT, SchemeParams, SingleBitKeys, SingleBitPublicKey,
                   SingleBitSecretKey, decode_single_bit_many,
                   encode_single_bit_many, keygen_single_bit)
from .primitives import (PrfKey, RoHash, prf, prg, random_bytes, ro_hash,
                         rng_from_seed)


def _bits_of(data: bytes, nbits: int) -> np.ndarray:
    return BitVector.from_bytes(data, nbits).to_bits()


def pack_seed_message(r: bytes, m: BitVector) -> bytes:
    """Byte encoding of r||m used as PRF / hash input."""
    return bytes(r) + m.n.to_bytes(4, "big") + m.to_bytes()


# secret-key rate boost

@dataclass(frozen=True, eq=False)
class MultiBitSkKeys:
    inner: SingleBitKeys
    pi: Permutation
    ecc: EccSpec
    delta: Fraction

    def __post_init__(self):
        if self.pi.n != self.length:
            raise ValueError(f"permutation covers {self.pi.n} positions, need {self.length}")
        if not 0 <= self.delta <= self.max_delta:
            raise ValueError(f"delta {self.delta} exceeds min(alpha, beta) = {float(self.max_delta):.4f}")

    @property
    def lam(self) -> int:
        return self.inner.sk.params.lam

    @property
    def block_len(self) -> int:
        return self.inner.sk.params.n

    @property
    def length(self) -> int:
        return self.lam * self.block_len + self.ecc.n_out

    @property
    def message_bits(self) -> int:
        return self.ecc.k

    @property
    def max_delta(self) -> Fraction:
        return min(self.inner.sk.params.delta, Fraction(self.ecc.radius, self.ecc.n_out))


def keygen_sk_rate(inner_params: SchemeParams, ecc: EccSpec, rng: np.random.Generator,
                   delta: Fraction | float | None = None) -> MultiBitSkKeys:
    inner = keygen_single_bit(inner_params, rng)
    length = inner_params.lam * inner_params.n + ecc.n_out
    pi = Permutation.random(length, rng)
    beta = min(inner_params.delta, Fraction(ecc.radius, ecc.n_out))
    delta = beta if delta is None else Fraction(delta).limit_denominator(10**9)
    return MultiBitSkKeys(inner, pi, ecc, delta)


class SkRateTrace(NamedTuple):
    x: BitVector
    r: bytes
    unpermuted: BitVector


def sk_rate_encode_traced(sk: MultiBitSkKeys, m: BitVector, rng: np.random.Generator) -> SkRateTrace:
    """Test hook: also exposes the seed r and the pre-permutation word."""
    if m.n != sk.message_bits:
        raise ValueError(f"message has {m.n} bits, scheme expects {sk.message_bits}")
    lam = sk.lam
    r = random_bytes(rng, lam // 8)
    blocks = encode_single_bit_many(sk.inner.pk, _bits_of(r, lam), rng)
    tail = prg(r, sk.ecc.n_out) ^ ecc_encode(sk.ecc, m)
    word = np.concatenate([blocks.reshape(-1), tail.to_bits()])
    return SkRateTrace(BitVector.from_bits(word[sk.pi.map]), r, BitVector.from_bits(word))


def sk_rate_encode(sk: MultiBitSkKeys, m: BitVector, rng: np.random.Generator) -> BitVector:
    return sk_rate_encode_traced(sk, m, rng).x


def sk_rate_decode(sk: MultiBitSkKeys, c: BitVector) -> BitVector | None:
    if c.n != sk.length:
        raise ValueError(f"codeword has {c.n} bits, scheme expects {sk.length}")
    word = np.empty(sk.length, dtype=np.uint8)
    word[sk.pi.map] = c.to_bits()
    split = sk.lam * sk.block_len
    y = decode_single_bit_many(sk.inner.sk, word[:split].reshape(sk.lam, sk.block_len))
    y = np.where(y == BOT, 0, y).astype(np.uint8)  # reject -> 0
    seed = np.packbits(y, bitorder="little").tobytes()
    masked = BitVector.from_bits(word[split:]) ^ prg(seed, sk.ecc.n_out)
    return ecc_decode(sk.ecc, masked)


# public-key rate boost

@dataclass(frozen=True, eq=False)
class MultiBitPkPublicKey:
    inner: SingleBitPublicKey
    ecc1: EccSpec
    ecc2: EccSpec

    @property
    def lam(self) -> int:
        return self.inner.params.lam

    @property
    def blocks(self) -> int:
        return self.ecc1.n_out

    @property
    def half(self) -> int:
        return self.blocks * self.inner.params.n

    @property
    def length(self) -> int:
        return 2 * self.half

    @property
    def message_bits(self) -> int:
        return self.ecc2.k

    @property
    def radius(self) -> Fraction:
        """alpha * beta / 2."""
        alpha = min(Fraction(self.ecc1.radius, self.ecc1.n_out),
                    Fraction(self.ecc2.radius, self.ecc2.n_out))
        return alpha * self.inner.params.delta / 2


@dataclass(frozen=True, eq=False)
class MultiBitPkSecretKey:
    inner: SingleBitSecretKey
    ecc1: EccSpec
    ecc2: EccSpec


@dataclass(frozen=True, eq=False)
class MultiBitPkKeys:
    pk: MultiBitPkPublicKey
    sk: MultiBitPkSecretKey


def _check_pk_shapes(inner_params: SchemeParams, ecc1: EccSpec, ecc2: EccSpec) -> None:
    if ecc1.k != inner_params.lam:
        raise ValueError(f"ECC1 must take lambda={inner_params.lam} bits, takes {ecc1.k}")
    if ecc2.n_out != ecc1.n_out * inner_params.n:
        raise ValueError("ECC2 output must match the length of the inner-block half")


def keygen_pk_rate(inner_params: SchemeParams, ecc1: EccSpec, ecc2: EccSpec,
                   rng: np.random.Generator) -> MultiBitPkKeys:
    _check_pk_shapes(inner_params, ecc1, ecc2)
    inner = keygen_single_bit(inner_params, rng)
    return MultiBitPkKeys(MultiBitPkPublicKey(inner.pk, ecc1, ecc2),
                          MultiBitPkSecretKey(inner.sk, ecc1, ecc2))


class PkRateTrace(NamedTuple):
    x: BitVector
    r: bytes


def pk_rate_encode_traced(pk: MultiBitPkPublicKey, m: BitVector,
                          rng: np.random.Generator) -> PkRateTrace:
    if m.n != pk.message_bits:
        raise ValueError(f"message has {m.n} bits, scheme expects {pk.message_bits}")
    lam = pk.lam
    r = random_bytes(rng, lam // 8)
    r_prime = ecc_encode(pk.ecc1, BitVector.from_bytes(r, lam))
    # one inner block per bit of Enc1(r)
    blocks = encode_single_bit_many(pk.inner, r_prime.to_bits(), rng)
    tail = prg(r, pk.ecc2.n_out) ^ ecc_encode(pk.ecc2, m)
    return PkRateTrace(BitVector.from_bits(np.concatenate([blocks.reshape(-1), tail.to_bits()])), r)


def pk_rate_encode(pk: MultiBitPkPublicKey, m: BitVector, rng: np.random.Generator) -> BitVector:
    return pk_rate_encode_traced(pk, m, rng).x


def pk_rate_decode(sk: MultiBitPkSecretKey, c: BitVector) -> BitVector | None:
    n_in = sk.inner.params.n
    blocks = sk.ecc1.n_out
    half = blocks * n_in
    if c.n != 2 * half:
        raise ValueError(f"codeword has {c.n} bits, scheme expects {2 * half}")
    bits = c.to_bits()
    s = decode_single_bit_many(sk.inner, bits[:half].reshape(blocks, n_in))
    erased = s == BOT
    s_bits = BitVector.from_bits(np.where(erased, 0, s).astype(np.uint8))
    r_vec = ecc_decode(sk.ecc1, s_bits, erasures=erased if sk.ecc1.supports_erasures else None)
    if r_vec is None:
        return None
    r = r_vec.to_bytes()
    return ecc_decode(sk.ecc2, BitVector.from_bits(bits[half:]) ^ prg(r, sk.ecc2.n_out))


# sharp transform

@dataclass(frozen=True, eq=False)
class SharpKeys:
    prf_key: PrfKey
    inner: MultiBitSkKeys

    @property
    def delta(self) -> Fraction:
        return self.inner.delta

    @property
    def lam(self) -> int:
        return self.inner.lam

    @property
    def length(self) -> int:
        return self.inner.length

    @property
    def message_bits(self) -> int:
        return self.inner.message_bits - 2 * self.lam

    @property
    def flip_budget(self) -> int:
        return math.floor(self.delta * self.length)


def keygen_sharp(inner_params: SchemeParams, ecc: EccSpec, rng: np.random.Generator,
                 delta: Fraction | float | None = None) -> SharpKeys:
    inner = keygen_sk_rate(inner_params, ecc, rng, delta)
    if inner.message_bits <= 2 * inner_params.lam:
        raise ValueError("inner message space must exceed 2*lambda bits")
    return SharpKeys(PrfKey.generate(rng), inner)


def _frame(lam: int, r: bytes, m: BitVector, r2: bytes) -> BitVector:
    return BitVector.from_bits(np.concatenate([_bits_of(r, lam), m.to_bits(), _bits_of(r2, lam)]))


def _unframe(lam: int, word: BitVector) -> tuple[bytes, BitVector, bytes]:
    bits = word.to_bits()
    r = np.packbits(bits[:lam], bitorder="little").tobytes()
    m = BitVector.from_bits(bits[lam:word.n - lam])
    r2 = np.packbits(bits[word.n - lam:], bitorder="little").tobytes()
    return r, m, r2


def sharp_encode_fixed(sk: SharpKeys, m: BitVector, r: bytes, r2_flip: int | None = None) -> BitVector:
    """Test hook: encode with a chosen seed r, optionally flipping one tag bit."""
    if m.n != sk.message_bits:
        raise ValueError(f"message has {m.n} bits, scheme expects {sk.message_bits}")
    r1, r2 = prf(sk.prf_key, pack_seed_message(r, m), sk.lam)
    if r2_flip is not None:
        r2 = bytearray(r2)
        r2[r2_flip // 8] ^= 1 << (r2_flip % 8)
        r2 = bytes(r2)
    return sk_rate_encode(sk.inner, _frame(sk.lam, r, m, r2), rng_from_seed(r1))


def sharp_encode(sk: SharpKeys, m: BitVector, rng: np.random.Generator) -> BitVector:
    if m.n != sk.message_bits:
        raise ValueError(f"message has {m.n} bits, scheme expects {sk.message_bits}")
    return sharp_encode_fixed(sk, m, random_bytes(rng, sk.lam // 8))


class CheckedDecode(NamedTuple):
    """Outcome of a re-encryption-checked decode, for auditing."""
    message: BitVector | None
    inner_ok: bool
    tag_ok: bool
    distance: int | None


def _checked_decode(inner_word: BitVector | None, lam: int, c: BitVector, budget: int,
                    derive: Callable[[bytes], tuple[bytes, bytes]],
                    reencode: Callable[[BitVector, bytes], BitVector]) -> CheckedDecode:
    if inner_word is None:
        return CheckedDecode(None, False, False, None)
    r, m, r2 = _unframe(lam, inner_word)
    r1, r2_check = derive(pack_seed_message(r, m))
    if r2_check != r2:
        return CheckedDecode(None, True, False, None)
    canon = reencode(inner_word, r1)
    dist = (canon ^ c).weight()
    return CheckedDecode(m if dist <= budget else None, True, True, dist)


def sharp_decode_traced(sk: SharpKeys, c: BitVector) -> CheckedDecode:
    return _checked_decode(sk_rate_decode(sk.inner, c), sk.lam, c, sk.flip_budget,
                           lambda data: prf(sk.prf_key, data, sk.lam),
                           lambda word, r1: sk_rate_encode(sk.inner, word, rng_from_seed(r1)))


def sharp_decode(sk: SharpKeys, c: BitVector) -> BitVector | None:
    return sharp_decode_traced(sk, c).message


# CCA transform

@dataclass(frozen=True, eq=False)
class CcaPublicKey:
    inner: MultiBitPkPublicKey
    ro: RoHash

    @property
    def lam(self) -> int:
        return self.inner.lam

    @property
    def length(self) -> int:
        return self.inner.length

    @property
    def message_bits(self) -> int:
        return self.inner.message_bits - 2 * self.lam

    @property
    def delta(self) -> Fraction:
        return self.inner.radius

    @property
    def flip_budget(self) -> int:
        return math.floor(self.delta * self.length)


@dataclass(frozen=True, eq=False)
class CcaKeys:
    """Decoding needs the public key as well, for the re-encryption check."""
    ro: RoHash
    inner_pk: MultiBitPkPublicKey
    inner_sk: MultiBitPkSecretKey

    @property
    def pk(self) -> CcaPublicKey:
        return CcaPublicKey(self.inner_pk, self.ro)

    @property
    def delta(self) -> Fraction:
        return self.inner_pk.radius


def keygen_cca(inner_params: SchemeParams, ecc1: EccSpec, ecc2: EccSpec,
               rng: np.random.Generator) -> CcaKeys:
    inner = keygen_pk_rate(inner_params, ecc1, ecc2, rng)
    if inner.pk.message_bits <= 2 * inner_params.lam:
        raise ValueError("inner message space must exceed 2*lambda bits")
    return CcaKeys(RoHash.sample(rng, inner_params.lam), inner.pk, inner.sk)


def cca_encode_fixed(pk: CcaPublicKey, m: BitVector, r: bytes,
                     oracle: Callable[[bytes], tuple[bytes, bytes]] | None = None) -> BitVector:
    """Encode with chosen seed r. ``oracle`` replaces the hash (for query logging)."""
    if m.n != pk.message_bits:
        raise ValueError(f"message has {m.n} bits, scheme expects {pk.message_bits}")
    h = oracle or (lambda data: ro_hash(pk.ro, data, pk.lam))
    r1, r2 = h(pack_seed_message(r, m))
    return pk_rate_encode(pk.inner, _frame(pk.lam, r, m, r2), rng_from_seed(r1))


def cca_encode(pk: CcaPublicKey, m: BitVector, rng: np.random.Generator) -> BitVector:
    return cca_encode_fixed(pk, m, random_bytes(rng, pk.lam // 8))


def cca_decode_traced(keys: CcaKeys, c: BitVector) -> CheckedDecode:
    pk = keys.pk
    return _checked_decode(pk_rate_decode(keys.inner_sk, c), pk.lam, c, pk.flip_budget,
                           lambda data: ro_hash(pk.ro, data, pk.lam),
                           lambda word, r1: pk_rate_encode(pk.inner, word, rng_from_seed(r1)))


def cca_decode(keys: CcaKeys, c: BitVector) -> BitVector | None:
    return cca_decode_traced(keys, c).message


class AltDecoder:
    """Decoding without the secret key, from the hash-query log and the
    codewords the encoding oracle has issued.

    Re-encodings of logged queries are cached, so repeated calls only pay for
    new log entries.
    """

    def __init__(self, pk: CcaPublicKey):
        self.pk = pk
        self._cache: dict[tuple[bytes, bytes], BitVector] = {}

    def candidate(self, m: BitVector, r: bytes) -> BitVector:
        key = (bytes(r), m.n.to_bytes(4, "big") + m.to_bytes())
        if key not in self._cache:
            self._cache[key] = cca_encode_fixed(self.pk, m, r)
        return self._cache[key]

    def __call__(self, c: BitVector, ro_query_log: Sequence[tuple[BitVector, bytes]],
                 issued: Sequence[tuple[BitVector, BitVector]],
                 rng: np.random.Generator) -> BitVector | None:
        budget = self.pk.flip_budget
        matches = []
        for m, r in ro_query_log:
            if m.n != self.pk.message_bits or len(r) != self.pk.lam // 8:
                continue
            if (self.candidate(m, r) ^ c).weight() <= budget:
                matches.append(m)
        for m, cw in issued:
            if cw.n == c.n and (cw ^ c).weight() <= budget:
                matches.append(m)
        if not matches:
            return None
        return matches[int(rng.integers(len(matches)))]


def alt_decode(pk: CcaPublicKey, c: BitVector, ro_query_log: Sequence[tuple[BitVector, bytes]],
               issued: Sequence[tuple[BitVector, BitVector]],
               rng: np.random.Generator) -> BitVector | None:
    return AltDecoder(pk)(c, ro_query_log, issued, rng)
