"""PRG, PRF and random-oracle hash, all built from one SHA-256 instance.

Domain prefixes keep the three uses apart: 0x01 for the PRG counter mode,
0x02 for the PRF and 0x03 for the random oracle.
"""
from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

import numpy as np

from .f2core import BitVector

LAMBDA = 128

PRG_PREFIX = b"\x01"
PRF_PREFIX = b"\x02"
RO_PREFIX = b"\x03"

# algorithm-id -> (name, digest bytes)
HASH_ALGORITHMS = {1: ("sha256", 32)}
DEFAULT_HASH_ID = 1


def _hash(alg_id: int, data: bytes) -> bytes:
    try:
        name, _ = HASH_ALGORITHMS[alg_id]
    except KeyError:
        raise ValueError(f"unknown hash algorithm id {alg_id}") from None
    return hashlib.new(name, data).digest()


def _counter_stream(alg_id: int, prefix: bytes, key: bytes, out_bits: int,
                    suffix: bytes = b"") -> bytes:
    _, width = HASH_ALGORITHMS[alg_id]
    nbytes = (out_bits + 7) // 8
    blocks = []
    for i in range((nbytes + width - 1) // width):
        blocks.append(_hash(alg_id, prefix + key + i.to_bytes(8, "big") + suffix))
    return b"".join(blocks)[:nbytes]


def prg(seed: bytes, out_len: int, alg_id: int = DEFAULT_HASH_ID) -> BitVector:
    """Block i is H(0x01 || seed || i), i as 8-byte big-endian."""
    if out_len < 1:
        raise ValueError("out_len must be positive")
    stream = _counter_stream(alg_id, PRG_PREFIX, bytes(seed), out_len)
    return BitVector.from_bytes(stream, out_len)


@dataclass(frozen=True)
class PrfKey:
    key: bytes

    def __post_init__(self):
        if len(self.key) != 32:
            raise ValueError("PRF key must be exactly 32 bytes")

    @classmethod
    def generate(cls, rng: np.random.Generator) -> PrfKey:
        return cls(random_bytes(rng, 32))


def _split(stream: bytes, lam: int) -> tuple[bytes, bytes]:
    half = lam // 8
    return stream[:half], stream[half:2 * half]


def prf(key: PrfKey, data: bytes, lam: int = LAMBDA,
        alg_id: int = DEFAULT_HASH_ID) -> tuple[bytes, bytes]:
    """Keyed hash split into two lam-bit halves (R1, R2)."""
    if lam % 8:
        raise ValueError("lambda must be a multiple of 8")
    stream = _counter_stream(alg_id, PRF_PREFIX, key.key, 2 * lam, bytes(data))
    return _split(stream, lam)


@dataclass(frozen=True)
class RoHash:
    """A member of the hash family, fixed by a public salt."""

    alg_id: int = DEFAULT_HASH_ID
    out_bits: int = 2 * LAMBDA
    salt: bytes = field(default=b"\x00" * 32)

    def __post_init__(self):
        if self.alg_id not in HASH_ALGORITHMS:
            raise ValueError(f"unknown hash algorithm id {self.alg_id}")
        if len(self.salt) != 32:
            raise ValueError("salt must be 32 bytes")

    @classmethod
    def sample(cls, rng: np.random.Generator, lam: int = LAMBDA) -> RoHash:
        return cls(DEFAULT_HASH_ID, 2 * lam, random_bytes(rng, 32))


def ro_hash(h: RoHash, data: bytes, lam: int = LAMBDA) -> tuple[bytes, bytes]:
    if h.out_bits < 2 * lam:
        raise ValueError(f"oracle output {h.out_bits} bits is shorter than 2*lambda")
    if lam % 8:
        raise ValueError("lambda must be a multiple of 8")
    stream = _counter_stream(h.alg_id, RO_PREFIX, h.salt, h.out_bits, bytes(data))
    return _split(stream, lam)


def random_bytes(rng: np.random.Generator, nbytes: int) -> bytes:
    return rng.integers(0, 256, size=nbytes, dtype=np.uint8).tobytes()


def rng_from_seed(seed: bytes) -> np.random.Generator:
    """Deterministic numpy generator driven by a short seed.

    The seed is stretched with the PRG to 256 bits before being handed to
    SeedSequence, so lambda-bit randomness like R1 can drive encoders that
    consume far more than lambda random bits.
    """
    material = prg(bytes(seed), 256).to_bytes()
    words = np.frombuffer(material, dtype=">u4").astype(np.uint32)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words.tolist())))


def fresh_seed() -> int:
    return secrets.randbits(63)
