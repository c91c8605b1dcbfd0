"""Uniform wrappers so games and the CLI can drive every scheme the same way.

Messages are always BitVectors. The zero-bit scheme has the single message
``1`` (a length-1 vector); the single-bit scheme takes length-1 vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from . import ldpc, transforms
from .ecc import EccSpec
from .f2core import BitVector
from .ldpc import SchemeParams

ONE = BitVector.from_bits([1])


class Scheme:
    name: str = ""
    scheme_id: int = -1
    public_key_scheme: bool = False

    def keygen(self, rng: np.random.Generator) -> Any:
        raise NotImplementedError

    def public(self, keys: Any) -> Any:
        raise TypeError(f"{self.name} has no public key")

    def length(self, keys: Any) -> int:
        raise NotImplementedError

    def message_bits(self, keys: Any) -> int:
        raise NotImplementedError

    def delta(self, keys: Any) -> Fraction:
        raise NotImplementedError

    def encode(self, keys: Any, m: BitVector, rng: np.random.Generator) -> BitVector:
        raise NotImplementedError

    def encode_public(self, pk: Any, m: BitVector, rng: np.random.Generator) -> BitVector:
        raise TypeError(f"{self.name} cannot encode with a public key")

    def decode(self, keys: Any, x: BitVector) -> BitVector | None:
        raise NotImplementedError

    def flip_budget(self, keys: Any) -> int:
        return int(self.delta(keys) * self.length(keys))

    def random_message(self, keys: Any, rng: np.random.Generator) -> BitVector:
        return BitVector.random(self.message_bits(keys), rng)


@dataclass
class ZeroBitScheme(Scheme):
    params: SchemeParams
    name = "zero-bit"
    scheme_id = 0
    public_key_scheme = True

    def keygen(self, rng):
        return ldpc.keygen_zero_bit(self.params, rng)

    def public(self, keys):
        return keys.pk

    def length(self, keys):
        return self.params.n

    def message_bits(self, keys):
        return 1

    def delta(self, keys):
        return self.params.delta

    def random_message(self, keys, rng):
        return ONE

    def encode_public(self, pk, m, rng):
        if m != ONE:
            raise ValueError("the zero-bit scheme only encodes the message 1")
        return ldpc.encode_zero_bit(pk, rng)

    def encode(self, keys, m, rng):
        return self.encode_public(keys.pk, m, rng)

    def decode(self, keys, x):
        return ONE if ldpc.decode_zero_bit(keys.sk, x) == 1 else None


@dataclass
class SingleBitScheme(Scheme):
    params: SchemeParams
    name = "single-bit"
    scheme_id = 1
    public_key_scheme = True

    def keygen(self, rng):
        return ldpc.keygen_single_bit(self.params, rng)

    def public(self, keys):
        return keys.pk

    def length(self, keys):
        return self.params.n

    def message_bits(self, keys):
        return 1

    def delta(self, keys):
        return self.params.delta

    def encode_public(self, pk, m, rng):
        if m.n != 1:
            raise ValueError("single-bit messages have length 1")
        return ldpc.encode_single_bit(pk, m[0], rng)

    def encode(self, keys, m, rng):
        return self.encode_public(keys.pk, m, rng)

    def decode(self, keys, x):
        out = ldpc.decode_single_bit(keys.sk, x)
        return None if out is None else BitVector.from_bits([out])


@dataclass
class SkRateScheme(Scheme):
    inner_params: SchemeParams
    ecc: EccSpec
    delta_override: Fraction | None = None
    name = "sk-rate"
    scheme_id = 2

    def keygen(self, rng):
        return transforms.keygen_sk_rate(self.inner_params, self.ecc, rng, self.delta_override)

    def length(self, keys):
        return keys.length

    def message_bits(self, keys):
        return keys.message_bits

    def delta(self, keys):
        return keys.delta

    def encode(self, keys, m, rng):
        return transforms.sk_rate_encode(keys, m, rng)

    def decode(self, keys, x):
        return transforms.sk_rate_decode(keys, x)


@dataclass
class PkRateScheme(Scheme):
    inner_params: SchemeParams
    ecc1: EccSpec
    ecc2: EccSpec
    name = "pk-rate"
    scheme_id = 3
    public_key_scheme = True

    def keygen(self, rng):
        return transforms.keygen_pk_rate(self.inner_params, self.ecc1, self.ecc2, rng)

    def public(self, keys):
        return keys.pk

    def length(self, keys):
        return keys.pk.length

    def message_bits(self, keys):
        return keys.pk.message_bits

    def delta(self, keys):
        return keys.pk.radius

    def encode_public(self, pk, m, rng):
        return transforms.pk_rate_encode(pk, m, rng)

    def encode(self, keys, m, rng):
        return self.encode_public(keys.pk, m, rng)

    def decode(self, keys, x):
        return transforms.pk_rate_decode(keys.sk, x)


@dataclass
class SharpScheme(Scheme):
    inner_params: SchemeParams
    ecc: EccSpec
    delta_override: Fraction | None = None
    name = "sharp"
    scheme_id = 4

    def keygen(self, rng):
        return transforms.keygen_sharp(self.inner_params, self.ecc, rng, self.delta_override)

    def length(self, keys):
        return keys.length

    def message_bits(self, keys):
        return keys.message_bits

    def delta(self, keys):
        return keys.delta

    def encode(self, keys, m, rng):
        return transforms.sharp_encode(keys, m, rng)

    def decode(self, keys, x):
        return transforms.sharp_decode(keys, x)


@dataclass
class CcaScheme(Scheme):
    inner_params: SchemeParams
    ecc1: EccSpec
    ecc2: EccSpec
    name = "cca"
    scheme_id = 5
    public_key_scheme = True

    def keygen(self, rng):
        return transforms.keygen_cca(self.inner_params, self.ecc1, self.ecc2, rng)

    def public(self, keys):
        return keys.pk

    def length(self, keys):
        return keys.pk.length

    def message_bits(self, keys):
        return keys.pk.message_bits

    def delta(self, keys):
        return keys.delta

    def encode_public(self, pk, m, rng):
        return transforms.cca_encode(pk, m, rng)

    def encode(self, keys, m, rng):
        return self.encode_public(keys.pk, m, rng)

    def decode(self, keys, x):
        return transforms.cca_decode(keys, x)


SCHEME_NAMES = {0: "zero-bit", 1: "single-bit", 2: "sk-rate", 3: "pk-rate", 4: "sharp", 5: "cca"}
