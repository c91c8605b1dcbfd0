"""Byte formats for key and codeword files.

Key file:  "PRCK" | version u8 | scheme id u8 | hash id u8 | params | kind u8 | payload
  params:  n, d, t, r as u64 BE; eta, zeta, delta as (u32 num, u32 den) BE; lambda u16 BE
  kind:    0 = secret, 1 = public

Secret files of public-key schemes carry the public payload first, then the
secret part, so one file suffices to both encode and decode. Sparse rows are
written as sorted u32 BE column indices, dense columns and z as packed bytes
(bit i of a vector is bit i % 8 of byte i // 8).

Codeword file: "PRCW" | n u64 BE | packed bits, pad bits zero.
"""
from __future__ import annotations

import dataclasses
import struct
from fractions import Fraction
from typing import Any

import numpy as np

from . import ldpc, transforms
from .ecc import EccSpec, from_name
from .f2core import BitVector, DenseMatrix, Permutation, SparseParityMatrix
from .ldpc import SchemeParams
from .primitives import DEFAULT_HASH_ID, HASH_ALGORITHMS, PrfKey, RoHash

KEY_MAGIC = b"PRCK"
CODEWORD_MAGIC = b"PRCW"
VERSION = 1
SECRET, PUBLIC = 0, 1

SCHEME_IDS = {"zero-bit": 0, "single-bit": 1, "sk-rate": 2, "pk-rate": 3, "sharp": 4, "cca": 5}
PUBLIC_KEY_SCHEMES = {0, 1, 3, 5}


class CorruptFile(ValueError):
    """Bytes that do not parse as the declared format."""


@dataclasses.dataclass(frozen=True, eq=False)
class KeyFile:
    scheme_id: int
    kind: int
    params: SchemeParams
    key: Any  # full keys for SECRET, public key object for PUBLIC
    hash_id: int = DEFAULT_HASH_ID


# writer / reader

class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v: int) -> None:
        self.parts.append(struct.pack(">B", v))

    def u16(self, v: int) -> None:
        self.parts.append(struct.pack(">H", v))

    def u32(self, v: int) -> None:
        self.parts.append(struct.pack(">I", v))

    def u64(self, v: int) -> None:
        self.parts.append(struct.pack(">Q", v))

    def raw(self, b: bytes) -> None:
        self.parts.append(bytes(b))

    def frac(self, f: Fraction) -> None:
        if f < 0 or f.numerator >= 2**32 or f.denominator >= 2**32:
            raise ValueError(f"{f} does not fit a u32 ratio")
        self.u32(f.numerator)
        self.u32(f.denominator)

    def vector(self, v: BitVector) -> None:
        self.raw(v.to_bytes())

    def sparse(self, H: SparseParityMatrix) -> None:
        self.raw(H.rows.astype(">u4").tobytes())

    def dense(self, G: DenseMatrix) -> None:
        for j in range(G.d):
            self.vector(G.column(j))

    def name(self, s: str) -> None:
        b = s.encode("ascii")
        self.u16(len(b))
        self.raw(b)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data, self.pos = bytes(data), 0

    def take(self, k: int) -> bytes:
        if k < 0 or self.pos + k > len(self.data):
            raise CorruptFile("unexpected end of file")
        out = self.data[self.pos:self.pos + k]
        self.pos += k
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def frac(self) -> Fraction:
        num, den = self.u32(), self.u32()
        if den == 0:
            raise CorruptFile("zero denominator")
        return Fraction(num, den)

    def vector(self, n: int) -> BitVector:
        raw = self.take((n + 7) // 8)
        v = BitVector.from_bytes(raw, n)
        if v.to_bytes() != raw:
            raise CorruptFile("nonzero pad bits")
        return v

    def sparse(self, n: int, r: int, t: int) -> SparseParityMatrix:
        rows = np.frombuffer(self.take(4 * r * t), dtype=">u4").astype(np.int64).reshape(r, t)
        try:
            return SparseParityMatrix(rows, n)
        except ValueError as exc:
            raise CorruptFile(f"bad parity row: {exc}") from None

    def dense(self, n: int, d: int) -> DenseMatrix:
        return DenseMatrix.from_vectors([self.vector(n) for _ in range(d)], n)

    def name(self) -> str:
        k = self.u16()
        try:
            return self.take(k).decode("ascii")
        except UnicodeDecodeError:
            raise CorruptFile("non-ascii name") from None

    def ecc(self) -> EccSpec:
        try:
            return from_name(self.name())
        except ValueError as exc:
            raise CorruptFile(f"bad ECC name: {exc}") from None

    def done(self) -> None:
        if self.pos != len(self.data):
            raise CorruptFile(f"{len(self.data) - self.pos} trailing bytes")


def _params_of(scheme_id: int, key: Any) -> SchemeParams:
    if scheme_id in (0, 1):
        return key.params if hasattr(key, "params") else key.sk.params
    if scheme_id == 2:
        return key.inner.sk.params
    if scheme_id == 3:
        return (key.pk if hasattr(key, "pk") else key).inner.params
    if scheme_id == 4:
        return key.inner.inner.sk.params
    if scheme_id == 5:
        inner = key.inner_pk if hasattr(key, "inner_pk") else key.inner
        return inner.inner.params
    raise ValueError(f"unknown scheme id {scheme_id}")


# payloads

def _write_single_public(w: _Writer, pk: ldpc.SingleBitPublicKey) -> None:
    w.dense(pk.G0)
    w.dense(pk.G1)
    w.vector(pk.z)


def _write_single_secret(w: _Writer, sk: ldpc.SingleBitSecretKey) -> None:
    w.sparse(sk.H0)
    w.sparse(sk.H1)


def _read_single_public(rd: _Reader, p: SchemeParams) -> ldpc.SingleBitPublicKey:
    return ldpc.SingleBitPublicKey(p, rd.dense(p.n, p.d), rd.dense(p.n, p.d), rd.vector(p.n))


def _read_single_keys(rd: _Reader, p: SchemeParams) -> ldpc.SingleBitKeys:
    pk = _read_single_public(rd, p)
    sk = ldpc.SingleBitSecretKey(p, rd.sparse(p.n, p.r, p.t), rd.sparse(p.n, p.r, p.t), pk.z)
    return ldpc.SingleBitKeys(sk, pk)


def _write_sk_rate(w: _Writer, keys: transforms.MultiBitSkKeys) -> None:
    _write_single_public(w, keys.inner.pk)
    _write_single_secret(w, keys.inner.sk)
    w.name(keys.ecc.name)
    w.frac(keys.delta)
    w.u64(keys.pi.n)
    w.raw(keys.pi.map.astype(">u4").tobytes())


def _read_sk_rate(rd: _Reader, p: SchemeParams) -> transforms.MultiBitSkKeys:
    inner = _read_single_keys(rd, p)
    ecc = rd.ecc()
    delta = rd.frac()
    length = rd.u64()
    expected = p.lam * p.n + ecc.n_out
    if length != expected:
        raise CorruptFile(f"permutation length {length}, expected {expected}")
    mapping = np.frombuffer(rd.take(4 * length), dtype=">u4").astype(np.int64)
    try:
        return transforms.MultiBitSkKeys(inner, Permutation(mapping), ecc, delta)
    except ValueError as exc:
        raise CorruptFile(str(exc)) from None


def _write_pk_public(w: _Writer, pk: transforms.MultiBitPkPublicKey) -> None:
    _write_single_public(w, pk.inner)
    w.name(pk.ecc1.name)
    w.name(pk.ecc2.name)


def _read_pk_public(rd: _Reader, p: SchemeParams) -> transforms.MultiBitPkPublicKey:
    inner = _read_single_public(rd, p)
    return transforms.MultiBitPkPublicKey(inner, rd.ecc(), rd.ecc())


def _read_pk_keys(rd: _Reader, p: SchemeParams) -> transforms.MultiBitPkKeys:
    pk = _read_pk_public(rd, p)
    sk = ldpc.SingleBitSecretKey(p, rd.sparse(p.n, p.r, p.t), rd.sparse(p.n, p.r, p.t), pk.inner.z)
    return transforms.MultiBitPkKeys(pk, transforms.MultiBitPkSecretKey(sk, pk.ecc1, pk.ecc2))


def _write_ro(w: _Writer, ro: RoHash) -> None:
    w.u8(ro.alg_id)
    w.u32(ro.out_bits)
    w.raw(ro.salt)


def _read_ro(rd: _Reader) -> RoHash:
    alg, bits, salt = rd.u8(), rd.u32(), rd.take(32)
    try:
        return RoHash(alg, bits, salt)
    except ValueError as exc:
        raise CorruptFile(str(exc)) from None


def _write_payload(w: _Writer, scheme_id: int, kind: int, key: Any) -> None:
    if scheme_id == 0:
        pk = key if kind == PUBLIC else key.pk
        w.dense(pk.G)
        w.vector(pk.z)
        if kind == SECRET:
            w.sparse(key.sk.H)
    elif scheme_id == 1:
        _write_single_public(w, key if kind == PUBLIC else key.pk)
        if kind == SECRET:
            _write_single_secret(w, key.sk)
    elif scheme_id == 2:
        _write_sk_rate(w, key)
    elif scheme_id == 3:
        _write_pk_public(w, key if kind == PUBLIC else key.pk)
        if kind == SECRET:
            _write_single_secret(w, key.sk.inner)
    elif scheme_id == 4:
        _write_sk_rate(w, key.inner)
        w.raw(key.prf_key.key)
    elif scheme_id == 5:
        if kind == PUBLIC:
            _write_pk_public(w, key.inner)
            _write_ro(w, key.ro)
        else:
            _write_pk_public(w, key.inner_pk)
            _write_ro(w, key.ro)
            _write_single_secret(w, key.inner_sk.inner)
    else:
        raise ValueError(f"unknown scheme id {scheme_id}")


def _read_payload(rd: _Reader, scheme_id: int, kind: int, p: SchemeParams) -> Any:
    if scheme_id == 0:
        G, z = rd.dense(p.n, p.d), rd.vector(p.n)
        pk = ldpc.ZeroBitPublicKey(p, G, z)
        if kind == PUBLIC:
            return pk
        return ldpc.ZeroBitKeys(ldpc.ZeroBitSecretKey(p, rd.sparse(p.n, p.r, p.t), z), pk)
    if scheme_id == 1:
        return _read_single_public(rd, p) if kind == PUBLIC else _read_single_keys(rd, p)
    if scheme_id == 2:
        return _read_sk_rate(rd, p)
    if scheme_id == 3:
        return _read_pk_public(rd, p) if kind == PUBLIC else _read_pk_keys(rd, p)
    if scheme_id == 4:
        inner = _read_sk_rate(rd, p)
        return transforms.SharpKeys(PrfKey(rd.take(32)), inner)
    if scheme_id == 5:
        if kind == PUBLIC:
            inner = _read_pk_public(rd, p)
            return transforms.CcaPublicKey(inner, _read_ro(rd))
        inner = _read_pk_public(rd, p)
        ro = _read_ro(rd)
        sk = ldpc.SingleBitSecretKey(p, rd.sparse(p.n, p.r, p.t), rd.sparse(p.n, p.r, p.t), inner.inner.z)
        return transforms.CcaKeys(ro, inner, transforms.MultiBitPkSecretKey(sk, inner.ecc1, inner.ecc2))
    raise CorruptFile(f"unknown scheme id {scheme_id}")


# public API

def write_params(w: _Writer, p: SchemeParams) -> None:
    for v in (p.n, p.d, p.t, p.r):
        w.u64(v)
    for f in (p.eta, p.zeta, p.delta):
        w.frac(f)
    w.u16(p.lam)


def read_params(rd: _Reader) -> SchemeParams:
    n, d, t, r = rd.u64(), rd.u64(), rd.u64(), rd.u64()
    eta, zeta, delta = rd.frac(), rd.frac(), rd.frac()
    lam = rd.u16()
    try:
        return SchemeParams(n=n, d=d, t=t, r=r, eta=eta, zeta=zeta, delta=delta, lam=lam)
    except ValueError as exc:
        raise CorruptFile(f"bad params: {exc}") from None


def serialize_key(kf: KeyFile) -> bytes:
    if kf.kind not in (SECRET, PUBLIC):
        raise ValueError("kind must be SECRET or PUBLIC")
    if kf.kind == PUBLIC and kf.scheme_id not in PUBLIC_KEY_SCHEMES:
        raise ValueError("secret-key scheme has no public key")
    w = _Writer()
    w.raw(KEY_MAGIC)
    w.u8(VERSION)
    w.u8(kf.scheme_id)
    w.u8(kf.hash_id)
    write_params(w, kf.params)
    w.u8(kf.kind)
    _write_payload(w, kf.scheme_id, kf.kind, kf.key)
    return w.getvalue()


def deserialize_key(data: bytes) -> KeyFile:
    rd = _Reader(data)
    if rd.take(4) != KEY_MAGIC:
        raise CorruptFile("bad key file magic")
    version = rd.u8()
    if version != VERSION:
        raise CorruptFile(f"unsupported version {version}")
    scheme_id, hash_id = rd.u8(), rd.u8()
    if scheme_id not in SCHEME_IDS.values():
        raise CorruptFile(f"unknown scheme id {scheme_id}")
    if hash_id not in HASH_ALGORITHMS:
        raise CorruptFile(f"unknown hash algorithm {hash_id}")
    params = read_params(rd)
    kind = rd.u8()
    if kind not in (SECRET, PUBLIC) or (kind == PUBLIC and scheme_id not in PUBLIC_KEY_SCHEMES):
        raise CorruptFile(f"bad key kind {kind}")
    key = _read_payload(rd, scheme_id, kind, params)
    rd.done()
    return KeyFile(scheme_id, kind, params, key, hash_id)


def key_file(scheme_id: int, key: Any, kind: int = SECRET) -> KeyFile:
    return KeyFile(scheme_id, kind, _params_of(scheme_id, key), key)


def public_part(scheme_id: int, keys: Any) -> Any:
    if scheme_id not in PUBLIC_KEY_SCHEMES:
        raise ValueError("secret-key scheme has no public key")
    return keys.pk


def serialize_codeword(x: BitVector) -> bytes:
    return CODEWORD_MAGIC + struct.pack(">Q", x.n) + x.to_bytes()


def deserialize_codeword(data: bytes) -> BitVector:
    rd = _Reader(data)
    if rd.take(4) != CODEWORD_MAGIC:
        raise CorruptFile("bad codeword magic")
    n = rd.u64()
    if n > 8 * len(data):
        raise CorruptFile("declared length exceeds file size")
    v = rd.vector(n)
    rd.done()
    return v


def structurally_equal(a: Any, b: Any) -> bool:
    """Field-by-field comparison that sees through identity-eq dataclasses."""
    if type(a) is not type(b):
        return False
    if dataclasses.is_dataclass(a) and not type(a).__dataclass_params__.eq:
        return all(structurally_equal(getattr(a, f.name), getattr(b, f.name))
                   for f in dataclasses.fields(a))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return bool(a == b)
