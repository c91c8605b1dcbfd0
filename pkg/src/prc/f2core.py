"""Bit-packed GF(2) vectors and matrices.

Vectors are stored as little-endian uint64 words: position i lives in word
i // 64 at bit i % 64. Pad bits past n are kept at zero so word-level
popcounts and equality are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

WORD = 64


def _nwords(n: int) -> int:
    return (n + WORD - 1) // WORD


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a 0/1 array into uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    nw = _nwords(n)
    pad = nw * WORD - n
    if pad:
        widths = [(0, 0)] * (bits.ndim - 1) + [(0, pad)]
        bits = np.pad(bits, widths)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    packed = np.ascontiguousarray(packed)
    return packed.view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_bits; returns uint8 0/1 with last axis of length n."""
    words = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
    as_bytes = words.astype("<u8", copy=False).view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little", count=n)


class BitVector:
    """Immutable element of F_2^n."""

    __slots__ = ("_words", "n")

    def __init__(self, words: np.ndarray, n: int):
        words = np.array(words, dtype=np.uint64, copy=True).reshape(-1)
        if n < 0 or words.shape[0] != _nwords(n):
            raise ValueError(f"{words.shape[0]} words cannot hold {n} bits")
        if n % WORD and words.shape[0]:
            words[-1] &= np.uint64((1 << (n % WORD)) - 1)
        words.setflags(write=False)
        self._words = words
        self.n = n

    @classmethod
    def zeros(cls, n: int) -> BitVector:
        return cls(np.zeros(_nwords(n), dtype=np.uint64), n)

    @classmethod
    def ones(cls, n: int) -> BitVector:
        return cls.from_bits(np.ones(n, dtype=np.uint8))

    @classmethod
    def from_bits(cls, bits) -> BitVector:
        bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
        if bits.size and bits.max() > 1:
            raise ValueError("bits must be 0/1")
        return cls(pack_bits(bits), bits.shape[0])

    @classmethod
    def from_string(cls, s: str) -> BitVector:
        return cls.from_bits([int(ch) for ch in s])

    @classmethod
    def from_indices(cls, n: int, idx) -> BitVector:
        bits = np.zeros(n, dtype=np.uint8)
        bits[np.asarray(idx, dtype=np.int64)] = 1
        return cls.from_bits(bits)

    @classmethod
    def from_bytes(cls, data: bytes, n: int) -> BitVector:
        """Read n bits, bit i at byte i // 8, position i % 8."""
        if len(data) * 8 < n:
            raise ValueError("not enough bytes")
        raw = np.frombuffer(bytes(data), dtype=np.uint8)
        return cls.from_bits(np.unpackbits(raw, bitorder="little", count=n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> BitVector:
        return cls.from_bits(rng.integers(0, 2, size=n, dtype=np.uint8))

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self._words, self.n)

    def to_bytes(self) -> bytes:
        return np.packbits(self.to_bits(), bitorder="little").tobytes()

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.to_bits())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.to_bits())

    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def concat(self, other: BitVector) -> BitVector:
        return BitVector.from_bits(np.concatenate([self.to_bits(), other.to_bits()]))

    def slice(self, start: int, stop: int) -> BitVector:
        return BitVector.from_bits(self.to_bits()[start:stop])

    def _check(self, other: BitVector) -> None:
        if not isinstance(other, BitVector):
            raise TypeError("expected BitVector")
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self._words ^ other._words, self.n)

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self._words & other._words, self.n)

    def dot(self, other: BitVector) -> int:
        return (self & other).weight() & 1

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return int((self._words[i // WORD] >> np.uint64(i % WORD)) & np.uint64(1))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.n, self._words.tobytes()))

    def __repr__(self) -> str:
        if self.n <= 64:
            return f"BitVector('{self.to_string()}')"
        return f"BitVector(n={self.n}, weight={self.weight()})"


def weight(v: BitVector) -> int:
    return v.weight()


def bias(v: BitVector) -> Fraction:
    """1 - 2 wt(v) / n as an exact rational."""
    if v.n == 0:
        raise ValueError("bias of an empty vector is undefined")
    return Fraction(v.n - 2 * v.weight(), v.n)


def distance(a: BitVector, b: BitVector) -> int:
    return (a ^ b).weight()


def sample_fixed_weight(n: int, t: int, rng: np.random.Generator) -> BitVector:
    """Uniform element of S_{t,n} via a partial Fisher-Yates shuffle."""
    return BitVector.from_indices(n, sample_fixed_weight_indices(n, t, rng))


def sample_fixed_weight_indices(n: int, t: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= t <= n:
        raise ValueError(f"weight {t} outside [0, {n}]")
    idx = np.arange(n)
    for i in range(t):
        j = int(rng.integers(i, n))
        idx[i], idx[j] = idx[j], idx[i]
    return np.sort(idx[:t])


def sample_fixed_weight_batch(batch: int, n: int, t: int,
                              rng: np.random.Generator) -> np.ndarray:
    """(batch, n) uint8 rows, each uniform over S_{t,n}.

    Same partial Fisher-Yates as above, run on all rows at once.
    """
    if not 0 <= t <= n:
        raise ValueError(f"weight {t} outside [0, {n}]")
    idx = np.tile(np.arange(n), (batch, 1))
    rows = np.arange(batch)
    for i in range(t):
        j = rng.integers(i, n, size=batch)
        tmp = idx[rows, i].copy()
        idx[rows, i] = idx[rows, j]
        idx[rows, j] = tmp
    out = np.zeros((batch, n), dtype=np.uint8)
    if t:
        out[rows[:, None], idx[:, :t]] = 1
    return out


@dataclass(frozen=True, eq=False)
class SparseParityMatrix:
    """r x n matrix over F_2 whose rows each have exactly t ones."""

    rows: np.ndarray  # (r, t) int64, each row strictly increasing
    n: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.int64)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d index array")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n:
                raise ValueError("row index out of range")
            if np.any(np.diff(rows, axis=1) <= 0):
                raise ValueError("row indices must be strictly increasing")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def r(self) -> int:
        return self.rows.shape[0]

    @property
    def t(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def from_index_lists(cls, index_lists: Sequence[Sequence[int]], n: int) -> SparseParityMatrix:
        lists = [sorted(int(i) for i in row) for row in index_lists]
        widths = {len(row) for row in lists}
        if len(widths) > 1:
            raise ValueError("rows must share a common weight t")
        t = widths.pop() if widths else 0
        for row in lists:
            if len(set(row)) != len(row):
                raise ValueError("repeated index within a row")
        return cls(np.array(lists, dtype=np.int64).reshape(len(lists), t), n)

    @classmethod
    def random(cls, n: int, r: int, t: int, rng: np.random.Generator) -> SparseParityMatrix:
        if t > n:
            raise ValueError("t > n")
        rows = np.empty((r, t), dtype=np.int64)
        for i in range(r):
            rows[i] = sample_fixed_weight_indices(n, t, rng)
        return cls(rows, n)

    def row(self, i: int) -> BitVector:
        return BitVector.from_indices(self.n, self.rows[i])

    def to_dense_bits(self) -> np.ndarray:
        out = np.zeros((self.r, self.n), dtype=np.uint8)
        if self.t:
            out[np.arange(self.r)[:, None], self.rows] = 1
        return out

    def syndrome_bits(self, x_bits: np.ndarray) -> np.ndarray:
        """H x for x given as (..., n) 0/1 arrays; returns (..., r) uint8."""
        x_bits = np.asarray(x_bits, dtype=np.uint8)
        if x_bits.shape[-1] != self.n:
            raise ValueError(f"expected length {self.n}, got {x_bits.shape[-1]}")
        if self.t == 0:
            return np.zeros(x_bits.shape[:-1] + (self.r,), dtype=np.uint8)
        gathered = x_bits[..., self.rows]  # (..., r, t)
        return np.bitwise_xor.reduce(gathered, axis=-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseParityMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.rows, other.rows)

    def __hash__(self) -> int:
        return hash((self.n, self.rows.shape, self.rows.tobytes()))

    def __repr__(self) -> str:
        return f"SparseParityMatrix(n={self.n}, r={self.r}, t={self.t})"


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """n x d matrix over F_2 stored as d packed columns."""

    columns: np.ndarray  # (d, words) uint64
    n: int

    def __post_init__(self):
        cols = np.array(self.columns, dtype=np.uint64).reshape(-1, _nwords(self.n))
        if self.n % WORD and cols.size:
            cols[:, -1] &= np.uint64((1 << (self.n % WORD)) - 1)
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def d(self) -> int:
        return self.columns.shape[0]

    @classmethod
    def from_column_bits(cls, bits: np.ndarray) -> DenseMatrix:
        """bits has shape (n, d), i.e. the matrix itself."""
        bits = np.asarray(bits, dtype=np.uint8)
        return cls(pack_bits(bits.T), bits.shape[0])

    @classmethod
    def from_vectors(cls, cols: Sequence[BitVector], n: int) -> DenseMatrix:
        if any(c.n != n for c in cols):
            raise ValueError("column length mismatch")
        words = np.stack([c.words for c in cols]) if cols else np.zeros((0, _nwords(n)), np.uint64)
        return cls(words, n)

    def column(self, j: int) -> BitVector:
        return BitVector(self.columns[j], self.n)

    def to_bits(self) -> np.ndarray:
        """(n, d) uint8 array."""
        if self.d == 0:
            return np.zeros((self.n, 0), dtype=np.uint8)
        return unpack_bits(self.columns, self.n).T.copy()

    def mul_vec_bits(self, u_bits: np.ndarray) -> np.ndarray:
        """G u for u given as (..., d) 0/1 arrays; returns (..., n) uint8."""
        u_bits = np.asarray(u_bits, dtype=np.uint8)
        if u_bits.shape[-1] != self.d:
            raise ValueError("dimension mismatch")
        g = self.to_bits().astype(np.int64)
        return ((u_bits.astype(np.int64) @ g.T) & 1).astype(np.uint8)

    def mul_vec(self, u: BitVector) -> BitVector:
        return BitVector.from_bits(self.mul_vec_bits(u.to_bits()))

    def rank(self) -> int:
        return rank_of_rows(self.columns, self.n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.columns, other.columns)

    def __hash__(self) -> int:
        return hash((self.n, self.columns.shape, self.columns.tobytes()))

    def __repr__(self) -> str:
        return f"DenseMatrix(n={self.n}, d={self.d})"


@dataclass(frozen=True, eq=False)
class Permutation:
    map: np.ndarray

    def __post_init__(self):
        m = np.array(self.map, dtype=np.int64).reshape(-1)
        if not np.array_equal(np.sort(m), np.arange(m.shape[0])):
            raise ValueError("not a permutation")
        m.setflags(write=False)
        object.__setattr__(self, "map", m)

    @property
    def n(self) -> int:
        return self.map.shape[0]

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> Permutation:
        return cls(rng.permutation(n))

    def inverse(self) -> Permutation:
        inv = np.empty_like(self.map)
        inv[self.map] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: Permutation) -> Permutation:
        """(self o other)(i) = self(other(i))."""
        return Permutation(self.map[other.map])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.map, other.map)

    def __hash__(self) -> int:
        return hash(self.map.tobytes())


def mat_vec_sparse(H: SparseParityMatrix, x: BitVector) -> BitVector:
    if x.n != H.n:
        raise ValueError(f"H has {H.n} columns, x has length {x.n}")
    return BitVector.from_bits(H.syndrome_bits(x.to_bits()))


def perm_bits(x: BitVector, pi: Permutation) -> BitVector:
    """Output position i holds x[pi(i)]."""
    if x.n != pi.n:
        raise ValueError("length mismatch")
    return BitVector.from_bits(x.to_bits()[pi.map])


def _bit(words: np.ndarray, col: int) -> np.ndarray:
    return (words[..., col // WORD] >> np.uint64(col % WORD)) & np.uint64(1)


def _lowest_set_bit(words: np.ndarray) -> int:
    nz = np.flatnonzero(words)
    if nz.size == 0:
        return -1
    w = int(words[nz[0]])
    return int(nz[0]) * WORD + ((w & -w).bit_length() - 1)


class RowEchelon:
    """Fully reduced row-echelon basis built by inserting rows in order.

    Each inserted row is reduced against the current basis; if something
    survives, it becomes a new basis row pivoting on its lowest set column,
    and that column is cleared from every older basis row. Rows that reduce
    to zero are dependent on earlier rows and are skipped. A companion
    combination matrix tracks which original rows make up each basis row.
    """

    def __init__(self, n: int, capacity: int, track: bool = False):
        self.n = n
        self.nw = _nwords(n)
        self.track = track
        self.cw = _nwords(capacity) if track else 0
        self.basis = np.zeros((capacity, self.nw), dtype=np.uint64)
        self.combo = np.zeros((capacity, self.cw), dtype=np.uint64)
        self.pivots: list[int] = []
        self.used_rows: list[int] = []
        self._count = 0
        self._inserted = 0

    @property
    def rank(self) -> int:
        return self._count

    def insert(self, row_words: np.ndarray) -> bool:
        idx = self._inserted
        self._inserted += 1
        v = np.array(row_words, dtype=np.uint64, copy=True)
        c = np.zeros(self.cw, dtype=np.uint64)
        if self.track:
            c[idx // WORD] |= np.uint64(1) << np.uint64(idx % WORD)
        k = self._count
        if k:
            piv = np.asarray(self.pivots, dtype=np.int64)
            hit = ((v[piv // WORD] >> (piv % WORD).astype(np.uint64)) & np.uint64(1)).astype(bool)
            if hit.any():
                v ^= np.bitwise_xor.reduce(self.basis[:k][hit], axis=0)
                if self.track:
                    c ^= np.bitwise_xor.reduce(self.combo[:k][hit], axis=0)
        p = _lowest_set_bit(v)
        if p < 0:
            return False
        if k:
            clash = _bit(self.basis[:k], p).astype(bool)
            if clash.any():
                self.basis[:k][clash] ^= v
                if self.track:
                    self.combo[:k][clash] ^= c
        self.basis[k] = v
        if self.track:
            self.combo[k] = c
        self.pivots.append(p)
        self.used_rows.append(idx)
        self._count += 1
        return True

    def rows(self) -> np.ndarray:
        return self.basis[: self._count]


def rank_of_rows(words: np.ndarray, n: int) -> int:
    words = np.asarray(words, dtype=np.uint64).reshape(-1, _nwords(n))
    ech = RowEchelon(n, words.shape[0])
    for w in words:
        ech.insert(w)
    return ech.rank


def rank(vectors: Sequence[BitVector]) -> int:
    if not vectors:
        return 0
    n = vectors[0].n
    return rank_of_rows(np.stack([v.words for v in vectors]), n)


def _sparse_row_words(H: SparseParityMatrix) -> np.ndarray:
    return pack_bits(H.to_dense_bits())


def kernel_basis(H: SparseParityMatrix) -> DenseMatrix:
    """Basis of ker H, one column per free variable."""
    n = H.n
    ech = RowEchelon(n, H.r)
    for i in range(H.r):
        ech.insert(pack_bits(np.bincount(H.rows[i], minlength=n).astype(np.uint8)))
    return _kernel_from_echelon(ech)


def _kernel_from_echelon(ech: RowEchelon) -> DenseMatrix:
    n = ech.n
    pivots = np.asarray(ech.pivots, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), pivots)
    basis = np.zeros((n, free.shape[0]), dtype=np.uint8)
    basis[free, np.arange(free.shape[0])] = 1
    if pivots.size and free.size:
        reduced = unpack_bits(ech.rows(), n)
        basis[pivots, :] = reduced[:, free]
    return DenseMatrix.from_column_bits(basis)


def sample_kernel_matrix(H: SparseParityMatrix, d: int, rng: np.random.Generator,
                         basis: DenseMatrix | None = None) -> DenseMatrix:
    """d columns drawn i.i.d. uniformly from ker H."""
    if basis is None:
        basis = kernel_basis(H)
    if d == 0:
        return DenseMatrix(np.zeros((0, _nwords(H.n)), np.uint64), H.n)
    k = basis.d
    coeffs = rng.integers(0, 2, size=(k, d), dtype=np.uint8)
    if k == 0:
        return DenseMatrix.from_column_bits(np.zeros((H.n, d), dtype=np.uint8))
    cols = (basis.to_bits().astype(np.int64) @ coeffs.astype(np.int64)) & 1
    return DenseMatrix.from_column_bits(cols.astype(np.uint8))


class LinearSolver:
    """Solves row_i . e = target_i with e supported on the pivot columns.

    Rows that depend on earlier rows are dropped when skip_dependent is set;
    otherwise they are kept as consistency constraints and an inconsistent
    target makes solve() return None.
    """

    def __init__(self, rows: np.ndarray, n: int):
        rows = np.asarray(rows, dtype=np.uint64).reshape(-1, _nwords(n))
        self.n = n
        self.num_rows = rows.shape[0]
        self.ech = RowEchelon(n, max(self.num_rows, 1), track=True)
        self.dependent: list[int] = []
        for i, w in enumerate(rows):
            if not self.ech.insert(w):
                self.dependent.append(i)
        # each dependent row is a combination of independent ones; remember
        # which, so consistency can be checked against arbitrary targets
        self._dep_combo = np.zeros((len(self.dependent), self.ech.cw), dtype=np.uint64)
        if self.dependent:
            for j, i in enumerate(self.dependent):
                self._dep_combo[j] = self._combination_of(rows[i])
                self._dep_combo[j, i // WORD] ^= np.uint64(1) << np.uint64(i % WORD)
        self.pivots = np.asarray(self.ech.pivots, dtype=np.int64)

    def _combination_of(self, row: np.ndarray) -> np.ndarray:
        k = self.ech.rank
        if k == 0:
            return np.zeros(self.ech.cw, dtype=np.uint64)
        piv = np.asarray(self.ech.pivots, dtype=np.int64)
        hit = ((row[piv // WORD] >> (piv % WORD).astype(np.uint64)) & np.uint64(1)).astype(bool)
        if not hit.any():
            return np.zeros(self.ech.cw, dtype=np.uint64)
        return np.bitwise_xor.reduce(self.ech.combo[:k][hit], axis=0)

    def solve(self, targets: np.ndarray, skip_dependent: bool = False) -> np.ndarray | None:
        """targets: 0/1 array of length num_rows. Returns e as 0/1 bits."""
        targets = np.asarray(targets, dtype=np.uint8).reshape(-1)
        if targets.shape[0] != self.num_rows:
            raise ValueError("one target per row")
        tw = pack_bits(np.pad(targets, (0, self.ech.cw * WORD - targets.shape[0])))
        if not skip_dependent and self.dependent:
            par = np.bitwise_count(self._dep_combo & tw).sum(axis=1) & 1
            if par.any():
                return None
        k = self.ech.rank
        e = np.zeros(self.n, dtype=np.uint8)
        if k:
            vals = np.bitwise_count(self.ech.combo[:k] & tw).sum(axis=1) & 1
            e[self.pivots] = vals.astype(np.uint8)
        return e


def gaussian_eliminate(rows: Sequence[BitVector], targets: BitVector) -> BitVector | None:
    """Find e with row_i . e = targets_i for all i, or None if infeasible.

    The support of e lies in the pivot set (lowest available column per
    independent row), so wt(e) <= len(rows).
    """
    if not rows:
        raise ValueError("need at least one row")
    n = rows[0].n
    if any(r.n != n for r in rows):
        raise ValueError("rows must share a length")
    if targets.n != len(rows):
        raise ValueError("one target per row")
    solver = LinearSolver(np.stack([r.words for r in rows]), n)
    e = solver.solve(targets.to_bits())
    return None if e is None else BitVector.from_bits(e)
