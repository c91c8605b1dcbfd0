"""Exact and Monte-Carlo checks of the bias lemmas behind the LDPC decoders.

Small codes are handled as Python/numpy integers (one bit per coordinate,
n <= 64), which keeps every enumeration exact and cheap. Exact quantities are
Fractions; Monte-Carlo quantities are floats with Wilson intervals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Any

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import chi2_contingency

from .f2core import (BitVector, DenseMatrix, SparseParityMatrix, rank_of_rows,
                     sample_fixed_weight_indices, sample_kernel_matrix)
from .fixtures import THRESHOLDS
from .games import wilson_interval

MAX_BINOM = 10**7
MAX_SMALL_N = 28
MAX_SMALL_DIM = 12
MAX_RLC_DIM = 16
# two-sided 3 sigma
SEPARATION_P = 0.0027


class EnumerationTooLarge(ValueError):
    pass


@dataclass
class Report:
    """Outcome of one check; passed is None for report-only runs."""

    name: str
    passed: bool | None
    fields: dict[str, Any] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"check={self.name}"]
        for k, v in self.fields.items():
            out.append(f"{k}={_fmt(v)}")
        out.append("verdict=" + ("report-only" if self.passed is None
                                  else "pass" if self.passed else "fail"))
        return out


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


# integer encodings

def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def vec_to_int(v: BitVector) -> int:
    if v.n > 64:
        raise ValueError("integer encoding needs n <= 64")
    return int(v.words[0]) if v.n else 0


def int_to_vec(x: int, n: int) -> BitVector:
    return BitVector.from_indices(n, [i for i in range(n) if (x >> i) & 1])


def _check_binom(n: int, t: int, max_binom: int) -> None:
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}, n={n}")
    if comb(n, t) > max_binom:
        raise EnumerationTooLarge(f"binom({n},{t}) = {comb(n, t)} exceeds {max_binom}")


@lru_cache(maxsize=16)
def weight_t_supports(n: int, t: int, max_binom: int = MAX_BINOM) -> np.ndarray:
    """All t-subsets of range(n) as a (binom(n,t), t) array, lexicographic."""
    _check_binom(n, t, max_binom)
    count = comb(n, t)
    if t == 0:
        out = np.zeros((1, 0), dtype=np.int16)
    else:
        flat = np.fromiter((i for c in combinations(range(n), t) for i in c),
                           dtype=np.int16, count=count * t)
        out = flat.reshape(count, t)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def weight_t_masks(n: int, t: int, max_binom: int = MAX_BINOM) -> np.ndarray:
    if n > 64:
        raise ValueError("integer masks need n <= 64")
    sup = weight_t_supports(n, t, max_binom).astype(np.uint64)
    if t == 0:
        out = np.zeros(1, dtype=np.uint64)
    else:
        out = np.bitwise_or.reduce(np.uint64(1) << sup, axis=1)
    out.setflags(write=False)
    return out


def bias_int(y: int, n: int) -> Fraction:
    return Fraction(n - 2 * int(y).bit_count(), n)


def parity_bias(masks: np.ndarray, y: int) -> Fraction:
    """bias of the vector (w . y) over the parity set given by masks."""
    if len(masks) == 0:
        raise ValueError("empty parity set")
    odd = int((_popcount(masks & np.uint64(y)) & 1).sum())
    return Fraction(len(masks) - 2 * odd, len(masks))


def bias_all_parities(n: int, t: int, y: int, max_binom: int = MAX_BINOM) -> Fraction:
    """bias(W_t y) by enumerating every weight-t parity."""
    return parity_bias(weight_t_masks(n, t, max_binom), y)


def krawtchouk(n: int, t: int, a: int) -> int:
    return sum((-1) ** j * comb(a, j) * comb(n - a, t - j) for j in range(t + 1))


def bias_all_parities_closed(n: int, t: int, wt: int) -> Fraction:
    """bias(W_t y) for wt(y) = wt, via the Krawtchouk polynomial."""
    return Fraction(krawtchouk(n, t, wt), comb(n, t))


# small codes

@dataclass(frozen=True, eq=False)
class SmallCode:
    """Image of a small generator matrix, with every codeword listed."""

    generator: DenseMatrix
    codewords: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = self.generator
        if g.n > MAX_SMALL_N:
            raise EnumerationTooLarge(f"n = {g.n} exceeds {MAX_SMALL_N}")
        if g.d > MAX_SMALL_DIM:
            raise EnumerationTooLarge(f"d = {g.d} exceeds {MAX_SMALL_DIM}")
        words = np.zeros(1, dtype=np.uint64)
        for j in range(g.d):
            col = np.uint64(vec_to_int(g.column(j)))
            words = np.union1d(words, words ^ col)
        words.setflags(write=False)
        object.__setattr__(self, "codewords", words)

    @property
    def n(self) -> int:
        return self.generator.n

    @property
    def dim(self) -> int:
        return len(self.codewords).bit_length() - 1

    @property
    def size(self) -> int:
        return len(self.codewords)

    def basis_ints(self) -> list[int]:
        return [vec_to_int(self.generator.column(j)) for j in range(self.generator.d)]

    @classmethod
    def from_vectors(cls, vectors, n: int) -> SmallCode:
        return cls(DenseMatrix.from_vectors(list(vectors), n))

    @classmethod
    def zero(cls, n: int) -> SmallCode:
        return cls(DenseMatrix.from_column_bits(np.zeros((n, 0), dtype=np.uint8)))

    @classmethod
    def full(cls, n: int) -> SmallCode:
        return cls(DenseMatrix.from_column_bits(np.eye(n, dtype=np.uint8)))

    @classmethod
    def random(cls, n: int, d: int, rng: np.random.Generator) -> SmallCode:
        bits = rng.integers(0, 2, size=(n, d), dtype=np.uint8)
        return cls(DenseMatrix.from_column_bits(bits))


def _parity_masks(code: SmallCode, t: int, max_binom: int = MAX_BINOM) -> np.ndarray:
    masks = weight_t_masks(code.n, t, max_binom)
    keep = np.ones(len(masks), dtype=bool)
    for g in code.basis_ints():
        keep &= (_popcount(masks & np.uint64(g)) & 1) == 0
    return masks[keep]


def enumerate_parity_set(code: SmallCode, t: int, max_binom: int = MAX_BINOM) -> list[BitVector]:
    """Every weight-t w orthogonal to all codewords."""
    return [int_to_vec(int(m), code.n) for m in _parity_masks(code, t, max_binom)]


# the bias identity

@dataclass(frozen=True)
class OmarResult:
    lhs: Fraction
    rhs: Fraction
    factor: Fraction
    num_parities: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs


def verify_omar_identity(code: SmallCode, t: int, x: BitVector,
                         max_binom: int = MAX_BINOM) -> OmarResult:
    """Exact check that bias(P x) is the rescaled code average of bias(W_t(x + c))."""
    if x.n != code.n:
        raise ValueError("x has the wrong length")
    n = code.n
    parities = _parity_masks(code, t, max_binom)
    if len(parities) == 0:
        raise ValueError("no weight-t parity is consistent with the code")
    xi = vec_to_int(x)
    lhs = parity_bias(parities, xi)
    factor = Fraction(comb(n, t), code.size * len(parities))
    total = sum((bias_all_parities(n, t, xi ^ int(c), max_binom) for c in code.codewords),
                Fraction(0))
    return OmarResult(lhs=lhs, rhs=factor * total, factor=factor, num_parities=len(parities))


@dataclass(frozen=True)
class ParityBiasResult:
    lower: Fraction | None
    value: Fraction
    upper: Fraction
    ok: bool


def verify_parity_bias_bounds(x: BitVector, t: int, max_binom: int = MAX_BINOM) -> ParityBiasResult:
    """Exact sandwich check for bias(W_t x); the lower bound is skipped at bias 0."""
    n = x.n
    if t <= 0 or t % 2:
        raise ValueError("t must be a positive even integer")
    if 2 * t * t > n:
        raise ValueError(f"t = {t} exceeds sqrt(n/2) at n = {n}")
    b = bias_int(vec_to_int(x), n)
    value = bias_all_parities(n, t, vec_to_int(x), max_binom)
    upper = b ** t
    lower = None if b == 0 else b ** t * (1 - Fraction(2 * t * t, n) / b ** 2)
    ok = value <= upper and (lower is None or lower <= value)
    return ParityBiasResult(lower=lower, value=value, upper=upper, ok=ok)


def parity_lower_floor(n: int, t: int) -> Fraction:
    """-(2t^2/n)^(t/2), the floor every bias(W_t x) must clear for even t."""
    return -Fraction(2 * t * t, n) ** (t // 2)


def parity_bias_violations(n: int, t: int) -> list[tuple[int, Fraction | None, Fraction, Fraction]]:
    """Weights where the sandwich fails, scanned with the closed form.

    Ignores the t <= sqrt(n/2) precondition on purpose so the scan can be
    used to map where the bounds stop holding.
    """
    bad = []
    for a in range(n + 1):
        b = Fraction(n - 2 * a, n)
        value = bias_all_parities_closed(n, t, a)
        upper = b ** t
        lower = None if b == 0 else b ** t * (1 - Fraction(2 * t * t, n) / b ** 2)
        if value > upper or (lower is not None and value < lower):
            bad.append((a, lower, value, upper))
    return bad


# Monte-Carlo checks over random codes

def _row_syndromes(bits: np.ndarray) -> np.ndarray:
    """Pack each row of an (n, d) 0/1 matrix into one integer, d <= 63."""
    n, d = bits.shape
    if d > 63:
        raise ValueError("d must be at most 63")
    weights = np.uint64(1) << np.arange(d, dtype=np.uint64)
    return (bits.astype(np.uint64) * weights).sum(axis=1).astype(np.uint64)


def _consistent_rows(supports: np.ndarray, syndromes: np.ndarray) -> np.ndarray:
    """Boolean mask over supports: which weight-t parities annihilate the code."""
    if supports.shape[1] == 0:
        return np.ones(supports.shape[0], dtype=bool)
    return np.bitwise_xor.reduce(syndromes[supports], axis=1) == 0


def estimate_parity_concentration(n: int, d: int, t: int, num_codes: int, rng: np.random.Generator,
                                  tolerance: float = THRESHOLDS.concentration_tolerance,
                                  pass_fraction: float = THRESHOLDS.concentration_pass,
                                  max_binom: int = MAX_BINOM) -> Report:
    supports = weight_t_supports(n, t, max_binom)
    expected = Fraction(comb(n, t), 2 ** d)
    counts, ratios = [], []
    for child in rng.spawn(num_codes):
        G = child.integers(0, 2, size=(n, d), dtype=np.uint8)
        N = int(_consistent_rows(supports, _row_syndromes(G)).sum())
        counts.append(N)
        ratios.append(float(N / expected))
    within = sum(abs(q - 1) <= tolerance for q in ratios)
    hypothesis = d < t * math.log2(n)
    frac = within / num_codes if num_codes else 1.0
    passed = (frac >= pass_fraction) if hypothesis else None
    lo, hi = wilson_interval(within, num_codes)
    return Report("concentration", passed, {
        "n": n, "d": d, "t": t, "codes": num_codes,
        "expected": float(expected), "tolerance": tolerance,
        "min_ratio": min(ratios, default=1.0), "max_ratio": max(ratios, default=1.0),
        "mean_ratio": float(np.mean(ratios)) if ratios else 1.0,
        "within": within, "fraction": frac, "ci_low": lo, "ci_high": hi,
        "required": pass_fraction, "hypothesis_met": hypothesis,
    })


def max_nonzero_bias(G: np.ndarray) -> float:
    """max |bias(c)| over nonzero codewords of the image of the (n, d) matrix G."""
    n, d = G.shape
    if d > MAX_RLC_DIM:
        raise EnumerationTooLarge(f"2^{d} codewords is too many")
    if d == 0:
        return 0.0
    msgs = ((np.arange(1, 2 ** d)[:, None] >> np.arange(d)) & 1).astype(np.int32)
    words = (msgs @ G.T.astype(np.int32)) & 1
    wts = words.sum(axis=1)
    return float(np.max(np.abs(n - 2 * wts)) / n)


def check_rlc_balance(n: int, d: int, num_codes: int, rng: np.random.Generator,
                      pass_fraction: float = THRESHOLDS.rlc_pass) -> Report:
    bound = 2 * math.sqrt(d / n)
    maxima = []
    for child in rng.spawn(num_codes):
        G = child.integers(0, 2, size=(n, d), dtype=np.uint8)
        maxima.append(max_nonzero_bias(G))
    good = sum(m <= bound for m in maxima)
    frac = good / num_codes if num_codes else 1.0
    lo, hi = wilson_interval(good, num_codes)
    return Report("rlc-balance", frac >= pass_fraction, {
        "n": n, "d": d, "codes": num_codes, "bound": bound,
        "worst": max(maxima, default=0.0), "balanced": good, "fraction": frac,
        "ci_low": lo, "ci_high": hi, "required": pass_fraction,
    })


@dataclass(frozen=True)
class JohnsonResult:
    count: int
    bound: Fraction | None
    delta_code: Fraction
    delta_min_distance: Fraction
    hypothesis_met: bool

    @property
    def ok(self) -> bool | None:
        if not self.hypothesis_met:
            return None
        return self.count <= self.bound


def code_bias_radius(code: SmallCode) -> Fraction:
    """max |bias(c)| over nonzero codewords (0 for the zero code)."""
    nz = code.codewords[code.codewords != 0]
    if len(nz) == 0:
        return Fraction(0)
    wts = _popcount(nz)
    return Fraction(int(np.max(np.abs(code.n - 2 * wts))), code.n)


def johnson_count(code: SmallCode, x: BitVector, tau: Fraction) -> JohnsonResult:
    """Count codewords with |bias(x + c)| >= tau and compare to the list-size bound.

    The bound is applied with delta = max |bias| over nonzero codewords, which
    bounds pairwise correlations from both sides. The minimum-distance
    version alone misses codes containing near-complement pairs.
    """
    tau = Fraction(tau)
    n = code.n
    delta = code_bias_radius(code)
    nz = code.codewords[code.codewords != 0]
    dmin = int(_popcount(nz).min()) if len(nz) else n
    delta_md = 1 - Fraction(2 * dmin, n)
    wts = _popcount(code.codewords ^ np.uint64(vec_to_int(x)))
    count = sum(abs(Fraction(n - 2 * int(w), n)) >= tau for w in wts)
    if tau <= 0 or tau * tau <= delta:
        return JohnsonResult(count, None, delta, delta_md, False)
    bound = (1 - delta) / (tau * tau - delta)
    return JohnsonResult(count, bound, delta, delta_md, True)


def _random_support(n: int, w: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros(n, dtype=np.uint8)
    out[sample_fixed_weight_indices(n, w, rng)] = 1
    return out


def _parity_bias_bits(supports: np.ndarray, y: np.ndarray) -> Fraction:
    if len(supports) == 0:
        raise ValueError("empty parity set")
    odd = int((y[supports].sum(axis=1) & 1).sum())
    return Fraction(len(supports) - 2 * odd, len(supports))


def empirical_bias_floor(n: int, d: int, t: int, trials: int, rng: np.random.Generator,
                         factor: float = 0.9, min_bias: float = 0.5,
                         pass_fraction: float = THRESHOLDS.floor_pass,
                         max_binom: int = MAX_BINOM) -> Report:
    """Fraction of (code, e) with bias(P e) >= factor * bias(e)^t, bias(e) >= min_bias."""
    supports = weight_t_supports(n, t, max_binom)
    max_wt = int(math.floor((1 - min_bias) * n / 2))
    good, ratios = 0, []
    for child in rng.spawn(trials):
        G = child.integers(0, 2, size=(n, d), dtype=np.uint8)
        P = supports[_consistent_rows(supports, _row_syndromes(G))]
        w = int(child.integers(0, max_wt + 1))
        e = _random_support(n, w, child)
        value = _parity_bias_bits(P, e.astype(np.int64))
        target = Fraction(n - 2 * w, n) ** t
        good += value >= Fraction(factor).limit_denominator(10**6) * target
        ratios.append(float(value / target))
    frac = good / trials if trials else 1.0
    lo, hi = wilson_interval(good, trials)
    return Report("bias-floor", frac >= pass_fraction, {
        "n": n, "d": d, "t": t, "trials": trials, "factor": factor,
        "max_error_weight": max_wt, "min_ratio": min(ratios, default=1.0),
        "median_ratio": float(np.median(ratios)) if ratios else 1.0,
        "passing": good, "fraction": frac, "ci_low": lo, "ci_high": hi,
        "required": pass_fraction, "hypothesis_met": d < t * math.log2(n) / 2,
    })


def empirical_bias_ceiling(n: int, d: int, t: int, trials: int, rng: np.random.Generator,
                           factor: float = 2.0, max_error_rate: float = 0.125,
                           pass_fraction: float = THRESHOLDS.ceiling_pass,
                           max_binom: int = MAX_BINOM) -> Report:
    """Fraction of trials with bias(P_C (c' + e)) under factor * n^{4 eps} (1 - bias(e) + sqrt(8d/n))^t.

    eps is read off d = eps * t * log2(n). Raw ratios are reported so the
    surrogate constant can be audited.
    """
    supports = weight_t_supports(n, t, max_binom)
    eps = d / (t * math.log2(n)) if d else 0.0
    max_wt = int(max_error_rate * n)
    good, ratios = 0, []
    for child in rng.spawn(trials):
        G = child.integers(0, 2, size=(n, d), dtype=np.uint8)
        P = supports[_consistent_rows(supports, _row_syndromes(G))]
        G2 = child.integers(0, 2, size=(n, d), dtype=np.uint8)
        cp = np.zeros(n, dtype=np.int64)
        for _ in range(64):
            u = child.integers(0, 2, size=d)
            cp = (G2.astype(np.int64) @ u) & 1
            if cp.any():
                break
        w = int(child.integers(0, max_wt + 1))
        e = _random_support(n, w, child).astype(np.int64)
        value = float(_parity_bias_bits(P, cp ^ e))
        be = (n - 2 * w) / n
        bound = factor * n ** (4 * eps) * (1 - be + math.sqrt(8 * d / n)) ** t
        good += value <= bound
        ratios.append(value / bound)
    frac = good / trials if trials else 1.0
    lo, hi = wilson_interval(good, trials)
    return Report("bias-ceiling", frac >= pass_fraction, {
        "n": n, "d": d, "t": t, "trials": trials, "factor": factor, "epsilon": eps,
        "max_error_weight": max_wt, "max_ratio": max(ratios, default=0.0),
        "median_ratio": float(np.median(ratios)) if ratios else 0.0,
        "passing": good, "fraction": frac, "ci_low": lo, "ci_high": hi,
        "required": pass_fraction, "hypothesis_met": eps < 1 / 8,
    })


# tail bounds

def hypergeometric_tail(N: int, K: int, n_draw: int, t_dev: float) -> float:
    """Bound exp(-2 t^2 n) on either tail of Hyp(N, K, n) at deviation t from K/N."""
    if not (0 < K <= N and 0 < n_draw <= N):
        raise ValueError("need 0 < K <= N and 0 < n_draw <= N")
    if not 0 < t_dev < K / N:
        raise ValueError("need 0 < t_dev < K/N")
    return math.exp(-2 * t_dev * t_dev * n_draw)


def hypergeometric_tail_frequencies(N: int, K: int, n_draw: int, t_dev: float, samples: int,
                                    rng: np.random.Generator) -> tuple[float, float]:
    """Observed (upper, lower) tail frequencies from direct sampling."""
    x = rng.hypergeometric(K, N - K, n_draw, size=samples)
    p = K / N
    upper = float(np.mean(x >= (p + t_dev) * n_draw))
    lower = float(np.mean(x <= (p - t_dev) * n_draw))
    return upper, lower


def chernoff_exponent(r: int, zeta) -> Fraction:
    """mu * delta^2 / 2 for r fair checks falling below (1/2 - zeta) r: equals r zeta^2."""
    zeta = Fraction(zeta)
    if r < 1:
        raise ValueError("r must be positive")
    if not 0 < zeta < Fraction(1, 2):
        raise ValueError("zeta must lie in (0, 1/2)")
    mu = Fraction(r, 2)
    rel = 2 * zeta
    return mu * rel * rel / 2


def chernoff_threshold(r: int, zeta) -> float:
    """Chernoff bound on a uniform string passing the r-check threshold test."""
    return math.exp(-float(chernoff_exponent(r, zeta)))


def chernoff_report(r: int, zeta, p_honest: float | None = None) -> list[str]:
    """key=value lines describing expected decoder failure rates."""
    zeta = Fraction(zeta)
    lines = [f"chernoff_exponent={float(chernoff_exponent(r, zeta)):.6g}",
             f"false_positive_bound={chernoff_threshold(r, zeta):.6g}"]
    if p_honest is not None:
        # honest checks fail with probability p < 1/2 - zeta; Hoeffding on the gap
        gap = float(Fraction(1, 2) - zeta) - p_honest
        bound = math.exp(-2 * r * gap * gap) if gap > 0 else 1.0
        lines.append(f"honest_check_rate={p_honest:.6g}")
        lines.append(f"false_negative_bound={bound:.6g}")
    return lines


# resampling equivalence

def _ker_dim(rows: list[int], n: int) -> int:
    words = np.array(rows, dtype=np.uint64).reshape(-1, 1)
    return n - rank_of_rows(words, n)


def exact_resampling_distributions(code: SmallCode, t: int, r: int, d: int | None = None,
                                   max_configs: int = 10**6) -> tuple[dict, dict, Fraction]:
    """Exact laws of H given C under both samplers, plus their total variation.

    Sampler A draws H with independent uniform weight-t rows, then d columns
    uniformly from ker H. Conditioned on the span being C this weights each H
    by 2^{-d dim ker H}. Sampler B draws the rows uniformly from P_{C,t}.
    """
    n = code.n
    d = code.generator.d if d is None else d
    parities = [int(m) for m in _parity_masks(code, t)]
    if not parities:
        raise ValueError("no consistent parity")
    if len(parities) ** r > max_configs:
        raise EnumerationTooLarge("too many parity-check matrices")
    weights_a: dict[tuple[int, ...], Fraction] = {}
    for rows in _tuples(parities, r):
        weights_a[rows] = Fraction(1, 2 ** (d * _ker_dim(list(rows), n)))
    total = sum(weights_a.values())
    law_a = {h: w / total for h, w in weights_a.items()}
    law_b = {h: Fraction(1, len(parities) ** r) for h in weights_a}
    tv = sum(abs(law_a[h] - law_b[h]) for h in law_a) / 2
    return law_a, law_b, tv


def _tuples(items: list[int], r: int):
    if r == 0:
        yield ()
        return
    for head in items:
        for rest in _tuples(items, r - 1):
            yield (head,) + rest


def resampling_equivalence_check(n: int, d: int, t: int, r: int, trials: int,
                                 rng: np.random.Generator, probe: BitVector | None = None) -> Report:
    """Two-sample chi-square on wt(H e) between keygen-order and resampled H.

    Both samplers share C; B redraws each row of H independently and
    uniformly from P_{C,t}.
    """
    if probe is None:
        probe = BitVector.from_indices(n, range(0, n, 3))
    e = probe.to_bits().astype(np.int64)
    feats_a, feats_b = [], []
    row_weights_ok = True
    supports = weight_t_supports(n, t)
    for child in rng.spawn(trials):
        H = SparseParityMatrix.random(n, r, t, child)
        G = sample_kernel_matrix(H, d, child)
        P = supports[_consistent_rows(supports, _row_syndromes(G.to_bits()))]
        if len(P) == 0:
            return Report("resampling", None, {"reason": "empty parity set"})
        HB = P[child.integers(0, len(P), size=r)]
        row_weights_ok &= H.t == t and HB.shape[1] == t
        feats_a.append(int(H.syndrome_bits(e).sum()))
        feats_b.append(int((e[HB].sum(axis=1) & 1).sum()))
    table = np.array([np.bincount(feats_a, minlength=r + 1),
                      np.bincount(feats_b, minlength=r + 1)])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        stat, p, dof = 0.0, 1.0, 0
    else:
        stat, p, dof, _ = chi2_contingency(table)
    return Report("resampling", bool(p > SEPARATION_P and row_weights_ok), {
        "n": n, "d": d, "t": t, "r": r, "trials": trials,
        "chi2": float(stat), "dof": int(dof), "p_value": float(p),
        "separation_p": SEPARATION_P, "row_weights_ok": row_weights_ok,
        "counts_a": table[0].tolist(), "counts_b": table[1].tolist(),
    })


# statistical sanity tests on bit streams (uniformity only, not security)

def monobit_test(bits: np.ndarray) -> tuple[float, float]:
    """Frequency test: (chi-square with 1 dof, p-value)."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    N = bits.size
    s = 2 * int(bits.sum()) - N
    return s * s / N, float(erfc(abs(s) / math.sqrt(2 * N)))


def _psi_sq(bits: np.ndarray, m: int) -> float:
    if m == 0:
        return 0.0
    N = bits.size
    ext = np.concatenate([bits, bits[:m - 1]]).astype(np.int64)
    idx = np.zeros(N, dtype=np.int64)
    for j in range(m):
        idx = (idx << 1) | ext[j:j + N]
    counts = np.bincount(idx, minlength=1 << m)
    return float((1 << m) / N * np.dot(counts, counts) - N)


def serial_test(bits: np.ndarray, m: int = 2) -> tuple[float, float]:
    """Overlapping m-bit serial test with wraparound; returns both p-values."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    p0, p1, p2 = (_psi_sq(bits, m - j) for j in range(3))
    d1, d2 = p0 - p1, p0 - 2 * p1 + p2
    return float(gammaincc(2 ** (m - 2), d1 / 2)), float(gammaincc(2 ** (m - 3), d2 / 2))


# batch runners shared by the CLI and the acceptance suite

def _pick(seq, rng: np.random.Generator) -> int:
    return int(seq[int(rng.integers(len(seq)))])


def omar_batch(cases: int, rng: np.random.Generator, ns=range(8, 17), ts=(2, 4),
               ds=range(0, 5)) -> Report:
    """Random (C, t, x) instances; codes with no consistent parity are redrawn."""
    ns, ts, ds = list(ns), list(ts), list(ds)
    equal, skipped = 0, 0
    for child in rng.spawn(cases):
        while True:
            n, t, d = _pick(ns, child), _pick(ts, child), _pick(ds, child)
            code = SmallCode.random(n, d, child)
            if len(_parity_masks(code, t)):
                break
            skipped += 1
        equal += verify_omar_identity(code, t, BitVector.random(n, child)).equal
    return Report("omar", equal == cases, {
        "cases": cases, "exact_equal": equal, "redrawn_codes": skipped,
        "n_range": f"{min(ns)}..{max(ns)}", "t_values": list(ts), "d_max": max(ds),
    })


def parity_bias_batch(n: int, t: int, cases: int, rng: np.random.Generator) -> Report:
    """Sandwich and parity floor on random x of every weight."""
    ok, floor_ok, skipped_lower = 0, 0, 0
    floor = parity_lower_floor(n, t)
    for child in rng.spawn(cases):
        w = int(child.integers(0, n + 1))
        x = BitVector.from_indices(n, sample_fixed_weight_indices(n, w, child))
        res = verify_parity_bias_bounds(x, t)
        ok += res.ok
        floor_ok += res.value >= floor
        skipped_lower += res.lower is None
    return Report("parity-bias", ok == cases and floor_ok == cases, {
        "n": n, "t": t, "cases": cases, "sandwich_ok": ok, "floor_ok": floor_ok,
        "lower_skipped": skipped_lower, "floor": floor,
    })


def random_johnson_instance(n: int, d_max: int, rng: np.random.Generator):
    """A random code of dimension <= d_max, a word near it and an admissible tau."""
    code = SmallCode.random(n, int(rng.integers(0, d_max + 1)), rng)
    c = int(code.codewords[int(rng.integers(code.size))])
    w = int(rng.integers(0, n // 4 + 1))
    x = int_to_vec(c, n) ^ BitVector.from_indices(n, sample_fixed_weight_indices(n, w, rng))
    delta = code_bias_radius(code)
    lo = math.isqrt(int(delta * 10**6)) + 1  # thousandths strictly above sqrt(delta)
    tau = Fraction(int(rng.integers(min(lo, 1000), 1001)), 1000)
    return code, x, tau


def johnson_batch(n: int, d_max: int, cases: int, rng: np.random.Generator) -> Report:
    ok, unmet, worst = 0, 0, Fraction(0)
    for child in rng.spawn(cases):
        code, x, tau = random_johnson_instance(n, d_max, child)
        res = johnson_count(code, x, tau)
        if not res.hypothesis_met:
            unmet += 1
            continue
        ok += bool(res.ok)
        worst = max(worst, Fraction(res.count) / res.bound)
    return Report("johnson", ok == cases, {
        "n": n, "d_max": d_max, "cases": cases, "ok": ok, "hypothesis_unmet": unmet,
        "max_count_over_bound": float(worst),
    })


def hypergeometric_check(N: int, K: int, n_draw: int, t_dev: float, samples: int,
                         rng: np.random.Generator) -> Report:
    bound = hypergeometric_tail(N, K, n_draw, t_dev)
    upper, lower = hypergeometric_tail_frequencies(N, K, n_draw, t_dev, samples, rng)
    return Report("hypergeometric", upper <= bound and lower <= bound, {
        "N": N, "K": K, "n_draw": n_draw, "t_dev": t_dev, "samples": samples,
        "bound": bound, "upper_frequency": upper, "lower_frequency": lower,
    })


def chernoff_check(r: int, zeta) -> Report:
    zeta = Fraction(zeta).limit_denominator(10**9)
    smaller = chernoff_threshold(2 * r, zeta) < chernoff_threshold(r, zeta)
    return Report("chernoff", smaller, {
        "r": r, "zeta": float(zeta), "exponent": float(chernoff_exponent(r, zeta)),
        "bound": chernoff_threshold(r, zeta), "bound_at_2r": chernoff_threshold(2 * r, zeta),
    })
