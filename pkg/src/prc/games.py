"""Security games, adversaries, error channels and the two named attacks.

Every game takes an integer seed and derives all of its randomness from
it, so an outcome can be replayed exactly. Adversaries follow a three-step
protocol: ``receive_keys`` (public material only), ``oracle_phase`` (with
explicit oracle handles) and ``final_output``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, NamedTuple

import numpy as np
from scipy.stats import binomtest

from .f2core import (BitVector, LinearSolver, RowEchelon, SparseParityMatrix,
                     pack_bits, sample_fixed_weight)
from .primitives import random_bytes, ro_hash, rng_from_seed
from .ldpc import as_fraction
from .schemes import ONE, Scheme
from .transforms import AltDecoder, CcaKeys, cca_decode, cca_encode_fixed


def fmt_message(m: BitVector | None) -> str:
    if m is None:
        return "BOT"
    return m.to_bytes().hex() if m.n > 1 else str(m[0])


# records

@dataclass
class Transcript:
    entries: list[tuple[BitVector, BitVector]] = field(default_factory=list)

    def append(self, m: BitVector, c: BitVector) -> None:
        self.entries.append((m, c))

    def neighbors(self, x: BitVector, budget: int) -> list[tuple[BitVector, BitVector]]:
        return [(m, c) for m, c in self.entries if c.n == x.n and (c ^ x).weight() <= budget]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class GameOutcome:
    game: str
    seed: int
    won: bool | None = None
    bit: int | None = None
    aborted: bool = False
    reason: str = ""
    info: dict[str, Any] = field(default_factory=dict)
    log: list[dict[str, Any]] = field(default_factory=list)

    def records(self) -> list[str]:
        lines = [f"game={self.game}", f"seed={self.seed}"]
        for k in sorted(self.info):
            lines.append(f"{k}={self.info[k]}")
        for i, q in enumerate(self.log):
            body = " ".join(f"{k}={v}" for k, v in q.items())
            lines.append(f"query[{i}]={body}")
        if self.aborted:
            lines.append(f"aborted={self.reason}")
        if self.won is not None:
            lines.append(f"won={int(self.won)}")
        if self.bit is not None:
            lines.append(f"bit={self.bit}")
        return lines


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return (float(ci.low), float(ci.high))


# channels

@dataclass(frozen=True)
class Channel:
    kind: str  # "fixed-weight-random" | "burst" | "adversary-driven"
    rate: float

    def __post_init__(self):
        if self.kind not in ("fixed-weight-random", "burst", "adversary-driven"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not 0 <= self.rate <= 1:
            raise ValueError("rate must lie in [0, 1]")

    def budget(self, n: int) -> int:
        return math.floor(self.rate * n)

    def apply(self, x: BitVector, rng: np.random.Generator,
              error: BitVector | None = None) -> BitVector:
        w = self.budget(x.n)
        if self.kind == "fixed-weight-random":
            return x ^ sample_fixed_weight(x.n, w, rng)
        if self.kind == "burst":
            start = int(rng.integers(0, x.n - w + 1))
            return x ^ BitVector.from_indices(x.n, np.arange(start, start + w))
        if error is None:
            raise ValueError("adversary-driven channel needs an error vector")
        if error.weight() > math.ceil(self.rate * x.n):
            raise ValueError("adversary error exceeds the channel budget")
        return x ^ error


# adversaries

class ProtocolViolation(Exception):
    pass


class Oracles:
    """Oracle handles passed to an adversary, with a per-query log."""

    def __init__(self, encode=None, decode=None, ro=None):
        self._encode, self._decode, self._ro = encode, decode, ro
        self.log: list[dict[str, Any]] = []
        self.ro_log: list[bytes] = []

    def encode(self, m: BitVector) -> BitVector:
        if self._encode is None:
            raise ProtocolViolation("no encoding oracle in this game")
        c = self._encode(m)
        self.log.append({"op": "encode", "m": fmt_message(m), "wt": c.weight()})
        return c

    def decode(self, x: BitVector) -> BitVector | None:
        if self._decode is None:
            raise ProtocolViolation("no decoding oracle in this game")
        out = self._decode(x)
        self.log.append({"op": "decode", "wt": x.weight(), "out": fmt_message(out)})
        return out

    def ro(self, data: bytes) -> tuple[bytes, bytes]:
        if self._ro is None:
            raise ProtocolViolation("no hash oracle in this game")
        self.ro_log.append(bytes(data))
        return self._ro(data)


@dataclass
class GameInfo:
    length: int
    message_bits: int
    delta: Fraction
    budget: int
    fixed_message: BitVector | None = None  # zero-bit scheme only encodes 1

    def random_message(self, rng: np.random.Generator) -> BitVector:
        if self.fixed_message is not None:
            return self.fixed_message
        return BitVector.random(self.message_bits, rng)


class Adversary:
    def receive_keys(self, pk: Any, info: GameInfo) -> None:
        self.pk, self.info = pk, info

    def receive_secret(self, keys: Any) -> None:
        """Only called by games run with the secret-key leak hook."""
        raise ProtocolViolation("this adversary does not use leaked keys")

    def oracle_phase(self, oracles: Oracles, rng: np.random.Generator) -> None:
        pass

    def final_output(self) -> Any:
        raise NotImplementedError


class ReplayAdversary(Adversary):
    """Asks for codewords and hands one back untouched."""

    def __init__(self, queries: int = 3):
        self.queries = queries

    def oracle_phase(self, oracles, rng):
        self.seen = [oracles.encode(self.info.random_message(rng)) for _ in range(self.queries)]
        self.choice = self.seen[int(rng.integers(len(self.seen)))]

    def final_output(self):
        return self.choice


class RandomFlipAdversary(ReplayAdversary):
    """Flips ``floor(rate * n)`` random bits of one transcript codeword."""

    def __init__(self, rate: float | None = None, queries: int = 3):
        super().__init__(queries)
        self.rate = rate

    def oracle_phase(self, oracles, rng):
        super().oracle_phase(oracles, rng)
        w = self.info.budget if self.rate is None else math.floor(self.rate * self.info.length)
        self.choice = self.choice ^ sample_fixed_weight(self.info.length, w, rng)


class FarAdversary(ReplayAdversary):
    """Submits a fresh uniform string, which has no transcript neighbor."""

    def oracle_phase(self, oracles, rng):
        super().oracle_phase(oracles, rng)
        self.choice = BitVector.random(self.info.length, rng)


class PkRandomFlipAdversary(Adversary):
    """Public-key game: encodes itself with chosen r, then flips bits."""

    def __init__(self, scheme: Scheme, rate: float | None = None):
        self.scheme, self.rate = scheme, rate

    def oracle_phase(self, oracles, rng):
        m = self.info.random_message(rng)
        self.r = random_bytes(rng, 16)
        c = self.scheme.encode_public(self.pk, m, rng_from_seed(self.r))
        w = self.info.budget if self.rate is None else math.floor(self.rate * self.info.length)
        self.out = (m, self.r, c ^ sample_fixed_weight(self.info.length, w, rng))

    def final_output(self):
        return self.out


class PkReplayAdversary(PkRandomFlipAdversary):
    def __init__(self, scheme: Scheme):
        super().__init__(scheme, rate=0.0)


class _AttackPlan(NamedTuple):
    rows: list[int]
    solver: LinearSolver


@lru_cache(maxsize=8)
def _attack_plan(H: SparseParityMatrix, k: int) -> _AttackPlan:
    """Solver over the first k rows of H that are independent of earlier ones."""
    rows = pack_bits(H.to_dense_bits())
    ech = RowEchelon(H.n, k)
    take = []
    for i in range(H.r):
        if ech.rank == k:
            break
        if ech.insert(rows[i]):
            take.append(i)
    if ech.rank < k:
        raise ValueError(f"H has rank {ech.rank} < k = {k}")
    return _AttackPlan(take, LinearSolver(rows[take], H.n))


def gaussian_elimination_attack(H: SparseParityMatrix, k: int, base: BitVector) -> BitVector | None:
    """Error e with wt(e) <= k such that base + e violates k checks of H.

    The checks are the first k rows that are independent of the rows before
    them (dependent rows are skipped, extending k). Pivots are the lowest
    available columns, so the output is deterministic.
    """
    if base.n != H.n:
        raise ValueError("base length must match H")
    if k < 0 or k > H.r:
        raise ValueError("need 0 <= k <= r")
    if k == 0:
        return BitVector.zeros(H.n)
    try:
        plan = _attack_plan(H, k)
    except ValueError:
        return None
    syn = H.syndrome_bits(base.to_bits())[plan.rows]
    e = plan.solver.solve(1 ^ syn)
    return None if e is None else BitVector.from_bits(e)


class GaussianEliminationAdversary(Adversary):
    """Needs H, so it can only run through the secret-key leak hook."""

    def __init__(self, scheme: Scheme, k: int):
        self.scheme, self.k = scheme, k
        self.sk = None

    def receive_secret(self, keys):
        self.sk = keys.sk

    def oracle_phase(self, oracles, rng):
        if self.sk is None:
            raise ProtocolViolation("attack needs the leaked parity checks")
        m = BitVector.from_bits([1])
        self.r = random_bytes(rng, 16)
        c = self.scheme.encode_public(self.pk, m, rng_from_seed(self.r))
        e = gaussian_elimination_attack(self.sk.H, self.k, c ^ self.pk.z)
        if e is None:
            raise ProtocolViolation("attack system infeasible")
        self.weight = e.weight()
        self.out = (m, self.r, c ^ e)

    def final_output(self):
        return self.out


class QuarterResult(NamedTuple):
    x0: BitVector
    x1: BitVector
    x_mid: BitVector


def quarter_midpoint(x0: BitVector, x1: BitVector) -> BitVector:
    """Agrees with x0 on the first half of the disagreement set, x1 elsewhere."""
    diff = (x0 ^ x1).support()
    half = diff[: diff.shape[0] // 2]
    return x1 ^ BitVector.from_indices(x0.n, half)


def quarter_attack(scheme: Scheme, keys: Any, rng: np.random.Generator) -> QuarterResult:
    if scheme.message_bits(keys) != 1 or scheme.name != "single-bit":
        raise ValueError("the quarter attack targets the single-bit scheme")
    x0 = scheme.encode(keys, BitVector.from_bits([0]), rng)
    x1 = scheme.encode(keys, BitVector.from_bits([1]), rng)
    return QuarterResult(x0, x1, quarter_midpoint(x0, x1))


# games

def _spawn(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _info(scheme: Scheme, keys: Any, delta) -> GameInfo:
    n = scheme.length(keys)
    delta = as_fraction(delta)
    fixed = ONE if scheme.name == "zero-bit" else None
    return GameInfo(n, scheme.message_bits(keys), delta, math.floor(delta * n), fixed)


def run_robust_sk_game(scheme: Scheme, adversary: Adversary, delta, seed: int,
                       keys: Any = None) -> GameOutcome:
    """Encoding-oracle robustness game.

    The adversary wins iff some transcript pair (m, c) has wt(x + c) <= delta n
    while decode(x) != m. ``keys`` may be passed to reuse a key across trials.
    """
    g_key, g_ch, g_adv = _spawn(seed, 3)
    keys = scheme.keygen(g_key) if keys is None else keys
    info = _info(scheme, keys, delta)
    transcript = Transcript()
    out = GameOutcome("robust-sk", seed, info={"n": info.length, "budget": info.budget})

    def enc(m):
        c = scheme.encode(keys, m, g_ch)
        transcript.append(m, c)
        return c

    oracles = Oracles(encode=enc)
    try:
        adversary.receive_keys(None, info)
        adversary.oracle_phase(oracles, g_adv)
        x = adversary.final_output()
        if not isinstance(x, BitVector) or x.n != info.length:
            raise ProtocolViolation("final output must be a word of the code length")
    except ProtocolViolation as exc:
        out.aborted, out.reason, out.won, out.log = True, str(exc), False, oracles.log
        return out
    out.log = oracles.log
    near = transcript.neighbors(x, info.budget)
    decoded = scheme.decode(keys, x) if near else None
    out.won = any(decoded != m for m, _ in near)
    out.info["neighbors"] = len(near)
    out.info["decoded"] = fmt_message(decoded)
    return out


def run_robust_pk_game(scheme: Scheme, adversary: Adversary, delta, seed: int,
                       keys: Any = None, leak_secret: bool = False) -> GameOutcome:
    """Public-key robustness game: the adversary sends (m, r, x).

    ``leak_secret`` hands the full key to the adversary. It exists only to
    demonstrate attacks that need the parity checks.
    """
    g_key, g_adv = _spawn(seed, 2)
    keys = scheme.keygen(g_key) if keys is None else keys
    info = _info(scheme, keys, delta)
    pk = scheme.public(keys)
    out = GameOutcome("robust-pk", seed, info={"n": info.length, "budget": info.budget})
    try:
        adversary.receive_keys(pk, info)
        if leak_secret:
            adversary.receive_secret(keys)
        adversary.oracle_phase(Oracles(), g_adv)
        m, r, x = adversary.final_output()
        if not isinstance(r, (bytes, bytearray)) or not r:
            raise ProtocolViolation("malformed encoding randomness")
        if not isinstance(x, BitVector) or x.n != info.length:
            raise ProtocolViolation("final output must be a word of the code length")
        c = scheme.encode_public(pk, m, rng_from_seed(bytes(r)))
    except (ProtocolViolation, ValueError) as exc:
        out.aborted, out.reason, out.won = True, str(exc), False
        return out
    dist = (x ^ c).weight()
    decoded = scheme.decode(keys, x)
    out.won = dist <= info.budget and decoded != m
    out.info.update(distance=dist, decoded=fmt_message(decoded))
    return out


class RealIdealResult(NamedTuple):
    bit_real: int
    bit_ideal: int
    real: GameOutcome
    ideal: GameOutcome


def run_real_ideal_games(scheme: Scheme, make_distinguisher: Callable[[], Adversary], delta,
                         seed: int, keys: Any = None) -> RealIdealResult:
    """Run a fresh distinguisher once in each world.

    Challenger coins are independent between the worlds. The distinguisher
    gets the same coins in both, so query i means the same thing in each
    world and responses can be compared query by query.
    """
    g_key, g_real, g_ideal, g_lookup = _spawn(seed, 4)
    adv_seed = int(np.random.SeedSequence(seed).generate_state(1)[0])
    keys = scheme.keygen(g_key) if keys is None else keys
    info = _info(scheme, keys, delta)
    outcomes = []
    for world in ("real", "ideal"):
        transcript = Transcript()
        if world == "real":
            def enc(m):
                c = scheme.encode(keys, m, g_real)
                transcript.append(m, c)
                return c

            def dec(x):
                return scheme.decode(keys, x)
        else:
            def enc(m):
                c = BitVector.random(info.length, g_ideal)
                transcript.append(m, c)
                return c

            def dec(x):
                near = transcript.neighbors(x, info.budget)
                if not near:
                    return None
                return near[int(g_lookup.integers(len(near)))][0]
        adv = make_distinguisher()
        oracles = Oracles(encode=enc, decode=dec)
        adv.receive_keys(None, info)
        adv.oracle_phase(oracles, np.random.default_rng(adv_seed))
        bit = int(adv.final_output())
        outcomes.append(GameOutcome(f"real-ideal:{world}", seed, bit=bit,
                                    info={"n": info.length, "budget": info.budget},
                                    log=oracles.log))
    return RealIdealResult(outcomes[0].bit, outcomes[1].bit, outcomes[0], outcomes[1])


class ScriptedDistinguisher(Adversary):
    """Encodes, then decodes perturbed copies of its codewords and random strings.

    Outputs 1 if any decode answer differs from what an ideal code would say.
    """

    def __init__(self, encodes: int = 100, decodes: int = 100, random_fraction: float = 0.2):
        self.encodes, self.decodes, self.random_fraction = encodes, decodes, random_fraction

    def oracle_phase(self, oracles, rng):
        info = self.info
        pairs = []
        for _ in range(self.encodes):
            m = info.random_message(rng)
            pairs.append((m, oracles.encode(m)))
        self.expected, self.answers = [], []
        for _ in range(self.decodes):
            if rng.random() < self.random_fraction:
                x, want = BitVector.random(info.length, rng), None
            else:
                m, c = pairs[int(rng.integers(len(pairs)))]
                w = int(rng.integers(0, info.budget + 1))
                x, want = c ^ sample_fixed_weight(info.length, w, rng), m
            self.expected.append(want)
            self.answers.append(oracles.decode(x))

    def final_output(self):
        return int(any(a != e for a, e in zip(self.answers, self.expected)))


class QueryLoggingOracle:
    """Hash oracle that records every query as (m, r) once parsed."""

    def __init__(self, keys_pk, log: list[bytes]):
        self.pk, self.log = keys_pk, log

    def __call__(self, data: bytes) -> tuple[bytes, bytes]:
        self.log.append(bytes(data))
        return ro_hash(self.pk.ro, data, self.pk.lam)


def parse_ro_query(data: bytes, lam: int) -> tuple[BitVector, bytes] | None:
    """Inverse of the r||m byte framing, or None if the bytes do not parse."""
    rb = lam // 8
    if len(data) < rb + 4:
        return None
    n = int.from_bytes(data[rb:rb + 4], "big")
    body = data[rb + 4:]
    if len(body) != (n + 7) // 8:
        return None
    m = BitVector.from_bytes(body, n)
    if m.to_bytes() != body:
        return None
    return m, data[:rb]


def run_cca_game(scheme: Scheme, adversary: Adversary, delta, b: int, seed: int,
                 keys: Any = None) -> GameOutcome:
    """Chosen-codeword game. b = 0 is the real world; b = 1 answers encodes
    with random strings and decodes by transcript lookup, falling back to the
    real decoder when no transcript codeword is within delta n."""
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    g_key, g_ch, g_adv, g_lookup = _spawn(seed, 4)
    keys = scheme.keygen(g_key) if keys is None else keys
    info = _info(scheme, keys, delta)
    pk = scheme.public(keys)
    transcript = Transcript()
    calls = {"real_decoder": 0}

    def real_decode(x):
        calls["real_decoder"] += 1
        return scheme.decode(keys, x)

    if b == 0:
        def enc(m):
            c = scheme.encode(keys, m, g_ch)
            transcript.append(m, c)
            return c
        dec = real_decode
    else:
        def enc(m):
            c = BitVector.random(info.length, g_ch)
            transcript.append(m, c)
            return c

        def dec(x):
            near = transcript.neighbors(x, info.budget)
            if near:
                return near[int(g_lookup.integers(len(near)))][0]
            return real_decode(x)

    ro = None
    if hasattr(pk, "ro"):
        def ro(data):
            return ro_hash(pk.ro, data, pk.lam)
    oracles = Oracles(encode=enc, decode=dec, ro=ro)
    out = GameOutcome(f"cca:b={b}", seed, info={"n": info.length, "budget": info.budget})
    try:
        adversary.receive_keys(pk, info)
        adversary.oracle_phase(oracles, g_adv)
        out.bit = int(adversary.final_output())
    except ProtocolViolation as exc:
        out.aborted, out.reason = True, str(exc)
    out.log = oracles.log
    out.info["real_decoder_calls"] = calls["real_decoder"]
    out.info["ro_queries"] = len(oracles.ro_log)
    return out


class FuzzReport(NamedTuple):
    total: int
    agree: int
    by_kind: dict[str, tuple[int, int]]
    mismatches: list[dict[str, Any]]


def run_alt_decode_fuzz(keys: CcaKeys, queries: int, seed: int, encodes: int = 40,
                        self_encodes: int = 40) -> FuzzReport:
    """Compare the key-less decoder with the real one on mixed queries.

    The harness plays a real-world adversary: it asks for honest encodings,
    builds its own codewords through the logged hash oracle, and then sends
    decode queries of four kinds: transcript neighbors within delta n,
    transcript words just beyond delta n, perturbed self-made encodings and
    uniform strings.
    """
    g_ch, g_adv, g_tie = _spawn(seed, 3)
    pk = keys.pk
    budget = pk.flip_budget
    n = pk.length
    issued: list[tuple[BitVector, BitVector]] = []
    for _ in range(encodes):
        m = BitVector.random(pk.message_bits, g_adv)
        issued.append((m, cca_encode_fixed(pk, m, random_bytes(g_ch, pk.lam // 8))))
    raw_log: list[bytes] = []
    oracle = QueryLoggingOracle(pk, raw_log)
    own = []
    for _ in range(self_encodes):
        m = BitVector.random(pk.message_bits, g_adv)
        r = random_bytes(g_adv, pk.lam // 8)
        own.append((m, cca_encode_fixed(pk, m, r, oracle)))
    # stray hash queries that never become codewords
    for _ in range(10):
        oracle(random_bytes(g_adv, 40))
    ro_log = [p for p in (parse_ro_query(d, pk.lam) for d in raw_log) if p is not None]
    alt = AltDecoder(pk)
    kinds = ("neighbor", "beyond", "self", "random")
    tally = {k: [0, 0] for k in kinds}
    mismatches = []
    for i in range(queries):
        kind = kinds[int(g_adv.integers(len(kinds)))]
        if kind == "random":
            x = BitVector.random(n, g_adv)
        else:
            pool = own if kind == "self" else issued
            _, c = pool[int(g_adv.integers(len(pool)))]
            if kind == "beyond":
                w = budget + 1 + int(g_adv.integers(0, max(budget, 1)))
            else:
                w = int(g_adv.integers(0, budget + 1))
            x = c ^ sample_fixed_weight(n, w, g_adv)
        real = cca_decode(keys, x)
        guess = alt(x, ro_log, issued, g_tie)
        tally[kind][1] += 1
        if real == guess:
            tally[kind][0] += 1
        else:
            mismatches.append({"query": i, "kind": kind, "real": fmt_message(real),
                               "alt": fmt_message(guess)})
    agree = sum(v[0] for v in tally.values())
    return FuzzReport(queries, agree, {k: tuple(v) for k, v in tally.items()}, mismatches)
