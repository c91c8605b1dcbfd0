"""The fourteen acceptance criteria as runnable checks.

Each check returns a CriterionResult whose ``passed`` folds in the runtime
limit. Nothing here adjusts a threshold to make a check pass; the thresholds
come from the criteria themselves or from ``fixtures.THRESHOLDS``.
"""
from __future__ import annotations

import contextlib
import io
import math
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import analysis, games, ldpc, schemes, transforms
from .cli import compare_decode_logs, gaussian_budget, main as cli_main
from .ecc import repetition
from .f2core import BitVector, sample_fixed_weight, sample_fixed_weight_batch
from .fixtures import (SHARP_DELTA, THRESHOLDS, desk_inner_params, pk_ecc1, pk_ecc2, sharp_ecc,
                       single_bit_fixture, zero_bit_fixture)
from .ldpc import BOT, SchemeParams, syndrome_weights
from .serialize import (PUBLIC, PUBLIC_KEY_SCHEMES, deserialize_codeword, deserialize_key,
                        key_file, serialize_codeword, serialize_key, structurally_equal)

T = THRESHOLDS


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float = 0.0
    limit: float = math.inf
    details: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        body = " ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{verdict}] criterion {self.number:2d} {self.title}: {body} time={self.seconds:.1f}s"


def _fmt(v: Any) -> str:
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def _timed(number: int, title: str, limit: float, body: Callable[[], tuple[bool, dict]]
           ) -> CriterionResult:
    start = time.perf_counter()
    ok, details = body()
    seconds = time.perf_counter() - start
    return CriterionResult(number, title, bool(ok) and seconds < limit, seconds, limit, details)


# 1-5: analysis identities and bounds

def c01_omar(seed: int = 1) -> CriterionResult:
    def body():
        rep = analysis.omar_batch(T.omar_cases, np.random.default_rng(seed))
        return rep.passed, {"exact_equal": f"{rep.fields['exact_equal']}/{T.omar_cases}"}
    return _timed(1, "bias identity", 60, body)


def c02_sandwich(seed: int = 2) -> CriterionResult:
    def body():
        rep = analysis.parity_bias_batch(16, 2, T.sandwich_cases, np.random.default_rng(seed))
        return rep.passed, {"n": 16, "t": 2, "ok": f"{rep.fields['sandwich_ok']}/{T.sandwich_cases}"}
    return _timed(2, "parity-bias sandwich", 30, body)


def c03_concentration(seed: int = 3) -> CriterionResult:
    def body():
        rep = analysis.estimate_parity_concentration(64, 8, 4, T.concentration_codes,
                                                     np.random.default_rng(seed))
        f = rep.fields
        return rep.passed, {"within_20pct": f["fraction"],
                            "min_ratio": f["min_ratio"], "max_ratio": f["max_ratio"]}
    return _timed(3, "parity concentration", 300, body)


def c04_rlc(seed: int = 4) -> CriterionResult:
    def body():
        rep = analysis.check_rlc_balance(1024, 10, T.rlc_codes, np.random.default_rng(seed))
        return rep.passed, {"fraction": rep.fields["fraction"],
                            "worst": rep.fields["worst"], "bound": rep.fields["bound"]}
    return _timed(4, "random linear codes balanced", 120, body)


def c05_johnson(seed: int = 5) -> CriterionResult:
    def body():
        rep = analysis.johnson_batch(20, 4, T.johnson_cases, np.random.default_rng(seed))
        return rep.passed, {"ok": f"{rep.fields['ok']}/{T.johnson_cases}",
                            "max_count_over_bound": rep.fields["max_count_over_bound"]}
    return _timed(5, "Johnson counting", 60, body)


# 6-8: LDPC schemes at the fixture

def c06_zero_bit(seed: int = 6) -> CriterionResult:
    def body():
        p = zero_bit_fixture()
        rng = np.random.default_rng(seed)
        keys = ldpc.keygen_zero_bit(p, rng)
        trials = T.robustness_trials
        x = ldpc.encode_zero_bit_many(keys.pk, trials, rng)
        x ^= sample_fixed_weight_batch(trials, p.n, p.flip_budget, rng)
        robust = float(ldpc.decode_zero_bit_many(keys.sk, x).mean())
        u = rng.integers(0, 2, size=(trials, p.n), dtype=np.uint8)
        sound = float((~ldpc.decode_zero_bit_many(keys.sk, u)).mean())
        ok = robust >= T.robustness_pass and sound >= T.soundness_pass
        return ok, {"flips": p.flip_budget, "decodes_to_1": robust, "uniform_to_bot": sound}
    return _timed(6, "zero-bit robustness", 600, body)


def _exclusive_rule_holds(keys: ldpc.SingleBitKeys, x: np.ndarray, out: np.ndarray) -> tuple[bool, int]:
    """Recompute both detectors and check the decoder's answer against the rule."""
    p = keys.sk.params
    w0 = syndrome_weights(keys.sk.H0, keys.sk.z, x)
    w1 = syndrome_weights(keys.sk.H1, keys.sk.z, x)
    thr = p.threshold
    f0, f1 = w0 < thr, w1 < thr
    want = np.full(len(x), BOT)
    want[f0 & (w1 > thr)] = 0
    want[f1 & (w0 > thr)] = 1
    both = f0 & f1
    return bool(np.array_equal(want, out) and (out[both] == BOT).all()), int(both.sum())


def c07_single_bit(seed: int = 7) -> CriterionResult:
    def body():
        p = single_bit_fixture()
        rng = np.random.default_rng(seed)
        keys = ldpc.keygen_single_bit(p, rng)
        trials = T.robustness_trials
        rates, rule_ok, collisions = [], True, 0
        for m in (0, 1):
            x = ldpc.encode_single_bit_many(keys.pk, np.full(trials, m), rng)
            x ^= sample_fixed_weight_batch(trials, p.n, p.flip_budget, rng)
            out = ldpc.decode_single_bit_many(keys.sk, x)
            rates.append(float((out == m).mean()))
            ok, both = _exclusive_rule_holds(keys, x, out)
            rule_ok &= ok
            collisions += both
        # the bare pad and light noise around it fire both detectors
        z = keys.pk.z.to_bits()
        x = np.tile(z, (100, 1)) ^ sample_fixed_weight_batch(100, p.n, 8, rng)
        out = ldpc.decode_single_bit_many(keys.sk, x)
        ok, both = _exclusive_rule_holds(keys, x, out)
        rule_ok &= ok
        collisions += both
        passed = min(rates) >= T.robustness_pass and rule_ok
        return passed, {"flips": p.flip_budget, "rate_m0": rates[0], "rate_m1": rates[1],
                        "collisions": collisions, "rule_exact": rule_ok}
    return _timed(7, "single-bit correctness and exclusivity", 600, body)


def c08_gaussian(seed: int = 8) -> CriterionResult:
    def body():
        p = zero_bit_fixture()
        scheme = schemes.ZeroBitScheme(p)
        keys = scheme.keygen(np.random.default_rng(seed))
        k = gaussian_budget(p)
        trials = T.attack_trials
        wins, weights = 0, []
        for s in np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64):
            adv = games.GaussianEliminationAdversary(scheme, k)
            out = games.run_robust_pk_game(scheme, adv, p.delta, int(s), keys, leak_secret=True)
            wins += bool(out.won)
            weights.append(out.info.get("distance", -1))
        rate = wins / trials
        return rate >= T.attack_pass, {"k": k, "target_0.6r": math.ceil(0.6 * p.r),
                                       "budget": p.flip_budget, "win_rate": rate,
                                       "max_flips": max(weights)}
    return _timed(8, "Gaussian-elimination attack", 300, body)


# 9-11: transforms and games

def c09_sharp(seed: int = 9) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        keys = transforms.keygen_sharp(desk_inner_params(), sharp_ecc(), rng, SHARP_DELTA)
        budget = keys.flip_budget
        good, inner_ok, over_rejected = 0, 0, 0
        for _ in range(T.sharp_codewords):
            m = BitVector.random(keys.message_bits, rng)
            c = transforms.sharp_encode(keys, m, rng)
            good += transforms.sharp_decode(keys, c ^ sample_fixed_weight(c.n, budget, rng)) == m
            over = transforms.sharp_decode_traced(keys, c ^ sample_fixed_weight(c.n, budget + 1, rng))
            if over.inner_ok:
                inner_ok += 1
                over_rejected += over.message is None
        rate = good / T.sharp_codewords
        ok = rate >= T.sharp_pass and over_rejected == inner_ok and inner_ok > 0
        return ok, {"budget": budget, "at_budget_decoded": rate,
                    "over_budget_rejected": f"{over_rejected}/{inner_ok}"}
    return _timed(9, "sharp threshold", 600, body)


def c10_alt_decode(seed: int = 10) -> CriterionResult:
    def body():
        keys = transforms.keygen_cca(desk_inner_params(), pk_ecc1(), pk_ecc2(),
                                     np.random.default_rng(seed))
        rep = games.run_alt_decode_fuzz(keys, T.fuzz_queries, seed)
        kinds = " ".join(f"{k}:{a}/{t}" for k, (a, t) in rep.by_kind.items())
        return rep.agree == rep.total, {"agree": f"{rep.agree}/{rep.total}", "kinds": kinds}
    return _timed(10, "key-less decode agrees with real decode", 300, body)


def c11_real_ideal(seed: int = 11) -> CriterionResult:
    def body():
        scheme = schemes.SharpScheme(desk_inner_params(), sharp_ecc(), SHARP_DELTA)
        keys = scheme.keygen(np.random.default_rng(seed))
        q = T.ideal_queries
        res = games.run_real_ideal_games(scheme, lambda: games.ScriptedDistinguisher(q, q, 0.2),
                                         scheme.delta(keys), seed, keys)
        agree, total = compare_decode_logs(res.real.log, res.ideal.log)
        frac = agree / max(total, 1)
        return frac >= T.ideal_agreement, {"agree": f"{agree}/{total}", "agreement": frac}
    return _timed(11, "real/ideal agreement", 300, body)


# 12-14: structure, statistics, reproducibility

def c12_rates(seed: int = 12) -> CriterionResult:
    def body():
        rng = np.random.default_rng(seed)
        inner = desk_inner_params()
        pk_keys = transforms.keygen_pk_rate(inner, pk_ecc1(), pk_ecc2(), rng)
        pk = pk_keys.pk
        k, j = pk.ecc1.n_out, inner.n
        pk_lengths = {transforms.pk_rate_encode(pk, BitVector.random(pk.message_bits, rng), rng).n
                      for _ in range(5)}
        small = desk_inner_params(lam=16)
        sk = transforms.keygen_sk_rate(small, repetition(64, 5), rng)
        msgs = [BitVector.zeros(sk.message_bits), BitVector.ones(sk.message_bits)]
        msgs += [BitVector.random(sk.message_bits, rng) for _ in range(48)]
        sk_lengths = {transforms.sk_rate_encode(sk, m, rng).n for m in msgs}
        expected_sk = small.lam * small.n + sk.ecc.n_out
        ok = pk_lengths == {2 * k * j} and sk_lengths == {expected_sk}
        return ok, {"pk_length": sorted(pk_lengths), "2kj": 2 * k * j,
                    "sk_lengths": sorted(sk_lengths), "sk_expected": expected_sk,
                    "messages": len(msgs)}
    return _timed(12, "rate structure", 60, body)


def codeword_stream_stats(bits: np.ndarray) -> dict[str, float]:
    _, p_mono = analysis.monobit_test(bits)
    p1, p2 = analysis.serial_test(bits, 2)
    return {"monobit_p": p_mono, "serial_p1": p1, "serial_p2": p2}


def c13_statistics(seed: int = 13) -> CriterionResult:
    def body():
        p = zero_bit_fixture()
        rng = np.random.default_rng(seed)
        keys = ldpc.keygen_zero_bit(p, rng)
        x = ldpc.encode_zero_bit_many(keys.pk, T.stat_codewords, rng)
        stats = codeword_stream_stats(x.ravel())
        alpha = analysis.SEPARATION_P
        # the verdict uses the pooled stream, which sees structure shared across
        # codewords; per-codeword rejections are reported alongside
        per_word = np.mean([min(codeword_stream_stats(row).values()) <= alpha for row in x])
        return all(v > alpha for v in stats.values()), {**stats, "alpha": alpha,
                                                        "per_codeword_reject": float(per_word)}
    return _timed(13, "statistical sanity", 120, body)


def _cli(argv: list[str]) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = cli_main(argv)
    return code, buf.getvalue()


TINY = ["--n", "128", "--r", "64", "--d", "4", "--t", "2",
        "--eta", "1/10", "--zeta", "3/20", "--delta", "1/20"]
DESK = ["--n", "512", "--r", "256", "--d", "8", "--t", "2",
        "--eta", "1/20", "--zeta", "17/100", "--delta", "1/20"]

CLI_SCRIPT: list[list[str]] = [
    ["keygen", "--scheme", "zero-bit", *TINY, "--seed", "1", "--out", "z"],
    ["keygen", "--scheme", "single-bit", *DESK, "--seed", "2", "--out", "s"],
    ["keygen", "--scheme", "sk-rate", "--lam", "16", "--ecc", "rep:k=16:l=5", "--seed", "3",
     "--out", "m"],
    ["keygen", "--scheme", "sharp", "--seed", "4", "--out", "h"],
    ["keygen", "--scheme", "pk-rate", "--seed", "5", "--out", "p"],
    ["keygen", "--scheme", "cca", "--seed", "6", "--out", "c"],
    ["encode", "--key", "z.pk", "--message", "1", "--seed", "7", "--out", "z.cw"],
    ["decode", "--key", "z.sk", "--codeword", "z.cw"],
    ["encode", "--key", "m.sk", "--message", "a5f0", "--seed", "8", "--out", "m.cw"],
    ["decode", "--key", "m.sk", "--codeword", "m.cw"],
    ["encode", "--key", "c.pk", "--message", "00" * 32, "--seed", "9", "--out", "c.cw"],
    ["decode", "--key", "c.sk", "--codeword", "c.cw"],
    ["verify-key", "--key", "s.sk"],
    ["game", "robust-sk", "--key", "s.sk", "--trials", "3", "--seed", "10"],
    ["attack", "quarter", "--key", "s.sk", "--trials", "3", "--seed", "11"],
    ["analyze", "omar", "--cases", "20", "--seed", "12"],
    ["analyze", "rlc", "--n", "256", "--d", "4", "--cases", "10", "--seed", "13"],
]


def _run_script(workdir: Path) -> list[tuple[int, str, dict[str, bytes]]]:
    results = []
    old = os.getcwd()
    os.chdir(workdir)
    try:
        for argv in CLI_SCRIPT:
            code, out = _cli(argv)
            files = {p.name: p.read_bytes() for p in sorted(workdir.iterdir())}
            results.append((code, out, files))
    finally:
        os.chdir(old)
    return results


def _random_instance(i: int, rng: np.random.Generator, fixed: dict[int, Any]) -> list[Any]:
    kind = i % 4
    if kind == 0:
        return [BitVector.random(int(rng.integers(0, 3000)), rng)]
    if kind in (1, 2):
        n = int(rng.choice([64, 96, 128]))
        p = SchemeParams(n, int(rng.integers(0, 4)), 2, int(rng.integers(1, n)), 0.1, 0.15, 0.05)
        sid = kind - 1
        keys = ldpc.keygen_zero_bit(p, rng) if sid == 0 else ldpc.keygen_single_bit(p, rng)
        return [key_file(sid, keys), key_file(sid, keys.pk, PUBLIC)]
    sid = int(rng.integers(2, 6))
    out = [key_file(sid, fixed[sid])]
    if sid in PUBLIC_KEY_SCHEMES:
        out.append(key_file(sid, fixed[sid].pk, PUBLIC))
    return out


def serialization_roundtrips(cases: int, seed: int) -> tuple[int, int]:
    rng = np.random.default_rng(seed)
    inner = desk_inner_params()
    fixed = {
        2: transforms.keygen_sk_rate(desk_inner_params(lam=16), repetition(16, 5), rng),
        3: transforms.keygen_pk_rate(inner, pk_ecc1(), pk_ecc2(), rng),
        4: transforms.keygen_sharp(inner, sharp_ecc(), rng, SHARP_DELTA),
        5: transforms.keygen_cca(inner, pk_ecc1(), pk_ecc2(), rng),
    }
    ok = total = 0
    for i in range(cases):
        for obj in _random_instance(i, rng, fixed):
            total += 1
            if isinstance(obj, BitVector):
                data = serialize_codeword(obj)
                ok += deserialize_codeword(data) == obj and serialize_codeword(obj) == data
            else:
                data = serialize_key(obj)
                back = deserialize_key(data)
                ok += structurally_equal(back.key, obj.key) and serialize_key(back) == data
    return ok, total


def c14_reproducibility(seed: int = 14) -> CriterionResult:
    def body():
        runs = []
        for _ in range(2):
            workdir = Path(tempfile.mkdtemp(prefix="prc-repro-"))
            try:
                runs.append(_run_script(workdir))
            finally:
                shutil.rmtree(workdir, ignore_errors=True)
        same = sum(a == b for a, b in zip(*runs))
        clean = all(code in (0, 1) for code, _, _ in runs[0])
        ok_rt, total_rt = serialization_roundtrips(T.serialization_cases, seed)
        ok = same == len(CLI_SCRIPT) and clean and ok_rt == total_rt
        return ok, {"identical_commands": f"{same}/{len(CLI_SCRIPT)}",
                    "roundtrips": f"{ok_rt}/{total_rt}"}
    return _timed(14, "reproducibility", 60, body)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: c01_omar, 2: c02_sandwich, 3: c03_concentration, 4: c04_rlc, 5: c05_johnson,
    6: c06_zero_bit, 7: c07_single_bit, 8: c08_gaussian, 9: c09_sharp, 10: c10_alt_decode,
    11: c11_real_ideal, 12: c12_rates, 13: c13_statistics, 14: c14_reproducibility,
}
