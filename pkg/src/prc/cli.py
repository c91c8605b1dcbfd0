"""Command-line front end.

Exit codes: 0 success or pass, 1 check failed, 2 usage or parameter error,
3 corrupt input. Reports are key=value lines ending in RESULT=pass|fail.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import analysis, games, ldpc, schemes
from .ecc import from_name
from .f2core import BitVector, DenseMatrix
from .fixtures import (SHARP_DELTA, THRESHOLDS, desk_inner_params, pk_ecc1, pk_ecc2,
                       sharp_ecc)
from .games import fmt_message, wilson_interval
from .ldpc import SchemeParams, as_fraction
from .primitives import fresh_seed
from .serialize import (PUBLIC, SCHEME_IDS, SECRET, CorruptFile, KeyFile, deserialize_codeword,
                        deserialize_key, key_file, serialize_codeword, serialize_key)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CORRUPT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(lines: list[str], passed: bool) -> int:
    for line in lines:
        print(line)
    print(f"RESULT={'pass' if passed else 'fail'}")
    return EXIT_OK if passed else EXIT_FAIL


def _rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def _seed(args) -> int:
    return fresh_seed() if args.seed is None else args.seed


def _load_key(path: str) -> KeyFile:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return deserialize_key(data)


def scheme_for(kf: KeyFile) -> schemes.Scheme:
    """Rebuild the scheme wrapper that produced a key file."""
    p, key = kf.params, kf.key
    sid = kf.scheme_id
    if sid == 0:
        return schemes.ZeroBitScheme(p)
    if sid == 1:
        return schemes.SingleBitScheme(p)
    if sid == 2:
        return schemes.SkRateScheme(p, key.ecc, key.delta)
    if sid == 3:
        pk = key if kf.kind == PUBLIC else key.pk
        return schemes.PkRateScheme(p, pk.ecc1, pk.ecc2)
    if sid == 4:
        return schemes.SharpScheme(p, key.inner.ecc, key.delta)
    inner = key.inner if kf.kind == PUBLIC else key.inner_pk
    return schemes.CcaScheme(p, inner.ecc1, inner.ecc2)


def _require_secret(kf: KeyFile) -> None:
    if kf.kind != SECRET:
        raise UsageError("this command needs a secret key file")


# keygen

def _frac_arg(s: str) -> Fraction:
    try:
        return as_fraction(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {s}") from None


def build_params(args, scheme_id: int) -> SchemeParams:
    overrides = {k: getattr(args, k) for k in ("n", "d", "t", "r", "eta", "zeta", "delta", "lam")
                 if getattr(args, k) is not None}
    if args.params_from:
        base = _load_key(args.params_from).params
    elif scheme_id in (0, 1):
        n = overrides.pop("n", 4096)
        r = overrides.pop("r", n)
        delta = overrides.pop("delta", Fraction(1, 10))
        lam = overrides.pop("lam", 128)
        if {"d", "t", "eta", "zeta"} <= overrides.keys():
            # fully specified: nothing to derive
            if scheme_id == 1 and not 0 < delta < Fraction(1, 4):
                raise ValueError("single-bit parameters need 0 < delta < 1/4")
            return SchemeParams(n=n, r=r, delta=delta, lam=lam, **overrides)
        derive = ldpc.derive_params_zero_bit if scheme_id == 0 else ldpc.derive_params_single_bit
        base = derive(n, r, float(delta), lam)
        if delta != base.delta:
            base = dataclasses.replace(base, delta=delta)
    else:
        base = desk_inner_params()
    return dataclasses.replace(base, **overrides) if overrides else base


def _keygen_scheme(args, scheme_id: int, p: SchemeParams) -> schemes.Scheme:
    if scheme_id == 0:
        return schemes.ZeroBitScheme(p)
    if scheme_id == 1:
        if p.delta >= Fraction(1, 4):
            raise ValueError("the single-bit scheme needs delta < 1/4")
        return schemes.SingleBitScheme(p)
    if scheme_id in (2, 4):
        ecc = from_name(args.ecc) if args.ecc else sharp_ecc()
        delta = args.scheme_delta
        if scheme_id == 4 and delta is None:
            delta = SHARP_DELTA
        cls = schemes.SkRateScheme if scheme_id == 2 else schemes.SharpScheme
        return cls(p, ecc, delta)
    ecc1 = from_name(args.ecc1) if args.ecc1 else pk_ecc1()
    ecc2 = from_name(args.ecc2) if args.ecc2 else pk_ecc2()
    cls = schemes.PkRateScheme if scheme_id == 3 else schemes.CcaScheme
    return cls(p, ecc1, ecc2)


def _param_lines(p: SchemeParams) -> list[str]:
    return [f"n={p.n}", f"d={p.d}", f"t={p.t}", f"r={p.r}", f"eta={p.eta}",
            f"zeta={p.zeta}", f"delta={p.delta}", f"lambda={p.lam}",
            f"threshold={float(p.threshold):.6g}", f"flip_budget={p.flip_budget}"]


def cmd_keygen(args) -> int:
    if args.scheme is None and not args.params_from:
        raise UsageError("--scheme is required")
    scheme_id = SCHEME_IDS[args.scheme] if args.scheme else _load_key(args.params_from).scheme_id
    p = build_params(args, scheme_id)
    scheme = _keygen_scheme(args, scheme_id, p)
    keys = scheme.keygen(_rng(args.seed))
    out = Path(args.out)
    sk_path = out.with_name(out.name + ".sk")
    sk_path.write_bytes(serialize_key(key_file(scheme_id, keys)))
    lines = [f"scheme={scheme.name}", *_param_lines(p),
             f"length={scheme.length(keys)}", f"message_bits={scheme.message_bits(keys)}",
             f"scheme_delta={scheme.delta(keys)}", f"secret_key={sk_path}"]
    if scheme.public_key_scheme:
        pk_path = out.with_name(out.name + ".pk")
        pk_path.write_bytes(serialize_key(key_file(scheme_id, scheme.public(keys), PUBLIC)))
        lines.append(f"public_key={pk_path}")
    honest = (1 - float(1 - 2 * (p.eta + p.delta)) ** p.t) / 2
    lines += analysis.chernoff_report(p.r, p.zeta, honest)
    return _emit(lines, True)


# encode / decode

def parse_message(text: str, bits: int, zero_bit: bool) -> BitVector:
    if bits == 1:
        if text not in ("0", "1") or (zero_bit and text != "1"):
            raise UsageError("this scheme takes the message 1" if zero_bit
                             else "single-bit messages are 0 or 1")
        return BitVector.from_bits([int(text)])
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise UsageError("message must be hex") from None
    if 8 * len(data) != bits:
        raise UsageError(f"message must be {bits} bits ({bits // 4} hex digits)")
    return BitVector.from_bytes(data, bits)


def cmd_encode(args) -> int:
    kf = _load_key(args.key)
    scheme = scheme_for(kf)
    key = kf.key
    bits = key_message_bits(kf)
    m = parse_message(args.message, bits, kf.scheme_id == 0)
    rng = _rng(args.seed)
    x = scheme.encode(key, m, rng) if kf.kind == SECRET else scheme.encode_public(key, m, rng)
    Path(args.out).write_bytes(serialize_codeword(x))
    print(f"length={x.n}")
    print(f"codeword={args.out}")
    return EXIT_OK


def key_message_bits(kf: KeyFile) -> int:
    if kf.scheme_id in (0, 1):
        return 1
    if kf.kind == SECRET:
        return scheme_for(kf).message_bits(kf.key)
    return kf.key.message_bits


def key_length(kf: KeyFile) -> int:
    if kf.scheme_id in (0, 1):
        return kf.params.n
    if kf.kind == SECRET:
        return scheme_for(kf).length(kf.key)
    return kf.key.length


def cmd_decode(args) -> int:
    kf = _load_key(args.key)
    _require_secret(kf)
    try:
        x = deserialize_codeword(Path(args.codeword).read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read {args.codeword}: {exc.strerror}") from None
    if x.n != key_length(kf):
        raise CorruptFile(f"codeword has {x.n} bits, key expects {key_length(kf)}")
    print(fmt_message(scheme_for(kf).decode(kf.key, x)))
    return EXIT_OK


# verify-key

def _kernel_ok(H, G: DenseMatrix) -> bool:
    return not H.syndrome_bits(G.to_bits().T).any()


def cmd_verify_key(args) -> int:
    kf = _load_key(args.key)
    key, sid = kf.key, kf.scheme_id
    p = kf.params
    lines = [f"scheme={schemes.SCHEME_NAMES[sid]}", f"kind={'secret' if kf.kind == SECRET else 'public'}"]
    ok = True
    if kf.kind == SECRET:
        if sid == 0:
            pairs = [(key.sk.H, key.pk.G)]
        elif sid in (1, 2, 4):
            inner = {1: lambda: key, 2: lambda: key.inner, 4: lambda: key.inner.inner}[sid]()
            pairs = [(inner.sk.H0, inner.pk.G0), (inner.sk.H1, inner.pk.G1)]
        else:
            pk, sk = (key.pk, key.sk) if sid == 3 else (key.inner_pk, key.inner_sk)
            pairs = [(sk.inner.H0, pk.inner.G0), (sk.inner.H1, pk.inner.G1)]
        for i, (H, G) in enumerate(pairs):
            good = _kernel_ok(H, G)
            lines.append(f"HG_zero[{i}]={int(good)}")
            ok &= good
            if sid != 0:
                full = G.rank() == p.d
                lines.append(f"G_full_rank[{i}]={int(full)}")
                ok &= full
    lines.append("params_valid=1")
    return _emit(lines, ok)


# attacks

def _trial_seeds(seed: int, trials: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)]


def _rate_lines(wins: int, trials: int) -> list[str]:
    lo, hi = wilson_interval(wins, trials)
    return [f"trials={trials}", f"wins={wins}", f"win_rate={wins / max(trials, 1):.6g}",
            f"ci_low={lo:.6g}", f"ci_high={hi:.6g}"]


def gaussian_budget(p: SchemeParams) -> int:
    """min(ceil(0.6 r), floor(delta n)): as close to 0.6 r as the flip budget allows."""
    return min(math.ceil(0.6 * p.r), p.flip_budget)


def cmd_attack(args) -> int:
    kf = _load_key(args.key)
    scheme = scheme_for(kf)
    seed = _seed(args)
    seeds = _trial_seeds(seed, args.trials)
    lines = [f"attack={args.name}", f"scheme={scheme.name}", f"seed={seed}"]
    if args.name == "gaussian-elim":
        if kf.scheme_id != 0:
            raise UsageError("gaussian-elim targets the zero-bit scheme")
        _require_secret(kf)
        k = args.k if args.k is not None else gaussian_budget(kf.params)
        wins = 0
        for s in seeds:
            adv = games.GaussianEliminationAdversary(scheme, k)
            out = games.run_robust_pk_game(scheme, adv, kf.params.delta, s, kf.key, leak_secret=True)
            wins += bool(out.won)
        lines += [f"k={k}", *_rate_lines(wins, args.trials)]
        return _emit(lines, wins >= THRESHOLDS.attack_pass * args.trials)
    if args.name == "random-flip":
        if not scheme.public_key_scheme:
            raise UsageError("random-flip runs the public-key game")
        _require_secret(kf)
        rate = args.rate if args.rate is not None else float(scheme.delta(kf.key))
        wins = sum(bool(games.run_robust_pk_game(scheme, games.PkRandomFlipAdversary(scheme, rate),
                                                 scheme.delta(kf.key), s, kf.key).won)
                   for s in seeds)
        lines += [f"rate={rate:.6g}", *_rate_lines(wins, args.trials)]
        return _emit(lines, wins <= (1 - THRESHOLDS.robustness_pass) * args.trials)
    if args.name == "quarter":
        if kf.scheme_id != 1:
            raise UsageError("quarter targets the single-bit scheme")
        _require_secret(kf)
        n = kf.params.n
        d0, d1, outs = [], [], {"0": 0, "1": 0, "BOT": 0}
        for s in seeds:
            res = games.quarter_attack(scheme, kf.key, np.random.default_rng(s))
            d0.append((res.x_mid ^ res.x0).weight() / n)
            d1.append((res.x_mid ^ res.x1).weight() / n)
            outs[fmt_message(scheme.decode(kf.key, res.x_mid))] += 1
        m0, m1 = float(np.mean(d0)), float(np.mean(d1))
        lines += [f"trials={args.trials}", f"mean_distance_x0={m0:.6g}", f"mean_distance_x1={m1:.6g}",
                  *(f"midpoint_decodes_{k}={v}" for k, v in outs.items())]
        return _emit(lines, abs(m0 - 0.25) <= 0.02 and abs(m1 - 0.25) <= 0.02)
    raise UsageError(f"unknown attack {args.name}")


# games

_SK_ADVERSARIES: dict[str, Callable[[], games.Adversary]] = {
    "replay": games.ReplayAdversary,
    "random-flip": games.RandomFlipAdversary,
    "far": games.FarAdversary,
}


def cmd_game(args) -> int:
    kf = _load_key(args.key)
    _require_secret(kf)
    scheme = scheme_for(kf)
    keys = kf.key
    delta = scheme.delta(keys)
    seed = _seed(args)
    lines = [f"game={args.name}", f"scheme={scheme.name}", f"seed={seed}"]
    if args.name == "robust-sk":
        if args.adversary not in _SK_ADVERSARIES:
            raise UsageError(f"robust-sk adversaries: {', '.join(_SK_ADVERSARIES)}")
        wins = 0
        for i, s in enumerate(_trial_seeds(seed, args.trials)):
            out = games.run_robust_sk_game(scheme, _SK_ADVERSARIES[args.adversary](), delta, s, keys)
            wins += bool(out.won)
            lines.append(f"trial[{i}]=won={int(bool(out.won))} aborted={int(out.aborted)}")
        lines += [f"adversary={args.adversary}", *_rate_lines(wins, args.trials)]
        return _emit(lines, wins <= (1 - THRESHOLDS.robustness_pass) * args.trials)
    if args.name == "robust-pk":
        if not scheme.public_key_scheme:
            raise UsageError("robust-pk needs a public-key scheme")
        makers = {"random-flip": lambda: games.PkRandomFlipAdversary(scheme),
                  "replay": lambda: games.PkReplayAdversary(scheme)}
        if args.adversary not in makers:
            raise UsageError(f"robust-pk adversaries: {', '.join(makers)}")
        wins = 0
        for i, s in enumerate(_trial_seeds(seed, args.trials)):
            out = games.run_robust_pk_game(scheme, makers[args.adversary](), delta, s, keys)
            wins += bool(out.won)
            lines.append(f"trial[{i}]=won={int(bool(out.won))} distance={out.info.get('distance')}")
        lines += [f"adversary={args.adversary}", *_rate_lines(wins, args.trials)]
        return _emit(lines, wins <= (1 - THRESHOLDS.robustness_pass) * args.trials)
    if args.name == "ideal":
        res = games.run_real_ideal_games(
            scheme, lambda: games.ScriptedDistinguisher(args.queries, args.queries, args.random_fraction),
            delta, seed, keys)
        agree, total = compare_decode_logs(res.real.log, res.ideal.log)
        frac = agree / max(total, 1)
        lines += [f"encode_queries={args.queries}", f"decode_queries={total}", f"agree={agree}",
                  f"agreement={frac:.6g}", f"bit_real={res.bit_real}", f"bit_ideal={res.bit_ideal}"]
        return _emit(lines, frac >= THRESHOLDS.ideal_agreement)
    if args.name == "cca":
        if kf.scheme_id != 5:
            raise UsageError("the cca game needs a cca key")
        rep = games.run_alt_decode_fuzz(keys, args.fuzz, seed)
        lines += [f"queries={rep.total}", f"agree={rep.agree}"]
        lines += [f"kind[{k}]={a}/{t}" for k, (a, t) in rep.by_kind.items()]
        lines += [f"mismatch={m}" for m in rep.mismatches]
        return _emit(lines, rep.agree == rep.total)
    raise UsageError(f"unknown game {args.name}")


def compare_decode_logs(real: list[dict], ideal: list[dict]) -> tuple[int, int]:
    """Per-query agreement of decode answers between the two worlds."""
    a = [q["out"] for q in real if q["op"] == "decode"]
    b = [q["out"] for q in ideal if q["op"] == "decode"]
    return sum(x == y for x, y in zip(a, b)), max(len(a), len(b))


# analyze

def _analysis_defaults(args, n, t, d, cases):
    if args.params_from:
        p = _load_key(args.params_from).params
        n, t, d = p.n, p.t, p.d
    return (args.n or n, args.t or t, args.d if args.d is not None else d, args.cases or cases)


def cmd_analyze(args) -> int:
    seed = _seed(args)
    rng = np.random.default_rng(seed)
    c = args.check
    if c == "omar":
        n, t, d, cases = _analysis_defaults(args, 14, 2, 3, THRESHOLDS.omar_cases)
        rep = analysis.omar_batch(cases, rng, ns=[n], ts=[t], ds=[d])
    elif c == "parity-bias":
        n, t, _, cases = _analysis_defaults(args, 16, 2, 0, THRESHOLDS.sandwich_cases)
        rep = analysis.parity_bias_batch(n, t, cases, rng)
    elif c == "concentration":
        n, t, d, cases = _analysis_defaults(args, 64, 4, 8, THRESHOLDS.concentration_codes)
        rep = analysis.estimate_parity_concentration(n, d, t, cases, rng)
    elif c == "rlc":
        n, _, d, cases = _analysis_defaults(args, 1024, 2, 10, THRESHOLDS.rlc_codes)
        rep = analysis.check_rlc_balance(n, d, cases, rng)
    elif c == "johnson":
        n, _, d, cases = _analysis_defaults(args, 20, 2, 4, THRESHOLDS.johnson_cases)
        rep = analysis.johnson_batch(n, d, cases, rng)
    elif c == "floor":
        n, t, d, cases = _analysis_defaults(args, 64, 4, 8, 100)
        rep = analysis.empirical_bias_floor(n, d, t, cases, rng)
    elif c == "ceiling":
        n, t, d, cases = _analysis_defaults(args, 64, 4, 8, 100)
        rep = analysis.empirical_bias_ceiling(n, d, t, cases, rng)
    elif c == "resampling":
        n, t, d, cases = _analysis_defaults(args, 16, 2, 2, 10_000)
        rep = analysis.resampling_equivalence_check(n, d, t, args.r or 3, cases, rng)
    elif c == "hypergeometric":
        rep = analysis.hypergeometric_check(args.N, args.K, args.n_draw, args.t_dev,
                                            args.cases or 100_000, rng)
    elif c == "chernoff":
        rep = analysis.chernoff_check(args.r or 4096, args.zeta)
    else:
        raise UsageError(f"unknown check {c}")
    return _emit([f"seed={seed}", *rep.lines()], rep.passed is not False)


# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for all randomness")
    common.add_argument("--params-from", default=None, metavar="KEYFILE",
                        help="take parameters from an existing key file")

    ap = argparse.ArgumentParser(prog="prc", description="LDPC pseudorandom codes toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    kg = sub.add_parser("keygen", parents=[common])
    kg.add_argument("--scheme", choices=list(SCHEME_IDS))
    for name in ("n", "d", "t", "r", "lam"):
        kg.add_argument(f"--{name}", type=int)
    for name in ("eta", "zeta", "delta"):
        kg.add_argument(f"--{name}", type=_frac_arg)
    kg.add_argument("--ecc", help="ECC name for sk-rate and sharp")
    kg.add_argument("--ecc1", help="ECC for the seed (pk-rate, cca)")
    kg.add_argument("--ecc2", help="ECC for the payload (pk-rate, cca)")
    kg.add_argument("--scheme-delta", type=_frac_arg, help="robustness radius of the transform")
    kg.add_argument("--out", required=True, help="output prefix; writes PREFIX.sk and PREFIX.pk")
    kg.set_defaults(func=cmd_keygen)

    en = sub.add_parser("encode", parents=[common])
    en.add_argument("--key", required=True)
    en.add_argument("--message", required=True, help="hex, or 0/1 for the one-bit schemes")
    en.add_argument("--out", required=True)
    en.set_defaults(func=cmd_encode)

    de = sub.add_parser("decode", parents=[common])
    de.add_argument("--key", required=True)
    de.add_argument("--codeword", required=True)
    de.set_defaults(func=cmd_decode)

    vk = sub.add_parser("verify-key", parents=[common])
    vk.add_argument("--key", required=True)
    vk.set_defaults(func=cmd_verify_key)

    at = sub.add_parser("attack", parents=[common])
    at.add_argument("name", choices=["gaussian-elim", "quarter", "random-flip"])
    at.add_argument("--key", required=True)
    at.add_argument("--trials", type=int, default=THRESHOLDS.attack_trials)
    at.add_argument("--k", type=int, help="number of checks the Gaussian attack violates")
    at.add_argument("--rate", type=float, help="flip rate for random-flip")
    at.set_defaults(func=cmd_attack)

    gm = sub.add_parser("game", parents=[common])
    gm.add_argument("name", choices=["robust-sk", "robust-pk", "ideal", "cca"])
    gm.add_argument("--key", required=True)
    gm.add_argument("--adversary", default="random-flip")
    gm.add_argument("--trials", type=int, default=20)
    gm.add_argument("--queries", type=int, default=THRESHOLDS.ideal_queries)
    gm.add_argument("--random-fraction", type=float, default=0.2)
    gm.add_argument("--fuzz", type=int, default=THRESHOLDS.fuzz_queries)
    gm.set_defaults(func=cmd_game)

    an = sub.add_parser("analyze", parents=[common])
    an.add_argument("check", choices=["omar", "parity-bias", "concentration", "rlc", "johnson",
                                      "floor", "ceiling", "resampling", "hypergeometric", "chernoff"])
    for name in ("n", "t", "d", "r", "cases"):
        an.add_argument(f"--{name}", type=int)
    an.add_argument("--N", type=int, default=1000)
    an.add_argument("--K", type=int, default=300)
    an.add_argument("--n-draw", type=int, default=100)
    an.add_argument("--t-dev", type=float, default=0.1)
    an.add_argument("--zeta", type=_frac_arg, default=Fraction(1, 8))
    an.set_defaults(func=cmd_analyze)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CorruptFile as exc:
        print(f"error: corrupt input: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
