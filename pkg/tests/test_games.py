from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from prc.f2core import BitVector, SparseParityMatrix, sample_fixed_weight
from prc.fixtures import desk_inner_params, pk_ecc1, pk_ecc2
from prc.games import (Adversary, Channel, FarAdversary, GaussianEliminationAdversary,
                       PkRandomFlipAdversary, PkReplayAdversary, RandomFlipAdversary,
                       ReplayAdversary, ScriptedDistinguisher, gaussian_elimination_attack,
                       quarter_attack, quarter_midpoint, run_cca_game, run_real_ideal_games,
                       run_robust_pk_game, run_robust_sk_game, wilson_interval)
from prc.ldpc import SchemeParams
from prc.primitives import random_bytes, rng_from_seed
from prc.schemes import CcaScheme, SingleBitScheme, ZeroBitScheme

DESK = desk_inner_params()
SINGLE = SingleBitScheme(DESK)
ZERO = ZeroBitScheme(DESK)


@pytest.fixture(scope="module")
def single_keys():
    return SINGLE.keygen(np.random.default_rng(200))


@pytest.fixture(scope="module")
def zero_keys():
    return ZERO.keygen(np.random.default_rng(201))


@dataclass
class BrokenDecoder(SingleBitScheme):
    """Decodes nothing, so any transcript neighbor is a win."""

    def decode(self, keys, x):
        return None


class FirstCodewordAdversary(Adversary):
    def oracle_phase(self, oracles, rng):
        self.cws = [oracles.encode(self.info.random_message(rng)) for _ in range(4)]

    def final_output(self):
        return self.cws[0]


# -- secret-key robustness -------------------------------------------------

def test_replay_never_wins(single_keys):
    for seed in range(20):
        out = run_robust_sk_game(SINGLE, ReplayAdversary(queries=5), DESK.delta, seed, single_keys)
        assert out.won is False and out.info["neighbors"] >= 1


def test_far_string_loses_by_definition(single_keys):
    out = run_robust_sk_game(SINGLE, FarAdversary(), DESK.delta, 1, single_keys)
    assert out.won is False and out.info["neighbors"] == 0


def test_random_flip_loses(single_keys):
    wins = sum(run_robust_sk_game(SINGLE, RandomFlipAdversary(), DESK.delta, s, single_keys).won
               for s in range(300))
    assert wins / 300 <= 0.01


def test_win_scan_covers_whole_transcript(single_keys):
    broken = BrokenDecoder(DESK)
    out = run_robust_sk_game(broken, FirstCodewordAdversary(), DESK.delta, 3, single_keys)
    assert out.won is True


def test_game_outcome_reproducible(single_keys):
    a = run_robust_sk_game(SINGLE, RandomFlipAdversary(), DESK.delta, 77, single_keys)
    b = run_robust_sk_game(SINGLE, RandomFlipAdversary(), DESK.delta, 77, single_keys)
    assert a.records() == b.records()
    a = run_robust_sk_game(ZERO, RandomFlipAdversary(), DESK.delta, 78)
    b = run_robust_sk_game(ZERO, RandomFlipAdversary(), DESK.delta, 78)
    assert "\n".join(a.records()).encode() == "\n".join(b.records()).encode()


def test_bad_final_output_aborts(single_keys):
    class Junk(ReplayAdversary):
        def final_output(self):
            return BitVector.zeros(3)

    out = run_robust_sk_game(SINGLE, Junk(), DESK.delta, 4, single_keys)
    assert out.aborted and out.won is False


# -- public-key robustness -------------------------------------------------

def test_pk_replay_and_flip(single_keys):
    for seed in range(10):
        assert run_robust_pk_game(SINGLE, PkReplayAdversary(SINGLE), DESK.delta, seed,
                                  single_keys).won is False
    wins = sum(run_robust_pk_game(SINGLE, PkRandomFlipAdversary(SINGLE), DESK.delta, s,
                                  single_keys).won for s in range(300))
    assert wins / 300 <= 0.01


def test_pk_malformed_randomness_aborts(single_keys):
    class EmptyR(PkReplayAdversary):
        def final_output(self):
            m, _, x = self.out
            return m, b"", x

    out = run_robust_pk_game(SINGLE, EmptyR(SINGLE), DESK.delta, 5, single_keys)
    assert out.aborted and out.won is False


def test_gaussian_attack_examples():
    H = SparseParityMatrix.from_index_lists([[0, 1], [2, 3]], 6)
    base = BitVector.zeros(6)
    assert gaussian_elimination_attack(H, 0, base) == BitVector.zeros(6)
    e = gaussian_elimination_attack(H, 1, base)
    assert e.weight() == 1 and e.support()[0] in (0, 1)


@given(st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_gaussian_attack_violates_k_checks(seed):
    rng = np.random.default_rng(seed)
    H = SparseParityMatrix.random(128, 64, 4, rng)
    k = int(rng.integers(1, 30))
    base = BitVector.random(128, rng)
    e = gaussian_elimination_attack(H, k, base)
    if e is not None:
        assert e.weight() <= k
        # the k targeted checks are all violated afterwards
        assert int(H.syndrome_bits((base ^ e).to_bits()).sum()) >= k


def test_gaussian_attack_needs_leak():
    # few checks, so r/2 fits inside the flip budget
    params = SchemeParams(512, 8, 2, 64, Fraction(1, 20), Fraction(17, 100), Fraction(1, 10))
    scheme = ZeroBitScheme(params)
    keys = scheme.keygen(np.random.default_rng(6))
    adv = GaussianEliminationAdversary(scheme, 32)
    out = run_robust_pk_game(scheme, adv, params.delta, 6, keys)
    assert out.aborted and out.won is False
    wins = 0
    for seed in range(20):
        adv = GaussianEliminationAdversary(scheme, 32)
        out = run_robust_pk_game(scheme, adv, params.delta, seed, keys, leak_secret=True)
        assert adv.weight <= 32 <= params.flip_budget
        wins += out.won
    assert wins == 20


# -- real / ideal ----------------------------------------------------------

def test_ideal_world_agrees_on_desk_scheme(single_keys):
    res = run_real_ideal_games(SINGLE, lambda: ScriptedDistinguisher(30, 60), DESK.delta, 7,
                               single_keys)
    real = [q["out"] for q in res.real.log if q["op"] == "decode"]
    ideal = [q["out"] for q in res.ideal.log if q["op"] == "decode"]
    assert len(real) == len(ideal) == 60
    assert sum(a == b for a, b in zip(real, ideal)) / 60 >= 0.95


def test_uniform_string_is_bot_in_both_worlds(single_keys):
    class UniformOnly(Adversary):
        def oracle_phase(self, oracles, rng):
            self.outs = [oracles.decode(BitVector.random(self.info.length, rng)) for _ in range(50)]

        def final_output(self):
            return int(any(o is not None for o in self.outs))

    res = run_real_ideal_games(SINGLE, UniformOnly, DESK.delta, 8, single_keys)
    for world in (res.real, res.ideal):
        bots = sum(q["out"] == "BOT" for q in world.log)
        assert bots / 50 >= 0.98


@given(st.integers(0, 2**32))
@settings(max_examples=10, deadline=None)
def test_ideal_decode_only_returns_transcript_messages(single_keys, seed):
    res = run_real_ideal_games(SINGLE, lambda: ScriptedDistinguisher(5, 20, 0.5), DESK.delta,
                               seed, single_keys)
    issued = {q["m"] for q in res.ideal.log if q["op"] == "encode"}
    for q in res.ideal.log:
        if q["op"] == "decode" and q["out"] != "BOT":
            assert q["out"] in issued


def test_zero_decode_distinguisher_monobit(zero_keys):
    class EncodeOnly(Adversary):
        def oracle_phase(self, oracles, rng):
            self.ones = sum(oracles.encode(self.info.random_message(rng)).weight()
                            for _ in range(200))

        def final_output(self):
            return 0

    advs = []
    res = run_real_ideal_games(ZERO, lambda: advs.append(EncodeOnly()) or advs[-1],
                               DESK.delta, 9, zero_keys)
    total = 200 * DESK.n
    table = [[a.ones, total - a.ones] for a in advs]
    assert stats.chi2_contingency(table).pvalue > 0.0027
    assert res.bit_real == res.bit_ideal == 0


# -- CCA -------------------------------------------------------------------

@pytest.fixture(scope="module")
def cca():
    scheme = CcaScheme(DESK, pk_ecc1(), pk_ecc2())
    return scheme, scheme.keygen(np.random.default_rng(202))


class CcaProbe(Adversary):
    def __init__(self, mode: str):
        self.mode = mode

    def oracle_phase(self, oracles, rng):
        from prc.transforms import cca_encode_fixed
        m = self.info.random_message(rng)
        if self.mode == "own":
            r = random_bytes(rng, 16)
            c = cca_encode_fixed(self.pk, m, r, oracles.ro)
        else:
            c = oracles.encode(m)
            c = c ^ sample_fixed_weight(c.n, self.info.budget, rng)
        self.want, self.got = m, oracles.decode(c)

    def final_output(self):
        return int(self.got == self.want)


@pytest.mark.parametrize("b", [0, 1])
def test_cca_own_encoding_decodes(cca, b):
    scheme, keys = cca
    out = run_cca_game(scheme, CcaProbe("own"), keys.delta, b, 10, keys)
    assert out.bit == 1 and out.info["real_decoder_calls"] == 1
    assert out.info["ro_queries"] == 1


def test_cca_lookup_skips_real_decoder(cca):
    scheme, keys = cca
    out = run_cca_game(scheme, CcaProbe("transcript"), keys.delta, 1, 11, keys)
    assert out.bit == 1
    assert out.info["real_decoder_calls"] == 0
    out = run_cca_game(scheme, CcaProbe("transcript"), keys.delta, 0, 11, keys)
    assert out.bit == 1 and out.info["real_decoder_calls"] == 1


def test_cca_rejects_bad_b(cca):
    scheme, keys = cca
    with pytest.raises(ValueError):
        run_cca_game(scheme, CcaProbe("own"), keys.delta, 2, 0, keys)


# -- quarter ---------------------------------------------------------------

def test_quarter_midpoint_forced_equal():
    x = BitVector.random(64, np.random.default_rng(12))
    mid = quarter_midpoint(x, x)
    assert mid == x and (mid ^ x).weight() == 0


@given(st.integers(0, 2**32))
def test_quarter_midpoint_splits_difference(seed):
    rng = np.random.default_rng(seed)
    x0, x1 = BitVector.random(200, rng), BitVector.random(200, rng)
    mid = quarter_midpoint(x0, x1)
    d = (x0 ^ x1).weight()
    assert (mid ^ x0).weight() == d - d // 2
    assert (mid ^ x1).weight() == d // 2


def test_quarter_attack_on_desk_keys(single_keys):
    res = quarter_attack(SINGLE, single_keys, np.random.default_rng(13))
    d = (res.x0 ^ res.x1).weight()
    assert abs((res.x_mid ^ res.x0).weight() - d / 2) <= 1
    with pytest.raises(ValueError):
        quarter_attack(ZERO, None, np.random.default_rng(0))


# -- misc ------------------------------------------------------------------

def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(100, 100)
    assert hi == pytest.approx(1.0) and lo > 0.95


def test_channels():
    rng = np.random.default_rng(14)
    x = BitVector.zeros(100)
    assert Channel("fixed-weight-random", 0.1).apply(x, rng).weight() == 10
    burst = Channel("burst", 0.1).apply(x, rng).support()
    assert burst.size == 10 and burst[-1] - burst[0] == 9
    adv = Channel("adversary-driven", 0.1)
    assert adv.apply(x, rng, BitVector.from_indices(100, [1, 2])).weight() == 2
    with pytest.raises(ValueError):
        adv.apply(x, rng, BitVector.ones(100))
    with pytest.raises(ValueError):
        Channel("erasure", 0.1)


def test_pk_adversary_encodes_with_its_randomness(single_keys):
    adv = PkReplayAdversary(SINGLE)
    run_robust_pk_game(SINGLE, adv, DESK.delta, 15, single_keys)
    m, r, x = adv.final_output()
    assert SINGLE.encode_public(single_keys.pk, m, rng_from_seed(r)) == x
