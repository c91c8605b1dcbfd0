import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prc.ecc import ecc_decode, ecc_encode, repetition, rs_repetition
from prc.f2core import BitVector, Permutation, sample_fixed_weight
from prc.fixtures import desk_inner_params, pk_ecc1, pk_ecc2, sharp_ecc, SHARP_DELTA
from prc.games import run_alt_decode_fuzz
from prc.primitives import prf, prg, random_bytes
from prc.transforms import (AltDecoder, MultiBitSkKeys, cca_decode, cca_decode_traced,
                            cca_encode, cca_encode_fixed, keygen_cca, keygen_pk_rate,
                            keygen_sharp, keygen_sk_rate, pack_seed_message, pk_rate_decode,
                            pk_rate_encode, pk_rate_encode_traced, sharp_decode,
                            sharp_decode_traced, sharp_encode, sharp_encode_fixed,
                            sk_rate_decode, sk_rate_encode, sk_rate_encode_traced)

INNER = desk_inner_params()
SMALL = desk_inner_params(lam=32)


@pytest.fixture(scope="module")
def sk_keys():
    return keygen_sk_rate(SMALL, repetition(64, 9), np.random.default_rng(100))


@pytest.fixture(scope="module")
def sk_rs_keys():
    return keygen_sk_rate(SMALL, rs_repetition(48, 16, 1), np.random.default_rng(101))


@pytest.fixture(scope="module")
def pk_keys():
    return keygen_pk_rate(INNER, pk_ecc1(), pk_ecc2(), np.random.default_rng(102))


@pytest.fixture(scope="module")
def sharp_keys():
    return keygen_sharp(INNER, sharp_ecc(), np.random.default_rng(103), SHARP_DELTA)


@pytest.fixture(scope="module")
def cca_keys():
    return keygen_cca(INNER, pk_ecc1(), pk_ecc2(), np.random.default_rng(104))


def flip_exactly(x: BitVector, w: int, rng) -> BitVector:
    return x ^ sample_fixed_weight(x.n, w, rng)


# -- sk rate ---------------------------------------------------------------

def test_sk_readback_with_identity_permutation(sk_keys):
    keys = MultiBitSkKeys(sk_keys.inner, Permutation.identity(sk_keys.length),
                          sk_keys.ecc, sk_keys.delta)
    m = BitVector.zeros(keys.message_bits)
    tr = sk_rate_encode_traced(keys, m, np.random.default_rng(1))
    tail = tr.x.slice(keys.lam * keys.block_len, keys.length)
    assert tail == prg(tr.r, keys.ecc.n_out) ^ ecc_encode(keys.ecc, m)
    assert tr.x == tr.unpermuted


def test_sk_roundtrip_and_length(sk_keys):
    rng = np.random.default_rng(2)
    lengths = set()
    for _ in range(5):
        m = BitVector.random(sk_keys.message_bits, rng)
        c = sk_rate_encode(sk_keys, m, rng)
        lengths.add(c.n)
        assert sk_rate_decode(sk_keys, c) == m
    assert lengths == {SMALL.lam * SMALL.n + sk_keys.ecc.n_out}


def test_sk_random_substitutions(sk_keys):
    # the repetition ECC's worst-case radius is only 4 flips, far below what it
    # absorbs from random substitutions, so the inner radius sets the rate
    rng = np.random.default_rng(3)
    rate = float(SMALL.delta) - 0.02
    ok = 0
    trials = 100
    for _ in range(trials):
        m = BitVector.random(sk_keys.message_bits, rng)
        c = sk_rate_encode(sk_keys, m, rng)
        ok += sk_rate_decode(sk_keys, flip_exactly(c, int(rate * c.n), rng)) == m
    assert ok / trials >= 0.99


def test_sk_permutation_spreads_a_burst(sk_keys):
    # a contiguous burst on the transmitted word lands spread over the blocks
    rng = np.random.default_rng(4)
    rate = float(SMALL.delta) - 0.02
    for _ in range(20):
        m = BitVector.random(sk_keys.message_bits, rng)
        c = sk_rate_encode(sk_keys, m, rng)
        start = int(rng.integers(0, c.n // 2))
        burst = BitVector.from_indices(c.n, np.arange(start, start + int(rate * c.n)))
        assert sk_rate_decode(sk_keys, c ^ burst) == m


def test_sk_soundness(sk_rs_keys):
    rng = np.random.default_rng(5)
    rejects = sum(sk_rate_decode(sk_rs_keys, BitVector.random(sk_rs_keys.length, rng)) is None
                  for _ in range(200))
    assert rejects / 200 >= 0.98


# -- pk rate ---------------------------------------------------------------

def test_pk_length_is_2kj(pk_keys):
    pk = pk_keys.pk
    k, j = pk.ecc1.n_out, INNER.n
    m = BitVector.random(pk.message_bits, np.random.default_rng(6))
    assert pk_rate_encode(pk, m, np.random.default_rng(7)).n == 2 * k * j == pk.length


def test_pk_roundtrip_and_readback(pk_keys):
    rng = np.random.default_rng(8)
    m = BitVector.random(pk_keys.pk.message_bits, rng)
    tr = pk_rate_encode_traced(pk_keys.pk, m, rng)
    assert pk_rate_decode(pk_keys.sk, tr.x) == m
    half = pk_keys.pk.half
    tail = tr.x.slice(half, 2 * half)
    assert ecc_decode(pk_keys.pk.ecc2, tail ^ prg(tr.r, half)) == m


def test_pk_random_flips_at_radius(pk_keys):
    rng = np.random.default_rng(9)
    w = math.floor(pk_keys.pk.radius * pk_keys.pk.length)
    ok = 0
    for _ in range(20):
        m = BitVector.random(pk_keys.pk.message_bits, rng)
        c = pk_rate_encode(pk_keys.pk, m, rng)
        ok += pk_rate_decode(pk_keys.sk, flip_exactly(c, w, rng)) == m
    assert ok == 20


def test_pk_two_level_errors(pk_keys):
    # every block gets up to beta flips; an alpha fraction of blocks is wrecked
    rng = np.random.default_rng(10)
    pk = pk_keys.pk
    n_in, blocks = INNER.n, pk.blocks
    beta = int(INNER.delta * n_in)
    wrecked = pk.ecc1.radius
    m = BitVector.random(pk.message_bits, rng)
    c = pk_rate_encode(pk, m, rng).to_bits().copy()
    bad = rng.choice(blocks, size=wrecked, replace=False)
    for b in range(blocks):
        w = n_in // 2 if b in bad else beta
        idx = b * n_in + rng.choice(n_in, size=w, replace=False)
        c[idx] ^= 1
    assert pk_rate_decode(pk_keys.sk, BitVector.from_bits(c)) == m


def test_pk_soundness(pk_keys):
    rng = np.random.default_rng(11)
    rejects = sum(pk_rate_decode(pk_keys.sk, BitVector.random(pk_keys.pk.length, rng)) is None
                  for _ in range(50))
    assert rejects / 50 >= 0.98


def test_pk_shape_checks():
    with pytest.raises(ValueError):
        keygen_pk_rate(INNER, rs_repetition(32, 8, 1), pk_ecc2(), np.random.default_rng(0))


# -- sharp -----------------------------------------------------------------

def test_sharp_fixed_seed_is_deterministic(sharp_keys):
    m = BitVector.random(sharp_keys.message_bits, np.random.default_rng(12))
    r = bytes(range(16))
    assert sharp_encode_fixed(sharp_keys, m, r) == sharp_encode_fixed(sharp_keys, m, r)


def test_sharp_boundary(sharp_keys):
    rng = np.random.default_rng(13)
    budget = sharp_keys.flip_budget
    assert budget == math.floor(SHARP_DELTA * sharp_keys.length)
    inner_ok = 0
    for _ in range(10):
        m = BitVector.random(sharp_keys.message_bits, rng)
        c = sharp_encode(sharp_keys, m, rng)
        assert sharp_decode(sharp_keys, flip_exactly(c, budget, rng)) == m
        over = sharp_decode_traced(sharp_keys, flip_exactly(c, budget + 1, rng))
        assert over.message is None
        inner_ok += over.inner_ok
    assert inner_ok > 0


def test_sharp_tag_flip_rejected(sharp_keys):
    rng = np.random.default_rng(14)
    m = BitVector.random(sharp_keys.message_bits, rng)
    c = sharp_encode_fixed(sharp_keys, m, random_bytes(rng, 16), r2_flip=5)
    out = sharp_decode_traced(sharp_keys, c)
    assert out.message is None and out.inner_ok and not out.tag_ok


@given(st.integers(0, 2**32))
@settings(max_examples=15, deadline=None)
def test_sharp_acceptance_rule(sharp_keys, seed):
    rng = np.random.default_rng(seed)
    m = BitVector.random(sharp_keys.message_bits, rng)
    c = sharp_encode(sharp_keys, m, rng)
    w = int(rng.integers(0, 2 * sharp_keys.flip_budget))
    x = flip_exactly(c, w, rng)
    out = sharp_decode_traced(sharp_keys, x)
    if out.inner_ok:
        word = sk_rate_decode(sharp_keys.inner, x)
        lam = sharp_keys.lam
        r = np.packbits(word.to_bits()[:lam], bitorder="little").tobytes()
        mm = word.slice(lam, word.n - lam)
        r1, r2 = prf(sharp_keys.prf_key, pack_seed_message(r, mm), lam)
        tag_ok = np.packbits(word.to_bits()[word.n - lam:], bitorder="little").tobytes() == r2
        assert out.tag_ok == tag_ok
        if tag_ok:
            canon = sharp_encode_fixed(sharp_keys, mm, r)
            accept = (canon ^ x).weight() <= sharp_keys.flip_budget
            assert (out.message is not None) == accept


def test_sharp_soundness(sharp_keys):
    rng = np.random.default_rng(15)
    assert all(sharp_decode(sharp_keys, BitVector.random(sharp_keys.length, rng)) is None
               for _ in range(30))


# -- cca -------------------------------------------------------------------

def test_cca_roundtrip_and_determinism(cca_keys):
    pk = cca_keys.pk
    rng = np.random.default_rng(16)
    m = BitVector.random(pk.message_bits, rng)
    assert cca_decode(cca_keys, cca_encode(pk, m, rng)) == m
    r = bytes(16)
    assert cca_encode_fixed(pk, m, r) == cca_encode_fixed(pk, m, r)


def test_cca_radius(cca_keys):
    pk = cca_keys.pk
    rng = np.random.default_rng(17)
    inner_ok = 0
    for _ in range(5):
        m = BitVector.random(pk.message_bits, rng)
        c = cca_encode(pk, m, rng)
        assert cca_decode(cca_keys, flip_exactly(c, pk.flip_budget, rng)) == m
        over = cca_decode_traced(cca_keys, flip_exactly(c, pk.flip_budget + 1, rng))
        assert over.message is None
        inner_ok += over.inner_ok
    assert inner_ok > 0
    assert all(cca_decode(cca_keys, BitVector.random(pk.length, rng)) is None for _ in range(20))


def test_alt_decode_examples(cca_keys):
    pk = cca_keys.pk
    rng = np.random.default_rng(18)
    m = BitVector.random(pk.message_bits, rng)
    c = cca_encode(pk, m, rng)
    alt = AltDecoder(pk)
    assert alt(c, [], [(m, c)], rng) == m
    far = flip_exactly(c, pk.flip_budget + 1, rng)
    assert alt(far, [], [(m, c)], rng) is None
    r = random_bytes(rng, 16)
    own = cca_encode_fixed(pk, m, r)
    assert alt(own, [(m, r)], [], rng) == m


def test_alt_decode_fuzz_small(cca_keys):
    report = run_alt_decode_fuzz(cca_keys, 60, seed=19, encodes=8, self_encodes=8)
    assert report.agree == report.total, report.mismatches
