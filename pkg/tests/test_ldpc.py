import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prc.f2core import BitVector, DenseMatrix, sample_fixed_weight, sample_fixed_weight_batch
from prc.fixtures import desk_inner_params, single_bit_fixture, zero_bit_fixture, zero_bit_speed_fixture
from prc.ldpc import (BOT, SchemeParams, SingleBitKeys, SingleBitPublicKey, SingleBitSecretKey,
                      decode_single_bit, decode_single_bit_many, decode_zero_bit,
                      decode_zero_bit_many, derive_params_single_bit, derive_params_zero_bit,
                      derive_single_bit, encode_single_bit, encode_single_bit_many,
                      encode_single_bit_traced, encode_zero_bit, encode_zero_bit_many,
                      encode_zero_bit_traced, keygen_single_bit, keygen_zero_bit, syndrome_weights)

DESK = desk_inner_params()


def hg_zero(H, G: DenseMatrix) -> bool:
    return not ((H.to_dense_bits().astype(np.int64) @ G.to_bits().astype(np.int64)) % 2).any()


# -- parameter derivation --------------------------------------------------

def test_zero_bit_fixture_values():
    # t_raw = log2(4 * 4096^-1/4) / log2(0.4) = 0.756..., rounds to the floor of 2
    p = zero_bit_fixture()
    assert (p.n, p.r, p.t, p.d) == (4096, 4096, 2, 8)
    assert p.zeta == Fraction(1, 8)
    assert p.eta == Fraction(1, 5)
    assert p.delta == Fraction(1, 10)
    assert p.noise_weight == 819 and p.flip_budget == 409
    assert p.threshold == Fraction(3, 8) * 4096


def test_single_bit_fixture_values():
    deriv = derive_single_bit(4096, 4096, 0.1)
    assert deriv.delta_prime == pytest.approx(math.log2(1 / 0.35) - 1, abs=1e-12)
    assert deriv.delta_prime == pytest.approx(0.514573, abs=1e-6)
    assert deriv.epsilon == pytest.approx(2 * 0.514573 / 48, abs=1e-6)
    p = deriv.params
    assert (p.t, p.d) == (2, 1)
    assert p.eta == Fraction(3, 40)
    assert float(p.zeta) == pytest.approx(1.5 * 4096 ** -0.2, rel=1e-8)
    assert single_bit_fixture() == p


def test_derivation_examples():
    assert derive_params_zero_bit(4096, 4096, 1e-9).eta == pytest.approx(Fraction(1, 4), abs=1e-8)
    assert derive_params_single_bit(4096, 4096, 1e-9).eta == pytest.approx(Fraction(1, 8), abs=1e-8)
    assert derive_params_zero_bit(4096, 4096, 0.1).zeta == Fraction(1, 8)
    assert derive_params_single_bit(4096, 2**20, 0.1).t == 4
    assert zero_bit_speed_fixture().r == 512


def test_derivation_rejects_bad_delta():
    with pytest.raises(ValueError):
        derive_params_zero_bit(4096, 4096, 0.5)
    with pytest.raises(ValueError):
        derive_params_single_bit(4096, 4096, 0.25)
    with pytest.raises(ValueError):
        derive_params_single_bit(4096, 4096, 0.3)


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(64, 2, 3, 16, 0.1, 0.1, 0.1)  # odd t
    with pytest.raises(ValueError):
        SchemeParams(16, 2, 4, 16, 0.1, 0.1, 0.1)  # t^2 > n/2
    with pytest.raises(ValueError):
        SchemeParams(64, 6, 2, 16, 0.1, 0.1, 0.1)  # d >= t log n / 2
    with pytest.raises(ValueError):
        SchemeParams(64, 2, 2, 16, Fraction(1, 4), 0.1, Fraction(1, 4))


# -- zero-bit --------------------------------------------------------------

@given(st.integers(0, 2**32))
@settings(max_examples=15, deadline=None)
def test_keygen_hg_zero(seed):
    rng = np.random.default_rng(seed)
    keys = keygen_zero_bit(SchemeParams(256, 6, 4, 64, 0.1, 0.1, 0.1), rng)
    assert hg_zero(keys.sk.H, keys.pk.G)
    assert keys.sk.z == keys.pk.z
    sb = keygen_single_bit(SchemeParams(256, 6, 4, 64, 0.1, 0.1, 0.1), rng)
    assert hg_zero(sb.sk.H0, sb.pk.G0) and hg_zero(sb.sk.H1, sb.pk.G1)
    assert sb.pk.G0.rank() == 6 and sb.pk.G1.rank() == 6


def test_degenerate_encoder_returns_pad():
    params = SchemeParams(128, 0, 2, 32, 0, 0.1, 0.1)
    keys = keygen_zero_bit(params, np.random.default_rng(1))
    x = encode_zero_bit(keys.pk, np.random.default_rng(2))
    assert x == keys.pk.z
    assert decode_zero_bit(keys.sk, x) == 1


def test_encoder_trace_reconstructs():
    rng = np.random.default_rng(3)
    keys = keygen_zero_bit(DESK, rng)
    tr = encode_zero_bit_traced(keys.pk, rng)
    assert tr.e.weight() == DESK.noise_weight
    assert tr.x == keys.pk.G.mul_vec(tr.u) ^ keys.pk.z ^ tr.e


def test_zero_bit_pad_only_decodes():
    keys = keygen_zero_bit(zero_bit_fixture(), np.random.default_rng(4))
    assert decode_zero_bit(keys.sk, keys.sk.z) == 1


def test_zero_bit_soundness_speed_fixture():
    rng = np.random.default_rng(5)
    keys = keygen_zero_bit(zero_bit_speed_fixture(), rng)
    x = rng.integers(0, 2, size=(1000, 4096), dtype=np.uint8)
    assert (~decode_zero_bit_many(keys.sk, x)).mean() >= 0.99


def test_zero_bit_robustness_desk_params():
    rng = np.random.default_rng(6)
    keys = keygen_zero_bit(DESK, rng)
    x = encode_zero_bit_many(keys.pk, 1000, rng)
    x ^= sample_fixed_weight_batch(1000, DESK.n, DESK.flip_budget, rng)
    assert decode_zero_bit_many(keys.sk, x).mean() >= 0.99


@given(st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_pad_equivariance(seed):
    rng = np.random.default_rng(seed)
    keys = keygen_zero_bit(DESK, np.random.default_rng(0))
    s = BitVector.random(DESK.n, rng)
    x = BitVector.random(DESK.n, rng) if seed % 2 else encode_zero_bit(keys.pk, rng)
    shifted = type(keys.sk)(DESK, keys.sk.H, keys.sk.z ^ s)
    assert decode_zero_bit(keys.sk, x) == decode_zero_bit(shifted, x ^ s)


def test_detector_monotone_in_nested_errors():
    rng = np.random.default_rng(7)
    keys = keygen_zero_bit(DESK, rng)
    trials = 400
    grid = [int(f * DESK.n) for f in np.arange(0, 0.46, 0.05)]
    base = encode_zero_bit_many(keys.pk, trials, rng)
    order = np.argsort(rng.random((trials, DESK.n)), axis=1)
    rates = []
    for w in grid:
        e = np.zeros_like(base)
        np.put_along_axis(e, order[:, :w], 1, axis=1)
        rates.append(decode_zero_bit_many(keys.sk, base ^ e).mean())
    sigma = np.sqrt(0.25 / trials)
    for a, b in zip(rates, rates[1:]):
        assert b <= a + 3 * sigma
    assert rates[0] == 1.0 and rates[-1] < 0.05


def test_threshold_is_strict():
    rng = np.random.default_rng(8)
    keys = keygen_zero_bit(DESK, rng)
    thr = DESK.threshold
    for _ in range(200):
        x = BitVector.random(DESK.n, rng)
        w = int(syndrome_weights(keys.sk.H, keys.sk.z, x.to_bits()[None, :])[0])
        assert (decode_zero_bit(keys.sk, x) == 1) == (w < thr)


# -- single-bit ------------------------------------------------------------

def test_single_bit_roundtrip_and_trace():
    rng = np.random.default_rng(9)
    keys = keygen_single_bit(DESK, rng)
    for m in (0, 1):
        tr = encode_single_bit_traced(keys.pk, m, rng)
        assert tr.u.weight() > 0
        assert tr.x == keys.pk.G(m).mul_vec(tr.u) ^ keys.pk.z ^ tr.e
        assert decode_single_bit(keys.sk, tr.x) == m
    with pytest.raises(ValueError):
        encode_single_bit(keys.pk, 2, rng)


def test_single_bit_robustness_and_soundness_desk_params():
    rng = np.random.default_rng(10)
    keys = keygen_single_bit(DESK, rng)
    for m in (0, 1):
        x = encode_single_bit_many(keys.pk, np.full(1000, m), rng)
        x ^= sample_fixed_weight_batch(1000, DESK.n, DESK.flip_budget, rng)
        assert (decode_single_bit_many(keys.sk, x) == m).mean() >= 0.99
    u = rng.integers(0, 2, size=(1000, DESK.n), dtype=np.uint8)
    assert (decode_single_bit_many(keys.sk, u) == BOT).mean() >= 0.98


def _detectors(keys: SingleBitKeys, x: BitVector) -> tuple[bool, bool]:
    p = keys.sk.params
    w0 = int(syndrome_weights(keys.sk.H0, keys.sk.z, x.to_bits()[None, :])[0])
    w1 = int(syndrome_weights(keys.sk.H1, keys.sk.z, x.to_bits()[None, :])[0])
    return w0 < p.threshold, w1 < p.threshold


def test_both_detectors_firing_is_bot():
    # identical check matrices make every accepted word fire both detectors
    rng = np.random.default_rng(11)
    keys = keygen_single_bit(DESK, rng)
    twin = SingleBitKeys(SingleBitSecretKey(DESK, keys.sk.H0, keys.sk.H0, keys.sk.z),
                         SingleBitPublicKey(DESK, keys.pk.G0, keys.pk.G0, keys.pk.z))
    x = encode_single_bit(twin.pk, 0, rng)
    assert _detectors(twin, x) == (True, True)
    assert decode_single_bit(twin.sk, x) is None


def test_or_of_codewords_at_tiny_scale():
    params = SchemeParams(32, 1, 2, 24, Fraction(1, 32), Fraction(1, 5), Fraction(1, 32))
    rng = np.random.default_rng(12)
    seen_both = 0
    for _ in range(300):
        keys = keygen_single_bit(params, rng)
        a = encode_single_bit(keys.pk, 0, rng)
        b = encode_single_bit(keys.pk, 1, rng)
        x = BitVector.from_bits(a.to_bits() | b.to_bits())
        f0, f1 = _detectors(keys, x)
        out = decode_single_bit(keys.sk, x)
        if f0 and f1:
            seen_both += 1
            assert out is None
        if out is not None:
            assert (f0, f1) == ((True, False) if out == 0 else (False, True))
    assert seen_both > 0


@given(st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_exclusivity_on_every_decode(seed):
    rng = np.random.default_rng(seed)
    keys = keygen_single_bit(DESK, np.random.default_rng(13))
    m = seed % 2
    x = encode_single_bit(keys.pk, m, rng) ^ sample_fixed_weight(DESK.n, int(rng.integers(0, 200)), rng)
    out = decode_single_bit(keys.sk, x)
    if out is not None:
        assert not _detectors(keys, x)[1 - out]
