import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prc.ecc import ecc_decode, ecc_encode, from_name, repetition, rs_repetition
from prc.f2core import BitVector, sample_fixed_weight

SPECS = [repetition(4, 9), repetition(3, 5), rs_repetition(32, 16, 1),
         rs_repetition(20, 8, 3), rs_repetition(16, 8, 4), rs_repetition(128, 64, 128)]


def test_rep9_examples():
    spec = repetition(1, 9)
    assert ecc_encode(spec, BitVector.from_string("1")).to_string() == "1" * 9
    cw = ecc_encode(repetition(3, 9), BitVector.from_string("101"))
    for flips in itertools.combinations(range(9), 4):
        e = BitVector.from_indices(27, [f + 9 * b for b in range(3) for f in flips])
        assert ecc_decode(repetition(3, 9), cw ^ e).to_string() == "101"


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_zero_message_is_zero_codeword(spec):
    assert ecc_encode(spec, BitVector.zeros(spec.k)) == BitVector.zeros(spec.n_out)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_roundtrip_and_linearity(spec):
    rng = np.random.default_rng(len(spec.name))
    for _ in range(5):
        a = BitVector.random(spec.k, rng)
        b = BitVector.random(spec.k, rng)
        assert ecc_decode(spec, ecc_encode(spec, a)) == a
        assert ecc_encode(spec, a) ^ ecc_encode(spec, b) == ecc_encode(spec, a ^ b)


def test_tiny_rep_exhaustive():
    spec = repetition(2, 3)
    for m in itertools.product([0, 1], repeat=2):
        cw = ecc_encode(spec, BitVector.from_bits(m))
        for pos in range(spec.n_out):
            e = BitVector.from_indices(spec.n_out, [pos])
            assert ecc_decode(spec, cw ^ e).to_bits().tolist() == list(m)


@given(st.sampled_from(SPECS), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_random_errors_within_radius(spec, seed):
    rng = np.random.default_rng(seed)
    m = BitVector.random(spec.k, rng)
    e = sample_fixed_weight(spec.n_out, spec.radius, rng)
    assert ecc_decode(spec, ecc_encode(spec, m) ^ e) == m


def _worst_case_errors(spec, count: int) -> list[int]:
    """Pack flips into as few RS bytes as possible, one bit position per byte."""
    need = (spec.rep + 1) // 2 if spec.rep % 2 else spec.rep // 2 + 1
    pos = []
    byte = 0
    while len(pos) < count:
        take = min(need, count - len(pos))
        pos.extend(byte * 8 * spec.rep + j for j in range(take))
        byte += 1
    return pos


@pytest.mark.parametrize("spec", [s for s in SPECS if s.family == "rsrep"], ids=lambda s: s.name)
def test_rsrep_concentrated_errors(spec):
    rng = np.random.default_rng(3)
    m = BitVector.random(spec.k, rng)
    cw = ecc_encode(spec, m)
    e = BitVector.from_indices(spec.n_out, _worst_case_errors(spec, spec.radius))
    assert ecc_decode(spec, cw ^ e) == m


def test_rsrep_radius_is_tight_for_odd_rep():
    spec = rs_repetition(20, 8, 3)
    parity = 12
    assert spec.radius == (parity // 2 + 1) * 2 - 1
    rng = np.random.default_rng(4)
    m = BitVector.random(spec.k, rng)
    e = BitVector.from_indices(spec.n_out, _worst_case_errors(spec, spec.radius + 1))
    assert ecc_decode(spec, ecc_encode(spec, m) ^ e) != m


def test_even_rep_uses_erasures():
    spec = rs_repetition(16, 8, 4)
    # cheapest failure: 4 byte errors (3 flips each) plus one erasure (2 flips)
    assert spec.radius == 4 * 3 + 2 - 1
    m = BitVector.random(spec.k, np.random.default_rng(8))
    cw = ecc_encode(spec, m)
    ties = [b * 8 * 4 + j for b in range(8) for j in range(2)]
    assert ecc_decode(spec, cw ^ BitVector.from_indices(spec.n_out, ties)) == m
    errs = [b * 32 + j for b in range(4) for j in range(3)] + [4 * 32, 4 * 32 + 1]
    assert ecc_decode(spec, cw ^ BitVector.from_indices(spec.n_out, errs)) != m


def test_rep_tie_is_failure():
    spec = repetition(1, 4)
    assert ecc_decode(spec, BitVector.from_string("1100")) is None


def test_alpha_below_half():
    for spec in SPECS:
        assert 0 <= spec.alpha < 0.5


def test_name_registry():
    for spec in SPECS:
        assert from_name(spec.name) == spec
    with pytest.raises(ValueError):
        from_name("golay")


def test_length_checks():
    spec = repetition(2, 3)
    with pytest.raises(ValueError):
        ecc_encode(spec, BitVector.zeros(3))
    with pytest.raises(ValueError):
        ecc_decode(spec, BitVector.zeros(5))
