"""Fixture parameter sets and pass thresholds, kept in one place."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ecc import EccSpec, rs_repetition
from .ldpc import SchemeParams, derive_params_single_bit, derive_params_zero_bit


@dataclass(frozen=True)
class Thresholds:
    omar_cases: int = 200
    sandwich_cases: int = 100
    concentration_codes: int = 50
    concentration_tolerance: float = 0.20
    concentration_pass: float = 0.90
    rlc_codes: int = 100
    rlc_pass: float = 0.99
    johnson_cases: int = 100
    robustness_trials: int = 1000
    robustness_pass: float = 0.99
    soundness_pass: float = 0.99
    multibit_soundness_pass: float = 0.98
    attack_trials: int = 200
    attack_pass: float = 0.95
    sharp_codewords: int = 500
    sharp_pass: float = 0.99
    fuzz_queries: int = 1000
    ideal_queries: int = 100
    ideal_agreement: float = 0.99
    stat_codewords: int = 1000
    stat_sigma: float = 3.0
    floor_pass: float = 0.95
    ceiling_pass: float = 0.90
    serialization_cases: int = 1000


THRESHOLDS = Thresholds()


def zero_bit_fixture() -> SchemeParams:
    """Derived zero-bit parameters at n = r = 4096, delta = 0.1."""
    return derive_params_zero_bit(4096, 4096, 0.1)


def single_bit_fixture() -> SchemeParams:
    """Derived single-bit parameters at n = r = 4096, delta = 0.1."""
    return derive_params_single_bit(4096, 4096, 0.1)


def zero_bit_speed_fixture() -> SchemeParams:
    """Derived zero-bit parameters with r = n/8 for quick runs."""
    return derive_params_zero_bit(4096, 512, 0.1)


def desk_inner_params(lam: int = 128) -> SchemeParams:
    """Hand-tuned single-bit parameters used inside the transforms.

    The corollary formulas give t = 2 and d = 1 at any block length we can
    afford, which leaves no room between the honest and random syndrome
    weights. These values were picked by simulation: with r = n/2 checks
    of weight 2 an honest block with 5-8% flips violates about 17-21% of
    checks, a uniform block about 50%, and the threshold sits at 33%.
    """
    return SchemeParams(n=512, d=8, t=2, r=256, eta=Fraction(1, 20),
                        zeta=Fraction(17, 100), delta=Fraction(1, 20), lam=lam)


def sharp_ecc() -> EccSpec:
    # 48 data bytes = r (16) + message (16) + tag (16)
    return rs_repetition(255, 48, 1)


SHARP_DELTA = Fraction(1, 25)


def pk_ecc1() -> EccSpec:
    return rs_repetition(32, 16, 1)


def pk_ecc2() -> EccSpec:
    # 64 data bytes = r (16) + message (32) + tag (16); output 2^17 bits,
    # equal to 256 inner blocks of 512 bits
    return rs_repetition(128, 64, 128)
