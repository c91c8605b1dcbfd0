"""Stream statistics and pairwise distances of zero-bit codewords under one key.

Pooled tests treat the codewords as one long stream. The pairwise distance
histogram is the most direct view: for uniform strings it centres on n/2.

usage: python scripts/pseudorandomness_stats.py [--params fixture|desk] [--count 1000] [--seed 13]
"""
import argparse

import numpy as np

from prc import analysis, ldpc
from prc.fixtures import desk_inner_params, zero_bit_fixture


def describe(label: str, x: np.ndarray) -> None:
    n = x.shape[1]
    _, p_mono = analysis.monobit_test(x.ravel())
    p1, p2 = analysis.serial_test(x.ravel(), 2)
    per_word = np.mean([min(analysis.serial_test(row, 2)) <= analysis.SEPARATION_P for row in x])
    a, b = x[: len(x) // 2].astype(np.int32), x[len(x) // 2:].astype(np.int32)
    dist = (a ^ b).sum(axis=1) / n
    print(f"{label}: monobit_p={p_mono:.3g} serial_p=({p1:.3g}, {p2:.3g}) "
          f"per_codeword_serial_reject={per_word:.3f} "
          f"pair_distance mean={dist.mean():.4f} sd={dist.std():.4f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", choices=["fixture", "desk"], default="fixture")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=13)
    args = ap.parse_args()
    p = zero_bit_fixture() if args.params == "fixture" else desk_inner_params()
    rng = np.random.default_rng(args.seed)
    keys = ldpc.keygen_zero_bit(p, rng)
    rows = keys.pk.G.to_bits()
    equal_adjacent = int((rows[1:] == rows[:-1]).all(axis=1).sum())
    distinct = len({r.tobytes() for r in rows})
    print(f"n={p.n} r={p.r} t={p.t} d={p.d}: distinct generator rows={distinct}, "
          f"equal adjacent rows={equal_adjacent}")
    describe("codewords", ldpc.encode_zero_bit_many(keys.pk, args.count, rng))
    describe("uniform  ", rng.integers(0, 2, size=(args.count, p.n), dtype=np.uint8))


if __name__ == "__main__":
    main()
