"""Decode rate of the zero-bit scheme as the number of random flips grows.

usage: python scripts/zero_bit_sweep.py [--params fixture|desk] [--trials 1000] [--seed 0]
"""
import argparse

import numpy as np

from prc import ldpc
from prc.f2core import sample_fixed_weight_batch
from prc.fixtures import desk_inner_params, zero_bit_fixture


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", choices=["fixture", "desk"], default="fixture")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    p = zero_bit_fixture() if args.params == "fixture" else desk_inner_params()
    rng = np.random.default_rng(args.seed)
    keys = ldpc.keygen_zero_bit(p, rng)
    base = ldpc.encode_zero_bit_many(keys.pk, args.trials, rng)
    print(f"n={p.n} r={p.r} t={p.t} d={p.d} eta={p.eta} zeta={p.zeta} "
          f"threshold={float(p.threshold):.1f} budget={p.flip_budget}")
    print("flip_rate  flips  decode_rate  mean_violated/r")
    for rate in np.arange(0.0, 0.26, 0.02):
        w = int(rate * p.n)
        x = base ^ sample_fixed_weight_batch(args.trials, p.n, w, rng)
        ok = ldpc.decode_zero_bit_many(keys.sk, x).mean()
        viol = ldpc.syndrome_weights(keys.sk.H, keys.sk.z, x).mean() / p.r
        print(f"{rate:9.2f}  {w:5d}  {ok:11.3f}  {viol:15.4f}")
    u = rng.integers(0, 2, size=(args.trials, p.n), dtype=np.uint8)
    print(f"uniform strings decoding to 1: {ldpc.decode_zero_bit_many(keys.sk, u).mean():.4f}")


if __name__ == "__main__":
    main()
