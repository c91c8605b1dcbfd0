"""Two attacks: Gaussian elimination with leaked parity checks, and the quarter midpoint.

The Gaussian attack flips a few bits chosen to violate k parity checks. It
only works with the secret checks, which is the point: without the leak the
adversary aborts. The quarter attack averages two codewords of opposite bits.

usage: python scripts/attack_demo.py [--trials 50] [--seed 0]
"""
import argparse

import numpy as np

from prc import games, schemes
from prc.cli import gaussian_budget
from prc.fixtures import desk_inner_params, single_bit_fixture, zero_bit_fixture


def gaussian(trials: int, seed: int) -> None:
    p = zero_bit_fixture()
    scheme = schemes.ZeroBitScheme(p)
    keys = scheme.keygen(np.random.default_rng(seed))
    k = gaussian_budget(p)
    for leak in (False, True):
        wins, aborted, flips = 0, 0, []
        for s in range(trials):
            out = games.run_robust_pk_game(scheme, games.GaussianEliminationAdversary(scheme, k),
                                           p.delta, seed + s, keys, leak_secret=leak)
            wins += bool(out.won)
            aborted += out.aborted
            if "distance" in out.info:
                flips.append(out.info["distance"])
        mean_flips = f"{np.mean(flips):.0f}" if flips else "-"
        print(f"gaussian leak={int(leak)} k={k} budget={p.flip_budget} wins={wins}/{trials} "
              f"aborted={aborted} mean_flips={mean_flips}")


def quarter(trials: int, seed: int) -> None:
    for label, p in (("fixture", single_bit_fixture()), ("desk", desk_inner_params())):
        scheme = schemes.SingleBitScheme(p)
        rng = np.random.default_rng(seed)
        keys = scheme.keygen(rng)
        d0, d1, outs = [], [], {"0": 0, "1": 0, "BOT": 0}
        for _ in range(trials):
            res = games.quarter_attack(scheme, keys, rng)
            d0.append((res.x_mid ^ res.x0).weight() / p.n)
            d1.append((res.x_mid ^ res.x1).weight() / p.n)
            outs[games.fmt_message(scheme.decode(keys, res.x_mid))] += 1
        print(f"quarter {label}: n={p.n} d={p.d} distance_x0={np.mean(d0):.4f} "
              f"distance_x1={np.mean(d1):.4f} midpoint_decodes={outs}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    gaussian(args.trials, args.seed)
    quarter(args.trials, args.seed)


if __name__ == "__main__":
    main()
