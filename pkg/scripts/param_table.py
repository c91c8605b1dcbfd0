"""Derived parameters across block lengths, with the predicted honest margin.

For each n (with r = n) prints the derived (t, d, eta, zeta) of both schemes
and the expected fraction of violated checks for an honest codeword hit by
floor(delta n) random flips, next to the decoder threshold. "margin" is the
gap in standard deviations; a negative value means honest codewords are
expected to be rejected.

usage: python scripts/param_table.py [--delta 0.1] [--max-log 20]
"""
import argparse
import math

from prc.ldpc import derive_params_single_bit, derive_params_zero_bit


def honest_violation_rate(n: int, t: int, noise: int, flips: int) -> float:
    # expected weight of e + flips when the flips land uniformly
    w = noise + flips - 2 * noise * flips / n
    b = 1 - 2 * w / n
    return (1 - b ** t) / 2


def row(label: str, p) -> str:
    rate = honest_violation_rate(p.n, p.t, p.noise_weight, p.flip_budget)
    thr = float(p.threshold) / p.r
    sd = math.sqrt(rate * (1 - rate) / p.r)
    return (f"{label:<6} n=2^{int(math.log2(p.n)):<3} t={p.t:<3} d={p.d:<4} eta={float(p.eta):.4f} "
            f"zeta={float(p.zeta):.4f} honest={rate:.4f} threshold={thr:.4f} "
            f"margin={(thr - rate) / sd:+.1f}sd")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--max-log", type=int, default=20)
    args = ap.parse_args()
    for k in range(10, args.max_log + 1, 2):
        n = 2 ** k
        for label, derive in (("zero", derive_params_zero_bit), ("single", derive_params_single_bit)):
            try:
                print(row(label, derive(n, n, args.delta)))
            except ValueError as exc:
                print(f"{label:<6} n=2^{k:<3} invalid: {exc}")


if __name__ == "__main__":
    main()
