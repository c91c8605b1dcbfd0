"""Scan (n, t) for weights where the exact bias over all weight-t parities leaves the sandwich.

Uses the Krawtchouk closed form, so every weight a in [0, n] is checked exactly.

usage: python scripts/parity_bias_scan.py [--max-n 128]
"""
import argparse

from prc.analysis import parity_bias_violations


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=128)
    args = ap.parse_args()
    for t in (2, 4, 6):
        failing = 0
        for n in range(2 * t * t, args.max_n + 1):
            bad = parity_bias_violations(n, t)
            if not bad:
                continue
            failing += 1
            a, lower, value, upper = bad[len(bad) // 2]
            side = "upper" if value > upper else "lower"
            lo = "-" if lower is None else f"{float(lower):.3g}"
            print(f"n={n} t={t}: {len(bad)} weights fail ({side} bound), e.g. a={a} "
                  f"lower={lo} value={float(value):.3g} upper={float(upper):.3g}")
        print(f"t={t}: {failing} of {args.max_n - 2 * t * t + 1} lengths have a violation")

if __name__ == "__main__":
    main()
