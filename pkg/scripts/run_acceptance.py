"""Run the acceptance criteria and print one PASS/FAIL line each.

usage: python scripts/run_acceptance.py [criterion numbers...]
"""
import sys

from prc.acceptance import CRITERIA


def main(argv: list[str]) -> int:
    numbers = [int(a) for a in argv] or sorted(CRITERIA)
    failed = 0
    for n in numbers:
        result = CRITERIA[n]()
        print(result.line(), flush=True)
        failed += not result.passed
    print(f"{len(numbers) - failed}/{len(numbers)} criteria pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
