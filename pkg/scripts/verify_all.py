"""Run every built-in verification suite and print one status line per report."""
import argparse

from psdcompare import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    failed = 0
    for name, suite in cli.SUITES.items():
        for rep in suite(a.trials, a.seed):
            print(f"{'PASS' if rep.passed else 'FAIL'}  {name:15s} {rep.name}")
            failed += not rep.passed
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
