"""Wishart lower bounds across (d, n): comparison, matrix Bernstein and single-copy forms."""
import argparse
import sys

import numpy as np

from psdcompare import compare, io as pio
from psdcompare.apps import wishart


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="10,50,100")
    ap.add_argument("--ratios", default="100", help="n/d ratios")
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    rows = []
    for d in map(int, a.dims.split(",")):
        for r in map(float, a.ratios.split(",")):
            n = int(round(r * d))
            rep = wishart.wishart_report(d, n)
            epz = compare.epz_bounds(n * (d + 2) * np.eye(d), n * np.eye(d)).expectation_lb
            rows.append({"d": d, "n": n, "comparison": rep.report.expectation_lb,
                         "bern_lb": wishart.wishart_bern_lb(d, n), "epz": epz,
                         "single_copy": wishart.wishart_nonexample_report(d, n).expectation_lb,
                         "rescaled": rep.rescaled_lb, "bai_yin": wishart.bai_yin_limit(d / n)})
    schema = list(rows[0])
    if a.out:
        pio.write_csv(rows, schema, a.out)
    else:
        sys.stdout.write(pio.csv_text(rows, schema))


if __name__ == "__main__":
    main()
