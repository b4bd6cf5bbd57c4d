"""Write the scalar and 2 x 2 comparison CSVs for each weight law."""
import argparse
from pathlib import Path

from psdcompare import io as pio
from psdcompare.mcsim import emit_figure_data
from psdcompare.mcsim.figures import WEIGHTS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="figure_data")
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--trials", type=int, default=20000)
    a = ap.parse_args(argv)
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for kind in ("sum1d", "sum2x2"):
        for w in WEIGHTS:
            schema, rows = emit_figure_data(kind, a.n, w, a.trials)
            pio.write_csv(rows, schema, out / f"{kind}_{w}.csv")
            print(out / f"{kind}_{w}.csv")


if __name__ == "__main__":
    main()
