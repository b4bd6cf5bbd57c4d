import csv
import io
import math

import numpy as np
import pytest

from psdcompare import cli, compare, gaussmodel as gm, io as pio
from psdcompare.apps import designs, sketching, wishart
from psdcompare.matcore import SymMatrix, ValidationError, random_orthonormal
from psdcompare.mcsim import lemmas
from psdcompare.rng import stream


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_write_csv_empty_is_header_only(tmp_path):
    f = tmp_path / "e.csv"
    pio.write_csv([], ["a", "b"], f)
    assert f.read_bytes() == b"a,b\r\n"


def test_report_round_trip(tmp_path):
    rep = wishart.wishart_report(7, 300).report
    f = tmp_path / "r.csv"
    pio.write_csv([rep.as_row()], rep.schema(), f)
    back = pio.read_csv(f)[0]
    for k, v in rep.as_row().items():
        if isinstance(v, str):
            assert back[k] == v
        else:
            assert float(back[k]) == pytest.approx(v, rel=1e-11)


def test_many_rows_and_determinism(tmp_path):
    rows = [{"x": i, "y": math.sqrt(i), "ok": i % 2 == 0} for i in range(1000)]
    f = tmp_path / "m.csv"
    pio.write_csv(rows, ["x", "y", "ok"], f)
    back = pio.read_csv(f)
    assert len(back) == 1000 and back[4]["ok"] == "true"
    assert f.read_bytes() == pio.csv_text(rows, ["x", "y", "ok"]).encode()
    with pytest.raises(ValidationError):
        pio.csv_text([{"x": 1}], ["x", "y"])


def test_fmt_value():
    assert pio.fmt_value(1 / 3) == "0.333333333333"
    assert pio.fmt_value(True) == "true" and pio.fmt_value(float("inf")) == "inf"


@pytest.mark.parametrize("field", ["real", "complex"])
def test_matrix_file_round_trip(tmp_path, field):
    g = np.random.default_rng(1)
    a = g.standard_normal((4, 3))
    if field == "complex":
        a = a + 1j * g.standard_normal((4, 3))
    f = tmp_path / "m.csv"
    pio.write_matrix(a, f)
    back = pio.read_matrix(f)
    assert np.allclose(np.asarray(back.entries), a, rtol=1e-11)
    s = SymMatrix.of(a.T.conj() @ a)
    pio.write_matrix(s, f)
    assert isinstance(pio.read_matrix(f), SymMatrix)


def test_parse_model(tmp_path):
    q = random_orthonormal(6, 2, np.random.default_rng(0))
    pio.write_matrix(q, tmp_path / "q.csv")
    text = "\n".join(["dim = 2  # two by two", "shift = identity 3", "component = goe 0.5",
                      "component = scalar", "component = compressed q.csv 0.25"])
    m = pio.parse_model(text, tmp_path)
    assert m.dim == 2 and np.allclose(m.shift.entries, 3 * np.eye(2))
    assert [type(c).__name__ for c in m.components] == ["GOE", "Scalar", "CompressedDiagonal"]
    for bad in ("field = real", "dim = 2\ncomponent = wigner 1", "dim = 2\nshift = ones", "dim = 2\nfoo = 1"):
        with pytest.raises(ValidationError):
            pio.parse_model(bad, tmp_path)


def test_cli_bound_wishart(capsys):
    assert cli.run(["bound", "--scenario", "wishart", "--d", "100", "--n", "10000"]) == 0
    out = capsys.readouterr()
    row = _rows(out.out)[0]
    assert abs(float(row["expectation_lb"]) - 7436.2) < 0.05
    assert "seed=0" in out.err


def test_cli_bound_matches_module_api(tmp_path, capsys):
    f = tmp_path / "b.csv"
    assert cli.run(["bound", "--scenario", "wishart", "--d", "12", "--n", "400", "--out", str(f)]) == 0
    rep = wishart.wishart_report(12, 400).report
    assert f.read_bytes() == pio.csv_text([rep.as_row()], rep.schema()).encode()
    assert "seed=0" in capsys.readouterr().out


def test_cli_usage_errors(capsys):
    assert cli.run(["bound", "--scenario", "wishart", "--d", "-1", "--n", "5"]) == 2
    assert cli.run(["bound", "--scenario", "wishart", "--d", "3"]) == 2
    assert cli.run(["bound", "--scenario", "nope"]) == 2
    assert cli.run(["bogus"]) == 2
    assert cli.run(["bound", "--scenario", "scov", "--d", "3", "--beta", "0.5",
                    "--epsilon", "0.5", "--delta", "0.1"]) == 2
    assert cli.run(["design", "--vectors-file", "/nonexistent/v.csv"]) == 2


def test_cli_verify_poissonization(capsys):
    assert cli.run(["verify", "--suite", "poissonization"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows and all(r["pass"] == "true" for r in rows)
    want = lemmas.poissonization_check(lemmas.random_psd_list(3, 2, 5), 2, [0.5, 1, 2]).table()
    assert [float(r["lhs"]) for r in rows[-3:]] == pytest.approx([w["lhs"] for w in want], rel=1e-11)


def test_cli_sketch_matches_module(capsys):
    assert cli.run(["sketch", "--rows", "300", "--dim", "4", "--k", "40", "--zeta", "4", "--seed", "3"]) == 0
    out = capsys.readouterr()
    rows = _rows(out.out)
    s = sketching.make_sketch(40, 300, 4.0, 3)
    assert len(rows) == s.nnz
    assert [(int(r["row"]), int(r["col"])) for r in rows] == [(r, c) for r, c, _ in s.triplets()]
    q = random_orthonormal(300, 4, stream(3, 0x0F))
    lmin = float(out.err.split("injection_lmin = ")[1].split()[0])
    assert lmin == pytest.approx(sketching.injection_lmin(q, s), rel=1e-11)


def test_cli_design(tmp_path, capsys):
    good, bad = tmp_path / "mub.csv", tmp_path / "basis.csv"
    pio.write_matrix(designs.mub_c2().vectors, good)
    pio.write_matrix(np.eye(2, dtype=complex), bad)
    assert cli.run(["design", "--vectors-file", str(good)]) == 0
    assert "is_design = true" in capsys.readouterr().out
    assert cli.run(["design", "--vectors-file", str(bad)]) == 1
    assert cli.run(["design", "--vectors-file", str(bad), "--order", "1"]) == 0


def test_cli_simulate_and_figure(tmp_path, capsys):
    assert cli.run(["simulate", "--scenario", "wishart", "--check", "mgf", "--grid", "0.1,0.5",
                    "--trials", "2000"]) == 0
    assert len(_rows(capsys.readouterr().out)) == 2
    f = tmp_path / "fig.csv"
    assert cli.run(["simulate", "--figure", "sum1d", "--weight", "const", "--n", "5",
                    "--trials", "50", "--out", str(f)]) == 0
    assert len(pio.read_csv(f)) == 101


def test_cli_model_file(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("dim = 3\nshift = identity 10\ncomponent = goe 1\n")
    assert cli.run(["bound", "--scenario", "model", "--model-file", str(tmp_path / "m.txt"),
                    "--elmin", "6"]) == 0
    row = _rows(capsys.readouterr().out)[0]
    assert float(row["sigma_star2"]) == pytest.approx(2.0)
    assert float(row["expectation_lb"]) == pytest.approx(6 - math.sqrt(4 * math.log(3)))
