"""File formats: matrix CSV, model descriptors, and deterministic report CSV."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .gaussmodel import (GOE, GUE, CompressedDiagonal, Diagonal, GaussianModel, GeneralSeries,
                         RankOneSeries, Scalar)
from .matcore import RectMatrix, SymMatrix, ValidationError

SIG_DIGITS = 12


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, f".{SIG_DIGITS}g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(rows: Iterable[dict], schema: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(schema)
    for r in rows:
        missing = set(schema) - set(r)
        if missing:
            raise ValidationError(f"row is missing fields {sorted(missing)}")
        w.writerow([fmt_value(r[k]) for k in schema])
    return buf.getvalue()


def write_csv(rows: Iterable[dict], schema: Sequence[str], path) -> None:
    """Header from ``schema``, floats at 12 significant digits, CRLF line ends."""
    text = csv_text(rows, schema)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# matrices

def _fmt_scalar(z, field: str) -> str:
    if field == "real":
        return format(float(np.real(z)), ".17g")
    re_, im = float(np.real(z)), float(np.imag(z))
    sign = "-" if (im < 0 or (im == 0 and math.copysign(1, im) < 0)) else "+"
    return f"{re_:.17g}{sign}{abs(im):.17g}i"


def _parse_scalar(tok: str, field: str):
    tok = tok.strip()
    if field == "real":
        return float(tok)
    # "a+bi" literals map onto Python's "a+bj" syntax
    if tok.endswith("i"):
        tok = tok[:-1] + "j"
    try:
        return complex(tok.replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"bad complex literal {tok!r}") from exc


def _header(line: str) -> dict:
    out = {}
    for part in line.strip().split(","):
        if "=" not in part:
            raise ValidationError(f"malformed header field {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def write_matrix(m, path) -> None:
    """``dim=<d>,field=<f>`` header for square matrices, ``rows=,cols=,field=`` otherwise."""
    if isinstance(m, SymMatrix):
        head = f"dim={m.dim},field={m.field}"
    else:
        m = RectMatrix.of(m)
        head = f"rows={m.rows},cols={m.cols},field={m.field}"
    lines = [head] + [",".join(_fmt_scalar(z, m.field) for z in row) for row in m.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path):
    """Inverse of :func:`write_matrix`; returns a SymMatrix or RectMatrix."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty matrix file")
    head = _header(lines[0])
    field = head.get("field", "real")
    if field not in ("real", "complex"):
        raise ValidationError(f"{path}: unknown field {field!r}")
    data = np.array([[_parse_scalar(t, field) for t in ln.split(",")] for ln in lines[1:]],
                    dtype=complex if field == "complex" else float)
    if "dim" in head:
        d = int(head["dim"])
        if data.shape != (d, d):
            raise ValidationError(f"{path}: header says dim={d} but data is {data.shape}")
        return SymMatrix(data, field)
    r, c = int(head["rows"]), int(head["cols"])
    if data.shape != (r, c):
        raise ValidationError(f"{path}: header says {r}x{c} but data is {data.shape}")
    return RectMatrix(data, field)


# ---------------------------------------------------------------------------
# model descriptors
#
#   dim = 4
#   field = real
#   shift = identity 10        (or: zeros | diag 1,2,3,4 | file shift.csv)
#   component = goe 2.0
#   component = scalar 1.0
#   component = diagonal 0.5
#   component = gue 1.0
#   component = series h.csv   (one SymMatrix file per coefficient; repeat)
#   component = compressed q.csv 0.25


def _resolve(base: Path, name: str) -> Path:
    p = Path(name)
    return p if p.is_absolute() else base / p


def parse_model(text: str, base=".") -> GaussianModel:
    base = Path(base)
    kv, comps, series = {}, [], []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "component":
            comps.append((n, val.split()))
        elif key in ("dim", "field", "shift"):
            kv[key] = val
        else:
            raise ValidationError(f"line {n}: unknown key {key!r}")
    if "dim" not in kv:
        raise ValidationError("model descriptor needs dim")
    d = int(kv["dim"])
    field = kv.get("field", "real")
    shift = _parse_shift(kv.get("shift", "zeros"), d, field, base)
    out = []
    for n, parts in comps:
        kind, args = parts[0].lower(), parts[1:]
        try:
            if kind in ("scalar", "diagonal", "goe", "gue"):
                c = float(args[0]) if args else 1.0
                out.append({"scalar": Scalar, "diagonal": Diagonal, "goe": GOE, "gue": GUE}[kind](c))
            elif kind == "series":
                series.append(read_matrix(_resolve(base, args[0])).entries)
            elif kind == "compressed":
                q = read_matrix(_resolve(base, args[0]))
                out.append(CompressedDiagonal(q.entries, float(args[1]) if len(args) > 1 else 1.0))
            elif kind == "rankone":
                v = read_matrix(_resolve(base, args[0]))
                w = np.array([float(x) for x in args[1].split(",")]) if len(args) > 1 else np.ones(v.rows)
                out.append(RankOneSeries(w, v.entries))
            else:
                raise ValidationError(f"unknown component {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ValidationError(f"line {n}: {exc}") from exc
    if series:
        out.append(GeneralSeries(np.array(series)))
    return GaussianModel(d, field, shift, tuple(out))


def _parse_shift(spec: str, d: int, field: str, base: Path) -> SymMatrix:
    parts = spec.split(None, 1)
    kind = parts[0].lower()
    arg = parts[1] if len(parts) > 1 else ""
    if kind == "zeros":
        return SymMatrix.zeros(d, field)
    if kind == "identity":
        return SymMatrix(float(arg or 1.0) * np.eye(d), field)
    if kind == "diag":
        return SymMatrix(np.diag([float(x) for x in arg.split(",")]), field)
    if kind == "file":
        return SymMatrix.of(read_matrix(_resolve(base, arg.strip())), field)
    raise ValidationError(f"unknown shift form {spec!r}")


def read_model(path) -> GaussianModel:
    path = Path(path)
    return parse_model(path.read_text(encoding="utf-8"), path.parent)
