"""Command-line front end.

Subcommands: ``bound``, ``simulate``, ``verify``, ``sketch`` and ``design``.
CSV goes to ``--out`` (or stdout), the human-readable summary to stdout (or
stderr when the CSV occupies stdout).  Exit codes: 0 success, 1 failed
verification, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import compare, gaussmodel as gm, io as pio, rng as _rng
from .apps import covariance as cov, designs, sketching, wishart
from .matcore import RectMatrix, ValidationError, random_orthonormal
from .mcsim import figures, lemmas, scenarios, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


class _Usage(Exception):
    pass


def _grid(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psdc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bound", help="comparison bound for an application scenario")
    b.add_argument("--scenario", required=True,
                   choices=["wishart", "wishart-nonexample", "design2", "scov", "sparse-cov",
                            "injection", "model"])
    b.add_argument("--d", type=_pos_int)
    b.add_argument("--n", type=_pos_int)
    b.add_argument("--beta", type=float)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--delta", type=float)
    b.add_argument("--zeta", type=float)
    b.add_argument("--C", type=float, dest="C")
    b.add_argument("--k", type=_pos_int)
    b.add_argument("--rows", type=_pos_int, help="n for a random orthonormal Q (injection)")
    b.add_argument("--q-file")
    b.add_argument("--model-file")
    b.add_argument("--theorem", choices=["weighted", "iid"], default="weighted",
                   help="dimension factor d (weighted) or 2d (iid) for --scenario model")
    b.add_argument("--elmin", type=float, help="analytic E λ_min(Z); otherwise Monte Carlo")
    b.add_argument("--trials", type=_pos_int, default=4000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")

    s = sub.add_parser("simulate", help="run one Monte Carlo check or emit figure data")
    s.add_argument("--scenario", choices=["bernoulli-weighted", "wishart", "sparse-cov",
                                          "scalar-sum", "design2"])
    s.add_argument("--check", choices=["mgf", "poly", "tail"], default="mgf")
    s.add_argument("--figure", choices=["sum1d", "sum2x2"])
    s.add_argument("--weight", choices=list(figures.WEIGHTS), default="chi2")
    s.add_argument("--grid", type=_grid, help="comma-separated θ, p or t values")
    s.add_argument("--d", type=_pos_int)
    s.add_argument("--n", type=_pos_int)
    s.add_argument("--p", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--zeta", type=float)
    s.add_argument("--C", type=float, dest="C")
    s.add_argument("--zero-shift", action="store_true", help="use Δ = 0 instead of Δ = E Y")
    s.add_argument("--trials", type=_pos_int, default=20000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")

    v = sub.add_parser("verify", help="run a built-in verification suite")
    v.add_argument("--suite", required=True, choices=list(SUITES) + ["all"])
    v.add_argument("--trials", type=_pos_int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")

    k = sub.add_parser("sketch", help="draw a sparse sign sketch and optionally certify it on Q")
    k.add_argument("--rows", type=_pos_int, help="n, the number of sketch columns")
    k.add_argument("--dim", type=_pos_int, help="d for a random orthonormal Q")
    k.add_argument("--k", type=_pos_int)
    k.add_argument("--zeta", type=float)
    k.add_argument("--epsilon", type=float, default=0.5)
    k.add_argument("--delta", type=float, default=0.1)
    k.add_argument("--preset", choices=["theory", "practical"], default="theory")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--q-file")
    k.add_argument("--out")

    dsg = sub.add_parser("design", help="check the 1- or 2-design identity of a vector system")
    dsg.add_argument("--vectors-file", required=True, help="matrix CSV whose rows are the vectors")
    dsg.add_argument("--order", type=int, choices=[1, 2], default=2)
    dsg.add_argument("--tol", type=float, default=1e-10)
    dsg.add_argument("--probes", type=_pos_int)
    dsg.add_argument("--seed", type=int, default=0)
    return p


# ---------------------------------------------------------------------------
# output


class _Out:
    def __init__(self, path: Optional[str], seed: int = 0):
        self.path = path
        self.seed = seed
        self.summary = sys.stdout if path else sys.stderr

    def csv(self, rows, schema):
        if self.path:
            pio.write_csv(rows, schema, self.path)
        else:
            sys.stdout.write(pio.csv_text(rows, schema))

    def say(self, text: str):
        self.summary.write(text.rstrip("\n") + "\n")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise _Usage("missing required flags: " + ", ".join("--" + m for m in missing))


def _emit_report(out: _Out, rep: compare.BoundReport, header: str, extra: str = ""):
    out.csv([rep.as_row()], compare.BoundReport.schema())
    out.say(f"# {header} seed={out.seed}\n" + rep.to_text() + extra)


# ---------------------------------------------------------------------------
# bound


def _load_q(args) -> RectMatrix:
    if args.q_file:
        return RectMatrix.of(pio.read_matrix(args.q_file))
    _need(args, "rows", "d")
    return random_orthonormal(args.rows, args.d, _rng.stream(args.seed, 0x0F), "real")


def cmd_bound(args) -> int:
    out = _Out(args.out, args.seed)
    sc = args.scenario
    if sc == "wishart":
        _need(args, "d", "n")
        res = wishart.wishart_report(args.d, args.n)
        _emit_report(out, res.report, f"wishart d={args.d} n={args.n}",
                     f"rescaled_lb = {pio.fmt_value(res.rescaled_lb)}\n")
    elif sc == "wishart-nonexample":
        _need(args, "d", "n")
        _emit_report(out, wishart.wishart_nonexample_report(args.d, args.n),
                     f"wishart single-copy d={args.d} n={args.n}")
    elif sc == "design2":
        _need(args, "d")
        if args.beta is None:
            _need(args, "delta")
            plan = designs.design_sampling_plan(args.d, args.delta, 2)
            beta, s = plan.beta, plan.s
        else:
            beta, s = args.beta, args.beta * args.d
        rep = designs.design2_report(args.d, beta)
        _emit_report(out, rep, f"design2 d={args.d} beta={beta:.12g}",
                     f"s = {pio.fmt_value(s)}\nfailure_bound_at_zero = "
                     f"{pio.fmt_value(rep.tail(max(rep.elmin_z, 0.0)))}\n")
    elif sc == "scov":
        _need(args, "d", "beta", "epsilon", "delta")
        plan = cov.scov_sample_size(cov.CovarianceProblem(args.d, args.epsilon, args.delta, beta=args.beta))
        row = {"n": plan.n, "norm_bound": plan.norm_bound, "sigma_star2_ub": plan.sigma_star2_ub}
        out.csv([row], list(row))
        out.say(f"# four-moment sample size seed={args.seed}\n" + "".join(f"{k} = {pio.fmt_value(v)}\n" for k, v in row.items()))
    elif sc == "sparse-cov":
        _need(args, "d", "zeta", "C", "epsilon", "delta")
        prob = cov.CovarianceProblem(args.d, args.epsilon, args.delta, zeta=args.zeta, C=args.C)
        res = cov.sparse_cov_report(prob, args.n)
        _emit_report(out, res.report, f"sparse covariance d={args.d} zeta={args.zeta} C={args.C}",
                     f"required_n = {res.required_n}\nn = {res.n}\n"
                     f"regime = {cov.sparse_cov_regime(prob)}\n")
    elif sc == "injection":
        q = _load_q(args)
        mu = sketching.coherence(q)
        if args.k is None or args.zeta is None:
            _need(args, "epsilon", "delta")
            sp_ = sketching.sketch_params(q.cols, mu, args.epsilon, args.delta)
            k, zeta = sp_.k, sp_.zeta
        else:
            k, zeta = args.k, args.zeta
        res = sketching.injection_model(q, k, zeta)
        _emit_report(out, res.report, f"injection n={q.rows} d={q.cols} k={k} zeta={zeta:.12g}",
                     f"coherence = {pio.fmt_value(mu)}\n")
    else:
        _need(args, "model_file")
        model = pio.read_model(args.model_file)
        st = gm.stats(model)
        source = compare.AnalyticLmin(args.elmin) if args.elmin is not None else \
            compare.MonteCarloLmin(args.trials, args.seed)
        elmin, se, src = compare.resolve_elmin(model, source)
        factor = model.dim if args.theorem == "weighted" else 2 * model.dim
        rep = compare.make_report(f"model-{args.theorem}", elmin, st.sigma_star2, factor, src, se)
        _emit_report(out, rep, f"model {args.model_file} trials={args.trials}",
                     f"sigma2 = {pio.fmt_value(st.sigma2)}\n"
                     f"sigma_star2_is_exact = {pio.fmt_value(st.sigma_star2_is_exact)}\n"
                     f"bern_lb = {pio.fmt_value(compare.bern_lb(model))}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / verify


def _scenario_from_args(args) -> scenarios.Scenario:
    name = args.scenario
    kw = {}
    if name == "bernoulli-weighted":
        kw = {k: v for k, v in (("d", args.d), ("n", args.n), ("p", args.p)) if v is not None}
        kw["seed"] = 11 if args.seed == 0 else args.seed
        sc = scenarios.bernoulli_weighted(**kw)
    elif name == "wishart":
        sc = scenarios.wishart(args.d or 3, args.n or 10)
    elif name == "sparse-cov":
        sc = scenarios.sparse_cov(args.d or 10, args.n or 50, args.zeta or 3.0, args.C or 1.0)
    elif name == "scalar-sum":
        sc = scenarios.scalar_sum(args.n or 20, args.p if args.p is not None else 0.3)
    else:
        sc = scenarios.design2_mub(args.beta or 16.0)
    if args.zero_shift:
        sc = sc.with_shift(np.zeros((sc.d, sc.d)))
    return sc


def _emit_verification(out: _Out, reports) -> int:
    rows = []
    for r in reports:
        rows.extend(r.table())
        status = "PASS" if r.passed else "FAIL"
        out.say(f"# {status} {r.kind} {r.name} seed={r.seed} trials={r.trials} "
                f"slack={r.slack} {r.notes}".rstrip())
    out.csv(rows, verify.GridRow.schema())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_simulate(args) -> int:
    out = _Out(args.out)
    if args.figure:
        schema, rows = figures.emit_figure_data(args.figure, args.n or 20, args.weight,
                                                args.trials, args.seed,
                                                p=args.p if args.p is not None else 0.5)
        out.csv(rows, schema)
        out.say(f"# figure {args.figure} weight={args.weight} n={args.n or 20} "
                f"seed={args.seed} trials={args.trials}")
        return EXIT_OK
    _need(args, "scenario")
    sc = _scenario_from_args(args)
    if args.check == "mgf":
        rep = verify.verify_trace_mgf(sc, args.grid or [0.25, 0.5, 1.0, 2.0], args.trials, args.seed)
    elif args.check == "poly":
        rep = verify.verify_poly_moment(sc, args.grid or [4.0], args.trials, args.seed)
    else:
        grid = args.grid
        if grid is None:
            base = math.sqrt(2 * sc.sigma_star2 * math.log(sc.dim_factor))
            grid = [c * base for c in (0.0, 0.5, 1.0, 1.25, 1.5)]
        rep = verify.verify_tail(sc, grid, args.trials, args.seed)
    return _emit_verification(out, [rep])


def _suite_trace_mgf(trials, seed):
    t = trials or 10 ** 5
    return [verify.verify_trace_mgf(scenarios.bernoulli_weighted(), [0.25, 0.5, 1, 2], t, seed),
            verify.verify_trace_mgf(scenarios.wishart(3, 10), [0.1, 0.5, 1], t, seed)]


def _suite_poly(trials, seed):
    t = trials or 10 ** 5
    zero = lambda sc: sc.with_shift(np.zeros((sc.d, sc.d)))
    return [verify.verify_poly_moment(zero(scenarios.bernoulli_weighted()), [4], t, seed),
            verify.verify_poly_moment(zero(scenarios.wishart(3, 10)), [4], t, seed)]


def _suite_tail(trials, seed):
    t = trials or 10 ** 4
    w = scenarios.wishart(5, 500)
    base = math.sqrt(2 * w.sigma_star2 * math.log(w.dim_factor))
    d2 = scenarios.design2_mub(16.0)
    return [verify.verify_tail(w, [c * base for c in (0.5, 1.0, 1.1, 1.25, 1.5)], t, seed),
            verify.verify_tail(d2, [0.0, 2.0, 4.0, 6.0, 8.0], t, seed)]


def _suite_poissonization(trials, seed):
    from .matcore import SymMatrix
    basis = [SymMatrix(np.diag([1.0, 0.0])), SymMatrix(np.diag([0.0, 1.0]))]
    return [lemmas.poissonization_check(basis, 2, [0.0, 1.0]),
            lemmas.poissonization_check(lemmas.random_psd_list(2, 2, 5), 2, [0.5, 1, 2]),
            lemmas.poissonization_check(lemmas.random_psd_list(3, 2, 5), 2, [0.5, 1, 2])]


def _suite_covcm(trials, seed):
    t = trials or 10 ** 5
    grid, bs = [0.5, 1.0, 2.0], [0.0, 1.0]
    return [lemmas.covcm_check(lemmas.bernoulli(0.5), grid, bs),
            lemmas.covcm_check(lemmas.two_point(0.2, 3.0, 0.3), grid, bs),
            lemmas.covcm_check(lemmas.exponential(1.0), grid, bs, t, seed)]


def _suite_scalar_mgf(trials, seed):
    thetas = list(np.linspace(0.0, 5.0, 40))
    return [lemmas.bernoulli_mgf_check(p, n, thetas)
            for p in np.round(np.arange(0.1, 1.0, 0.1), 10) for n in (5, 20, 100)]


SUITES = {
    "scalar-mgf": _suite_scalar_mgf,
    "poissonization": _suite_poissonization,
    "covcm": _suite_covcm,
    "trace-mgf": _suite_trace_mgf,
    "poly": _suite_poly,
    "tail": _suite_tail,
}


def cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        reports.extend(SUITES[name](args.trials, args.seed))
    return _emit_verification(_Out(args.out), reports)


# ---------------------------------------------------------------------------
# sketch / design


def cmd_sketch(args) -> int:
    out = _Out(args.out)
    q = None
    if args.q_file or args.dim:
        if args.q_file:
            q = RectMatrix.of(pio.read_matrix(args.q_file))
        else:
            _need(args, "rows")
            q = random_orthonormal(args.rows, args.dim, _rng.stream(args.seed, 0x0F), "real")
    n = q.rows if q is not None else args.rows
    if n is None:
        raise _Usage("sketch needs --rows or --q-file")
    if args.rows is not None and q is not None and args.rows != q.rows:
        raise ValidationError("--rows disagrees with the rows of Q")
    if args.k is not None and args.zeta is not None:
        params = sketching.SketchParams(args.k, args.zeta, certified=False, label="user")
    elif args.preset == "practical":
        if q is None:
            raise _Usage("the practical preset needs Q (or --dim)")
        params = sketching.practical_preset(q.cols)
    else:
        if q is None:
            raise _Usage("derived parameters need Q (or --dim); otherwise pass --k and --zeta")
        params = sketching.sketch_params(q.cols, sketching.coherence(q), args.epsilon, args.delta)
    s = sketching.make_sketch(params.k, n, params.zeta, args.seed)
    rows = [{"row": r, "col": c, "value": v} for r, c, v in s.triplets()]
    out.csv(rows, ["row", "col", "value"])
    lines = [f"# sketch k={params.k} n={n} zeta={params.zeta:.12g} seed={args.seed} "
             f"params={params.label}", f"nnz = {s.nnz}"]
    if q is not None:
        lines.append(f"injection_lmin = {pio.fmt_value(sketching.injection_lmin(q, s))}")
    out.say("\n".join(lines))
    return EXIT_OK


def cmd_design(args) -> int:
    vec = pio.read_matrix(args.vectors_file)
    sys_ = designs.DesignSystem(np.asarray(vec.entries))
    res = designs.check_design(sys_, args.order, args.tol, args.probes, args.seed)
    print(f"# design seed={args.seed}\norder = {res.order}\nmode = {res.mode}\nresidual = {pio.fmt_value(res.residual)}\n"
          f"is_design = {pio.fmt_value(res.ok)}")
    return EXIT_OK if res.ok else EXIT_FAIL


COMMANDS = {"bound": cmd_bound, "simulate": cmd_simulate, "verify": cmd_verify,
            "sketch": cmd_sketch, "design": cmd_design}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (_Usage, ValidationError) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
