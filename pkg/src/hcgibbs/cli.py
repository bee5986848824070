"""Command-line front end.

Subcommands expose the solvers, the regime classifier, the chain builder,
the tree sampler, and a phase-diagram sweep.  Every command is
deterministic given its flags and seed.  Output goes to the path given by
--out, with "-" meaning standard output.

Exit codes: 0 success, 2 bad input, 3 divergent activities (no
translation-invariant Gibbs measure exists), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import chain as chain_mod
from . import sampler as sampler_mod
from . import three_loop, two_loop
from .errors import DivergentActivities, InputError, NumericalFailure
from .model import (
    ActivitySpec,
    AdmissibilityGraph,
    BoundaryLawSolution,
    graph_from_spec,
    relabel_solution,
    spec_from_json,
)
from .oracle import multistart_count

_FLOAT_FMT = "%.17g"


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_json(obj, out: str) -> None:
    _write(json.dumps(obj, indent=2) + "\n", out)


def _load_spec(path: str) -> ActivitySpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read spec file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"spec file {path} is not valid JSON: {exc}")
    return spec_from_json(data)


def _positive(value: str, name: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise InputError(f"{name} must be a number, got {value!r}")
    if not out > 0.0:
        raise InputError(f"{name} must be positive, got {out}")
    return out


def _solve_spec(spec: ActivitySpec, graph: AdmissibilityGraph, mode: str | None):
    """All boundary-law solutions of a spec, relabeled to the graph's loops."""
    n_loops = len(graph.loops)
    if mode == "two-loop" and n_loops != 1:
        raise InputError(f"--graph two-loop needs exactly one nonzero loop, spec has {n_loops}")
    if mode == "three-loop" and n_loops != 2:
        raise InputError(f"--graph three-loop needs exactly two nonzero loops, spec has {n_loops}")
    if n_loops == 1:
        sols = [two_loop.solve_unique(two_loop.TwoLoopProblem.from_spec(spec))]
    else:
        sols = three_loop.enumerate_solutions(three_loop.ThreeLoopProblem.from_spec(spec))
    return [relabel_solution(s, graph) for s in sols]


def _pick_branch(sols: list[BoundaryLawSolution], branch: str | None) -> BoundaryLawSolution:
    if branch is None:
        return sols[0]
    for s in sols:
        if s.branch == branch:
            return s
    names = [s.branch for s in sols]
    raise InputError(f"no solution on branch {branch!r}; available: {names}")


def cmd_thresholds(args) -> int:
    lam = _positive(args.lam, "--lambda")
    Lambda1, Lambda2 = three_loop.thresholds(lam)
    _emit_json(
        {
            "lambda": lam,
            "Lambda1": Lambda1,
            "Lambda2": Lambda2,
            "lambda_star": three_loop.LAMBDA_STAR,
        },
        args.out,
    )
    return 0


def cmd_solve(args) -> int:
    spec = _load_spec(args.specfile)
    graph = graph_from_spec(spec)
    sols = _solve_spec(spec, graph, args.graph)
    _emit_json([s.to_json_dict() for s in sols], args.out)
    return 0


def cmd_classify(args) -> int:
    if args.divergent:
        report = three_loop.classify(divergent=True)
    else:
        if args.lam is None or args.Lambda is None:
            raise InputError("classify needs --lambda and --Lambda (or --divergent)")
        lam = _positive(args.lam, "--lambda")
        Lambda = _positive(args.Lambda, "--Lambda")
        report = three_loop.classify(three_loop.ThreeLoopProblem(lam, Lambda))
    _emit_json(report.to_json_dict(), args.out)
    return 0


def cmd_chain(args) -> int:
    spec = _load_spec(args.specfile)
    graph = graph_from_spec(spec)
    sols = _solve_spec(spec, graph, None)
    window = args.window if args.window is not None else chain_mod.minimal_window(spec)

    entries = []
    for s in sols:
        tm = chain_mod.transition_matrix(s, spec, graph, window)
        sd = chain_mod.stationary_closed_form(s, spec, graph, window)
        report = chain_mod.verify_stationary(sd, tm)
        if not report.passed:
            raise NumericalFailure(
                f"stationarity check failed on branch {s.branch}: "
                f"residual {report.max_residual:.3e}, sum error {report.sum_error:.3e}"
            )
        entries.append((s, tm, sd, report))

    if args.format == "csv":
        s, tm, sd, _ = next(
            (e for e in entries if args.branch in (None, e[0].branch)),
            entries[0],
        )
        if args.branch is not None and s.branch != args.branch:
            raise InputError(f"no solution on branch {args.branch!r}")
        _write(chain_mod.matrix_to_csv(tm) + "\n" + chain_mod.distribution_to_csv(sd), args.out)
        return 0

    _emit_json(
        {
            "window": window,
            "solutions": [
                {
                    "branch": s.branch,
                    "solution": s.to_json_dict(),
                    "matrix": tm.to_json_dict(),
                    "stationary": sd.to_json_dict(),
                    "report": {
                        "max_residual": report.max_residual,
                        "sum_error": report.sum_error,
                        "passed": report.passed,
                    },
                    "irreducible": chain_mod.irreducible(tm),
                }
                for s, tm, sd, report in entries
            ],
        },
        args.out,
    )
    return 0


def cmd_sample(args) -> int:
    spec = _load_spec(args.specfile)
    graph = graph_from_spec(spec)
    sols = _solve_spec(spec, graph, None)
    sol = _pick_branch(sols, args.branch)
    window = args.window if args.window is not None else chain_mod.minimal_window(spec)

    forest = sampler_mod.sample_forest(
        sol, spec, graph, args.depth, args.trees, args.seed, window=window
    )
    sd = chain_mod.stationary_closed_form(sol, spec, graph, window)
    marginal = sampler_mod.empirical_marginal(forest)
    good = sum(sampler_mod.edge_admissibility(s, graph) for s in forest)
    _emit_json(
        {
            "branch": sol.branch,
            "depth": args.depth,
            "trees": args.trees,
            "seed": args.seed,
            "window": window,
            "samples": [s.to_json_dict() for s in forest],
            "marginal": {
                str(lab): freq for lab, freq in sorted(marginal.items(), key=lambda kv: str(kv[0]))
            },
            "tv_to_stationary": sampler_mod.marginal_tv(marginal, sd),
            "admissible_fraction": good / len(forest),
        },
        args.out,
    )
    return 0


def _parse_grid(text: str, name: str) -> list[float]:
    if text.strip() == "":
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"{name} must be comma-separated numbers, got {text!r}")


def _sweep_curves(args) -> int:
    pair = args.emit_curves
    if pair not in ("f,g", "h,delta"):
        raise InputError(f'--emit-curves takes "f,g" or "h,delta", got {pair!r}')
    if args.x is None or args.Lambda is None:
        raise InputError("--emit-curves needs --x and --Lambda")
    x = _positive(args.x, "--x")
    Lambda = _positive(args.Lambda, "--Lambda")
    if pair == "f,g":
        bound = x * x / 4.0
        funcs = (two_loop.f_curve, two_loop.g_curve)
        header = "lambda,f,g"
    else:
        bound = (1.0 + x) ** 2 / 4.0
        funcs = (three_loop.h_curve, three_loop.delta_curve)
        header = "lambda,h,delta"
    n = args.points
    lines = [header]
    for i in range(1, n + 1):
        lam = bound * i / n
        row = [lam] + [fn(lam, x, Lambda) for fn in funcs]
        lines.append(",".join(_FLOAT_FMT % v for v in row))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    if args.emit_curves is not None:
        return _sweep_curves(args)
    if args.lambda_grid is None or args.Lambda_grid is None:
        raise InputError("sweep needs --lambda-grid and --Lambda-grid (or --emit-curves)")
    lams = _parse_grid(args.lambda_grid, "--lambda-grid")
    Lambdas = _parse_grid(args.Lambda_grid, "--Lambda-grid")
    lines = ["lambda,Lambda,count_closed_form,count_oracle,agree"]
    for lam in lams:
        for Lambda in Lambdas:
            if not Lambda >= 2.0 * lam:
                print(
                    f"skipping lambda={lam:g} Lambda={Lambda:g}: needs Lambda >= 2*lambda",
                    file=sys.stderr,
                )
                continue
            problem = three_loop.ThreeLoopProblem(lam, Lambda)
            sols = three_loop.enumerate_solutions(problem)
            closed = three_loop.classify(problem).count
            spec = ActivitySpec(
                loop_activities={1: lam, 2: lam}, tail_mass=Lambda - 2.0 * lam
            )
            graph = graph_from_spec(spec)
            oracle = multistart_count(
                spec, graph, n_starts=args.starts, seed=args.seed, hints=sols
            ).count
            agree = "true" if closed == oracle else "false"
            lines.append(
                f"{_FLOAT_FMT % lam},{_FLOAT_FMT % Lambda},{closed},{oracle},{agree}"
            )
    _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hcgibbs",
        description="Gibbs measures of the hard-core model on the order-2 Cayley tree",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="regime thresholds for a loop activity")
    p.add_argument("--lambda", dest="lam", required=True, help="loop activity")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("solve", help="all boundary-law solutions of a spec file")
    p.add_argument("specfile")
    p.add_argument("--graph", choices=["two-loop", "three-loop"], default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("classify", help="solution count for two equal loop activities")
    p.add_argument("--lambda", dest="lam", default=None, help="loop activity")
    p.add_argument("--Lambda", default=None, help="total activity")
    p.add_argument("--divergent", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("chain", help="transition matrix and stationary distribution")
    p.add_argument("specfile")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--branch", default=None, help="branch to emit in csv mode")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("sample", help="sample tree configurations")
    p.add_argument("specfile")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--trees", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--branch", default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("sweep", help="phase-diagram sweep or proof-curve dump")
    p.add_argument("--lambda-grid", dest="lambda_grid", default=None)
    p.add_argument("--Lambda-grid", dest="Lambda_grid", default=None)
    p.add_argument("--starts", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-curves", dest="emit_curves", default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--Lambda", default=None)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergentActivities as exc:
        print(f"no TIGM: {exc}", file=sys.stderr)
        return 3
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


def entry_point() -> None:
    sys.exit(main())
