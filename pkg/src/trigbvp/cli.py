"""Command-line front end.

Usage::

    trigbvp {solve,study,rank-check,bench} --spec FILE --out DIR
            [--q N] [--padding m] [--seed S] [--require-solution]

The spec file is JSON; see ``docs/spec-format.md`` for the schema.  Exit
codes: 0 success, 1 bad spec or arguments, 2 solver failure, 3 no solution
(only with ``--require-solution``).
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmarks import (
    PI,
    TestProblem,
    bench_rows,
    convergence_study,
    make_homogeneous_problem,
    make_nonhomogeneous_problem,
    nonhomogeneous_suite,
)
from .errors import (
    AmbiguousRankError,
    EvaluationError,
    InvalidInputError,
    NonConvergenceError,
    SingularJacobianError,
    TrigBVPError,
)
from .expr import compile_expression, differentiate, parse_expression
from .linear import (
    BOUNDARY_TYPES,
    BoundaryConditions,
    LinearProblem,
    Solvability,
    assemble_system,
    classify_solvability,
    evaluate_solution,
    solve_linear,
)
from .nonlinear import NewtonOptions, NonlinearProblem, NonlinearRHS, solve_nonlinear
from .operators import build_grid, build_operators

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_SOLVER = 2
EXIT_NO_SOLUTION = 3

KINDS = ("linear", "nonlinear", "named")
SOLVER_KEYS = {"tolerance", "ambiguity_band", "max_iterations", "residual_tolerance", "initial"}


class SpecError(InvalidInputError):
    """The problem specification is malformed."""


@dataclass
class ProblemSpec:
    kind: str
    q: int = 7
    padding: Optional[int] = None
    name: Optional[str] = None
    theta: Optional[float] = None
    beta_scale: float = 1.0
    interval: Optional[tuple] = None
    p: Optional[str] = None
    q_expr: Optional[str] = None
    r: Optional[str] = None
    f: Optional[str] = None
    boundary: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    exact: Optional[str] = None
    sample_points: int = 101
    q_range: tuple = (6, 7, 8, 9)
    solvers: tuple = ("tiba", "rk4")
    problems: Optional[list] = None


def _require(cond, message):
    if not cond:
        raise SpecError(message)


def _number(value, what):
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value),
        f"{what} must be a finite number, got {value!r}",
    )
    return float(value)


def _integer(value, what):
    _require(
        isinstance(value, int) and not isinstance(value, bool), f"{what} must be an integer"
    )
    return value


def _expr_text(value, what):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return repr(float(value))
    _require(isinstance(value, str) and value.strip(), f"{what} must be an expression string")
    return value


def parse_spec(data):
    """Validate a decoded JSON object and return a :class:`ProblemSpec`."""
    _require(isinstance(data, dict), "spec must be a JSON object")
    kind = data.get("kind")
    _require(kind in KINDS, f"kind must be one of {KINDS}, got {kind!r}")
    disc = data.get("discretization", {})
    _require(isinstance(disc, dict), "discretization must be an object")
    spec = ProblemSpec(kind=kind)
    if "q" in disc:
        spec.q = _integer(disc["q"], "discretization.q")
    if disc.get("padding") is not None:
        spec.padding = _integer(disc["padding"], "discretization.padding")

    solver = data.get("solver", {})
    _require(isinstance(solver, dict), "solver must be an object")
    unknown = set(solver) - SOLVER_KEYS
    _require(not unknown, f"unknown solver options: {sorted(unknown)}")
    spec.solver = dict(solver)

    spec.sample_points = _integer(data.get("sample_points", 101), "sample_points")
    _require(spec.sample_points >= 2, "sample_points must be >= 2")

    study = data.get("study", {})
    _require(isinstance(study, dict), "study must be an object")
    if "q_range" in study:
        qr = study["q_range"]
        _require(isinstance(qr, list) and qr, "study.q_range must be a non-empty list")
        spec.q_range = tuple(_integer(v, "study.q_range entry") for v in qr)
    if "solvers" in study:
        sv = study["solvers"]
        _require(
            isinstance(sv, list) and sv and all(s in ("tiba", "rk4") for s in sv),
            "study.solvers must be a non-empty list drawn from 'tiba', 'rk4'",
        )
        spec.solvers = tuple(sv)

    if kind == "named":
        if "problems" in data:
            probs = data["problems"]
            _require(
                probs == "nonhomogeneous" or (isinstance(probs, list) and probs),
                "problems must be 'nonhomogeneous' or a non-empty list",
            )
            if isinstance(probs, list):
                for item in probs:
                    _require(isinstance(item, dict) and "name" in item, "each problem needs a name")
            spec.problems = probs
        else:
            _require(isinstance(data.get("name"), str), "named spec needs a 'name'")
        spec.name = data.get("name")
        if "theta" in data:
            spec.theta = _number(data["theta"], "theta")
        if "beta_scale" in data:
            spec.beta_scale = _number(data["beta_scale"], "beta_scale")
        return spec

    interval = data.get("interval")
    _require(isinstance(interval, list) and len(interval) == 2, "interval must be [s, e]")
    s, e = (_number(v, "interval endpoint") for v in interval)
    _require(s < e, "interval needs s < e")
    spec.interval = (s, e)

    if kind == "linear":
        spec.p = _expr_text(data.get("p", "0"), "p")
        spec.q_expr = _expr_text(data.get("q", "0"), "q")
        spec.r = _expr_text(data.get("r", "0"), "r")
    else:
        _require("f" in data, "nonlinear spec needs an rhs expression 'f'")
        spec.f = _expr_text(data["f"], "f")

    bnd = data.get("boundary")
    _require(isinstance(bnd, dict), "boundary must be an object")
    _require(("type" in bnd) != ("D" in bnd), "boundary needs exactly one of 'type' or 'D'")
    _require("alpha" in bnd and "beta" in bnd, "boundary needs 'alpha' and 'beta'")
    if "type" in bnd:
        _require(bnd["type"] in BOUNDARY_TYPES, f"boundary type must be one of {sorted(BOUNDARY_TYPES)}")
    else:
        D = bnd["D"]
        _require(
            isinstance(D, list) and len(D) == 2 and all(isinstance(r, list) and len(r) == 4 for r in D),
            "boundary.D must be a 2x4 nested list",
        )
        for row in D:
            for v in row:
                _number(v, "boundary.D entry")
    _number(bnd["alpha"], "boundary.alpha")
    _number(bnd["beta"], "boundary.beta")
    spec.boundary = dict(bnd)

    if data.get("exact") is not None:
        spec.exact = _expr_text(data["exact"], "exact")
    return spec


def load_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from None
    return parse_spec(data)


# building problems ---------------------------------------------------------


def _named_problem(name, theta=None, beta_scale=1.0):
    kind, _, bc_type = name.partition("-")
    _require(bc_type in BOUNDARY_TYPES, f"unknown named problem {name!r}")
    if kind == "homogeneous":
        return make_homogeneous_problem(bc_type, beta_scale)
    if kind == "nonhomogeneous":
        return make_nonhomogeneous_problem(PI / 2 if theta is None else theta, bc_type)
    raise SpecError(f"unknown named problem {name!r}")


def _boundary(spec):
    bnd = spec.boundary
    if "type" in bnd:
        return BoundaryConditions.preset(bnd["type"], bnd["alpha"], bnd["beta"])
    return BoundaryConditions(np.array(bnd["D"], dtype=float), bnd["alpha"], bnd["beta"])


def _linear_case(spec):
    """LinearProblem and, when an exact solution is given, a TestProblem wrapper."""
    s, e = spec.interval
    p, q, r = (compile_expression(t, ("x",)) for t in (spec.p, spec.q_expr, spec.r))
    bc = _boundary(spec)
    problem = LinearProblem(p, q, r, s, e, bc)
    if spec.exact is None:
        return problem, None
    node = parse_expression(spec.exact, ("x",))
    d1 = differentiate(node, "x")
    d2 = differentiate(d1, "x")
    test = TestProblem(
        name="custom",
        kind="linear",
        bc_type=spec.boundary.get("type", "custom"),
        s=s,
        e=e,
        p=p,
        q=q,
        r=r,
        exact=compile_expression(node, ("x",)),
        exact_d=compile_expression(d1, ("x",)),
        exact_dd=compile_expression(d2, ("x",)),
        bc=bc,
    )
    return problem, test


def _nonlinear_problem(spec):
    s, e = spec.interval
    args = ("x", "v", "u")
    node = parse_expression(spec.f, args)
    rhs = NonlinearRHS(
        f=compile_expression(node, args),
        df_dv=compile_expression(differentiate(node, "v"), args),
        df_du=compile_expression(differentiate(node, "u"), args),
    )
    return NonlinearProblem(rhs, s, e, _boundary(spec))


def _exact_fn(spec):
    if spec.exact is None:
        return None
    return compile_expression(spec.exact, ("x",))


# output ----------------------------------------------------------------------


def fmt_number(x):
    """17 significant digits; non-finite values become ``None``."""
    x = float(x)
    if not math.isfinite(x):
        return None
    return format(x, ".17g")


def _json_value(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        text = fmt_number(obj)
        return "null" if text is None else text
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_json_value(v, indent, level + 1) for v in obj) + "]"
        items = ",\n".join(pad + _json_value(v, indent, level + 1) for v in obj)
        return "[\n" + items + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            pad + json.dumps(str(k)) + ": " + _json_value(v, indent, level + 1) for k, v in obj.items()
        )
        return "{\n" + items + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj, indent=2):
    """Deterministic JSON text with numbers at 17 significant digits."""
    return _json_value(obj, indent, 0) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        text = fmt_number(v)
        if text is None:
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return text
    text = str(v)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def dumps_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def _write(out_dir, name, text):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# subcommands ---------------------------------------------------------------


class NoSolution(Exception):
    pass


def _solve_spec(spec, M, m):
    """Return ``(report, exact_fn)`` for any problem kind."""
    opts = spec.solver
    if spec.kind == "named":
        prob = _named_problem(spec.name, spec.theta, spec.beta_scale)
        report = solve_linear(
            prob.linear_problem(), M, m, opts.get("tolerance", 1e-10), opts.get("ambiguity_band", 3.0)
        )
        return report, prob.exact
    if spec.kind == "linear":
        problem, _ = _linear_case(spec)
        report = solve_linear(
            problem, M, m, opts.get("tolerance", 1e-10), opts.get("ambiguity_band", 3.0)
        )
        return report, _exact_fn(spec)
    problem = _nonlinear_problem(spec)
    newton = NewtonOptions(
        max_iterations=opts.get("max_iterations", 50),
        residual_tolerance=opts.get("residual_tolerance"),
    )
    report = solve_nonlinear(problem, M, m, initial=opts.get("initial"), opts=newton)
    return report, _exact_fn(spec)


def cmd_solve(spec, args):
    M = 2**spec.q
    report, exact = _solve_spec(spec, M, spec.padding)
    if args.require_solution and report.solvability is Solvability.NONE:
        raise NoSolution("the boundary value problem has no solution")
    grid = report.grid
    payload = {
        "kind": spec.kind,
        "q": spec.q,
        "M": grid.M,
        "padding": grid.m,
        "interval": [grid.s, grid.e],
        "delta": grid.delta,
        "b": grid.b,
        "method": report.method,
        "iterations": report.iterations,
        "solvability": report.solvability.value,
        "rank_phi": report.rank_phi,
        "rank_aug": report.rank_aug,
        "condition_estimate": report.condition_estimate,
        "residual_max": report.residual_max,
        "boundary_errors": [abs(v) for v in report.boundary_residuals],
        "a0": report.a0,
        "a1": report.a1,
        "B": report.B,
        "V": report.V,
    }
    if exact is not None:
        sl = grid.interior_slice
        xs = grid.original_points[sl]
        payload["max_grid_error"] = float(np.max(np.abs(report.V[sl] - exact(xs))))
    x = np.linspace(grid.s, grid.e, spec.sample_points)
    y, yd, ydd = (evaluate_solution(report, x, k) for k in range(3))
    rows = [{"x": a, "y": b, "dy": c, "d2y": d} for a, b, c, d in zip(x, y, yd, ydd)]
    _write(args.out, "report.json", dumps_json(payload))
    _write(args.out, "solution.csv", dumps_csv(["x", "y", "dy", "d2y"], rows))
    return payload


def _study_problem(spec):
    if spec.kind == "named":
        return _named_problem(spec.name, spec.theta, spec.beta_scale)
    if spec.kind == "linear":
        _, test = _linear_case(spec)
        _require(test is not None, "study needs an 'exact' solution expression")
        return test
    raise SpecError("study and bench support linear and named problems only")


def cmd_study(spec, args):
    problem = _study_problem(spec)
    q_range = (args.q,) if args.q is not None else spec.q_range
    rows, monotone = convergence_study(
        problem, q_range, spec.solvers, m=spec.padding, seed=args.seed
    )
    header = ["q", "M"]
    for name in spec.solvers:
        header += [f"{name}_error", f"{name}_note"]
    out = []
    for row in rows:
        line = {"q": row["q"], "M": 2 ** row["q"]}
        for name in spec.solvers:
            line[f"{name}_error"] = row[name]
            line[f"{name}_note"] = row.get(f"{name}_note", "")
        out.append(line)
    _write(args.out, "study.csv", dumps_csv(header, out))
    return {"rows": out, "monotone": monotone}


def cmd_rank_check(spec, args):
    if spec.kind == "named":
        problem = _named_problem(spec.name, spec.theta, spec.beta_scale).linear_problem()
    elif spec.kind == "linear":
        problem, _ = _linear_case(spec)
    else:
        raise SpecError("rank-check applies to linear and named problems only")
    grid = build_grid(problem.s, problem.e, 2**spec.q, spec.padding)
    ops = build_operators(grid)
    Phi, Psi = assemble_system(problem, grid, ops)
    tol = spec.solver.get("tolerance", 1e-10)
    info = classify_solvability(Phi, Psi, tol)
    sv, sva = info.singular_values, info.singular_values_aug
    payload = {
        "q": spec.q,
        "M": grid.M,
        "padding": grid.m,
        "tolerance": tol,
        "solvability": info.solvability.value,
        "rank_phi": info.rank_phi,
        "rank_aug": info.rank_aug,
        "size": grid.M + 1,
        "ambiguous": info.ambiguous,
        "sigma_max": sv[0],
        "sigma_min": sv[-1],
        "sigma_min_aug": sva[-1],
    }
    _write(args.out, "rank.json", dumps_json(payload))
    if args.require_solution and info.solvability is Solvability.NONE:
        raise NoSolution("the boundary value problem has no solution")
    return payload


BENCH_HEADER = [
    "problem",
    "type",
    "theta",
    "q",
    "tiba_error",
    "rk4_error",
    "residual_max",
    "solvability",
    "shooting",
    "y_s",
    "u_s",
]


def cmd_bench(spec, args):
    if spec.kind == "named" and spec.problems == "nonhomogeneous":
        problems = nonhomogeneous_suite()
    elif spec.kind == "named" and spec.problems is not None:
        problems = [
            _named_problem(p["name"], p.get("theta"), p.get("beta_scale", 1.0)) for p in spec.problems
        ]
    else:
        problems = [_study_problem(spec)]
    rows = bench_rows(problems, q=spec.q, m=spec.padding, seed=args.seed)
    for row in rows:
        row["q"] = spec.q
    _write(args.out, "bench.csv", dumps_csv(BENCH_HEADER, rows))
    return rows


COMMANDS = {
    "solve": cmd_solve,
    "study": cmd_study,
    "rank-check": cmd_rank_check,
    "bench": cmd_bench,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trigbvp", description="Spectral two-point boundary value problem solver."
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--spec", required=True, help="JSON problem specification")
    parser.add_argument("--out", required=True, help="output directory (created if missing)")
    parser.add_argument("--q", type=int, default=None, help="grid exponent, M = 2^q")
    parser.add_argument("--padding", type=int, default=None, help="padding index m")
    parser.add_argument("--seed", type=int, default=0, help="seed for random shooting guesses")
    parser.add_argument(
        "--require-solution",
        action="store_true",
        help="exit with status 3 when the problem has no solution",
    )
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        spec = load_spec(args.spec)
        if args.q is not None:
            spec.q = args.q
        if args.padding is not None:
            spec.padding = args.padding
        os.makedirs(args.out, exist_ok=True)
        COMMANDS[args.command](spec, args)
    except NoSolution as exc:
        print(f"trigbvp: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (NonConvergenceError, SingularJacobianError, AmbiguousRankError) as exc:
        print(f"trigbvp: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InvalidInputError, EvaluationError) as exc:
        print(f"trigbvp: invalid specification: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except TrigBVPError as exc:
        print(f"trigbvp: solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"trigbvp: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
