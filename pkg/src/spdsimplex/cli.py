"""Command-line front end: solve, check, gradcheck, bench.

Run configurations are JSON documents validated against a strict schema
(unknown keys rejected, errors reported with their key path). Matrices
are nested row-major arrays; complex entries are [re, im] pairs. Traces
go to CSV with columns iter,cost,gradnorm,step,inner_iters,wall_ms and a
final `# status=...` comment line.

Exit codes: 0 converged / all checks passed, 1 configuration error,
2 iteration budget exhausted, 3 solver failure, 4 check outside its band.
"""

import argparse
import csv
import json
import os
import sys

import jsonschema
import numpy as np

from . import diagnostics, solvers
from .errors import ConfigError, MatrixSimplexError
from .manifold import MatrixSimplex
from .problems import NearestPoint, PovmMle, WeightedLogDet

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MAXITER = 2
EXIT_SOLVER_FAIL = 3
EXIT_CHECK_FAIL = 4

SEED_ENV_VAR = "SPDSIMPLEX_SEED"

_SOLVER_OVERRIDES = {
    "max_iter": {"type": "integer", "minimum": 0},
    "tol_gradnorm": {"type": "number", "exclusiveMinimum": 0},
    "initial_step": {"type": "number", "exclusiveMinimum": 0},
    "contraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "sufficient_decrease": {"type": "number", "exclusiveMinimum": 0},
    "max_backtracks": {"type": "integer", "minimum": 1},
    "initial_radius": {"type": "number", "exclusiveMinimum": 0},
    "max_radius": {"type": "number", "exclusiveMinimum": 0},
    "eta_accept": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.25},
    "tcg_max_inner": {"type": "integer", "minimum": 0},
    "tcg_kappa": {"type": "number", "exclusiveMinimum": 0},
    "tcg_theta": {"type": "number", "exclusiveMinimum": 0},
}

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "required": ["problem", "solver"],
    "additionalProperties": False,
    "properties": {
        "problem": {
            "type": "object",
            "required": ["variant", "n", "K", "data"],
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": ["nearest_point", "weighted_logdet", "povm_mle"]},
                "n": {"type": "integer", "minimum": 1},
                "K": {"type": "integer", "minimum": 2},
                "field": {"enum": ["real", "complex"]},
                "data": {"type": "object"},
            },
        },
        "solver": {
            "type": "object",
            "required": ["method"],
            "additionalProperties": False,
            "properties": {"method": {"enum": ["rsd", "rcg", "rtr"]},
                           **_SOLVER_OVERRIDES},
        },
        "seed": {"type": "integer"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trace_path": {"type": "string"},
                "point_path": {"type": "string"},
            },
        },
    },
}

_DATA_SCHEMAS = {
    "nearest_point": {
        "type": "object", "required": ["targets"], "additionalProperties": False,
        "properties": {"targets": {"type": "array"}},
    },
    "weighted_logdet": {
        "type": "object", "required": ["weights"], "additionalProperties": False,
        "properties": {"weights": {"type": "array",
                                   "items": {"type": "number", "exclusiveMinimum": 0}}},
    },
    "povm_mle": {
        "type": "object", "required": ["states", "counts"],
        "additionalProperties": False,
        "properties": {"states": {"type": "array"}, "counts": {"type": "array"}},
    },
}


def _schema_check(instance, schema, prefix=""):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance),
                    key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path)
        where = ".".join(s for s in (prefix, path) if s) or "<root>"
        raise ConfigError(f"{where}: {err.message}")


def decode_scalar(entry, field, keypath):
    if field == "complex":
        if isinstance(entry, list) and len(entry) == 2 \
                and all(isinstance(v, (int, float)) for v in entry):
            return complex(entry[0], entry[1])
        if isinstance(entry, (int, float)):
            return complex(entry, 0.0)
        raise ConfigError(f"{keypath}: complex entries must be [re, im] pairs")
    if not isinstance(entry, (int, float)):
        raise ConfigError(f"{keypath}: expected a number, got {type(entry).__name__}")
    return float(entry)


def decode_matrix(rows, n, field, keypath):
    """One n x n matrix from nested row-major lists."""
    if not isinstance(rows, list) or len(rows) != n:
        raise ConfigError(f"{keypath}: expected {n} rows")
    out = np.zeros((n, n), dtype=np.complex128 if field == "complex" else float)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"{keypath}[{r}]: expected {n} entries")
        for c, entry in enumerate(row):
            out[r, c] = decode_scalar(entry, field, f"{keypath}[{r}][{c}]")
    return out


def decode_matrix_list(items, count, n, field, keypath):
    if not isinstance(items, list) or len(items) != count:
        raise ConfigError(f"{keypath}: expected {count} matrices")
    return np.stack([decode_matrix(m, n, field, f"{keypath}[{i}]")
                     for i, m in enumerate(items)])


def encode_matrix_list(arr):
    """Inverse of decode_matrix_list: nested lists, [re, im] when complex."""
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        return [[[[float(v.real), float(v.imag)] for v in row]
                 for row in mat] for mat in arr]
    return [[[float(v) for v in row] for row in mat] for mat in arr]


def load_config(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed JSON at line {err.lineno}, column "
                          f"{err.colno}: {err.msg}") from err
    _schema_check(raw, RUN_CONFIG_SCHEMA)
    variant = raw["problem"]["variant"]
    _schema_check(raw["problem"]["data"], _DATA_SCHEMAS[variant], "problem.data")
    return raw


def build_problem(cfg):
    spec = cfg["problem"]
    n, k = spec["n"], spec["K"]
    field = spec.get("field", "real")
    data = spec["data"]
    variant = spec["variant"]
    if variant == "nearest_point":
        targets = decode_matrix_list(
            data["targets"], k, n, field, "problem.data.targets")
        problem = NearestPoint(targets)
    elif variant == "weighted_logdet":
        weights = data["weights"]
        if len(weights) != k:
            raise ConfigError(f"problem.data.weights: expected {k} weights")
        problem = WeightedLogDet(weights, n, field=field)
    else:
        states = decode_matrix_list(
            data["states"], len(data["states"]), n, "complex",
            "problem.data.states")
        counts = np.asarray(data["counts"], dtype=float)
        if counts.ndim != 2 or counts.shape[1] != k:
            raise ConfigError(
                f"problem.data.counts: expected shape (J, {k})")
        field = "complex"  # measurement fitting is inherently Hermitian
        try:
            problem = PovmMle(states, counts)
        except MatrixSimplexError as err:
            raise ConfigError(f"problem.data: {err}") from err
    man = MatrixSimplex(n, k, field=field)
    return man, problem


def build_solver_config(cfg):
    spec = dict(cfg["solver"])
    method = spec.pop("method")
    try:
        return solvers.SolverConfig(method=method, **spec)
    except MatrixSimplexError as err:
        raise ConfigError(f"solver: {err}") from err


def resolve_seed(cfg):
    if SEED_ENV_VAR in os.environ:
        try:
            return int(os.environ[SEED_ENV_VAR])
        except ValueError as err:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from err
    return int(cfg.get("seed", 0))


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "cost", "gradnorm", "step",
                         "inner_iters", "wall_ms"])
        for rec in trace.records:
            writer.writerow([rec.iter, repr(float(rec.cost)),
                             repr(float(rec.gradnorm)), repr(float(rec.step)),
                             rec.inner_iters, f"{rec.wall_ms:.3f}"])
        fh.write(f"# status={trace.status}\n")


def write_point(path, x):
    with open(path, "w") as fh:
        json.dump({"point": encode_matrix_list(x)}, fh, indent=1)
        fh.write("\n")


def read_point(path, n, k, field):
    with open(path) as fh:
        raw = json.load(fh)
    return decode_matrix_list(raw["point"], k, n, field, "point")


def cmd_solve(args):
    cfg = load_config(args.config)
    man, problem = build_problem(cfg)
    solver_cfg = build_solver_config(cfg)
    rng = np.random.default_rng(resolve_seed(cfg))
    x0 = man.random_point(rng)

    x, trace = solvers.solve(man, problem, x0, solver_cfg)

    output = cfg.get("output", {})
    write_trace(output.get("trace_path", "trace.csv"), trace)
    write_point(output.get("point_path", "point.json"), x)
    print(f"status={trace.status} iters={len(trace) - 1} "
          f"cost={trace.final_cost:.12g} gradnorm={trace.final_gradnorm:.3e}")
    if trace.status == solvers.STATUS_CONVERGED:
        return EXIT_OK
    if trace.status == solvers.STATUS_MAXITER:
        return EXIT_MAXITER
    print(f"solver failure: {trace.message}", file=sys.stderr)
    return EXIT_SOLVER_FAIL


def cmd_check(args):
    man = MatrixSimplex(args.n, args.K, field=args.field)
    rng = np.random.default_rng(args.seed)
    results = diagnostics.run_geometry_checks(man, trials=args.trials, rng=rng)
    print(f"geometry checks: n={args.n} K={args.K} field={args.field} "
          f"trials={args.trials} seed={args.seed}")
    print(f"manifold dimension: {man.dim}")
    for res in results:
        print(res.line())
    failing = [res for res in results if not res.passed]
    if failing:
        print(f"FAILED: {failing[0].name}", file=sys.stderr)
        return EXIT_CHECK_FAIL
    return EXIT_OK


def cmd_gradcheck(args):
    cfg = load_config(args.config)
    man, problem = build_problem(cfg)
    rng = np.random.default_rng(resolve_seed(cfg))
    optimum = (problem.analytic_optimum()
               if isinstance(problem, WeightedLogDet) else None)
    report = diagnostics.gradcheck_report(man, problem, rng, optimum=optimum)

    ok = True
    slope1 = report["first_order_slope"]
    print(f"first-order Taylor slope:  {slope1:.3f}  (band 2.0 +/- 0.2)")
    ok &= abs(slope1 - 2.0) <= 0.2

    slope2 = report["second_order_slope"]
    if np.isnan(slope2):
        print("second-order Taylor slope: skipped (no analytic optimum)")
    else:
        print(f"second-order Taylor slope: {slope2:.3f}  (band 3.0 +/- 0.3)")
        ok &= abs(slope2 - 3.0) <= 0.3

    sa = report["selfadjointness"]
    print(f"Hessian self-adjointness:  {sa:.3e}  (tol 1e-8)")
    ok &= sa <= 1e-8
    return EXIT_OK if ok else EXIT_CHECK_FAIL


def cmd_bench(args):
    rows = diagnostics.bench_geometry_ops(args.n_list, args.K_list,
                                          seed=args.seed)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["op", "n", "K", "mean_ms"])
        for op, n, k, ms in rows:
            writer.writerow([op, n, k, f"{ms:.6f}"])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def _int_list(text):
    return [int(v) for v in text.split(",")]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spdsimplex",
        description="Optimization and self-checks on the simplex of "
                    "positive definite matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a solver from a JSON run config")
    p.add_argument("config", help="path to the run-configuration file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="run the manifold invariant suite")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--field", choices=["real", "complex"], default="real")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gradcheck",
                       help="finite-difference gradient/Hessian checks")
    p.add_argument("config", help="path to the run-configuration file")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("bench", help="time core operations over a size grid")
    p.add_argument("--n-list", type=_int_list, default=[4, 16, 32])
    p.add_argument("--K-list", type=_int_list, default=[2, 4, 8, 16])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except MatrixSimplexError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAIL


def console_main():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
