"""Command-line entry point: ``postlie {trees,algebra,verify,integrate,convergence}``.

Exit codes: 0 success, 1 a verification residual exceeded its tolerance,
2 usage error or malformed input.  ``POSTLIE_SEED`` overrides ``--seed``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import forest_algebra as fa
from .geometry import (
    ConnectionBackend,
    DomainError,
    RotationGroupFlat,
    backend_from_spec,
    field_from_spec,
)
from .integrators import STEPPERS, convergence_table, exact_flow_oracle, integrate
from .trees import (
    TreeSyntaxError,
    UnknownColorError,
    check_colors,
    enumerate_forests,
    enumerate_trees,
    parse,
    parse_forest,
)
from .verify import SUITE_NAMES, SuiteConfig, run_all, run_criterion, theorem1_sweep, without_timing

SEED_ENV = "POSTLIE_SEED"
THEOREM_TOL = {"sphere": 1e-7, "flat": 1e-7, "so3": 1e-10}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Resolved settings of one invocation (seed after the environment override)."""

    subcommand: str
    seed: int = 0
    backend: dict = field(default_factory=lambda: {"backend": "sphere", "m": 2})
    field: dict | None = None
    tolerance: float | None = None
    order: int = 3
    output: Path | None = None
    sidecar: Path | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace, seed: int) -> RunConfig:
        backend = {"backend": getattr(args, "backend", None) or "sphere"}
        if getattr(args, "m", None):
            backend["m"] = args.m
        raw_field = getattr(args, "field", None)
        return cls(
            subcommand=args.subcommand,
            seed=seed,
            backend=backend,
            field=_load_json(raw_field, "--field") if raw_field else None,
            tolerance=getattr(args, "tolerance", None) or getattr(args, "tol", None),
            order=getattr(args, "order", 3),
            output=getattr(args, "output", None),
            sidecar=getattr(args, "sidecar", None),
        )


def resolve_seed(cli_seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return cli_seed
    try:
        seed = int(env, 0)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    if not 0 <= seed < 2 ** 64:
        raise UsageError(f"{SEED_ENV} must fit in 64 unsigned bits")
    return seed


def _load_json(text: str, what: str):
    if text.startswith("@"):
        text = Path(text[1:]).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} JSON: {exc}") from exc


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- trees ----------------------------------------------------------------------


def cmd_trees(args) -> int:
    if args.action == "parse":
        x = parse(args.code, _colors(args.colors) if args.colors else None)
        kind = "tree" if not isinstance(x, fa.Forest) else ("unit" if x.is_unit else "forest")
        info = {"code": x.code if x.code else "1", "grade": x.grade, "kind": kind}
        _emit(_dump(info) if args.format == "json" else f"{info['code']}\t{kind}\tgrade {x.grade}\n",
              args.output)
        return 0
    colors = _colors(args.colors)
    if args.max_grade < 1:
        raise UsageError("--max-grade must be >= 1")
    listing = {}
    for n in range(0 if args.forests else 1, args.max_grade + 1):
        items = enumerate_forests(colors, n) if args.forests else enumerate_trees(colors, n)
        listing[n] = [str(x) for x in items]
    if args.format == "json":
        _emit(_dump({"colors": list(colors), "kind": "forests" if args.forests else "trees",
                     "grades": {str(n): v for n, v in listing.items()},
                     "counts": {str(n): len(v) for n, v in listing.items()}}), args.output)
        return 0
    lines = []
    for n, items in listing.items():
        lines.append(f"# grade {n}")
        lines.extend(items)
    lines.append("# counts (grade count)")
    lines.extend(f"{n} {len(items)}" for n, items in listing.items())
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _colors(text: str) -> tuple[str, ...]:
    try:
        return check_colors(c.strip() for c in text.split(",") if c.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- algebra ------------------------------------------------------------------------


def _operand(text: str | None, flag: str) -> fa.ForestVector:
    if text is None:
        raise UsageError(f"{flag} is required")
    text = text.strip()
    if text.startswith("{") or text.startswith("@"):
        obj = _load_json(text, flag)
        try:
            return fa.ForestVector.from_json_obj(obj)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed forest vector for {flag}: {exc}") from exc
    return fa.vec(parse_forest(text))


def _graft_vectors(A: fa.ForestVector, B: fa.ForestVector) -> fa.ForestVector:
    out = fa.ForestVector()
    for fa_, ca in A.items():
        for fb, cb in B.items():
            if len(fa_) != 1 or len(fb) != 1:
                raise UsageError("graft takes tree operands; use 'triangle' for forests")
            out = out + fa.graft(fa_[0], fb[0]) * (ca * cb)
    return out


def cmd_algebra(args) -> int:
    lhs = _operand(args.lhs, "--lhs")
    op = args.op
    if op == "exp":
        if lhs.constant_term != 0:
            raise UsageError("exp needs an argument with zero constant term")
        series = (fa.exp_star if args.kind == "star" else fa.exp_dot)(lhs, args.order)
        result = series.coeffs
    else:
        rhs = _operand(args.rhs, "--rhs")
        if op == "graft":
            result = _graft_vectors(lhs, rhs)
        else:
            fn = {"triangle": fa.triangle, "concat": fa.concat, "gl": fa.gl_product,
                  "bracket": fa.lie_bracket}[op]
            result = fn(lhs, rhs)
    if args.format == "json":
        _emit(json.dumps(result.to_json_obj(), ensure_ascii=False) + "\n", args.output)
    else:
        _emit(fa.format_vector(result) + "\n", args.output)
    return 0


# -- verify ---------------------------------------------------------------------------


def cmd_verify(args, cfg: RunConfig) -> int:
    seed = cfg.seed
    which = args.criterion
    if which == "theorem1" and (args.backend or args.m or args.samples):
        backend = args.backend or "sphere"
        if backend not in ("sphere", "so3"):
            raise UsageError("theorem1 supports --backend sphere or so3")
        m = args.m or (3 if backend == "so3" else 2)
        if backend == "sphere" and m < 2:
            raise UsageError("--m must be >= 2 for the sphere")
        out = theorem1_sweep(backend, m, args.samples or 100, seed)
        if backend == "sphere":
            out["m"] = m
        out["seed"] = seed
        tol = args.tolerance or THEOREM_TOL[backend]
        out["tolerance"] = tol
        out["passed"] = max(out["max_residuals"].values()) <= tol
        _emit(_dump(out), args.output)
        return 0 if out["passed"] else 1

    cfg = SuiteConfig(seed=seed, theorem_samples=args.samples or 100)
    if which == "all":
        raw = list(run_all(cfg).values())
    else:
        try:
            raw = [run_criterion(which, cfg)]
        except KeyError as exc:
            raise UsageError(str(exc)) from exc
    results = [r if args.timing else without_timing(r) for r in raw]
    payload = results[0] if len(results) == 1 else {"seed": seed, "results": results}
    _emit(_dump(payload), args.output)
    return 0 if all(r["passed"] for r in results) else 1


# -- integrate / convergence ---------------------------------------------------------------


def _problem(args, cfg: RunConfig):
    """Backend, field, start point and the field description used for sidecars."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.field is not None:
        spec = cfg.field
        if not isinstance(spec, dict):
            raise UsageError("--field must be a JSON object")
    else:
        spec = {"m": 2, **cfg.backend}
        backend = _backend(spec)
        if isinstance(backend, RotationGroupFlat):
            spec.update(coeffs=rng.standard_normal(3).tolist(), right=rng.standard_normal(3).tolist())
        else:
            n = backend.rep_dim
            spec.update(A=rng.standard_normal((n, n)).tolist(), c=rng.standard_normal(n).tolist())
    backend = _backend(spec)
    try:
        f = field_from_spec(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.p0:
        p0 = np.asarray(_load_json(args.p0, "--p0"), dtype=float)
        if isinstance(backend, RotationGroupFlat) and p0.shape == (9,):
            p0 = p0.reshape(3, 3)
        if backend.point_residual(p0) > 1e-10:
            raise UsageError("--p0 is not on the manifold")
    else:
        p0 = backend.random_point(rng)
    return backend, f, p0, spec


def _backend(spec: dict) -> ConnectionBackend:
    try:
        return backend_from_spec(spec)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _coords(p) -> list[float]:
    return [float(x) for x in np.ravel(p)]


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_integrate(args, cfg: RunConfig) -> int:
    seed = cfg.seed
    backend, f, p0, spec = _problem(args, cfg)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    traj = integrate(backend, f, p0, args.t1, args.steps, args.method)
    exact = exact_flow_oracle(backend, f, p0, args.t1, args.tol)
    err = float(np.linalg.norm(np.ravel(traj.points[-1]) - np.ravel(exact)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    dim = len(_coords(p0))
    writer.writerow(["t"] + [f"x{i}" for i in range(dim)])
    for t, p in zip(traj.times, traj.points):
        writer.writerow([_fmt(t)] + [_fmt(x) for x in _coords(p)])
    _emit(buf.getvalue(), args.output)
    sidecar = {"method": args.method, "h": traj.h, "backend": backend.name, "field": spec,
               "p0": _coords(p0), "t1": args.t1, "steps": args.steps, "seed": seed,
               "endpoint_error_vs_oracle": err,
               "max_point_residual": traj.max_point_residual()}
    _write_sidecar(sidecar, args.sidecar, args.output)
    return 0


def cmd_convergence(args, cfg: RunConfig) -> int:
    seed = cfg.seed
    backend, f, p0, spec = _problem(args, cfg)
    try:
        steps = [int(s) for s in args.steps.split(",")]
    except ValueError as exc:
        raise UsageError("--steps must be a comma-separated list of integers") from exc
    try:
        rows, slope = convergence_table(backend, f, p0, args.t1, args.method, steps, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["h", "error", "local_slope"])
    for r in rows:
        writer.writerow([_fmt(r.h), _fmt(r.error), "" if r.local_slope is None else _fmt(r.local_slope)])
    _emit(buf.getvalue(), args.output)
    summary = {"method": args.method, "backend": backend.name, "field": spec, "p0": _coords(p0),
               "t1": args.t1, "steps": steps, "seed": seed, "slope": slope}
    _write_sidecar(summary, args.sidecar, args.output)
    return 0


def _write_sidecar(obj: dict, sidecar: Path | None, output: Path | None):
    text = _dump(obj)
    if sidecar is not None:
        sidecar.write_text(text, encoding="utf-8")
    elif output is not None:
        output.with_suffix(".json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)


# -- parser ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="postlie", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help=f"random seed (overridden by ${SEED_ENV})")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def out_opts(p):
        p.add_argument("--output", "-o", type=Path, help="write to this file instead of stdout")

    t = sub.add_parser("trees", help="enumerate or parse colored planar trees")
    tsub = t.add_subparsers(dest="action", required=True)
    te = tsub.add_parser("enumerate")
    te.add_argument("--colors", default="a", help="comma-separated color alphabet")
    te.add_argument("--max-grade", type=int, default=4)
    te.add_argument("--forests", action="store_true", help="enumerate ordered forests instead of trees")
    te.add_argument("--format", choices=("text", "json"), default="text")
    out_opts(te)
    tp = tsub.add_parser("parse")
    tp.add_argument("code")
    tp.add_argument("--colors", default=None)
    tp.add_argument("--format", choices=("text", "json"), default="text")
    out_opts(tp)

    a = sub.add_parser("algebra", help="exact operations on forest vectors")
    a.add_argument("op", choices=("graft", "triangle", "concat", "gl", "bracket", "exp"))
    a.add_argument("--lhs", help="forest code, JSON vector, or @file.json")
    a.add_argument("--rhs", help="forest code, JSON vector, or @file.json")
    a.add_argument("--order", type=int, default=3, help="truncation grade for exp")
    a.add_argument("--kind", choices=("star", "dot"), default="star", help="exponential kind")
    a.add_argument("--format", choices=("text", "json"), default="text")
    out_opts(a)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("criterion", help="1-12, all, or one of: " + ", ".join(SUITE_NAMES))
    v.add_argument("--backend", choices=("sphere", "so3"))
    v.add_argument("--m", type=int)
    v.add_argument("--samples", type=int)
    v.add_argument("--tolerance", type=float)
    v.add_argument("--timing", action="store_true", help="include wall-clock timings")
    out_opts(v)

    for name, helptext in (("integrate", "run a stepper and compare with the exact flow"),
                           ("convergence", "measure the order of a stepper")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--backend", choices=("sphere", "flat", "so3"))
        p.add_argument("--m", type=int)
        p.add_argument("--field", help="field JSON (or @file.json); random seeded field if omitted")
        p.add_argument("--p0", help="start point as a JSON list")
        p.add_argument("--t1", type=float, default=1.0)
        p.add_argument("--method", choices=tuple(STEPPERS), default="euler")
        p.add_argument("--tol", type=float, default=1e-13, help="oracle tolerance")
        p.add_argument("--sidecar", type=Path, help="JSON sidecar path")
        out_opts(p)
        if name == "integrate":
            p.add_argument("--steps", type=int, default=64)
        else:
            p.add_argument("--steps", default=",".join(str(2 ** k) for k in range(4, 10)))
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(args, resolve_seed(args.seed))
        cmd = cfg.subcommand
        if cmd == "trees":
            return cmd_trees(args)
        if cmd == "algebra":
            return cmd_algebra(args)
        if cmd == "verify":
            if args.criterion.isdigit():
                args.criterion = int(args.criterion)
            return cmd_verify(args, cfg)
        if cmd == "integrate":
            return cmd_integrate(args, cfg)
        return cmd_convergence(args, cfg)
    except (UsageError, TreeSyntaxError, UnknownColorError, DomainError, fa.TruncationError,
            OSError) as exc:
        print(f"postlie: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
