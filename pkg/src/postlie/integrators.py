"""Covariant towers, elementary differentials, Lie–Butcher actions and steppers.

Mixed differential operators act on scalar functions, vector fields and
covector fields.  A word ``w1 ⊗ w2 ⊗ … ⊗ wk`` of vector and endomorphism
fields is realised by the product rule in the enveloping algebra,

    D_{w1·W} = D_{w1} D_W − D_{D_{w1} W},

which for words of vector fields reduces to the covariant tower ∇^k and for
normal-ordered words ``x1…xi E1…Ej`` to ``D_{Ej}…D_{E1} ∇^i``.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import jax.numpy as jnp
import numpy as np
from scipy.integrate import solve_ivp

from .forest_algebra import TruncatedSeries
from .geometry import (
    ZERO_SCALAR,
    ConnectionBackend,
    CovectorField,
    DomainError,
    EndomorphismField,
    RotationGroupFlat,
    ScalarFunction,
    VectorField,
    _as_array,
    hat,
)
from .trees import Forest, Tree, as_forest

MAX_TOWER_DEPTH = 4

Target = ScalarFunction | VectorField | CovectorField
Letter = VectorField | EndomorphismField


class DepthLimitError(ValueError):
    pass


class UnsupportedTarget(ValueError):
    pass


# -- derivations -------------------------------------------------------------


def derive(backend: ConnectionBackend, w: Letter, obj):
    """Apply the single-letter derivation D_w to a scalar, vector, covector or endomorphism field."""
    if isinstance(w, VectorField):
        if isinstance(obj, ScalarFunction):
            return backend.cov_scalar(w, obj)
        if isinstance(obj, VectorField):
            return backend.cov(w, obj)
        if isinstance(obj, CovectorField):
            return backend.cov_covector(w, obj)
        if isinstance(obj, EndomorphismField):
            return backend.cov_endo(w, obj)
    elif isinstance(w, EndomorphismField):
        if isinstance(obj, ScalarFunction):
            return ZERO_SCALAR
        if isinstance(obj, VectorField):
            return w.apply(obj)
        if isinstance(obj, CovectorField):
            return CovectorField(backend, lambda p: -(w.fn(p).T @ obj.fn(p)), f"{w.name}*{obj.name}")
        if isinstance(obj, EndomorphismField):
            return w.commutator(obj)
    raise UnsupportedTarget(f"cannot apply {type(w).__name__} to {type(obj).__name__}")


def _lincomb(terms: list[tuple[int, Target]]) -> Target:
    """Sum of integer multiples of same-kind targets."""
    first = terms[0][1]
    if isinstance(first, ScalarFunction):
        return ScalarFunction(lambda p: sum(c * t.fn(p) for c, t in terms), first.name)
    cls = type(first)
    return cls(first.backend, lambda p: sum(c * t.fn(p) for c, t in terms), first.name)


def word_operator(backend: ConnectionBackend, word: Sequence[Letter], target: Target) -> Target:
    """D_{w1·w2·…·wk} target via the enveloping-algebra product rule."""
    word = tuple(word)
    if not word:
        return target
    head, rest = word[0], word[1:]
    terms = [(1, derive(backend, head, word_operator(backend, rest, target)))]
    for i, letter in enumerate(rest):
        new = rest[:i] + (derive(backend, head, letter),) + rest[i + 1:]
        terms.append((-1, word_operator(backend, new, target)))
    return _lincomb(terms)


def tower(backend: ConnectionBackend, fields: Sequence[VectorField], target: Target) -> Target:
    """∇^k_{x1,…,xk} target, lazily, via the recursive tower formula."""
    fields = tuple(fields)
    if len(fields) > MAX_TOWER_DEPTH:
        raise DepthLimitError(f"tower depth {len(fields)} exceeds {MAX_TOWER_DEPTH}")
    if not fields:
        return target
    x0, rest = fields[0], fields[1:]
    terms = [(1, derive(backend, x0, tower(backend, rest, target)))]
    for i, xi in enumerate(rest):
        terms.append((-1, tower(backend, rest[:i] + (backend.cov(x0, xi),) + rest[i + 1:], target)))
    return _lincomb(terms)


def _evaluate(obj: Target, p):
    out = obj.fn(_as_array(p))
    return float(out) if isinstance(obj, ScalarFunction) else np.asarray(out)


def cov_tower(backend: ConnectionBackend, fields: Sequence[VectorField], target: Target, p):
    return _evaluate(tower(backend, fields, target), p)


@dataclass(frozen=True)
class DifferentialOperatorSpec:
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        backends = {w.backend for w in self.letters}
        if len(backends) > 1:
            raise ValueError("all letters must share one backend")

    @property
    def is_normal_ordered(self) -> bool:
        """Vector letters all precede endomorphism letters."""
        seen_endo = False
        for w in self.letters:
            if isinstance(w, EndomorphismField):
                seen_endo = True
            elif seen_endo:
                return False
        return True

    @property
    def vector_letters(self):
        return tuple(w for w in self.letters if isinstance(w, VectorField))

    @property
    def endo_letters(self):
        return tuple(w for w in self.letters if isinstance(w, EndomorphismField))


def mixed_operator(backend: ConnectionBackend, spec: DifferentialOperatorSpec, target: Target) -> Target:
    if not isinstance(target, (ScalarFunction, VectorField, CovectorField)):
        raise UnsupportedTarget(f"unsupported target {type(target).__name__}")
    if len(spec.letters) > MAX_TOWER_DEPTH:
        raise DepthLimitError(f"word length {len(spec.letters)} exceeds {MAX_TOWER_DEPTH}")
    if spec.is_normal_ordered:
        out = tower(backend, spec.vector_letters, target)
        for E in spec.endo_letters:
            out = derive(backend, E, out)
        return out
    return word_operator(backend, spec.letters, target)


def mixed_operator_apply(spec: DifferentialOperatorSpec, target: Target, p, backend: ConnectionBackend | None = None):
    backend = backend or (spec.letters[0].backend if spec.letters else target.backend)
    return _evaluate(mixed_operator(backend, spec, target), p)


# -- elementary differentials and Lie–Butcher series --------------------------


def tree_field(backend: ConnectionBackend, t: Tree, f: VectorField, _cache=None) -> VectorField:
    """F_f(t): leaf ↦ f, t(c; τ1…τr) ↦ ∇^r_{F(τ1),…,F(τr)} f."""
    cache = {} if _cache is None else _cache
    if t in cache:
        return cache[t]
    if not t.branches:
        out = f
    else:
        out = tower(backend, [tree_field(backend, b, f, cache) for b in t.branches], f)
    cache[t] = out
    return out


def elementary_differential(omega: Forest | Tree, f: VectorField, backend: ConnectionBackend | None = None):
    """Operator φ ↦ F_f(ω)φ, the forest acting as the tower of its trees' fields (left to right)."""
    backend = backend or f.backend
    omega = as_forest(omega)
    colors = set().union(*(t.colors() for t in omega)) if len(omega) else set()
    if len(colors) > 1:
        raise ValueError("elementary differentials need single-colored forests")
    cache: dict = {}
    fields = [tree_field(backend, t, f, cache) for t in omega]

    def op(phi: ScalarFunction) -> ScalarFunction:
        return tower(backend, fields, phi)

    return op


def lb_action(alpha: TruncatedSeries, f: VectorField, phi: ScalarFunction, p) -> float:
    """Σ_ω ⟨α, ω⟩ (F_f(ω) φ)(p)."""
    if alpha.order > MAX_TOWER_DEPTH:
        raise DepthLimitError(f"truncation order {alpha.order} exceeds {MAX_TOWER_DEPTH}")
    total = 0.0
    for omega, c in alpha.items():
        total += float(c) * float(elementary_differential(omega, f)(phi).fn(_as_array(p)))
    return total


def forest_values(f: VectorField, phi: ScalarFunction, p, forests: Sequence[Forest]) -> dict[Forest, float]:
    return {w: float(elementary_differential(w, f)(phi).fn(_as_array(p))) for w in forests}


# -- steppers ------------------------------------------------------------------


def step_geodesic_euler(backend: ConnectionBackend, f: VectorField, p, h: float) -> np.ndarray:
    """exp_p(h f(p)): one step of the frozen (geodesic) flow."""
    p = np.asarray(p, dtype=float)
    return backend.exp(p, h * f.at(p))


def step_frozen_midpoint(backend: ConnectionBackend, f: VectorField, p, h: float) -> np.ndarray:
    """Freeze f at the half-step point q, transport f(q) back to p, step along the geodesic."""
    p = np.asarray(p, dtype=float)
    q = backend.exp(p, 0.5 * h * f.at(p))
    v = backend.transport(q, p, f.at(q))
    return backend.exp(p, h * v)


STEPPERS = {"euler": step_geodesic_euler, "midpoint": step_frozen_midpoint}


@dataclass
class Trajectory:
    times: list[float]
    points: list[np.ndarray]
    method: str
    h: float
    backend: ConnectionBackend = field(repr=False)

    def max_point_residual(self) -> float:
        return max(self.backend.point_residual(p) for p in self.points)


def integrate(backend: ConnectionBackend, f: VectorField, p0, t1: float, n_steps: int,
              method: str = "euler") -> Trajectory:
    step = STEPPERS[method]
    h = t1 / n_steps
    p = np.asarray(p0, dtype=float)
    times, points = [0.0], [p]
    for k in range(n_steps):
        p = step(backend, f, p, h)
        times.append((k + 1) * h)
        points.append(p)
    return Trajectory(times, points, method, h, backend)


# -- exact flow oracle -----------------------------------------------------------


class OracleFailure(RuntimeError):
    pass


def _ambient_rhs(backend: ConnectionBackend, f: VectorField):
    shape = (3, 3) if isinstance(backend, RotationGroupFlat) else (backend.rep_dim,)

    def rhs(_t, y):
        p = jnp.asarray(y.reshape(shape))
        return np.asarray(backend.velocity(p, f.fn(p))).ravel()

    return rhs, shape


def exact_flow_oracle(backend: ConnectionBackend, f: VectorField, p, t: float,
                      tol: float = 1e-13, chunk: float = 0.05) -> np.ndarray:
    """High-order adaptive integration of the ambient ODE, projected onto the manifold between chunks."""
    if tol < 1e-13:
        raise ValueError("oracle tolerance must be >= 1e-13")
    p = np.asarray(p, dtype=float)
    if t == 0:
        return p.copy()
    rhs, shape = _ambient_rhs(backend, f)
    n = max(1, math.ceil(abs(t) / chunk))
    dt = t / n
    y = p.ravel()
    for _ in range(n):
        sol = solve_ivp(rhs, (0.0, dt), y, method="DOP853", rtol=tol, atol=tol)
        if not sol.success:
            raise OracleFailure(sol.message)
        y = backend.project_point(sol.y[:, -1].reshape(shape)).ravel()
    return y.reshape(shape)


# -- validators -------------------------------------------------------------------


def taylor_coefficients(fn, K: int, spacing: float = 1e-2) -> np.ndarray:
    """Coefficients c_0..c_K of s(t) = fn(t) from interpolation on 2K+1 Chebyshev nodes.

    Nodes lie in [−K·spacing, K·spacing], so neighbouring nodes are about ``spacing`` apart.
    """
    n = 2 * K + 1
    radius = K * spacing if K > 0 else spacing
    nodes = radius * np.cos(np.pi * (np.arange(n) + 0.5) / n)
    values = np.array([fn(t) for t in nodes])
    coeffs = np.polynomial.polynomial.polyfit(nodes, values, n - 1)
    return coeffs[:K + 1]


def taylor_compare_dot(backend: ConnectionBackend, f: VectorField, phi: ScalarFunction, p, K: int = 4) -> list[float]:
    """|(1/k!)∇^k_{f…f}φ(p) − k-th Taylor coefficient of t ↦ φ(exp_p(t f(p)))| for k = 0..K."""
    if K > MAX_TOWER_DEPTH:
        raise DepthLimitError(f"K = {K} exceeds {MAX_TOWER_DEPTH}")
    p = np.asarray(p, dtype=float)
    fp = f.at(p)
    curve = taylor_coefficients(lambda t: phi.at(backend.exp(p, t * fp)), K)
    errors = []
    for k in range(K + 1):
        tower_value = cov_tower(backend, [f] * k, phi, p) / math.factorial(k)
        errors.append(abs(tower_value - curve[k]))
    return errors


def lie_derivatives(f: VectorField, phi: ScalarFunction, p, N: int) -> list[float]:
    """f^{(k)}φ(p) for k = 0..N via the Lie–Butcher action of exp*(a[]) graded by k."""
    from .forest_algebra import exp_star
    series = exp_star("a[]", N)
    out = [0.0] * (N + 1)
    backend = f.backend
    for omega, c in series.items():
        val = float(elementary_differential(omega, f, backend)(phi).fn(_as_array(p)))
        out[omega.grade] += float(c) * math.factorial(omega.grade) * val
    return out


def flow_series_errors(f: VectorField, phi: ScalarFunction, p, N: int, ts: Sequence[float],
                       tol: float = 1e-13) -> list[float]:
    """|Σ_{k≤N} t^k/k! f^{(k)}φ(p) − φ(oracle(t))| for each t."""
    derivs = lie_derivatives(f, phi, p, N)
    errs = []
    for t in ts:
        series = sum(t ** k / math.factorial(k) * d for k, d in enumerate(derivs))
        exact = phi.at(exact_flow_oracle(f.backend, f, p, t, tol))
        errs.append(abs(series - exact))
    return errs


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    lx, ly = np.log(np.asarray(xs)), np.log(np.asarray(ys))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass
class ConvergenceRow:
    steps: int
    h: float
    error: float
    local_slope: float | None


def convergence_table(backend: ConnectionBackend, f: VectorField, p0, t1: float, method: str,
                      step_counts: Sequence[int], tol: float = 1e-13) -> tuple[list[ConvergenceRow], float]:
    """Endpoint errors against the oracle and the least-squares log-log slope."""
    step_counts = list(step_counts)
    if len(step_counts) < 4:
        raise ValueError("need at least 4 step counts")
    ratios = {step_counts[i + 1] / step_counts[i] for i in range(len(step_counts) - 1)}
    if max(ratios) - min(ratios) > 1e-12:
        raise ValueError("step counts must form a geometric progression")
    exact = exact_flow_oracle(backend, f, p0, t1, tol)
    rows: list[ConvergenceRow] = []
    for n in step_counts:
        end = integrate(backend, f, p0, t1, n, method).points[-1]
        err = float(np.linalg.norm(np.ravel(end) - np.ravel(exact)))
        slope = None
        if rows and err > 0 and rows[-1].error > 0:
            slope = math.log(rows[-1].error / err) / math.log(rows[-1].h / (t1 / n))
        rows.append(ConvergenceRow(n, t1 / n, err, slope))
    if all(r.error == 0 for r in rows):
        return rows, float("nan")
    return rows, -loglog_slope([r.steps for r in rows], [r.error for r in rows])
