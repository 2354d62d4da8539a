"""Manifolds with affine connections having parallel torsion and curvature.

Three backends share one interface:

* :class:`EuclideanFlat` -- ``R^m`` with the trivial connection (T = 0, R = 0);
* :class:`Sphere` -- the unit sphere ``S^m ⊂ R^{m+1}`` with Levi-Civita (T = 0, ∇R = 0);
* :class:`RotationGroupFlat` -- ``SO(3)`` with left-invariant fields parallel
  (R = 0, T(x, y) = −[x, y] on left-invariant fields, ∇T = 0).

Points and tangent vectors are plain arrays.  On the sphere and flat space a
tangent vector is an ambient vector; on ``SO(3)`` it is the 3-vector of the
left-trivialized Lie algebra element (``hat`` gives the skew matrix).

Fields are jax-traceable callables.  Covariant derivatives use forward-mode
differentiation (``jax.jvp``), so towers ∇∇∇… are exact to rounding; finite
differences appear only in validation helpers.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache

import jax
import jax.numpy as jnp
import numpy as np

FD_STEP = 1e-5


class DomainError(ValueError):
    pass


class BackendMismatch(ValueError):
    pass


def is_concrete(x) -> bool:
    return not isinstance(x, jax.core.Tracer)


def jvp(fn: Callable, p, dp):
    return jax.jvp(fn, (p,), (dp,))[1]


def _as_array(p):
    return jnp.asarray(p, dtype=jnp.float64)


def _same_backend(*objs):
    b = objs[0].backend
    for o in objs[1:]:
        if o.backend != b:
            raise BackendMismatch(f"fields live on different backends: {b} vs {o.backend}")
    return b


# -- fields ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    fn: Callable
    name: str = "phi"

    def __call__(self, p):
        return self.fn(p)

    def at(self, p) -> float:
        return float(self.fn(_as_array(p)))

    def __add__(self, other: ScalarFunction) -> ScalarFunction:
        return ScalarFunction(lambda p: self.fn(p) + other.fn(p), f"({self.name}+{other.name})")

    def __sub__(self, other: ScalarFunction) -> ScalarFunction:
        return ScalarFunction(lambda p: self.fn(p) - other.fn(p), f"({self.name}-{other.name})")

    def scale(self, k) -> ScalarFunction:
        return ScalarFunction(lambda p: k * self.fn(p), f"{k}*{self.name}")


ZERO_SCALAR = ScalarFunction(lambda p: jnp.zeros((), dtype=jnp.float64), "0")


@dataclass(frozen=True, eq=False)
class VectorField:
    backend: ConnectionBackend
    fn: Callable
    name: str = "x"

    def __call__(self, p):
        return self.fn(p)

    def at(self, p) -> np.ndarray:
        return np.asarray(self.fn(_as_array(p)))

    def __add__(self, other: VectorField) -> VectorField:
        _same_backend(self, other)
        return VectorField(self.backend, lambda p: self.fn(p) + other.fn(p),
                           f"({self.name}+{other.name})")

    def __sub__(self, other: VectorField) -> VectorField:
        _same_backend(self, other)
        return VectorField(self.backend, lambda p: self.fn(p) - other.fn(p),
                           f"({self.name}-{other.name})")

    def __neg__(self) -> VectorField:
        return VectorField(self.backend, lambda p: -self.fn(p), f"-{self.name}")

    def scale(self, k: float | ScalarFunction) -> VectorField:
        if isinstance(k, ScalarFunction):
            return VectorField(self.backend, lambda p: k.fn(p) * self.fn(p), f"{k.name}*{self.name}")
        return VectorField(self.backend, lambda p: k * self.fn(p), f"{k}*{self.name}")

    __rmul__ = scale


@dataclass(frozen=True, eq=False)
class CovectorField:
    """1-form represented by the vector ``a(p)`` with ``α(v) = ⟨a(p), v⟩``."""

    backend: ConnectionBackend
    fn: Callable
    name: str = "alpha"

    def __call__(self, p):
        return self.fn(p)

    def at(self, p) -> np.ndarray:
        return np.asarray(self.fn(_as_array(p)))


@dataclass(frozen=True, eq=False)
class EndomorphismField:
    """Field of linear maps on tangent spaces, as matrices on the tangent representation."""

    backend: ConnectionBackend
    fn: Callable
    name: str = "E"

    def __call__(self, p):
        return self.fn(p)

    def at(self, p) -> np.ndarray:
        return np.asarray(self.fn(_as_array(p)))

    def apply(self, y: VectorField) -> VectorField:
        _same_backend(self, y)
        return VectorField(self.backend, lambda p: self.fn(p) @ y.fn(p), f"{self.name}{y.name}")

    def compose(self, other: EndomorphismField) -> EndomorphismField:
        _same_backend(self, other)
        return EndomorphismField(self.backend, lambda p: self.fn(p) @ other.fn(p),
                                 f"{self.name}{other.name}")

    def commutator(self, other: EndomorphismField) -> EndomorphismField:
        """E1 E2 − E2 E1."""
        _same_backend(self, other)
        return EndomorphismField(
            self.backend, lambda p: self.fn(p) @ other.fn(p) - other.fn(p) @ self.fn(p),
            f"[{self.name},{other.name}]")

    def __add__(self, other: EndomorphismField) -> EndomorphismField:
        _same_backend(self, other)
        return EndomorphismField(self.backend, lambda p: self.fn(p) + other.fn(p),
                                 f"({self.name}+{other.name})")

    def __sub__(self, other: EndomorphismField) -> EndomorphismField:
        _same_backend(self, other)
        return EndomorphismField(self.backend, lambda p: self.fn(p) - other.fn(p),
                                 f"({self.name}-{other.name})")

    def __neg__(self) -> EndomorphismField:
        return EndomorphismField(self.backend, lambda p: -self.fn(p), f"-{self.name}")

    def scale(self, k: float) -> EndomorphismField:
        return EndomorphismField(self.backend, lambda p: k * self.fn(p), f"{k}*{self.name}")


# -- backends ----------------------------------------------------------------


class ConnectionBackend(ABC):
    name: str
    dim: int
    rep_dim: int

    # geometry primitives supplied by each backend
    @abstractmethod
    def velocity(self, p, v):
        """Ambient derivative of the point along the tangent vector ``v``."""

    @abstractmethod
    def projector(self, p):
        """Matrix sending ambient derivatives of fields to the tangent space at ``p``."""

    @abstractmethod
    def jacobi(self, x: VectorField, y: VectorField) -> VectorField:
        """Jacobi (Lie) bracket [x, y]_J of vector fields."""

    @abstractmethod
    def _exp(self, p, v): ...

    @abstractmethod
    def _log(self, p, q): ...

    @abstractmethod
    def _transport(self, p_hat, p, v): ...

    @abstractmethod
    def basis_fields(self) -> list[VectorField]:
        """Fields whose values at any p span the tangent representation (columns of the identity)."""

    @abstractmethod
    def extend(self, p, v) -> VectorField:
        """A smooth field whose value at ``p`` is the tangent vector ``v``."""

    @abstractmethod
    def random_point(self, rng: np.random.Generator) -> np.ndarray: ...

    @abstractmethod
    def tangent_basis(self, p) -> np.ndarray:
        """Orthonormal frame of T_p as a (rep_dim, dim) matrix."""

    @abstractmethod
    def project_point(self, p) -> np.ndarray:
        """Closest point on the manifold (used by the flow oracle)."""

    @abstractmethod
    def point_residual(self, p) -> float: ...

    def tangent_residual(self, p, v) -> float:
        v = np.asarray(v)
        return float(np.linalg.norm(v - np.asarray(self.projector(_as_array(p))) @ v))

    def random_tangent(self, rng: np.random.Generator, p, scale: float = 1.0) -> np.ndarray:
        return self.tangent_basis(p) @ rng.standard_normal(self.dim) * scale

    def inner(self, u, v) -> float:
        return float(np.dot(np.ravel(u), np.ravel(v)))

    def transport_domain_ok(self, p_hat, p) -> bool:
        return True

    def log_domain_ok(self, p_hat, p) -> bool:
        return True

    # public numeric wrappers
    def exp(self, p, v) -> np.ndarray:
        return np.asarray(self._exp(_as_array(p), _as_array(v)))

    def log(self, p_hat, p) -> np.ndarray:
        if not self.log_domain_ok(p_hat, p):
            raise DomainError(f"{self.name}: logarithm undefined (cut locus)")
        return np.asarray(self._log(_as_array(p_hat), _as_array(p)))

    def transport(self, p_hat, p, v) -> np.ndarray:
        if not self.transport_domain_ok(p_hat, p):
            raise DomainError(f"{self.name}: point outside the transport domain of the base point")
        return np.asarray(self._transport(_as_array(p_hat), _as_array(p), _as_array(v)))

    # connection calculus (all lazy; results are new fields)
    def _check(self, *fields):
        for f in fields:
            if f.backend != self:
                raise BackendMismatch(f"field {f.name} lives on {f.backend}, not {self}")

    def cov(self, x: VectorField, y: VectorField) -> VectorField:
        """∇_x y."""
        self._check(x, y)

        def fn(p):
            return self.projector(p) @ jvp(y.fn, p, self.velocity(p, x.fn(p)))

        return VectorField(self, fn, f"∇_{x.name}{y.name}")

    def cov_covector(self, x: VectorField, alpha: CovectorField) -> CovectorField:
        self._check(x, alpha)

        def fn(p):
            return self.projector(p) @ jvp(alpha.fn, p, self.velocity(p, x.fn(p)))

        return CovectorField(self, fn, f"∇_{x.name}{alpha.name}")

    def cov_endo(self, x: VectorField, E: EndomorphismField) -> EndomorphismField:
        """∇_x E, i.e. (∇_x E) z = ∇_x(E z) − E ∇_x z."""
        self._check(x, E)

        def fn(p):
            P = self.projector(p)
            return P @ jvp(E.fn, p, self.velocity(p, x.fn(p))) @ P

        return EndomorphismField(self, fn, f"∇_{x.name}{E.name}")

    def cov_scalar(self, x: VectorField, phi: ScalarFunction) -> ScalarFunction:
        """x(φ)."""
        self._check(x)
        return ScalarFunction(lambda p: jvp(phi.fn, p, self.velocity(p, x.fn(p))),
                              f"{x.name}({phi.name})")

    def torsion_field(self, x: VectorField, y: VectorField) -> VectorField:
        """T(x, y) = ∇_x y − ∇_y x − [x, y]_J."""
        t = self.cov(x, y) - self.cov(y, x) - self.jacobi(x, y)
        return VectorField(self, t.fn, f"T({x.name},{y.name})")

    def curvature_apply(self, x: VectorField, y: VectorField, z: VectorField) -> VectorField:
        """R(x, y) z = ∇_x ∇_y z − ∇_y ∇_x z − ∇_{[x,y]_J} z."""
        r = (self.cov(x, self.cov(y, z)) - self.cov(y, self.cov(x, z))
             - self.cov(self.jacobi(x, y), z))
        return VectorField(self, r.fn, f"R({x.name},{y.name}){z.name}")

    def curvature_field(self, x: VectorField, y: VectorField) -> EndomorphismField:
        """p ↦ R(x, y)|_p as a matrix on the tangent representation."""
        cols = [self.curvature_apply(x, y, b) for b in self.basis_fields()]

        def fn(p):
            return jnp.stack([c.fn(p) for c in cols], axis=1)

        return EndomorphismField(self, fn, f"R({x.name},{y.name})")

    def torsion_at(self, p, v, w) -> np.ndarray:
        return np.asarray(_pointwise_kernel(self, "torsion")(_as_array(p), _as_array(v), _as_array(w)))

    def curvature_at(self, p, v, w) -> np.ndarray:
        return np.asarray(_pointwise_kernel(self, "curvature")(_as_array(p), _as_array(v), _as_array(w)))

    def frozen(self, f: VectorField, p_hat) -> VectorField:
        """Frozen field q ↦ P_{p̂,q} f(p̂) on the transport domain of p̂."""
        self._check(f)
        p_hat = np.asarray(p_hat, dtype=float)
        value = _as_array(f.at(p_hat))
        base = _as_array(p_hat)

        def fn(q):
            if is_concrete(q) and not self.transport_domain_ok(p_hat, np.asarray(q)):
                raise DomainError(f"frozen field of {f.name} evaluated outside U_p̂")
            return self._transport(base, q, value)

        return VectorField(self, fn, f"{f.name}^p̂")


@lru_cache(maxsize=None)
def _pointwise_kernel(backend: ConnectionBackend, kind: str):
    """Compiled T_p(v, w) or R_p(v, w), extending v and w to fields around p."""
    def kernel(p, v, w):
        x, y = backend.extend(p, v), backend.extend(p, w)
        if kind == "torsion":
            return backend.torsion_field(x, y).fn(p)
        return backend.curvature_field(x, y).fn(p)

    return jax.jit(kernel)


@dataclass(frozen=True)
class EuclideanFlat(ConnectionBackend):
    m: int = 2
    name = "flat"

    @property
    def dim(self):
        return self.m

    @property
    def rep_dim(self):
        return self.m

    def velocity(self, p, v):
        return v

    def projector(self, p):
        return jnp.eye(self.m)

    def jacobi(self, x, y):
        self._check(x, y)
        return VectorField(self, lambda p: jvp(y.fn, p, x.fn(p)) - jvp(x.fn, p, y.fn(p)),
                           f"[{x.name},{y.name}]_J")

    def _exp(self, p, v):
        return p + v

    def _log(self, p, q):
        return q - p

    def _transport(self, p_hat, p, v):
        return v

    def basis_fields(self):
        return [constant_field(self, np.eye(self.m)[i], f"e{i}") for i in range(self.m)]

    def extend(self, p, v):
        return constant_field(self, v)

    def random_point(self, rng):
        return rng.standard_normal(self.m)

    def tangent_basis(self, p):
        return np.eye(self.m)

    def project_point(self, p):
        return np.asarray(p)

    def point_residual(self, p):
        return 0.0


@dataclass(frozen=True)
class Sphere(ConnectionBackend):
    m: int = 2
    name = "sphere"

    @property
    def dim(self):
        return self.m

    @property
    def rep_dim(self):
        return self.m + 1

    def velocity(self, p, v):
        return v

    def projector(self, p):
        return jnp.eye(self.m + 1) - jnp.outer(p, p)

    def jacobi(self, x, y):
        self._check(x, y)
        return VectorField(self, lambda p: jvp(y.fn, p, x.fn(p)) - jvp(x.fn, p, y.fn(p)),
                           f"[{x.name},{y.name}]_J")

    def _exp(self, p, v):
        # cos|v| p + sin|v| v/|v|, written with a removable singularity at v = 0
        n2 = jnp.dot(v, v)
        pos = n2 > 0
        n = jnp.sqrt(jnp.where(pos, n2, 1.0))
        cos = jnp.where(pos, jnp.cos(n), 1.0 - n2 / 2)
        sinc = jnp.where(pos, jnp.sin(n) / n, 1.0 - n2 / 6)
        return cos * p + sinc * v

    def _log(self, p_hat, p):
        c = jnp.dot(p_hat, p)
        d = p - c * p_hat
        nd = jnp.linalg.norm(d)
        pos = nd > 0
        theta = jnp.arctan2(nd, c)
        return jnp.where(pos, theta / jnp.where(pos, nd, 1.0), 0.0) * d

    def _transport(self, p_hat, p, v):
        # v + ⟨v,w⟩(−√(1−c²) p̂ + (c−1) w) with w = (p − c p̂)/|p − c p̂| collapses,
        # for v ⊥ p̂, to this form, which is smooth at p = p̂.
        c = jnp.dot(p_hat, p)
        return v - jnp.dot(v, p) / (1.0 + c) * (p_hat + p)

    def transport_direction_form(self, p_hat, p, v) -> np.ndarray:
        """Transport written with the unit geodesic direction w (undefined at p = p̂)."""
        p_hat, p, v = (np.asarray(a, dtype=float) for a in (p_hat, p, v))
        if not self.transport_domain_ok(p_hat, p):
            raise DomainError("sphere: point outside the transport domain")
        c = float(np.dot(p_hat, p))
        d = p - c * p_hat
        nd = np.linalg.norm(d)
        if nd == 0:
            return v.copy()
        w = d / nd
        return v + np.dot(v, w) * (-np.sqrt(max(0.0, 1 - c * c)) * p_hat + (c - 1) * w)

    def transport_domain_ok(self, p_hat, p):
        return float(np.dot(np.asarray(p_hat), np.asarray(p))) > 0.0

    def log_domain_ok(self, p_hat, p):
        return float(np.dot(np.asarray(p_hat), np.asarray(p))) > -1.0 + 1e-9

    def basis_fields(self):
        eye = np.eye(self.m + 1)
        return [self.extend(None, eye[i]) for i in range(self.m + 1)]

    def extend(self, p, v):
        v = _as_array(v)
        return VectorField(self, lambda q: v - jnp.dot(q, v) * q, "ext")

    def random_point(self, rng):
        x = rng.standard_normal(self.m + 1)
        return x / np.linalg.norm(x)

    def tangent_basis(self, p):
        p = np.asarray(p, dtype=float)
        q, _ = np.linalg.qr(np.column_stack([p, np.eye(self.m + 1)]))
        return q[:, 1:self.m + 1]

    def project_point(self, p):
        p = np.asarray(p, dtype=float)
        return p / np.linalg.norm(p)

    def point_residual(self, p):
        return abs(1.0 - float(np.linalg.norm(p)))


def hat(v):
    return jnp.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def vee(S):
    return jnp.array([S[2, 1], S[0, 2], S[1, 0]])


def _rodrigues(v):
    n2 = jnp.dot(v, v)
    pos = n2 > 1e-30
    n = jnp.sqrt(jnp.where(pos, n2, 1.0))
    a = jnp.where(pos, jnp.sin(n) / n, 1.0 - n2 / 6)
    b = jnp.where(pos, (1.0 - jnp.cos(n)) / jnp.where(pos, n2, 1.0), 0.5 - n2 / 24)
    K = hat(v)
    return jnp.eye(3) + a * K + b * (K @ K)


@dataclass(frozen=True)
class RotationGroupFlat(ConnectionBackend):
    """SO(3) with the connection making left-invariant fields parallel."""

    name = "so3"

    @property
    def dim(self):
        return 3

    @property
    def rep_dim(self):
        return 3

    def velocity(self, g, v):
        return g @ hat(v)

    def projector(self, g):
        return jnp.eye(3)

    def jacobi(self, x, y):
        # left trivialization: [x,y]_J = x(η) − y(ξ) + [ξ, η]
        self._check(x, y)

        def fn(g):
            xi, eta = x.fn(g), y.fn(g)
            return jvp(y.fn, g, g @ hat(xi)) - jvp(x.fn, g, g @ hat(eta)) + jnp.cross(xi, eta)

        return VectorField(self, fn, f"[{x.name},{y.name}]_J")

    def _exp(self, g, v):
        return g @ _rodrigues(v)

    def _log(self, g, h):
        R = g.T @ h
        s = vee(R - R.T) / 2
        ns = jnp.linalg.norm(s)
        c = (jnp.trace(R) - 1) / 2
        theta = jnp.arctan2(ns, c)
        pos = ns > 1e-30
        return jnp.where(pos, theta / jnp.where(pos, ns, 1.0), 1.0) * s

    def _transport(self, p_hat, p, v):
        return v

    def log_domain_ok(self, g, h):
        R = np.asarray(g).T @ np.asarray(h)
        return (np.trace(R) - 1) / 2 > -1.0 + 1e-9

    def basis_fields(self):
        return [constant_field(self, np.eye(3)[i], f"L{i}") for i in range(3)]

    def extend(self, p, v):
        return constant_field(self, v)

    def random_point(self, rng):
        v = rng.standard_normal(3)
        v *= rng.uniform(0, np.pi - 0.1) / np.linalg.norm(v)
        return np.asarray(_rodrigues(_as_array(v)))

    def tangent_basis(self, p):
        return np.eye(3)

    def project_point(self, g):
        u, _, vt = np.linalg.svd(np.asarray(g, dtype=float))
        r = u @ vt
        if np.linalg.det(r) < 0:
            u[:, -1] *= -1
            r = u @ vt
        return r

    def point_residual(self, g):
        g = np.asarray(g, dtype=float)
        return max(float(np.abs(g.T @ g - np.eye(3)).max()), abs(float(np.linalg.det(g)) - 1.0))


# -- functional API ----------------------------------------------------------


def conn_exp(backend: ConnectionBackend, p, v) -> np.ndarray:
    return backend.exp(p, v)


def conn_log(backend: ConnectionBackend, p_hat, p) -> np.ndarray:
    return backend.log(p_hat, p)


def parallel_transport(backend: ConnectionBackend, p_hat, p, v) -> np.ndarray:
    return backend.transport(p_hat, p, v)


def cov_deriv_vec(backend: ConnectionBackend, x: VectorField, y: VectorField) -> VectorField:
    return backend.cov(x, y)


def cov_deriv_endo(backend: ConnectionBackend, x: VectorField, E: EndomorphismField) -> EndomorphismField:
    return backend.cov_endo(x, E)


def torsion(backend: ConnectionBackend, x: VectorField, y: VectorField, p) -> np.ndarray:
    return backend.torsion_field(x, y).at(p)


def curvature(backend: ConnectionBackend, x: VectorField, y: VectorField, p) -> np.ndarray:
    return backend.curvature_field(x, y).at(p)


def frozen(f: VectorField, p_hat) -> VectorField:
    return f.backend.frozen(f, p_hat)


# -- presets -----------------------------------------------------------------


def constant_field(backend: ConnectionBackend, v, name: str = "const") -> VectorField:
    v = _as_array(v)
    return VectorField(backend, lambda p: v, name)


def zero_field(backend: ConnectionBackend) -> VectorField:
    return VectorField(backend, lambda p: jnp.zeros(backend.rep_dim), "0")


def zero_endo(backend: ConnectionBackend) -> EndomorphismField:
    return EndomorphismField(backend, lambda p: jnp.zeros((backend.rep_dim, backend.rep_dim)), "0")


def projected_affine(backend: Sphere, A, c=None, name: str = "f") -> VectorField:
    """f(p) = Π_p(A p + c) on the sphere."""
    A = _as_array(A)
    c = jnp.zeros(A.shape[0]) if c is None else _as_array(c)

    def fn(p):
        g = A @ p + c
        return g - jnp.dot(p, g) * p

    return VectorField(backend, fn, name)


def rotation_field(backend: Sphere, A, name: str = "ζ") -> VectorField:
    """Killing field p ↦ A p for skew A."""
    A = _as_array(A)
    if is_concrete(A) and float(jnp.abs(A + A.T).max()) > 1e-12:
        raise ValueError("rotation field requires a skew-symmetric matrix")
    return VectorField(backend, lambda p: A @ p, name)


def affine_field(backend: EuclideanFlat, A, c=None, name: str = "f") -> VectorField:
    A = _as_array(A)
    c = jnp.zeros(A.shape[0]) if c is None else _as_array(c)
    return VectorField(backend, lambda p: A @ p + c, name)


def so3_field(backend: RotationGroupFlat, coeffs=None, right=None, name: str = "X") -> VectorField:
    """Left-trivialized field ξ(g) = coeffs + gᵀ right.

    ``coeffs`` alone gives a left-invariant field; ``right`` adds the
    right-invariant field g ↦ hat(right) g.
    """
    a = jnp.zeros(3) if coeffs is None else _as_array(coeffs)
    b = jnp.zeros(3) if right is None else _as_array(right)
    return VectorField(backend, lambda g: a + g.T @ b, name)


def compressed_skew(backend: ConnectionBackend, S, name: str = "E") -> EndomorphismField:
    """Constant skew matrix compressed to each tangent space: p ↦ Π_p S Π_p."""
    S = _as_array(S)

    def fn(p):
        P = backend.projector(p)
        return P @ S @ P

    return EndomorphismField(backend, fn, name)


def constant_endo(backend: ConnectionBackend, M, name: str = "E") -> EndomorphismField:
    M = _as_array(M)
    return EndomorphismField(backend, lambda p: M, name)


def tangent_identity(backend: ConnectionBackend) -> EndomorphismField:
    return EndomorphismField(backend, lambda p: backend.projector(p), "Π")


def linear_function(c, name: str = "φ") -> ScalarFunction:
    c = _as_array(c)
    return ScalarFunction(lambda p: jnp.vdot(c, p), name)


def quadratic_function(Q, c=None, name: str = "φ") -> ScalarFunction:
    Q = _as_array(Q)
    c = jnp.zeros(Q.shape[0]) if c is None else _as_array(c)

    def fn(p):
        x = jnp.ravel(p)
        return x @ Q @ x + jnp.dot(c, x)

    return ScalarFunction(fn, name)


def random_skew(rng: np.random.Generator, n: int) -> np.ndarray:
    M = rng.standard_normal((n, n))
    return M - M.T


# -- field specification (JSON) -------------------------------------------


def backend_from_spec(spec: dict) -> ConnectionBackend:
    kind = spec.get("backend")
    if kind == "sphere":
        return Sphere(int(spec.get("m", 2)))
    if kind == "flat":
        return EuclideanFlat(int(spec.get("m", 2)))
    if kind == "so3":
        return RotationGroupFlat()
    raise ValueError(f"unknown backend {kind!r}")


def field_from_spec(spec: dict) -> VectorField:
    """Build a preset field from its JSON description.

    ``{"backend":"sphere","m":2,"A":[[..]],"c":[..]}``, ``{"backend":"flat",...}``
    with the same keys, or ``{"backend":"so3","coeffs":[..],"right":[..]}``.
    """
    backend = backend_from_spec(spec)
    name = spec.get("name", "f")
    if isinstance(backend, RotationGroupFlat):
        if "coeffs" not in spec and "right" not in spec:
            raise ValueError("so3 field needs 'coeffs' and/or 'right'")
        return so3_field(backend, spec.get("coeffs"), spec.get("right"), name)
    n = backend.rep_dim
    A = np.asarray(spec.get("A", np.zeros((n, n))), dtype=float)
    c = np.asarray(spec.get("c", np.zeros(n)), dtype=float)
    if A.shape != (n, n) or c.shape != (n,):
        raise ValueError(f"field spec for {backend} needs A of shape {(n, n)} and c of shape {(n,)}")
    if isinstance(backend, Sphere):
        return projected_affine(backend, A, c, name)
    return affine_field(backend, A, c, name)


# -- validation helpers -----------------------------------------------------


def jacobian_fd_residual(field: VectorField | EndomorphismField, p, direction, h: float = FD_STEP) -> float:
    """|D field(p)[direction] − central difference|; the difference uses ambient steps."""
    p = _as_array(p)
    d = _as_array(direction)
    exact = np.asarray(jvp(field.fn, p, d))
    fd = (np.asarray(field.fn(p + h * d)) - np.asarray(field.fn(p - h * d))) / (2 * h)
    return float(np.abs(exact - fd).max())


def validate_field(field: VectorField, points: Sequence, tol: float = 1e-12) -> None:
    """Raise if the field is not tangent, or its derivative disagrees with finite differences."""
    backend = field.backend
    rng = np.random.default_rng(0)
    for p in points:
        v = field.at(p)
        if backend.tangent_residual(p, v) > tol * max(1.0, np.linalg.norm(v)):
            raise ValueError(f"field {field.name} is not tangent at {p}")
        d = np.asarray(backend.velocity(_as_array(p), _as_array(backend.random_tangent(rng, p))))
        if jacobian_fd_residual(field, p, d) > 1e-6:
            raise ValueError(f"field {field.name}: derivative disagrees with finite differences")
