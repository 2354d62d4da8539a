"""Frames, scalarization, holonomy, and the post-Lie structure on X_M ⊕ Hol_M.

A frame at ``p`` is a (rep_dim, m) matrix whose columns are tangent vectors.
The structure group acts on the left by ``q·u = u q⁻¹``; scalarized tensors
transform by the standard tensor action, which :func:`act` implements.

:class:`ExtendedField` pairs a vector field with a holonomy endomorphism field.
Bracket and triangle follow the operation table

    x ⊳ y = ∇_x y          [x, y]   = −T(x, y) + R(x, y)
    x ⊳ E = ∇_x E          [E, x]   = −E x
    E ⊳ y = E y            [E1, E2] = −E1 E2 + E2 E1
    E1 ⊳ E2 = E1 E2 − E2 E1

extended bilinearly, with [x, E] = E x by antisymmetry.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np

from .geometry import (
    BackendMismatch,
    ConnectionBackend,
    CovectorField,
    EndomorphismField,
    VectorField,
    _as_array,
    zero_endo,
    zero_field,
)

SUPPORTED_VALENCES = {(1, 0), (0, 1), (1, 1), (2, 1), (3, 1), (2, 2)}


class UnsupportedValence(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Frame:
    base: np.ndarray
    iso: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "iso", np.asarray(self.iso, dtype=float))

    @property
    def m(self) -> int:
        return self.iso.shape[1]

    def inverse_apply(self, w) -> np.ndarray:
        """u⁻¹(w) for a tangent vector w."""
        return np.linalg.lstsq(self.iso, np.asarray(w), rcond=None)[0]

    def act(self, q) -> Frame:
        """q·u = u ∘ q⁻¹."""
        return Frame(self.base, self.iso @ np.linalg.inv(q))

    def gram(self) -> np.ndarray:
        return self.iso.T @ self.iso


def orthonormal_frame(backend: ConnectionBackend, p) -> Frame:
    return Frame(p, backend.tangent_basis(p))


def frame_residual(backend: ConnectionBackend, u: Frame) -> float:
    return max(backend.tangent_residual(u.base, col) for col in u.iso.T)


@dataclass(frozen=True)
class TorsionTensor:
    backend: ConnectionBackend
    valence = (2, 1)

    def at(self, p, v, w) -> np.ndarray:
        return self.backend.torsion_at(p, v, w)


@dataclass(frozen=True)
class CurvatureTensor:
    backend: ConnectionBackend
    valence = (3, 1)

    def at(self, p, v, w) -> np.ndarray:
        return self.backend.curvature_at(p, v, w)


def _valence_of(tau) -> tuple[int, int]:
    if isinstance(tau, VectorField):
        return (1, 0)
    if isinstance(tau, CovectorField):
        return (0, 1)
    if isinstance(tau, EndomorphismField):
        return (1, 1)
    if isinstance(tau, (TorsionTensor, CurvatureTensor)):
        return tau.valence
    raise UnsupportedValence(f"cannot scalarize {type(tau).__name__}")


def scalarize(tau, u: Frame, valence: tuple[int, int] | None = None) -> np.ndarray:
    """Component array of the tensor ``tau`` in the frame ``u``.

    Layouts: vector ``(m,)``; covector ``(m,)``; endomorphism ``(m, m)``;
    torsion ``T[i, j] = u⁻¹T(u e_i, u e_j)`` of shape ``(m, m, m)``;
    curvature ``R[i, j] = u⁻¹R(u e_i, u e_j)u`` of shape ``(m, m, m, m)``.
    """
    natural = _valence_of(tau)
    valence = natural if valence is None else tuple(valence)
    if valence not in SUPPORTED_VALENCES:
        raise UnsupportedValence(f"valence {valence} is not supported")
    if valence != natural and not (natural == (3, 1) and valence == (2, 2)):
        raise UnsupportedValence(f"{type(tau).__name__} has valence {natural}, not {valence}")
    p, U, m = u.base, u.iso, u.m
    Uinv = np.linalg.pinv(U)
    if valence == (1, 0):
        return Uinv @ tau.at(p)
    if valence == (0, 1):
        return U.T @ tau.at(p)
    if valence == (1, 1):
        return Uinv @ tau.at(p) @ U
    if valence == (2, 1):
        out = np.zeros((m, m, m))
        for i in range(m):
            for j in range(i + 1, m):
                t = Uinv @ tau.at(p, U[:, i], U[:, j])
                out[i, j], out[j, i] = t, -t
        return out
    out = np.zeros((m, m, m, m))
    for i in range(m):
        for j in range(i + 1, m):
            r = Uinv @ tau.at(p, U[:, i], U[:, j]) @ U
            out[i, j], out[j, i] = r, -r
    return out


def act(q, comp: np.ndarray, valence: tuple[int, int]) -> np.ndarray:
    """Standard action of q ∈ GL(m) on scalarized components."""
    q = np.asarray(q, dtype=float)
    qi = np.linalg.inv(q)
    valence = tuple(valence)
    if valence == (1, 0):
        return q @ comp
    if valence == (0, 1):
        return qi.T @ comp
    if valence == (1, 1):
        return q @ comp @ qi
    if valence == (2, 1):
        return np.einsum("ai,bj,kc,abc->ijk", qi, qi, q, comp)
    if valence in ((3, 1), (2, 2)):
        return np.einsum("ai,bj,kc,abcd,dl->ijkl", qi, qi, q, comp, qi)
    raise UnsupportedValence(f"valence {valence} is not supported")


def equivariance_check(components: Callable[[Frame], np.ndarray], frames: Sequence[Frame],
                       group_elements: Sequence, valence: tuple[int, int]) -> float:
    """max |τ̄(q·u) − q·τ̄(u)| over the given frames and group elements."""
    worst = 0.0
    for u in frames:
        base = components(u)
        for q in group_elements:
            lhs = components(u.act(q))
            worst = max(worst, float(np.abs(lhs - act(q, base, valence)).max()))
    return worst


def random_rotation(rng: np.random.Generator, m: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_gl(rng: np.random.Generator, m: int) -> np.ndarray:
    while True:
        q = rng.standard_normal((m, m)) + 2 * np.eye(m)
        if abs(np.linalg.det(q)) > 0.1:
            return q


def frame_transport(backend: ConnectionBackend, u: Frame, p) -> Frame:
    """Parallel transport of every frame vector along the geodesic from base(u) to p."""
    cols = [backend.transport(u.base, p, col) for col in u.iso.T]
    return Frame(p, np.column_stack(cols))


def horizontal_derivative(backend: ConnectionBackend, tau, u: Frame, v, h: float = 1e-5) -> np.ndarray:
    """d/ds τ̄(u(s)) at s = 0 for the parallel frame u(s) over s ↦ exp_p(s v); central difference."""
    plus = frame_transport(backend, u, backend.exp(u.base, h * np.asarray(v)))
    minus = frame_transport(backend, u, backend.exp(u.base, -h * np.asarray(v)))
    return (scalarize(tau, plus) - scalarize(tau, minus)) / (2 * h)


def holonomy_span(backend: ConnectionBackend, u: Frame, samples: int,
                  rng: np.random.Generator | None = None, tol: float = 1e-8) -> int:
    """Numerical dimension of span{R̄(u')(a, b)} over frames u' reached from u by transport."""
    m = u.m
    if samples < m * (m - 1) // 2:
        raise ValueError("need at least m(m-1)/2 samples")
    rng = np.random.default_rng(0) if rng is None else rng
    mats = []
    frame = u
    for k in range(samples):
        if k % 3 == 2:
            # hop to a nearby point; the composed transports move the frame within the holonomy bundle
            step = backend.random_tangent(rng, frame.base)
            step = step * (rng.uniform(0.1, 1.2) / np.linalg.norm(step))
            frame = frame_transport(backend, frame, backend.exp(frame.base, step))
        a, b = rng.standard_normal(m), rng.standard_normal(m)
        U = frame.iso
        mats.append(np.linalg.pinv(U) @ backend.curvature_at(frame.base, U @ a, U @ b) @ U)
    stack = np.array([M.ravel() for M in mats])
    sv = np.linalg.svd(stack, compute_uv=False)
    return int(np.sum(sv > tol))


# -- extended fields ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtendedField:
    backend: ConnectionBackend
    vec: VectorField | None = None
    endo: EndomorphismField | None = None

    def __post_init__(self):
        for part in (self.vec, self.endo):
            if part is not None and part.backend != self.backend:
                raise BackendMismatch("extended field parts live on different backends")

    @property
    def x(self) -> VectorField:
        return self.vec if self.vec is not None else zero_field(self.backend)

    @property
    def E(self) -> EndomorphismField:
        return self.endo if self.endo is not None else zero_endo(self.backend)

    def __add__(self, other: ExtendedField) -> ExtendedField:
        _check(self, other)
        return ExtendedField(self.backend, self.x + other.x, self.E + other.E)

    def __sub__(self, other: ExtendedField) -> ExtendedField:
        _check(self, other)
        return ExtendedField(self.backend, self.x - other.x, self.E - other.E)

    def at(self, p) -> tuple[np.ndarray, np.ndarray]:
        return self.x.at(p), self.E.at(p)

    def value(self, p):
        """Traceable evaluation: (vector, matrix)."""
        return self.x.fn(p), self.E.fn(p)


def _check(A: ExtendedField, B: ExtendedField):
    if A.backend != B.backend:
        raise BackendMismatch("extended fields live on different backends")


def _endo_vec(E: EndomorphismField, y: VectorField) -> VectorField:
    return E.apply(y)


def theorem1_bracket(A: ExtendedField, B: ExtendedField) -> ExtendedField:
    """[(x,E1),(y,E2)] = (−T(x,y) − E1 y + E2 x,  R(x,y) − E1E2 + E2E1)."""
    _check(A, B)
    bk = A.backend
    x, y, E1, E2 = A.x, B.x, A.E, B.E
    v = -bk.torsion_field(x, y) - _endo_vec(E1, y) + _endo_vec(E2, x)
    e = bk.curvature_field(x, y) - E1.commutator(E2)
    return ExtendedField(bk, v, e)


def theorem1_triangle(A: ExtendedField, B: ExtendedField) -> ExtendedField:
    """(x,E1) ⊳ (y,E2) = (∇_x y + E1 y,  ∇_x E2 + E1E2 − E2E1)."""
    _check(A, B)
    bk = A.backend
    x, y, E1, E2 = A.x, B.x, A.E, B.E
    v = bk.cov(x, y) + _endo_vec(E1, y)
    e = bk.cov_endo(x, E2) + E1.commutator(E2)
    return ExtendedField(bk, v, e)


def _norm(field: ExtendedField, p):
    v, E = field.value(p)
    return jnp.sqrt(jnp.sum(v * v) + jnp.sum(E * E))


def theorem1_residual_fields(A: ExtendedField, B: ExtendedField, C: ExtendedField) -> dict[str, ExtendedField]:
    br, tri = theorem1_bracket, theorem1_triangle
    jacobi = br(A, br(B, C)) + br(B, br(C, A)) + br(C, br(A, B))
    derivation = tri(A, br(B, C)) - br(tri(A, B), C) - br(B, tri(A, C))

    def assoc(X, Y, Z):
        return tri(X, tri(Y, Z)) - tri(tri(X, Y), Z)

    associator = tri(br(A, B), C) - assoc(A, B, C) + assoc(B, A, C)
    return {"jacobi": jacobi, "derivation": derivation, "associator": associator}


def theorem1_axiom_residuals(A: ExtendedField, B: ExtendedField, C: ExtendedField, p) -> dict[str, float]:
    """Norms at p of the Jacobi, derivation and associator-difference residuals."""
    fields = theorem1_residual_fields(A, B, C)
    p = _as_array(p)
    return {k: float(_norm(f, p)) for k, f in fields.items()}


def theorem1_residual_norms(A, B, C, p):
    """Traceable variant of :func:`theorem1_axiom_residuals` returning a length-3 array."""
    fields = theorem1_residual_fields(A, B, C)
    return jnp.stack([_norm(fields[k], p) for k in ("jacobi", "derivation", "associator")])


def reductive_split_residual(field: ExtendedField, p) -> tuple[float, float]:
    """(non-tangent part of the vector component, non-skew part of the endomorphism on T_p)."""
    bk = field.backend
    v, E = field.at(p)
    P = np.asarray(bk.projector(_as_array(p)))
    onb = bk.tangent_basis(p)
    restricted = onb.T @ E @ onb
    leak = float(np.abs(E - P @ E @ P).max())
    return bk.tangent_residual(p, v), max(float(np.abs(restricted + restricted.T).max()), leak)
