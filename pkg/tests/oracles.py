"""Reference implementations written independently of the library code paths."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from postlie.trees import Forest, Tree

# -- algebra ---------------------------------------------------------------------


def _vertex_paths(t: Tree, prefix=()):
    yield prefix
    for i, b in enumerate(t.branches):
        yield from _vertex_paths(b, prefix + (i,))


def _attach(t: Tree, path, eta: Tree) -> Tree:
    if not path:
        return Tree(t.root, (eta,) + t.branches)
    i = path[0]
    br = list(t.branches)
    br[i] = _attach(br[i], path[1:], eta)
    return Tree(t.root, tuple(br))


def graft_by_vertices(eta: Tree, t: Tree) -> dict[Forest, Fraction]:
    """Attach eta as leftmost child of each vertex of t in turn."""
    out: dict[Forest, Fraction] = {}
    for path in _vertex_paths(t):
        key = Forest((_attach(t, path, eta),))
        out[key] = out.get(key, 0) + Fraction(1)
    return {k: v for k, v in out.items() if v}


def _addto(acc, other, scale=1):
    for k, v in other.items():
        acc[k] = acc.get(k, 0) + scale * v
    return acc


def _clean(d):
    return {k: Fraction(v) for k, v in d.items() if v}


def tri_words(A: Forest, B: Forest) -> dict[Forest, Fraction]:
    """A ⊳ B by the D-algebra rules, from scratch: tree into word via Leibniz, word via associator."""
    if A.is_unit:
        return {B: Fraction(1)}
    if B.is_unit:
        return {}
    if len(A) == 1:
        eta = A[0]
        out: dict = {}
        for i, t in enumerate(B.trees):
            for g, c in graft_by_vertices(eta, t).items():
                key = Forest(B.trees[:i] + g.trees + B.trees[i + 1:])
                out[key] = out.get(key, 0) + c
        return _clean(out)
    x, Y = Forest((A[0],)), A[1:]
    out: dict = {}
    for f, c in tri_words(Y, B).items():
        _addto(out, tri_words(x, f), c)
    for f, c in tri_words(x, Y).items():
        _addto(out, tri_words(f, B), -c)
    return _clean(out)


def gl_recursive(A: Forest, B: Forest) -> dict[Forest, Fraction]:
    """Grossman–Larson product from x∗C = xC + x⊳C and (xY)∗B = x∗(Y∗B) − (x⊳Y)∗B."""
    if A.is_unit:
        return {B: Fraction(1)}
    if len(A) == 1:
        out = {A + B: Fraction(1)}
        return _clean(_addto(out, tri_words(A, B)))
    x, Y = Forest((A[0],)), A[1:]
    out: dict = {}
    for f, c in gl_recursive(Y, B).items():
        _addto(out, gl_recursive(x, f), c)
    for f, c in tri_words(x, Y).items():
        _addto(out, gl_recursive(f, B), -c)
    return _clean(out)


def count_trees(n: int, colors: int = 1) -> int:
    """Number of planar trees with n vertices and `colors` vertex colors: colors^n · Catalan(n−1)."""
    from math import comb
    return colors ** n * comb(2 * (n - 1), n - 1) // n


# -- geometry ----------------------------------------------------------------------


def fd_cov_sphere(x, y, p, h: float = 1e-5) -> np.ndarray:
    """∇_x y on the unit sphere from a central difference of y along the geodesic through p."""
    v = np.asarray(x(p))
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.zeros_like(p)
    u = v / nv

    def gamma(s):
        return np.cos(s) * p + np.sin(s) * u

    d = (np.asarray(y(gamma(h * nv))) - np.asarray(y(gamma(-h * nv)))) / (2 * h)
    return d - np.dot(d, p) * p


def ode_transport_sphere(p_hat, p, v, rtol: float = 1e-12) -> np.ndarray:
    """Levi-Civita transport on the sphere along the great-circle arc p̂ → p, by integration."""
    p_hat, p, v = (np.asarray(a, float) for a in (p_hat, p, v))
    c = np.clip(np.dot(p_hat, p), -1, 1)
    theta = np.arccos(c)
    if theta < 1e-15:
        return v.copy()
    u = (p - c * p_hat) / np.linalg.norm(p - c * p_hat)

    def rhs(s, V):
        g = np.cos(s) * p_hat + np.sin(s) * u
        dg = -np.sin(s) * p_hat + np.cos(s) * u
        return -np.dot(V, dg) * g

    sol = solve_ivp(rhs, (0.0, theta), v, method="DOP853", rtol=rtol, atol=rtol)
    return sol.y[:, -1]


def rotation_flow(A, p, t) -> np.ndarray:
    from scipy.linalg import expm
    return expm(t * np.asarray(A)) @ np.asarray(p)
