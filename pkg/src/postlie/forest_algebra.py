"""Exact free post-Lie algebra on planar trees and its enveloping algebra.

Elements of the enveloping algebra are finite rational combinations of
ordered forests (:class:`ForestVector`).  Trees are primitive; the Lie
bracket is the commutator of concatenation.  Grafting ``⊳`` is extended from
trees to forests by the D-algebra rules

    1 ⊳ B = B,
    x ⊳ (y·Z) = (x ⊳ y)·Z + y·(x ⊳ Z),
    (x·Y) ⊳ B = x ⊳ (Y ⊳ B) − (x ⊳ Y) ⊳ B,

and the Grossman–Larson product is ``A ∗ B = A₁·(A₂ ⊳ B)`` summed over the
deshuffle coproduct of ``A``.  All arithmetic is in :class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .trees import UNIT, Forest, Tree, as_forest, parse_forest

Coefficient = Fraction
Number = int | Fraction


def _normalize(c: Number) -> Number:
    return c.numerator if isinstance(c, Fraction) and c.denominator == 1 else c


class ForestVector:
    """Finitely supported map ``Forest -> Fraction`` (zero entries dropped)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Forest, Number] | Iterable[tuple[Forest, Number]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Forest, Number] = {}
        for f, c in items:
            if not isinstance(f, Forest):
                f = as_forest(f)
            if not isinstance(c, (int, Fraction)):
                c = Fraction(c)
            acc[f] = acc.get(f, 0) + c
        # integral coefficients are kept as int: exact, and much faster than Fraction
        self._terms = {f: _normalize(c) for f, c in acc.items() if c != 0}

    @classmethod
    def basis(cls, x: Tree | Forest | str) -> ForestVector:
        if isinstance(x, str):
            x = parse_forest(x)
        return cls({as_forest(x): 1})

    @classmethod
    def unit(cls) -> ForestVector:
        return cls({UNIT: 1})

    @classmethod
    def zero(cls) -> ForestVector:
        return cls()

    # mapping-like access
    def __getitem__(self, f: Forest | Tree) -> Fraction:
        return Fraction(self._terms.get(as_forest(f), 0))

    def __iter__(self) -> Iterator[Forest]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def items(self):
        return self._terms.items()

    def sorted_items(self) -> list[tuple[Forest, Number]]:
        return sorted(self._terms.items(), key=lambda kv: (kv[0].grade, kv[0].code))

    # linear structure
    def __add__(self, other: ForestVector) -> ForestVector:
        return ForestVector(itertools.chain(self.items(), other.items()))

    def __sub__(self, other: ForestVector) -> ForestVector:
        return ForestVector(itertools.chain(self.items(), ((f, -c) for f, c in other.items())))

    def __neg__(self) -> ForestVector:
        return ForestVector({f: -c for f, c in self.items()})

    def __mul__(self, k: Number) -> ForestVector:
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return ForestVector({f: c * k for f, c in self.items()})

    __rmul__ = __mul__

    def __truediv__(self, k: Number) -> ForestVector:
        return self * (Fraction(1) / Fraction(k))

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self._terms
        return isinstance(other, ForestVector) and self._terms == other._terms

    __hash__ = None

    # gradings
    def grade_component(self, k: int) -> ForestVector:
        return ForestVector({f: c for f, c in self.items() if f.grade == k})

    def truncate(self, order: int) -> ForestVector:
        return ForestVector({f: c for f, c in self.items() if f.grade <= order})

    @property
    def max_grade(self) -> int:
        return max((f.grade for f in self._terms), default=-1)

    @property
    def constant_term(self) -> Fraction:
        return self[UNIT]

    def is_primitive_span(self) -> bool:
        """True when every term is a single tree (so the element lies in the tree span)."""
        return all(len(f) == 1 for f in self._terms)

    def is_primitive(self) -> bool:
        """Δx = x⊗𝟙 + 𝟙⊗x, i.e. x lies in the free Lie algebra on trees."""
        expected: dict = {}
        for f, c in self.items():
            if f.is_unit:
                return False
            expected[(f, UNIT)] = c
            expected[(UNIT, f)] = c
        return coproduct(self) == expected

    def __repr__(self):
        return f"ForestVector({format_vector(self)!r})"

    def __str__(self):
        return format_vector(self)

    # serialization
    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {"forest": f.code, "num": str(c.numerator), "den": str(c.denominator)}
                for f, c in self.sorted_items()
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False)

    @classmethod
    def from_json_obj(cls, obj: dict, colors=None) -> ForestVector:
        return cls(
            (parse_forest(t["forest"], colors), Fraction(int(t["num"]), int(t["den"])))
            for t in obj["terms"]
        )

    @classmethod
    def from_json(cls, text: str, colors=None) -> ForestVector:
        return cls.from_json_obj(json.loads(text), colors)


def format_vector(v: ForestVector) -> str:
    if not v:
        return "0"
    parts = []
    for f, c in v.sorted_items():
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag} "
        parts.append((sign, f"{coef}{f}"))
    head_sign, head = parts[0]
    text = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def vec(x: Tree | Forest | str | ForestVector) -> ForestVector:
    return x if isinstance(x, ForestVector) else ForestVector.basis(x)


# -- basis-level kernels (integer coefficients, cached) ---------------------

def _add(target: dict, key, c: int) -> None:
    v = target.get(key, 0) + c
    if v:
        target[key] = v
    else:
        target.pop(key, None)


@lru_cache(maxsize=None)
def _graft(eta: Tree, t: Tree) -> tuple[tuple[Tree, int], ...]:
    out: dict[Tree, int] = {}
    _add(out, Tree(t.root, (eta,) + t.branches), 1)
    for i, b in enumerate(t.branches):
        for new_b, c in _graft(eta, b):
            _add(out, Tree(t.root, t.branches[:i] + (new_b,) + t.branches[i + 1:]), c)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _tri_tree(eta: Tree, w: Forest) -> tuple[tuple[Forest, int], ...]:
    """eta ⊳ w for a single tree eta: Leibniz rule over the word w."""
    out: dict[Forest, int] = {}
    trees = w.trees
    for i, t in enumerate(trees):
        for new_t, c in _graft(eta, t):
            _add(out, Forest(trees[:i] + (new_t,) + trees[i + 1:]), c)
    return tuple(out.items())


@lru_cache(maxsize=None)
def _tri(a: Forest, b: Forest) -> tuple[tuple[Forest, int], ...]:
    if a.is_unit:
        return ((b, 1),)
    if b.is_unit:
        return ()
    if len(a) == 1:
        return _tri_tree(a[0], b)
    x, rest = a[0], a[1:]
    out: dict[Forest, int] = {}
    get = out.get
    for f, c in _tri(rest, b):
        for g, d in _tri_tree(x, f):
            out[g] = get(g, 0) + c * d
    for f, c in _tri_tree(x, rest):
        for g, d in _tri(f, b):
            out[g] = get(g, 0) - c * d
    return tuple((g, c) for g, c in out.items() if c)


def deshuffle(f: Forest) -> list[tuple[Forest, Forest]]:
    """All 2^k order-preserving splittings of the word ``f`` (with multiplicity)."""
    trees = f.trees
    k = len(trees)
    out = []
    for mask in range(1 << k):
        left = tuple(trees[i] for i in range(k) if mask >> i & 1)
        right = tuple(trees[i] for i in range(k) if not mask >> i & 1)
        out.append((Forest(left), Forest(right)))
    # sort so the listing is independent of bit order: left factor grade descending
    out.sort(key=lambda lr: (-len(lr[0]), lr[0].code, lr[1].code))
    return out


@lru_cache(maxsize=None)
def _gl(a: Forest, b: Forest) -> tuple[tuple[Forest, int], ...]:
    out: dict[Forest, int] = {}
    for left, right in deshuffle(a):
        for g, c in _tri(right, b):
            _add(out, left + g, c)
    return tuple(out.items())


def _bilinear(kernel: Callable[[Forest, Forest], Iterable[tuple[Forest, int]]],
              A: ForestVector, B: ForestVector) -> ForestVector:
    acc: dict[Forest, Number] = {}
    get = acc.get
    for fa, ca in A.items():
        for fb, cb in B.items():
            cab = ca * cb
            for g, k in kernel(fa, fb):
                acc[g] = get(g, 0) + cab * k
    return ForestVector(acc)


# -- public operations -------------------------------------------------------


def graft(eta: Tree, t: Tree) -> ForestVector:
    """Left grafting of the tree ``eta`` onto every vertex of ``t``."""
    return ForestVector({Forest((s,)): c for s, c in _graft(eta, t)})


def concat(A, B) -> ForestVector:
    return _bilinear(lambda a, b: ((a + b, 1),), vec(A), vec(B))


def triangle(A, B) -> ForestVector:
    return _bilinear(_tri, vec(A), vec(B))


def gl_product(A, B) -> ForestVector:
    return _bilinear(_gl, vec(A), vec(B))


def lie_bracket(A, B) -> ForestVector:
    A, B = vec(A), vec(B)
    return concat(A, B) - concat(B, A)


def coproduct(A) -> dict[tuple[Forest, Forest], Fraction]:
    acc: dict[tuple[Forest, Forest], Fraction] = defaultdict(Fraction)
    for f, c in vec(A).items():
        for pair in deshuffle(f):
            acc[pair] += c
    return {k: v for k, v in acc.items() if v}


def associator(x, y, z) -> ForestVector:
    """a⊳(x,y,z) = x ⊳ (y ⊳ z) − (x ⊳ y) ⊳ z."""
    return triangle(x, triangle(y, z)) - triangle(triangle(x, y), z)


class NotPrimitiveError(ValueError):
    pass


def postlie_axiom_residuals(x, y, z) -> tuple[ForestVector, ForestVector]:
    """Residuals of the two post-Lie axioms for primitive elements x, y, z.

    Returns ``(x⊳[y,z] − [x⊳y,z] − [y,x⊳z],  [x,y]⊳z − a(x,y,z) + a(y,x,z))``.
    """
    x, y, z = vec(x), vec(y), vec(z)
    for name, v in (("x", x), ("y", y), ("z", z)):
        if not (v.is_primitive_span() or v.is_primitive()):
            raise NotPrimitiveError(f"{name} is not primitive")
    r1 = triangle(x, lie_bracket(y, z)) - lie_bracket(triangle(x, y), z) - lie_bracket(y, triangle(x, z))
    r2 = triangle(lie_bracket(x, y), z) - associator(x, y, z) + associator(y, x, z)
    return r1, r2


def postlie_axiom_sweep(elements) -> tuple[int, int]:
    """Count failures of both post-Lie axioms over all ordered triples of ``elements``.

    Pairwise products are computed once, so the sweep costs O(n³) triangle
    products instead of the O(n³) · 8 a naive loop would need.
    """
    xs = [vec(e) for e in elements]
    for v in xs:
        if not (v.is_primitive_span() or v.is_primitive()):
            raise NotPrimitiveError(f"{v} is not primitive")
    n = len(xs)
    tri = [[triangle(xs[i], xs[j]) for j in range(n)] for i in range(n)]
    br = [[lie_bracket(xs[i], xs[j]) for j in range(n)] for i in range(n)]
    bad_derivation = bad_associator = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                x, z = xs[i], xs[k]
                r1 = (triangle(x, br[j][k]) - lie_bracket(tri[i][j], z)
                      - lie_bracket(xs[j], tri[i][k]))
                a_xyz = triangle(x, tri[j][k]) - triangle(tri[i][j], z)
                a_yxz = triangle(xs[j], tri[i][k]) - triangle(tri[j][i], z)
                r2 = triangle(br[i][j], z) - a_xyz + a_yxz
                bad_derivation += bool(r1)
                bad_associator += bool(r2)
    return bad_derivation, bad_associator


# -- truncated Lie–Butcher series -------------------------------------------


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    """Element of the graded dual, kept modulo forests of grade > ``order``."""

    order: int
    coeffs: ForestVector = field(default_factory=ForestVector)

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be >= 0")
        object.__setattr__(self, "coeffs", vec(self.coeffs).truncate(self.order))

    @classmethod
    def delta(cls, x: Tree | Forest | str, order: int) -> TruncatedSeries:
        return cls(order, ForestVector.basis(x))

    def pairing(self, omega: Tree | Forest) -> Fraction:
        omega = as_forest(omega)
        if omega.grade > self.order:
            raise TruncationError(
                f"forest {omega} has grade {omega.grade} beyond truncation order {self.order}")
        return self.coeffs[omega]

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        return TruncatedSeries(min(self.order, other.order), self.coeffs + other.coeffs)

    def __sub__(self, other: TruncatedSeries) -> TruncatedSeries:
        return TruncatedSeries(min(self.order, other.order), self.coeffs - other.coeffs)

    def __mul__(self, k: Number) -> TruncatedSeries:
        return TruncatedSeries(self.order, self.coeffs * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, TruncatedSeries) and self.order == other.order
                and self.coeffs == other.coeffs)

    def star(self, other: TruncatedSeries) -> TruncatedSeries:
        n = min(self.order, other.order)
        return TruncatedSeries(n, _truncated_product(_gl, self.coeffs, other.coeffs, n))

    def dot(self, other: TruncatedSeries) -> TruncatedSeries:
        n = min(self.order, other.order)
        return TruncatedSeries(
            n, _truncated_product(lambda a, b: ((a + b, 1),), self.coeffs, other.coeffs, n))

    def items(self):
        return self.coeffs.sorted_items()


def _truncated_product(kernel, A: ForestVector, B: ForestVector, order: int) -> ForestVector:
    A, B = A.truncate(order), B.truncate(order)
    acc: dict[Forest, Fraction] = defaultdict(Fraction)
    for fa, ca in A.items():
        for fb, cb in B.items():
            if fa.grade + fb.grade > order:
                continue
            for g, k in kernel(fa, fb):
                acc[g] += ca * cb * k
    return ForestVector(acc)


def _as_series(alpha, order: int) -> TruncatedSeries:
    if isinstance(alpha, TruncatedSeries):
        return TruncatedSeries(order, alpha.coeffs)
    return TruncatedSeries(order, vec(alpha))


def _exp(alpha, order: int, product: str) -> TruncatedSeries:
    a = _as_series(alpha, order)
    if a.coeffs.constant_term != 0:
        raise ValueError("exponential requires a series with zero constant term")
    mul = TruncatedSeries.star if product == "star" else TruncatedSeries.dot
    term = TruncatedSeries(order, ForestVector.unit())
    total = term
    for k in range(1, order + 1):
        term = mul(term, a) * Fraction(1, k)
        total = total + term
    return total


def exp_star(alpha, order: int) -> TruncatedSeries:
    """Grossman–Larson exponential Σ α^{∗k}/k!, truncated at total grade ``order``."""
    return _exp(alpha, order, "star")


def exp_dot(alpha, order: int) -> TruncatedSeries:
    """Concatenation exponential Σ α^{·k}/k!, truncated at total grade ``order``."""
    return _exp(alpha, order, "dot")


# -- polynomials in t with ForestVector coefficients --------------------------
#
# A series in a formal time variable t is a dict {power: ForestVector}.  Used for
# identities such as d/dt exp*(tα) = exp*(tα) ∗ α that are polynomial in t
# once truncated by grade.

TimeSeries = dict[int, ForestVector]


def time_exp(alpha, order: int, product: str = "star") -> TimeSeries:
    """exp(tα) as {k: α^k / k!} truncated at grade ``order``."""
    a = vec(alpha.coeffs if isinstance(alpha, TruncatedSeries) else alpha).truncate(order)
    if a.constant_term != 0:
        raise ValueError("exponential requires zero constant term")
    kernel = _gl if product == "star" else (lambda x, y: ((x + y, 1),))
    out = {0: ForestVector.unit()}
    term = ForestVector.unit()
    for k in range(1, order + 1):
        term = _truncated_product(kernel, term, a, order) / k
        if not term:
            break
        out[k] = term
    return out


def time_derivative(P: TimeSeries) -> TimeSeries:
    return {k - 1: v * k for k, v in P.items() if k > 0 and v}


def time_product(P: TimeSeries, Q: TimeSeries, op: str, order: int) -> TimeSeries:
    """Product of two t-series under ``op`` in {"star", "dot", "triangle"}."""
    kernel = {"star": _gl, "dot": lambda x, y: ((x + y, 1),), "triangle": _tri}[op]
    out: dict[int, ForestVector] = {}
    for i, a in P.items():
        for j, b in Q.items():
            term = _truncated_product(kernel, a, b, order)
            if term:
                out[i + j] = out.get(i + j, ForestVector()) + term
    return {k: v for k, v in out.items() if v}


def time_constant(A) -> TimeSeries:
    return {0: vec(A)}


def time_series_equal(P: TimeSeries, Q: TimeSeries) -> bool:
    keys = set(P) | set(Q)
    return all(P.get(k, ForestVector()) == Q.get(k, ForestVector()) for k in keys)
