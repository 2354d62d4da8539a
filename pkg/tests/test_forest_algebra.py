from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import forests, trees
from oracles import gl_recursive, graft_by_vertices, tri_words
from postlie import forest_algebra as fa
from postlie.forest_algebra import ForestVector, vec
from postlie.trees import UNIT, Forest, enumerate_forests, parse, parse_forest, trees_up_to


def V(text: str) -> ForestVector:
    return vec(parse_forest(text))


def fv(d) -> ForestVector:
    return ForestVector(d)


# -- worked examples -----------------------------------------------------------------


def test_graft_onto_leaf():
    assert fa.graft(parse("b[]"), parse("a[]")) == V("a[b[]]")


def test_graft_three_term_example():
    got = fa.graft(parse("b[]"), parse("a[a[],a[]]"))
    assert got == V("a[b[],a[],a[]]") + V("a[a[b[]],a[]]") + V("a[a[],a[b[]]]")


def test_forest_acting_on_leaf():
    assert fa.triangle("a[]a[]", "a[]") == V("a[a[],a[]]")


def test_gl_square_of_leaf():
    assert fa.gl_product("a[]", "a[]") == V("a[]a[]") + V("a[a[]]")


def test_exponentials_grade_two():
    half = Fraction(1, 2)
    star = fa.exp_star("a[]", 2).coeffs
    dot = fa.exp_dot("a[]", 2).coeffs
    assert star == ForestVector.unit() + V("a[]") + V("a[]a[]") * half + V("a[a[]]") * half
    assert dot == ForestVector.unit() + V("a[]") + V("a[]a[]") * half


def test_axioms_on_mixed_colors():
    r1, r2 = fa.postlie_axiom_residuals("a[]", "b[]", "a[b[]]")
    assert r1 == 0 and r2 == 0


# -- unit rules and small identities ---------------------------------------------------


@given(forests())
def test_unit_acts_trivially(B):
    assert fa.triangle(UNIT, B) == vec(B)


@given(forests().filter(lambda f: not f.is_unit))
def test_action_on_unit_vanishes(A):
    assert fa.triangle(A, UNIT) == 0


@given(forests(max_grade=5), forests(max_grade=5))
def test_gl_unit(A, B):
    assert fa.gl_product(UNIT, A) == vec(A)
    assert fa.gl_product(A, UNIT) == vec(A)


@given(trees(), trees())
def test_graft_matches_vertex_enumeration(eta, t):
    assert fa.graft(eta, t) == fv(graft_by_vertices(eta, t))


@given(trees(max_leaves=3), trees(max_leaves=3))
def test_graft_term_count(eta, t):
    assert sum(fa.graft(eta, t)[f] for f in fa.graft(eta, t)) == t.grade


@given(forests(max_trees=3, max_grade=6), forests(max_trees=3, max_grade=6))
def test_triangle_matches_reference(A, B):
    assert fa.triangle(A, B) == fv(tri_words(A, B))


@given(forests(max_trees=3, max_grade=6), forests(max_trees=3, max_grade=6))
def test_gl_matches_recursive_reference(A, B):
    assert fa.gl_product(A, B) == fv(gl_recursive(A, B))


@given(forests(max_grade=3), forests(max_grade=3), forests(max_grade=3))
def test_gl_associative(A, B, C):
    assert fa.gl_product(fa.gl_product(A, B), C) == fa.gl_product(A, fa.gl_product(B, C))


@given(trees(max_leaves=3), trees(max_leaves=3))
def test_dot_equals_star_minus_triangle_for_trees(x, y):
    assert fa.concat(x, y) == fa.gl_product(x, y) - fa.triangle(x, y)


@given(trees(max_leaves=2), trees(max_leaves=2), trees(max_leaves=2))
def test_postlie_axioms_on_trees(x, y, z):
    r1, r2 = fa.postlie_axiom_residuals(x, y, z)
    assert r1 == 0 and r2 == 0


def test_postlie_axioms_on_brackets():
    b = fa.lie_bracket("a[]", "b[a[]]")
    r1, r2 = fa.postlie_axiom_residuals(b, "a[b[]]", "b[]")
    assert r1 == 0 and r2 == 0


def test_axiom_sweep_counts_no_failures():
    elements = [vec(t) for t in trees_up_to(("a", "b"), 2)]
    assert fa.postlie_axiom_sweep(elements) == (0, 0)


def test_axioms_reject_non_primitives():
    with pytest.raises(fa.NotPrimitiveError):
        fa.postlie_axiom_residuals("a[]a[]", "a[]", "a[]")


def test_primitivity():
    assert fa.lie_bracket("a[]", "a[a[]]").is_primitive()
    assert vec("a[a[]]").is_primitive()
    assert not vec("a[]a[]").is_primitive()
    assert not ForestVector.unit().is_primitive()


# -- coproduct ----------------------------------------------------------------------------


def test_deshuffle_of_two_trees():
    pairs = fa.deshuffle(parse_forest("a[]b[]"))
    assert {(l.code, r.code) for l, r in pairs} == {("a[]b[]", ""), ("a[]", "b[]"), ("b[]", "a[]"),
                                                     ("", "a[]b[]")}


def _tensor(d):
    return {k: Fraction(v) for k, v in d.items() if v}


@given(forests(max_trees=4))
def test_counit(F):
    co = fa.coproduct(F)
    assert co[(F, UNIT)] >= 1 and co[(UNIT, F)] >= 1


@given(forests(max_trees=4))
def test_coassociativity(F):
    left, right = {}, {}
    for (x, y), c in fa.coproduct(F).items():
        for (x1, x2), c1 in fa.coproduct(x).items():
            left[(x1, x2, y)] = left.get((x1, x2, y), 0) + c * c1
        for (y1, y2), c2 in fa.coproduct(y).items():
            right[(x, y1, y2)] = right.get((x, y1, y2), 0) + c * c2
    assert _tensor(left) == _tensor(right)


@given(forests(max_trees=2, max_grade=4), forests(max_trees=2, max_grade=4))
def test_coproduct_is_gl_morphism(A, B):
    lhs = fa.coproduct(fa.gl_product(A, B))
    rhs = {}
    for (a1, a2), ca in fa.coproduct(A).items():
        for (b1, b2), cb in fa.coproduct(B).items():
            for f1, c1 in fa.gl_product(a1, b1).items():
                for f2, c2 in fa.gl_product(a2, b2).items():
                    rhs[(f1, f2)] = rhs.get((f1, f2), 0) + ca * cb * c1 * c2
    assert _tensor(lhs) == _tensor(rhs)


@given(forests(max_trees=2), forests(max_trees=2))
def test_coproduct_is_concat_morphism(A, B):
    lhs = fa.coproduct(A + B)
    rhs = {}
    for (a1, a2), ca in fa.coproduct(A).items():
        for (b1, b2), cb in fa.coproduct(B).items():
            key = (a1 + b1, a2 + b2)
            rhs[key] = rhs.get(key, 0) + ca * cb
    assert _tensor(lhs) == _tensor(rhs)


# -- vectors, series, serialization ------------------------------------------------------------


def test_vector_arithmetic_and_format():
    v = V("a[]") * 2 - V("a[a[]]") / 3 + ForestVector.unit()
    assert fa.format_vector(v) == "1 + 2 a[] - 1/3 a[a[]]"
    assert v[parse_forest("a[a[]]")] == Fraction(-1, 3)
    assert (v - v) == 0
    assert v.max_grade == 2 and v.constant_term == 1
    assert v.grade_component(1) == V("a[]") * 2


@given(st.lists(st.tuples(forests(max_trees=2), st.fractions(max_denominator=50)), max_size=5))
def test_json_roundtrip(terms):
    v = ForestVector(terms)
    assert ForestVector.from_json(v.to_json()) == v


def test_json_layout():
    obj = (V("a[]") / 2).to_json_obj()
    assert obj == {"terms": [{"forest": "a[]", "num": "1", "den": "2"}]}


def test_pairing_and_truncation():
    s = fa.exp_star("a[]", 3)
    assert s.pairing(parse("a[a[a[]]]")) == Fraction(1, 6)
    assert s.pairing(parse("a[]a[a[]]")) == Fraction(1, 3)
    with pytest.raises(fa.TruncationError):
        s.pairing(parse_forest("a[]a[]a[]a[]"))


def test_exp_rejects_constant_term():
    with pytest.raises(ValueError):
        fa.exp_star(ForestVector.unit(), 3)
    with pytest.raises(ValueError):
        fa.exp_dot(ForestVector.unit() + V("a[]"), 3)


def test_exp_dot_has_only_words_of_leaves():
    s = fa.exp_dot("a[]", 4)
    assert all(all(t.grade == 1 for t in f) for f, _ in s.items())


def test_series_products_match_vector_products():
    a = fa.TruncatedSeries(4, V("a[]") + V("a[a[]]"))
    b = fa.TruncatedSeries(4, V("a[]"))
    assert a.star(b).coeffs == fa.gl_product(a.coeffs, b.coeffs).truncate(4)
    assert a.dot(b).coeffs == fa.concat(a.coeffs, b.coeffs).truncate(4)


# -- derivative identities in a formal time variable --------------------------------------------


@pytest.mark.parametrize("alpha", ["a[]", "a[a[]]", "a[]"])
def test_star_exponential_derivative(alpha):
    n = 5
    E = fa.time_exp(alpha, n, "star")
    lhs = fa.time_derivative(E)
    rhs = fa.time_product(E, fa.time_constant(alpha), "star", n)
    assert fa.time_series_equal(lhs, {k: v.truncate(n) for k, v in rhs.items() if k < n})


def test_dot_exponential_derivative():
    n = 5
    E = fa.time_exp("a[]", n, "dot")
    lhs = fa.time_derivative(E)
    rhs = fa.time_product(E, fa.time_constant("a[]"), "dot", n)
    assert fa.time_series_equal(lhs, {k: v for k, v in rhs.items() if k < n})


def test_star_exponential_derivative_in_grouplike_form():
    # for grouplike G = exp*(tα): G ∗ α = G · (G ⊳ α)
    n = 5
    alpha = vec("a[]") + vec("b[]")
    G = fa.time_exp(alpha, n, "star")
    lhs = fa.time_derivative(G)
    rhs = fa.time_product(G, fa.time_product(G, fa.time_constant(alpha), "triangle", n), "dot", n)
    rhs = {k: v for k, v in rhs.items() if k < n}
    assert fa.time_series_equal(lhs, rhs)


def test_dot_exponential_in_grouplike_form_differs_at_grade_three():
    # exp·(tα) in place of the grouplike factor agrees through grade 2 only
    n = 3
    D = fa.time_exp("a[]", n, "dot")
    lhs = fa.time_derivative(fa.time_exp("a[]", n, "star"))
    rhs = fa.time_product(D, fa.time_product(D, fa.time_constant("a[]"), "triangle", n), "dot", n)
    diff = lhs[2] - rhs.get(2, ForestVector())
    assert diff == (V("a[a[]]a[]") + V("a[a[a[]]]")) / 2
    for grade in (0, 1, 2):
        assert all((lhs.get(k, ForestVector()) - rhs.get(k, ForestVector())).grade_component(grade) == 0
                   for k in range(n + 1))


def test_exact_coefficients_independent_of_argument_order():
    for f in enumerate_forests(("a",), 3):
        assert fa.gl_product(f, UNIT) == vec(f)
