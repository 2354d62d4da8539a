import pytest
from hypothesis import given

from conftest import forests, trees
from oracles import count_trees
from postlie.trees import (
    UNIT,
    Forest,
    Tree,
    TreeSyntaxError,
    UnknownColorError,
    check_colors,
    enumerate_forests,
    enumerate_trees,
    forests_up_to,
    leaf,
    parse,
    parse_forest,
    parse_tree,
    serialize,
    trees_up_to,
)


def test_single_color_counts_are_catalan_up_to_grade_eight():
    for n in range(1, 9):
        assert len(enumerate_trees(("a",), n)) == count_trees(n)


def test_two_color_counts():
    for n in range(1, 6):
        assert len(enumerate_trees(("a", "b"), n)) == count_trees(n, 2)


def test_forest_counts_single_color():
    # forests of grade n are trees of grade n + 1 with the root removed
    for n in range(0, 8):
        assert len(enumerate_forests(("a",), n)) == count_trees(n + 1)


def test_grade_three_and_four_one_color():
    assert {t.code for t in enumerate_trees(("a",), 3)} == {"a[a[a[]]]", "a[a[],a[]]"}
    assert len(enumerate_trees(("a",), 4)) == 5


def test_grade_two_forests():
    assert {f.code for f in enumerate_forests(("a",), 2)} == {"a[a[]]", "a[]a[]"}


def test_enumeration_is_sorted_unique_and_graded():
    for n in range(1, 6):
        ts = enumerate_trees(("a", "b"), n)
        codes = [t.code for t in ts]
        assert codes == sorted(codes)
        assert len(set(codes)) == len(codes)
        assert all(t.grade == n for t in ts)


def test_up_to_helpers():
    assert len(trees_up_to(("a",), 4)) == 1 + 1 + 2 + 5
    assert forests_up_to(("a",), 2)[0] == UNIT


def test_unit_forest():
    assert enumerate_forests(("a",), 0) == [UNIT]
    assert str(UNIT) == "1"
    for code in ("", "1", "𝟙", "  "):
        assert parse_forest(code) == UNIT


@given(trees())
def test_tree_roundtrip(t):
    assert parse_tree(serialize(t)) == t
    assert parse(t.code) == t


@given(forests())
def test_forest_roundtrip(f):
    assert parse_forest(f.code if f.code else "1") == f


def test_whitespace_is_ignored():
    assert parse_tree(" a [ b [ ] , a[ a[] ] ] ").code == "a[b[],a[a[]]]"


def test_parse_returns_forest_for_words():
    x = parse("a[]b[]")
    assert isinstance(x, Forest) and len(x) == 2


@pytest.mark.parametrize("bad,pos", [("a[", 2), ("a]", 1), ("[]", 0), ("a[b[],]", 6), ("a[]]", 3)])
def test_syntax_errors_report_position(bad, pos):
    with pytest.raises(TreeSyntaxError) as err:
        parse_forest(bad)
    assert err.value.position == pos


def test_unknown_color():
    with pytest.raises(UnknownColorError):
        parse_tree("a[c[]]", colors=("a", "b"))


def test_parse_tree_rejects_forests():
    with pytest.raises(TreeSyntaxError):
        parse_tree("a[]a[]")


@pytest.mark.parametrize("colors", [(), ("a", "a"), ("1x",), ("a b",)])
def test_bad_alphabets(colors):
    with pytest.raises(ValueError):
        check_colors(colors)


def test_grade_and_order():
    t = parse_tree("a[b[],a[a[]]]")
    assert t.grade == 4
    assert leaf("a") < t
    assert parse_forest("a[]a[]").grade == 2
    assert t.colors() == {"a", "b"}


def test_value_semantics():
    t1 = Tree("a", (Tree("b"),))
    t2 = parse_tree("a[b[]]")
    assert t1 == t2 and hash(t1) == hash(t2)
    assert Forest((t1,)) != t1
    assert Forest((t1,)) + Forest((t2,)) == parse_forest("a[b[]]a[b[]]")


def test_invalid_grades():
    with pytest.raises(ValueError):
        enumerate_trees(("a",), 0)
    with pytest.raises(ValueError):
        enumerate_forests(("a",), -1)
