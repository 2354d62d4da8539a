"""Colored planar rooted trees and ordered forests.

Trees are immutable values identified by their canonical code, e.g.
``a[b[],a[a[]]]``.  A forest is an ordered word of trees; the empty forest is
the unit of concatenation.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from collections.abc import Iterable, Iterator, Sequence

DEFAULT_COLORS: tuple[str, ...] = ("a",)
_COLOR_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
UNIT_CODES = ("", "1", "𝟙")


class TreeSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownColorError(ValueError):
    pass


def check_colors(colors: Iterable[str]) -> tuple[str, ...]:
    colors = tuple(colors)
    if not colors:
        raise ValueError("color alphabet must be nonempty")
    for c in colors:
        if not _COLOR_RE.fullmatch(c):
            raise ValueError(f"invalid color name {c!r}")
    if len(set(colors)) != len(colors):
        raise ValueError("duplicate colors in alphabet")
    return colors


@dataclass(frozen=True, eq=False)
class Tree:
    root: str
    branches: tuple[Tree, ...] = ()
    code: str = field(init=False, repr=False)
    grade: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "code", f"{self.root}[{','.join(b.code for b in branches)}]")
        object.__setattr__(self, "grade", 1 + sum(b.grade for b in branches))
        object.__setattr__(self, "_hash", hash(("T", self.code)))

    def __eq__(self, other):
        return self is other or (isinstance(other, Tree) and self.code == other.code)

    def __hash__(self):
        return self._hash

    def __lt__(self, other: Tree):
        return (self.grade, self.code) < (other.grade, other.code)

    def __str__(self):
        return self.code

    def __repr__(self):
        return f"Tree({self.code!r})"

    def colors(self) -> set[str]:
        out = {self.root}
        for b in self.branches:
            out |= b.colors()
        return out


def leaf(color: str = "a") -> Tree:
    return Tree(color)


@dataclass(frozen=True, eq=False)
class Forest(Sequence[Tree]):
    """Ordered word of trees; ``Forest()`` is the unit."""

    trees: tuple[Tree, ...] = ()
    code: str = field(init=False, repr=False)
    grade: int = field(init=False, repr=False)
    _hash: int = field(init=False, repr=False)

    def __post_init__(self):
        trees = tuple(self.trees)
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "code", "".join(t.code for t in trees))
        object.__setattr__(self, "grade", sum(t.grade for t in trees))
        object.__setattr__(self, "_hash", hash(("F", self.code)))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Forest(self.trees[i])
        return self.trees[i]

    def __len__(self):
        return len(self.trees)

    def __iter__(self) -> Iterator[Tree]:
        return iter(self.trees)

    def __add__(self, other: Forest) -> Forest:
        return Forest(self.trees + other.trees)

    def __eq__(self, other):
        return self is other or (isinstance(other, Forest) and self.code == other.code)

    def __hash__(self):
        return self._hash

    def __lt__(self, other: Forest):
        return (self.grade, self.code) < (other.grade, other.code)

    def __str__(self):
        return self.code if self.trees else "1"

    def __repr__(self):
        return f"Forest({self.code!r})"

    @property
    def is_unit(self) -> bool:
        return not self.trees


UNIT = Forest()


def as_forest(x: Tree | Forest) -> Forest:
    return x if isinstance(x, Forest) else Forest((x,))


# -- parsing ---------------------------------------------------------------


class _Parser:
    def __init__(self, text: str, colors: Sequence[str] | None):
        self.text = text
        self.pos = 0
        self.colors = None if colors is None else set(colors)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise TreeSyntaxError(f"expected {ch!r}, got {got!r}", self.pos)
        self.pos += 1

    def color(self) -> str:
        self.skip_ws()
        m = _COLOR_RE.match(self.text, self.pos)
        if not m:
            got = self.peek() or "end of input"
            raise TreeSyntaxError(f"expected color name, got {got!r}", self.pos)
        name = m.group(0)
        if self.colors is not None and name not in self.colors:
            raise UnknownColorError(f"unknown color {name!r} at position {self.pos}")
        self.pos = m.end()
        return name

    def tree(self) -> Tree:
        root = self.color()
        self.expect("[")
        branches = []
        if self.peek() != "]":
            branches.append(self.tree())
            while self.peek() == ",":
                self.pos += 1
                branches.append(self.tree())
        self.expect("]")
        return Tree(root, tuple(branches))

    def forest(self) -> Forest:
        trees = []
        while not self.at_end():
            trees.append(self.tree())
        return Forest(tuple(trees))


def parse_forest(code: str, colors: Sequence[str] | None = None) -> Forest:
    if code.strip() in UNIT_CODES:
        return UNIT
    return _Parser(code, colors).forest()


def parse_tree(code: str, colors: Sequence[str] | None = None) -> Tree:
    forest = parse_forest(code, colors)
    if len(forest) != 1:
        raise TreeSyntaxError(f"expected exactly one tree, found {len(forest)}", 0)
    return forest[0]


def parse(code: str, colors: Sequence[str] | None = None) -> Tree | Forest:
    """A single tree parses to ``Tree``; anything else (including the unit) to ``Forest``."""
    forest = parse_forest(code, colors)
    return forest[0] if len(forest) == 1 else forest


def serialize(x: Tree | Forest) -> str:
    return x.code


# -- enumeration -----------------------------------------------------------


def enumerate_trees(colors: Sequence[str] = DEFAULT_COLORS, grade: int = 1) -> list[Tree]:
    if grade < 1:
        raise ValueError("tree grade must be >= 1")
    return list(_trees(check_colors(colors), grade))


def enumerate_forests(colors: Sequence[str] = DEFAULT_COLORS, grade: int = 0) -> list[Forest]:
    if grade < 0:
        raise ValueError("forest grade must be >= 0")
    return list(_forests(check_colors(colors), grade))


def trees_up_to(colors: Sequence[str], max_grade: int) -> list[Tree]:
    return [t for n in range(1, max_grade + 1) for t in enumerate_trees(colors, n)]


def forests_up_to(colors: Sequence[str], max_grade: int) -> list[Forest]:
    return [f for n in range(max_grade + 1) for f in enumerate_forests(colors, n)]


@lru_cache(maxsize=None)
def _trees(colors: tuple[str, ...], grade: int) -> tuple[Tree, ...]:
    out = [Tree(c, f.trees) for c in colors for f in _forests(colors, grade - 1)]
    return tuple(sorted(out, key=lambda t: t.code))


@lru_cache(maxsize=None)
def _forests(colors: tuple[str, ...], grade: int) -> tuple[Forest, ...]:
    if grade == 0:
        return (UNIT,)
    out = [
        Forest((t,) + rest.trees)
        for k in range(1, grade + 1)
        for t in _trees(colors, k)
        for rest in _forests(colors, grade - k)
    ]
    return tuple(sorted(out, key=lambda f: f.code))
