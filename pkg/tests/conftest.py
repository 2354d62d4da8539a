import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from postlie.trees import Forest, Tree

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def trees(colors=("a", "b"), max_leaves=4):
    return st.recursive(
        st.sampled_from(colors).map(Tree),
        lambda children: st.tuples(st.sampled_from(colors), st.lists(children, max_size=3)).map(
            lambda rc: Tree(rc[0], tuple(rc[1]))),
        max_leaves=max_leaves,
    )


def forests(colors=("a", "b"), max_trees=3, max_grade=None):
    s = st.lists(trees(colors, 3), max_size=max_trees).map(lambda ts: Forest(tuple(ts)))
    if max_grade is not None:
        s = s.filter(lambda f: f.grade <= max_grade)
    return s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
