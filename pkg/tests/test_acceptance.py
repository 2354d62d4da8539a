"""Acceptance criteria 1–12, each at its stated tolerance.

All suites run once per session; criterion 12 reruns them and compares payloads.
A summary line per criterion is printed in the pytest terminal summary.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from postlie.verify import SUITES, SuiteConfig, criterion_12

pytestmark = pytest.mark.slow

CONFIG = SuiteConfig(seed=0)


@pytest.fixture(scope="module")
def results():
    return {}


def _get(results, k):
    if k not in results:
        results[k] = SUITES[k](CONFIG)
    return results[k]


def _report(r):
    status = "PASS" if r["passed"] else "FAIL"
    line = f"criterion {r['criterion']:>2} [{status}] {r['name']} ({r['timing']['seconds']:.2f}s)"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line)


@pytest.mark.parametrize("k", sorted(SUITES))
def test_criterion(results, k):
    r = _get(results, k)
    _report(r)
    assert r["passed"], {key: v for key, v in r.items() if key not in ("lhs", "rhs")}


def test_criterion_12_determinism(results):
    baseline = {k: _get(results, k) for k in SUITES}
    r = criterion_12(CONFIG, baseline=baseline)
    _report(r)
    assert r["passed"], r["mismatched"]
