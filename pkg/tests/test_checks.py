import pytest

from engelf.checks import LEVELS, run_checks
from engelf.family import builtin_families


@pytest.mark.parametrize("spec", builtin_families(), ids=lambda s: s.name)
def test_quick_suite_passes(spec):
    results = run_checks(spec, "quick", seed=3)
    failed = [str(r) for r in results if not r.passed]
    assert not failed, "\n".join(failed)
    names = {r.name for r in results}
    assert {"validate", "roundtrip", "functional_equation", "integral"} <= names
    assert ("constancy" in names) == spec.has_zero


def test_levels_are_ordered():
    q, f = LEVELS["quick"], LEVELS["full"]
    assert q.samples < f.samples and q.integral_slack > f.integral_slack
