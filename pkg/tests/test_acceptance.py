"""Acceptance gate: every exit criterion at its pinned tolerance.

Each criterion runs through its suite at full corpus size and prints one
PASS/FAIL line; the assertions require zero failures and completion within
the pinned runtime budget.
"""

import pytest

from randlab.suites import (
    suite_density,
    suite_discrete_uniform_metric,
    suite_group_laws,
    suite_lower_semicontinuity,
    suite_metric_axioms,
    suite_metric_synthesis,
    suite_periodic_approximation,
    suite_power_invariants,
    suite_sandwich_bounds,
    suite_synthesis,
)

CRITERIA = [
    ("criterion-01", suite_metric_axioms, dict(seed=1, triples=500)),
    ("criterion-02", suite_lower_semicontinuity, dict(seed=2, sequences=100)),
    ("criterion-03", suite_discrete_uniform_metric, dict(seed=3, pairs=200)),
    ("criterion-04", suite_sandwich_bounds, dict(seed=4, pairs=200)),
    ("criterion-05", suite_periodic_approximation, dict(seed=5)),
    ("criterion-06", suite_synthesis, dict(seed=6, tasks=50)),
    ("criterion-07", suite_metric_synthesis, dict(seed=7, tasks=20)),
    ("criterion-08", suite_density, dict(seed=8, targets=50)),
    ("criterion-09", suite_power_invariants, dict(seed=9, automorphisms=100)),
    ("criterion-10", suite_group_laws, dict(seed=10, tuples=300)),
]


@pytest.mark.parametrize("name,suite,kwargs", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_acceptance(name, suite, kwargs):
    result = suite(**kwargs)
    print(f"{name}: {result.line()}")
    assert result.failures == 0, f"{name}: {result.failures} failed checks"
    assert result.passed
    assert result.elapsed < result.budget_seconds, (
        f"{name}: {result.elapsed:.2f}s over the {result.budget_seconds:.0f}s budget"
    )
