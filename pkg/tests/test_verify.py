import pytest

from friedrichs.model import scalar_example, two_by_two_example
from friedrichs.verify import DEFAULT_TOLERANCES, first_sheet_points, run_suite


@pytest.mark.parametrize("spec", [scalar_example(0.5), scalar_example(0.05), two_by_two_example(0.5)],
                         ids=["scalar", "scalar_weak", "two_by_two"])
def test_suite_passes(spec):
    results = run_suite(spec)
    failed = [(r.name, r.value, r.tol) for r in results if not r.passed]
    assert not failed
    names = {r.name for r in results}
    assert {"phi_oracle", "unitarity", "order2", "dirac", "semigroup_eigen", "trivial_smatrix"} <= names


def test_suite_reports_failures():
    tight = {key: 0.0 for key in DEFAULT_TOLERANCES}
    results = run_suite(scalar_example(0.5), tight, include_oracle=False)
    by_name = {r.name: r for r in results}
    assert not by_name["phi_oracle"].passed
    # margin checks flip with the tolerance
    assert by_name["negative_axis"].passed


def test_slack_scales_tolerances():
    results = run_suite(scalar_example(0.5), slack=10.0, include_oracle=False)
    by_name = {r.name: r for r in results}
    assert by_name["unitarity"].tol == pytest.approx(10 * DEFAULT_TOLERANCES["unitarity"])
    assert by_name["negative_axis"].tol == pytest.approx(DEFAULT_TOLERANCES["negative_axis"] / 10)


def test_first_sheet_points_avoid_cut_and_poles():
    spec = two_by_two_example(0.5)
    for z in first_sheet_points(spec, 200):
        assert (abs(z.imag) if z.real >= 0 else abs(z)) >= 0.05
        assert min(abs(z - p) for p in spec.pole_set) >= 0.05
