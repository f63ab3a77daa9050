import dataclasses

import numpy as np
import pytest

from src.analytics.formulas import leakage_cap, objective_coefficients
from src.analytics.metrics import calculus_for
from src.model.params import make_params
from src.optimizer.diagnostics import (
    MAXL_THRESHOLD,
    MIL_THRESHOLD,
    critical_ratio,
    d_coefficients,
    sensitivity_coefficients,
    threshold_ok,
    tight_objective,
)
from src.optimizer.lp import solve_optimal
from src.optimizer.sweep import FAIL, PASS, REFUTED, classify, compare_with_theorem, sweep_theorems
from src.utils.config import DEFAULT_SWEEPS, TheoremSweep, load_sweeps


def coded_grid(threshold):
    for n in range(3, 11):
        for s in range(2, n):
            if s / n > threshold:
                continue
            for m in range(3, 9):
                yield make_params("mds", n, s, m)


def test_example_criterion_values():
    params = make_params("mds", 5, 4, 4)
    mil = d_coefficients(params, "mil")
    assert mil.d == pytest.approx([-0.0136, 0.0011], abs=1e-4)
    assert mil.positive_indices == (2,)
    assert mil.sensitivity == pytest.approx(mil.d, abs=1e-15)
    assert not mil.within_threshold
    maxl = d_coefficients(params, "maxl")
    assert maxl.d == pytest.approx([0.00075, -0.0507], abs=1e-4)
    assert maxl.positive_indices == (1,)


def test_threshold_flag():
    assert threshold_ok(make_params("replicated", 2, 1, 5), "maxl")
    assert threshold_ok(make_params("mds", 5, 3, 4), "maxl")
    assert not threshold_ok(make_params("mds", 4, 3, 4), "maxl")
    assert threshold_ok(make_params("tcolluding", 9, 7, 4), "mil")


@pytest.mark.parametrize("metric", ["mil", "maxl"])
@pytest.mark.parametrize("setting,n,s,m", [("replicated", 3, 1, 5), ("mds", 5, 4, 4), ("mds", 3, 2, 6)])
def test_tight_objective_decomposes_over_interior_mass(metric, setting, n, s, m):
    params = make_params(setting, n, s, m)
    c = objective_coefficients(params)
    b = calculus_for(metric).coefficients(params)
    rho = 0.4 * leakage_cap(params, metric)
    beta = calculus_for(metric).budget(rho)
    d_tilde = sensitivity_coefficients(params, metric)
    rng = np.random.default_rng(5)
    for _ in range(20):
        interior = rng.uniform(0, 0.05, size=m - 2)
        p0 = (beta - b[-1] - np.dot(interior, b[1:-1] - b[-1])) / (b[0] - b[-1])
        probs = np.concatenate([[p0], interior, [1 - p0 - interior.sum()]])
        assert np.dot(probs, b) == pytest.approx(beta, abs=1e-12)
        expected = tight_objective(params, metric, rho) + np.dot(interior, d_tilde)
        assert np.dot(probs, c) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "metric,setting,n,s,m",
    [
        ("mil", "replicated", 4, 1, 6),
        ("maxl", "replicated", 2, 1, 7),
        ("mil", "mds", 5, 4, 4),
        ("mil", "mds", 5, 3, 5),
        ("maxl", "mds", 3, 2, 4),
        ("maxl", "tcolluding", 5, 3, 4),
    ],
)
def test_sign_of_sensitivity_decides_improvement(metric, setting, n, s, m):
    params = make_params(setting, n, s, m)
    improving = bool(d_coefficients(params, metric).improving_indices)
    for rho in np.linspace(0.0, leakage_cap(params, metric), 12)[1:-1]:
        comparison = compare_with_theorem(params, metric, rho)
        assert (comparison.gap > 1e-12) == improving
        assert comparison.gap <= comparison.gap_bound + 1e-12


def test_critical_ratios():
    roots = np.roots([9, -1, -1, -1])
    expected = float(next(r.real for r in roots if abs(r.imag) < 1e-12 and 0 < r.real < 1))
    assert critical_ratio("maxl") == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(0.6022, abs=1e-4)
    assert MAXL_THRESHOLD > critical_ratio("maxl")
    assert MIL_THRESHOLD < critical_ratio("mil") < 0.8


def test_mil_criterion_non_positive_below_threshold():
    for params in coded_grid(MIL_THRESHOLD):
        report = d_coefficients(params, "mil")
        assert report.within_threshold
        assert not report.positive_indices


def test_published_maxl_criterion_non_positive_below_threshold():
    for params in coded_grid(MAXL_THRESHOLD):
        report = d_coefficients(params, "maxl")
        assert report.within_threshold
        assert not report.positive_indices


def test_coded_maxl_is_improvable_inside_the_threshold():
    params = make_params("mds", 3, 2, 4)
    report = d_coefficients(params, "maxl")
    assert report.within_threshold
    assert report.sensitivity[1] == pytest.approx(0.0206, abs=1e-4)
    assert report.improving_indices == (1, 2)
    assert not report.positive_indices


def test_classify_statuses():
    params = make_params("mds", 5, 4, 4)
    refuted = compare_with_theorem(params, "mil", 0.8)
    assert classify(refuted) == REFUTED
    assert solve_optimal(params, "mil", 0.8).rate == pytest.approx(refuted.lp_rate)

    exact = compare_with_theorem(make_params("replicated", 3, 1, 4), "mil", 0.5)
    assert classify(exact) == PASS

    assert classify(dataclasses.replace(exact, gap=-1e-6)) == FAIL
    assert classify(dataclasses.replace(refuted, gap=refuted.gap_bound + 1e-6)) == FAIL
    quiet = d_coefficients(make_params("replicated", 3, 1, 4), "mil")
    assert classify(dataclasses.replace(refuted, diagnostics=quiet)) == FAIL


def test_sweep_reports_no_failures():
    sweeps = [
        TheoremSweep(name="rep", setting="replicated", metric="maxl", servers=(2, 3), files=(3, 5), rho_points=6),
        TheoremSweep(name="mds", setting="mds", metric="maxl", servers=(3, 4), files=(3, 5), rho_points=6, max_ratio=0.68),
    ]
    checks = sweep_theorems(sweeps)
    statuses = {c.sweep: set() for c in checks}
    for check in checks:
        statuses[check.sweep].add(check.status)
    assert statuses["rep"] == {PASS}
    assert FAIL not in statuses["mds"]
    assert REFUTED in statuses["mds"]
    assert [c.lp_rate for c in sweep_theorems(sweeps, threads=3)] == [c.lp_rate for c in checks]


def test_shipped_sweeps_hold_below_the_thresholds():
    checks = sweep_theorems(load_sweeps(DEFAULT_SWEEPS))
    by_sweep = {}
    for check in checks:
        by_sweep.setdefault(check.sweep, []).append(check)

    assert all(check.status != FAIL for check in checks)
    for name in ("replicated-mil", "mds-mil", "tcolluding-mil", "replicated-maxl"):
        assert {check.status for check in by_sweep[name]} == {PASS}
    for name in ("mds-maxl", "tcolluding-maxl"):
        refuted = [check for check in by_sweep[name] if check.status == REFUTED]
        assert refuted
        assert all(check.strength / check.n_servers > 0.6022 for check in refuted)
    for check in checks:
        if check.status == PASS:
            assert abs(check.gap) <= 1e-9
            assert set(check.support) <= {0, check.n_files - 1}


def test_maxl_optimum_beats_two_point_beyond_critical_ratio():
    params = make_params("mds", 5, 4, 4)
    comparison = compare_with_theorem(params, "maxl", 0.8)
    assert comparison.theorem_rate == pytest.approx(0.42567, abs=1e-5)
    assert comparison.lp_rate == pytest.approx(0.48815, abs=1e-5)
    assert comparison.lp_support == (1, 2)
    assert 0 < comparison.gap <= comparison.gap_bound
    assert classify(comparison) == REFUTED


def test_mil_example_gap_matches_the_criterion():
    comparison = compare_with_theorem(make_params("mds", 5, 4, 4), "mil", 0.8)
    assert 0.0005 <= comparison.gap <= 0.002
    assert comparison.gap <= comparison.gap_bound
