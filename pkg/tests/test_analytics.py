import math

import numpy as np
import pytest

from src.analytics.formulas import (
    leakage_cap,
    maxl_leakage,
    mil_leakage,
    retrieval_rate,
    theorem_distribution,
    theorem_rate,
    tradeoff_curve,
)
from src.model.params import make_distribution, make_params, point_mass


def coded(n=5, s=4, m=4):
    return make_params("mds", n, s, m)


def replicated(n, m):
    return make_params("replicated", n, 1, m)


def test_example_one_theorem_point():
    params = coded()
    p = theorem_distribution(params, "mil", 0.8)
    assert p.probs.tolist() == pytest.approx([0.5, 0, 0, 0.5])
    assert theorem_rate(params, "mil", 0.8) == pytest.approx(0.506, abs=1e-3)
    assert retrieval_rate(params, p) == pytest.approx(0.5061, abs=1e-4)
    assert mil_leakage(params, p) == pytest.approx(0.8, abs=1e-12)


def test_example_two_theorem_point():
    params = coded()
    p = theorem_distribution(params, "maxl", 0.8)
    assert p[0] == pytest.approx(0.30879, abs=1e-5)
    assert p[3] == pytest.approx(0.69121, abs=1e-5)
    assert theorem_rate(params, "maxl", 0.8) == pytest.approx(0.425, abs=1e-3)
    assert maxl_leakage(params, make_distribution([0.30879, 0, 0, 0.69121])) == pytest.approx(0.8, abs=1e-4)


def test_example_distributions_evaluated_by_formula():
    params = coded()
    q1 = make_distribution([0.6635, 0, 0.2795, 0.057])
    assert mil_leakage(params, q1) == pytest.approx(1.1776, abs=1e-3)
    assert retrieval_rate(params, q1) == pytest.approx(0.6606, abs=1e-3)
    q2 = make_distribution([0.552, 0.379, 0, 0.069])
    assert retrieval_rate(params, q2) == pytest.approx(0.695, abs=1e-3)
    assert maxl_leakage(params, q2) == pytest.approx(math.log2(2.7038), abs=1e-3)


def test_direct_download_has_unit_rate_and_full_set_leaks_nothing():
    params = coded()
    assert retrieval_rate(params, point_mass(4, 0)) == 1.0
    assert mil_leakage(params, point_mass(4, 3)) == 0.0
    assert maxl_leakage(params, point_mass(4, 3)) == 0.0


def test_two_by_two_capacity_and_caps():
    params = replicated(2, 2)
    assert retrieval_rate(params, point_mass(2, 1)) == pytest.approx(2 / 3)
    assert maxl_leakage(params, point_mass(2, 0)) == pytest.approx(math.log2(1.5))
    assert leakage_cap(params, "maxl") == pytest.approx(0.58496, abs=1e-5)
    assert leakage_cap(params, "mil") == pytest.approx(0.5)
    assert leakage_cap(coded(), "mil") == pytest.approx(1.6)


@pytest.mark.parametrize("metric", ["mil", "maxl"])
@pytest.mark.parametrize("n,s,m", [(2, 1, 2), (4, 1, 3), (5, 4, 4), (6, 3, 7)])
def test_theorem_rate_consistency_and_leakage(metric, n, s, m):
    params = make_params("mds" if s > 1 else "replicated", n, s, m)
    cap = leakage_cap(params, metric)
    previous = 0.0
    for rho in np.linspace(0.0, cap, 25):
        p = theorem_distribution(params, metric, rho)
        rate = theorem_rate(params, metric, rho)
        assert rate == pytest.approx(retrieval_rate(params, p), abs=1e-12)
        achieved = mil_leakage(params, p) if metric == "mil" else maxl_leakage(params, p)
        assert achieved == pytest.approx(min(rho, cap), abs=1e-12)
        assert rate >= previous - 1e-15
        previous = rate
    assert theorem_rate(params, metric, cap) == pytest.approx(1.0)
    assert theorem_rate(params, metric, cap + 1) == 1.0


def test_zero_budget_gives_full_privacy():
    params = coded()
    assert theorem_distribution(params, "mil", 0.0) == point_mass(4, 3)


def test_unit_strength_matches_replicated_formulas():
    rep = replicated(3, 4)
    col = make_params("tcolluding", 3, 1, 4)
    p = make_distribution([0.2, 0.3, 0.1, 0.4])
    assert retrieval_rate(rep, p) == retrieval_rate(col, p)
    assert mil_leakage(rep, p) == mil_leakage(col, p)
    assert maxl_leakage(rep, p) == maxl_leakage(col, p)
    assert mil_leakage(rep, p) == pytest.approx(0.2 * math.log2(4) / 3 + 0.3 * 1 + 0.1 * math.log2(4 / 3))


def test_leakage_bounded_by_cap_for_random_distributions():
    rng = np.random.default_rng(3)
    params = coded(6, 4, 5)
    for _ in range(200):
        p = make_distribution(rng.dirichlet(np.ones(5)))
        assert 0 <= mil_leakage(params, p) <= leakage_cap(params, "mil") + 1e-12
        assert 0 <= maxl_leakage(params, p) <= leakage_cap(params, "maxl") + 1e-12


def test_tradeoff_curve_records_achieved_leakage():
    points = tradeoff_curve(coded(), "mil", [0.0, 0.8, 2.0])
    assert [pt.achieved_leakage for pt in points] == pytest.approx([0.0, 0.8, 1.6])
    assert points[-1].rate == 1.0
    assert points[1].distribution.support == (0, 3)
