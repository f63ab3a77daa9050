import math
from fractions import Fraction
from itertools import product

import pytest

from src.model.params import make_distribution, make_params, point_mass
from src.protocol.audit import FULL, SUFFICIENT, compare_audit, exact_audit
from src.utils.errors import EnumerationLimitError, ParameterError, UnsupportedSettingError


def simplex_grid(n_files, steps=4):
    for combo in product(range(steps + 1), repeat=n_files):
        if sum(combo) == steps:
            yield make_distribution([c / steps for c in combo])


def test_direct_download_only():
    params = make_params("replicated", 2, 1, 2)
    stats = exact_audit(params, point_mass(2, 0))
    assert stats.expected_download == 4
    assert stats.rate == 1.0
    assert stats.mil == pytest.approx(0.5)
    assert stats.maxl == pytest.approx(math.log2(1.5))


def test_full_privacy_leaks_nothing():
    params = make_params("replicated", 3, 1, 3)
    stats = exact_audit(params, point_mass(3, 2))
    assert stats.mil == pytest.approx(0.0, abs=1e-15)
    assert stats.maxl == pytest.approx(0.0, abs=1e-15)
    assert stats.expected_download == 39
    assert stats.rate == pytest.approx(27 / 39)


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 3), (2, 4), (4, 3)])
def test_sufficient_audit_agrees_with_formulas(n, m):
    params = make_params("replicated", n, 1, m)
    for p in simplex_grid(m):
        comparison = compare_audit(params, p)
        assert comparison.agrees, (p.probs, comparison)
        assert len(comparison.stats.mil_per_server) == n


def test_full_enumeration_confirms_inner_privacy():
    params = make_params("replicated", 2, 1, 2)
    comparison = compare_audit(params, make_distribution([0.5, 0.5]), mode=FULL)
    assert comparison.agrees
    assert comparison.stats.inner_private is True
    assert comparison.stats.expected_download == Fraction(5)
    assert comparison.stats.rate == pytest.approx(0.8)
    assert exact_audit(params, make_distribution([0.5, 0.5]), SUFFICIENT).inner_private is None


def test_full_enumeration_refuses_large_instances():
    with pytest.raises(EnumerationLimitError):
        exact_audit(make_params("replicated", 2, 1, 3), point_mass(3, 2), mode=FULL)


def test_audit_rejects_bad_inputs():
    with pytest.raises(UnsupportedSettingError):
        exact_audit(make_params("mds", 5, 4, 4), point_mass(4, 0))
    with pytest.raises(ParameterError):
        exact_audit(make_params("replicated", 2, 1, 3), point_mass(2, 0))
    with pytest.raises(ParameterError):
        exact_audit(make_params("replicated", 2, 1, 2), point_mass(2, 0), mode="sampled")
