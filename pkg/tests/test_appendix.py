import math

import numpy as np
import pytest

from src.analytics.formulas import objective_coefficients
from src.analytics.metrics import calculus_for
from src.appendix.gtable import TABLE_RATIO, g_table, g_value
from src.appendix.lemmas import (
    LEMMA4_MIN_Y,
    lemma1_check,
    lemma2_check,
    lemma3_values,
    lemma4_check,
    lemma4_ratio,
    lemma4_tail_bound,
)
from src.model.params import make_params
from src.optimizer.diagnostics import d_coefficients
from src.utils.errors import LemmaHypothesisError, ParameterError

TABLE_ROWS = {
    3: [-0.025],
    4: [-0.044, -0.007],
    5: [-0.059, -0.020, -0.008],
    6: [-0.071, -0.033, -0.020, -0.011],
    7: [-0.081, -0.046, -0.033, -0.025, -0.014],
    8: [-0.091, -0.059, -0.047, -0.039, -0.030],
}

LEMMA4_ENTRIES = {
    (3, 1): 1.570,
    (4, 1): 1.233,
    (5, 1): 1.133,
    (4, 2): 2.032,
    (5, 2): 1.416,
    (6, 2): 1.225,
    (7, 2): 1.138,
}


def test_table_values_at_threshold():
    table = g_table()
    assert table.q == TABLE_RATIO
    assert sum(len(row) for row in TABLE_ROWS.values()) == len(table.entries) == 20
    for n_files, expected in TABLE_ROWS.items():
        values = [table.get(n_files, mprime) for mprime in range(1, len(expected) + 1)]
        assert values == pytest.approx(expected, abs=1e-3)
        assert table.get(n_files, len(expected) + 1) is None
    assert table.all_negative


def test_table_frame_marks_missing_cells():
    frame = g_table().to_frame()
    assert list(frame.columns) == ["M", "m1", "m2", "m3", "m4", "m5"]
    assert frame["M"].tolist() == list(range(3, 9))
    assert math.isnan(frame.loc[0, "m2"])
    assert not frame.loc[5].isna().any()


def test_g_increases_with_q():
    for n_files in range(3, 9):
        for mprime in range(1, n_files - 1):
            values = [g_value(mprime, n_files, q) for q in np.linspace(0.05, 0.95, 40)]
            assert np.all(np.diff(values) > 0)


@pytest.mark.parametrize("n,s,m", [(5, 4, 4), (9, 7, 6), (4, 2, 8)])
def test_mil_criterion_factors_through_g(n, s, m):
    params = make_params("mds", n, s, m)
    q = params.ratio
    d = d_coefficients(params, "mil").d
    expected = [(1 - q ** (m - 1)) * g_value(k, m, q) for k in range(1, m - 1)]
    assert d == pytest.approx(expected, abs=1e-12)


def test_g_rejects_out_of_range_arguments():
    with pytest.raises(ParameterError):
        g_value(2, 3, 0.5)
    with pytest.raises(ParameterError):
        g_value(1, 4, 1.0)


def test_lemma1_holds_with_positive_margin():
    report = lemma1_check()
    assert report.verdict and report.witness is None
    assert report.max_difference < 0
    assert report.phi_start == pytest.approx(1.7412, abs=1e-3)
    assert report.phi_prime_start == pytest.approx(2.2354, abs=1e-3)
    assert report.margin_start == pytest.approx(0.0029, abs=2e-4)
    assert report.margin_min > 0
    assert report.phi_second_min > 0


def test_lemma2_margin_is_thin_but_positive():
    report = lemma2_check()
    assert report.verdict
    assert report.margin_start == pytest.approx(0.00094, abs=1e-4)
    assert report.margin_min > 0
    assert report.phi_prime_start == pytest.approx(1.7858, abs=1e-3)
    assert report.margin_prime_start == pytest.approx(0.341, abs=1e-3)


def test_lemma_hypotheses_are_enforced():
    with pytest.raises(LemmaHypothesisError):
        lemma1_check(a=0.5)
    with pytest.raises(LemmaHypothesisError):
        lemma1_check(grid=[0.5, 1.0, 2.0])
    with pytest.raises(LemmaHypothesisError):
        lemma2_check(grid=[7.0, 6.5])
    with pytest.raises(LemmaHypothesisError):
        lemma4_check(y=1.2)


def test_lemma1_larger_rate_also_decreasing():
    assert lemma1_check(a=1.5, grid=np.linspace(1, 50, 200)).verdict


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("m", range(3, 11))
def test_lemma3_values_negative_and_decreasing(n, m):
    report = lemma3_values(n, m)
    assert report.values.size == m - 2
    assert report.verdict


def test_lemma3_is_the_scaled_replicated_maxl_criterion():
    for n in range(2, 6):
        for m in range(3, 9):
            params = make_params("replicated", n, 1, m)
            d = d_coefficients(params, "maxl").d
            scaled = [d[k - 1] * n**m * (k + 1) for k in range(1, m - 1)]
            assert scaled == pytest.approx(lemma3_values(n, m).values.tolist(), rel=1e-12)
            assert np.all(d_coefficients(params, "maxl").sensitivity < 0)


def test_lemma4_ratios_exceed_one():
    report = lemma4_check()
    assert report.verdict
    assert report.y == LEMMA4_MIN_Y
    assert report.tail_bounds[(1, 6)] == pytest.approx(1.0027, abs=1e-4)
    assert report.tail_bounds[(2, 8)] == pytest.approx(1.0012, abs=1e-4)
    assert report.observation[3] == pytest.approx(1.0687, abs=1e-4)
    assert min(report.table.values()) > 1
    for key, expected in LEMMA4_ENTRIES.items():
        assert report.table[key] == pytest.approx(expected, abs=2e-3)


def test_lemma4_tail_bound_is_below_ratio():
    for n_files in range(6, 14):
        assert lemma4_ratio(n_files, 1, LEMMA4_MIN_Y) >= lemma4_tail_bound(1, 6)
    for n_files in range(8, 14):
        assert lemma4_ratio(n_files, 2, LEMMA4_MIN_Y) >= lemma4_tail_bound(2, 8)


def test_objective_coefficients_are_powers_of_q():
    params = make_params("mds", 5, 4, 4)
    assert objective_coefficients(params) == pytest.approx([0.8, 0.64, 0.512, 0.4096])
    assert calculus_for("mil").coefficients(params)[-1] == 0.0
