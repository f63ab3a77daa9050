from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from src.analytics.metrics import calculus_for
from src.model.params import Metric, SchemeParams
from src.optimizer.lp import lp_coefficients

logger = logging.getLogger(__name__)

# Published storage-rate thresholds below which the two-point trade-off is
# claimed optimal for coded and colluding storage.
MIL_THRESHOLD = 0.7828
MAXL_THRESHOLD = 0.68

THRESHOLDS = {Metric.MIL: MIL_THRESHOLD, Metric.MAXL: MAXL_THRESHOLD}


@dataclass(frozen=True)
class DiagnosticsReport:
    """Interior coefficients over m' = 1 .. M-2.

    ``d`` is the published criterion (c_m' - c_(M-1)) - (b_m'/b_0)(c_0 - c_(M-1)).
    ``sensitivity`` is the exact rate of change of the objective when unit mass
    moves to m' along the tight budget. The two agree for MIL, where
    b_(M-1) = 0.
    """

    metric: Metric
    d: np.ndarray
    sensitivity: np.ndarray
    within_threshold: bool

    @property
    def positive_indices(self) -> Tuple[int, ...]:
        return tuple(int(i) + 1 for i in np.flatnonzero(self.d > 0))

    @property
    def improving_indices(self) -> Tuple[int, ...]:
        return tuple(int(i) + 1 for i in np.flatnonzero(self.sensitivity > 0))


def threshold_ok(params: SchemeParams, metric: Metric | str) -> bool:
    if params.strength == 1:
        return True
    return params.ratio <= THRESHOLDS[Metric(metric)]


def _criterion(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    last = c.size - 1
    interior = slice(1, last)
    return (c[interior] - c[last]) - (b[interior] / b[0]) * (c[0] - c[last])


def _sensitivity(c: np.ndarray, b: np.ndarray) -> np.ndarray:
    last = c.size - 1
    interior = slice(1, last)
    slope = (b[interior] - b[last]) / (b[0] - b[last])
    return (c[interior] - c[last]) - slope * (c[0] - c[last])


def d_coefficients(params: SchemeParams, metric: Metric | str) -> DiagnosticsReport:
    coeffs = lp_coefficients(params, metric)
    return DiagnosticsReport(
        metric=coeffs.metric,
        d=_criterion(coeffs.objective, coeffs.constraint),
        sensitivity=_sensitivity(coeffs.objective, coeffs.constraint),
        within_threshold=threshold_ok(params, metric),
    )


def sensitivity_coefficients(params: SchemeParams, metric: Metric | str) -> np.ndarray:
    coeffs = lp_coefficients(params, metric)
    return _sensitivity(coeffs.objective, coeffs.constraint)


def tight_objective(params: SchemeParams, metric: Metric | str, rho: float) -> float:
    """Objective of the two-point distribution on {0, M-1} meeting the budget with equality."""
    coeffs = lp_coefficients(params, metric)
    c, b = coeffs.objective, coeffs.constraint
    beta = coeffs.budget(rho)
    return float(c[-1] + (beta - b[-1]) / (b[0] - b[-1]) * (c[0] - c[-1]))


def _sensitivity_at(metric: Metric, n_files: int, mprime: int, ratio: float) -> float:
    c = ratio ** np.arange(1, n_files + 1, dtype=float)
    b = calculus_for(metric).coefficients_at(n_files, ratio)
    return float(_sensitivity(c, b)[mprime - 1])


def critical_ratio(metric: Metric | str, max_files: int = 8, grid_points: int = 4000) -> float:
    """Smallest q at which some interior sensitivity with 3 <= M <= max_files turns positive.

    Returns 1.0 when no sensitivity changes sign inside (0, 1).
    """
    metric = Metric(metric)
    grid = np.linspace(0.0, 1.0, grid_points + 1)[1:-1]
    best = 1.0
    for n_files in range(3, max_files + 1):
        for mprime in range(1, n_files - 1):
            values = np.array([_sensitivity_at(metric, n_files, mprime, q) for q in grid])
            positive = np.flatnonzero(values > 0)
            if positive.size == 0 or positive[0] == 0:
                continue
            hi = positive[0]
            root = brentq(
                lambda q: _sensitivity_at(metric, n_files, mprime, q),
                grid[hi - 1],
                grid[hi],
                xtol=1e-14,
            )
            logger.debug("Sign change for M=%d m'=%d at q=%.10f", n_files, mprime, root)
            best = min(best, root)
    return best
