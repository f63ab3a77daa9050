"""Closed-form rate and leakage of the weak Sun-Jafar-type schemes.

All three settings share one parametric family in q = s/N: replicated storage
(s = 1), (N, K)-MDS coded storage (s = K) and T-collusion (s = T, leakage
averaged or maximised over T-subsets of servers). Leakage is in bits.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from src.analytics.metrics import calculus_for
from src.model.params import LeakageBudget, Metric, MixingDistribution, SchemeParams

logger = logging.getLogger(__name__)

LEAKAGE_SLACK = 1e-9


def objective_coefficients(params: SchemeParams) -> np.ndarray:
    """c_m' = q^(m'+1), the per-branch contribution to E[q^(M'+1)]."""
    return params.ratio ** np.arange(1, params.n_files + 1, dtype=float)


def _dot(p: MixingDistribution, coefficients: np.ndarray) -> float:
    return math.fsum(float(x) for x in p.probs * coefficients)


def retrieval_rate(params: SchemeParams, p: MixingDistribution) -> float:
    q = params.ratio
    expected = _dot(p, objective_coefficients(params))
    return (1 - q) / (1 - expected)


def mil_leakage(params: SchemeParams, p: MixingDistribution) -> float:
    calculus = calculus_for(Metric.MIL)
    return calculus.leakage(_dot(p, calculus.coefficients(params)))


def maxl_leakage(params: SchemeParams, p: MixingDistribution) -> float:
    calculus = calculus_for(Metric.MAXL)
    return calculus.leakage(_dot(p, calculus.coefficients(params)))


def leakage(params: SchemeParams, metric: Metric | str, p: MixingDistribution) -> float:
    if Metric(metric) is Metric.MIL:
        return mil_leakage(params, p)
    return maxl_leakage(params, p)


def leakage_cap(params: SchemeParams, metric: Metric | str) -> float:
    return calculus_for(metric).cap(params)


def theorem_distribution(params: SchemeParams, metric: Metric | str, rho: float) -> MixingDistribution:
    """Two-point distribution on {0, M-1} prescribed by the achievability theorems."""
    LeakageBudget(Metric(metric), rho)
    p0 = min(1.0, calculus_for(metric).mixing_weight(params, rho))
    probs = np.zeros(params.n_files)
    probs[0] = p0
    probs[-1] = 1.0 - p0
    return MixingDistribution(probs)


def theorem_rate(params: SchemeParams, metric: Metric | str, rho: float) -> float:
    LeakageBudget(Metric(metric), rho)
    x = calculus_for(metric).mixing_weight(params, rho)
    q = params.ratio
    geometric = math.fsum(q**k for k in range(1, params.n_files))
    return 1.0 / (1.0 + max(0.0, 1.0 - x) * geometric)


@dataclass(frozen=True)
class TradeoffPoint:
    budget: LeakageBudget
    achieved_leakage: float
    rate: float
    distribution: MixingDistribution

    def __post_init__(self) -> None:
        if self.achieved_leakage > self.budget.rho + LEAKAGE_SLACK:
            raise ValueError(f"Leakage {self.achieved_leakage} exceeds budget {self.budget.rho}")
        if not 0 < self.rate <= 1 + 1e-12:
            raise ValueError(f"Rate {self.rate} outside (0, 1]")


def tradeoff_point(params: SchemeParams, metric: Metric | str, rho: float) -> TradeoffPoint:
    distribution = theorem_distribution(params, metric, rho)
    return TradeoffPoint(
        budget=LeakageBudget(Metric(metric), rho),
        achieved_leakage=leakage(params, metric, distribution),
        rate=retrieval_rate(params, distribution),
        distribution=distribution,
    )


def tradeoff_curve(params: SchemeParams, metric: Metric | str, rhos: Iterable[float]) -> List[TradeoffPoint]:
    points = [tradeoff_point(params, metric, float(rho)) for rho in rhos]
    logger.debug("Computed %d trade-off points for %s", len(points), params)
    return points
