"""Exact rate maximisation over mixing distributions.

Maximising R = (1-q)/(1-T) is maximising T = sum_m' p(m') c_m' subject to a
single leakage inequality sum_m' p(m') b_m' <= beta on the probability
simplex. Every vertex of that polytope has at most two nonzero coordinates, so
the optimum is found by enumerating feasible singletons and tight pairs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Tuple

import numpy as np

from src.analytics.formulas import objective_coefficients
from src.analytics.metrics import calculus_for
from src.model.params import LeakageBudget, Metric, MixingDistribution, SchemeParams

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-12
TIE_TOLERANCE = 1e-15


@dataclass(frozen=True)
class LpCoefficients:
    metric: Metric
    objective: np.ndarray
    constraint: np.ndarray

    def budget(self, rho: float) -> float:
        return calculus_for(self.metric).budget(rho)

    def constraint_value(self, probs: np.ndarray) -> float:
        return float(np.dot(probs, self.constraint))


@dataclass(frozen=True)
class LpSolution:
    distribution: MixingDistribution
    objective_value: float
    rate: float
    support: Tuple[int, ...]
    constraint_tight: bool


@dataclass(frozen=True)
class _Vertex:
    support: Tuple[int, ...]
    probs: np.ndarray
    value: float


def lp_coefficients(params: SchemeParams, metric: Metric | str) -> LpCoefficients:
    metric = Metric(metric)
    return LpCoefficients(
        metric=metric,
        objective=objective_coefficients(params),
        constraint=calculus_for(metric).coefficients(params),
    )


def _vertices(coeffs: LpCoefficients, beta: float) -> Iterator[_Vertex]:
    c, b = coeffs.objective, coeffs.constraint
    n_files = c.size
    for i in range(n_files):
        if b[i] <= beta + FEASIBILITY_TOLERANCE:
            probs = np.zeros(n_files)
            probs[i] = 1.0
            yield _Vertex((i,), probs, float(c[i]))
    for i, j in combinations(range(n_files), 2):
        if b[i] == b[j]:
            continue
        weight = (beta - b[j]) / (b[i] - b[j])
        if not 0.0 < weight < 1.0:
            continue
        probs = np.zeros(n_files)
        probs[i] = weight
        probs[j] = 1.0 - weight
        yield _Vertex((i, j), probs, weight * c[i] + (1.0 - weight) * c[j])


def solve_optimal(params: SchemeParams, metric: Metric | str, rho: float) -> LpSolution:
    budget = LeakageBudget(Metric(metric), rho)
    coeffs = lp_coefficients(params, budget.metric)
    beta = coeffs.budget(budget.rho)
    boundary = {0, params.n_files - 1}

    best: _Vertex | None = None
    for vertex in _vertices(coeffs, beta):
        logger.debug("Vertex %s value %.17g", vertex.support, vertex.value)
        if best is None or vertex.value > best.value + TIE_TOLERANCE:
            best = vertex
        elif abs(vertex.value - best.value) <= TIE_TOLERANCE:
            if set(vertex.support) <= boundary and not set(best.support) <= boundary:
                best = vertex
    # the point mass at M-1 has the smallest coefficient and is always feasible
    assert best is not None

    used = coeffs.constraint_value(best.probs)
    q = params.ratio
    return LpSolution(
        distribution=MixingDistribution(best.probs),
        objective_value=best.value,
        rate=(1 - q) / (1 - best.value),
        support=best.support,
        constraint_tight=abs(used - beta) <= FEASIBILITY_TOLERANCE * max(1.0, beta),
    )
