"""Numerical checks of the monotonicity and sign lemmas behind the optimality thresholds.

Each check evaluates the lemma's function on a dense grid and reports the
discrete differences, together with the auxiliary quantities the proofs rely
on. The auxiliary functions are reported in two forms: as printed in the proofs
(``phi``) and as the exact sign condition for f' < 0 (``margin``).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import LemmaHypothesisError, ParameterError

logger = logging.getLogger(__name__)

# smallest exponent for replicated storage: ln 2 = 0.693 > 0.627
LEMMA1_MIN_RATE = 0.627
# ln(1 / 0.7828) = 0.2448
LEMMA2_MIN_RATE = 0.2448
LEMMA2_OFFSET = 0.005
# 1 / 0.68
LEMMA4_MIN_Y = 25 / 17


@dataclass(frozen=True)
class MonotonicityReport:
    function_id: str
    rate: float
    grid: np.ndarray
    min_difference: float
    max_difference: float
    verdict: bool
    witness: Optional[float]
    phi_start: float
    phi_prime_start: float
    phi_second_min: float
    margin_start: float
    margin_min: float
    margin_prime_start: float


@dataclass(frozen=True)
class SignReport:
    n_servers: int
    n_files: int
    values: np.ndarray
    differences: np.ndarray

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.values < 0) and np.all(self.differences < 0))


@dataclass(frozen=True)
class RatioReport:
    y: float
    table: Dict[Tuple[int, int], float]
    inner_bound_ok: bool
    observation: Dict[int, float] = field(default_factory=dict)
    tail_bounds: Dict[Tuple[int, int], float] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return (
            all(value > 1 for value in self.table.values())
            and all(value > 1 for value in self.observation.values())
            and all(value > 1 for value in self.tail_bounds.values())
            and self.inner_bound_ok
        )


def _check_grid(grid: Sequence[float], lower: float, upper: float) -> np.ndarray:
    points = np.asarray(grid, dtype=float)
    if points.ndim != 1 or points.size < 2:
        raise LemmaHypothesisError("Grid needs at least two points")
    if np.any(np.diff(points) <= 0):
        raise LemmaHypothesisError("Grid must be strictly increasing")
    if points[0] < lower or points[-1] > upper:
        raise LemmaHypothesisError(f"Grid must lie within [{lower}, {upper}], got [{points[0]}, {points[-1]}]")
    return points


def _decreasing_report(
    function_id: str,
    rate: float,
    points: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    phi: Callable[[float], float],
    phi_prime: Callable[[float], float],
    phi_second: Callable[[np.ndarray], np.ndarray],
    margin: Callable[[float], float],
    margin_prime: Callable[[float], float],
) -> MonotonicityReport:
    differences = np.diff(f(points))
    violations = np.flatnonzero(differences >= 0)
    witness = float(points[violations[0]]) if violations.size else None
    margins = np.array([margin(x) for x in points])
    report = MonotonicityReport(
        function_id=function_id,
        rate=rate,
        grid=points,
        min_difference=float(differences.min()),
        max_difference=float(differences.max()),
        verdict=violations.size == 0,
        witness=witness,
        phi_start=phi(points[0]),
        phi_prime_start=phi_prime(points[0]),
        phi_second_min=float(phi_second(points).min()),
        margin_start=margins[0],
        margin_min=float(margins.min()),
        margin_prime_start=margin_prime(points[0]),
    )
    logger.info("%s at a=%s: decreasing=%s, margin min %.6g", function_id, rate, report.verdict, report.margin_min)
    return report


def lemma1_check(a: float = LEMMA1_MIN_RATE, grid: Sequence[float] | None = None) -> MonotonicityReport:
    """f(x) = (1 - e^(-ax)) / ln(1+x) is strictly decreasing for x >= 1."""
    if a < LEMMA1_MIN_RATE:
        raise LemmaHypothesisError(f"Need a >= {LEMMA1_MIN_RATE}, got {a}")
    points = _check_grid(np.linspace(1.0, 20.0, 1000) if grid is None else grid, 1.0, 50.0)

    return _decreasing_report(
        "lemma1",
        a,
        points,
        f=lambda x: -np.expm1(-a * x) / np.log1p(x),
        phi=lambda x: math.expm1(a * x) + a * (1 + x) * math.log1p(x),
        phi_prime=lambda x: a * (math.exp(a * x) + 1 + math.log1p(x)),
        phi_second=lambda x: a * (a * np.exp(a * x) + 1 / (1 + x)),
        margin=lambda x: math.fsum([math.exp(a * x), -1.0, -a * (1 + x) * math.log1p(x)]),
        margin_prime=lambda x: a * (math.exp(a * x) - math.log1p(x) - 1),
    )


def lemma2_check(a: float = LEMMA2_MIN_RATE, grid: Sequence[float] | None = None) -> MonotonicityReport:
    """f(x) = (1 - e^(-ax)) / (ln(1+x) + 0.005) is strictly decreasing for x >= 6."""
    if a < LEMMA2_MIN_RATE:
        raise LemmaHypothesisError(f"Need a >= {LEMMA2_MIN_RATE}, got {a}")
    points = _check_grid(np.linspace(6.0, 60.0, 1000) if grid is None else grid, 6.0, 100.0)
    offset = LEMMA2_OFFSET

    def margin(x: float) -> float:
        # near-cancellation at x = 6
        return math.fsum([math.exp(a * x), -1.0, -a * (1 + x) * math.log1p(x), -a * (1 + x) * offset])

    return _decreasing_report(
        "lemma2",
        a,
        points,
        f=lambda x: -np.expm1(-a * x) / (np.log1p(x) + offset),
        phi=margin,
        phi_prime=lambda x: a * (math.exp(a * x) + 1 + offset + math.log1p(x)),
        phi_second=lambda x: a * (a * np.exp(a * x) + 1 / (1 + x)),
        margin=margin,
        margin_prime=lambda x: a * (math.exp(a * x) - math.log1p(x) - 1 - offset),
    )


def lemma3_values(n_servers: int, n_files: int) -> SignReport:
    """f(m') = (m'+1)(N^(M-m'-1) - 1) - MN/(M+N-1) (N^(M-1) - 1) for m' in [1, M-2]."""
    if n_servers < 2 or n_files < 3:
        raise ParameterError(f"Need N >= 2 and M >= 3, got N={n_servers}, M={n_files}")
    n, m = n_servers, n_files
    scale = m * n / (m + n - 1) * (n ** (m - 1) - 1)
    values = np.array([(k + 1) * (n ** (m - k - 1) - 1) - scale for k in range(1, m - 1)], dtype=float)
    return SignReport(n_servers=n, n_files=m, values=values, differences=np.diff(values))


def lemma4_ratio(n_files: int, m: int, y: float) -> float:
    return (
        1
        / (m + 1)
        * (n_files * y / (n_files + y - 1))
        * ((y ** (n_files - 1) - 1) / (y ** (n_files - m - 1) - 1))
    )


def lemma4_tail_bound(m: int, from_files: int, y: float = LEMMA4_MIN_Y) -> float:
    """Lower bound on the ratio for every M >= from_files, from (y^(M-1)-1)/(y^(M-m-1)-1) > y^m."""
    return from_files / (from_files + y - 1) * y ** (m + 1) / (m + 1)


def lemma4_check(y: float = LEMMA4_MIN_Y, max_files: int = 12) -> RatioReport:
    if y < LEMMA4_MIN_Y:
        raise LemmaHypothesisError(f"Need y >= {LEMMA4_MIN_Y:.6f}, got {y}")
    if max_files < 3:
        raise ParameterError(f"Need max_files >= 3, got {max_files}")

    table: Dict[Tuple[int, int], float] = {}
    inner_ok = True
    for n_files in range(3, max_files + 1):
        for m in range(1, n_files - 1):
            table[(n_files, m)] = lemma4_ratio(n_files, m, y)
            inner = (y ** (n_files - 1) - 1) / (y ** (n_files - m - 1) - 1)
            inner_ok = inner_ok and inner > y**m

    observation = {m: lemma4_tail_bound(m, m + 2, y) for m in range(3, max_files - 1)}
    tail_bounds = {(1, 6): lemma4_tail_bound(1, 6, y), (2, 8): lemma4_tail_bound(2, 8, y)}
    return RatioReport(y=y, table=table, inner_bound_ok=inner_ok, observation=observation, tail_bounds=tail_bounds)
