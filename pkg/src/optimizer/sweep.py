from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from src.analytics.formulas import leakage_cap, theorem_rate
from src.model.params import Metric, SchemeParams, make_params
from src.optimizer.diagnostics import DiagnosticsReport, d_coefficients, tight_objective
from src.optimizer.lp import solve_optimal
from src.utils.config import SweepConfig, TheoremSweep

logger = logging.getLogger(__name__)

EQUALITY_TOLERANCE = 1e-9
NEGATIVE_GAP_TOLERANCE = 1e-12

PASS = "pass"
REFUTED = "refuted"
FAIL = "fail"


@dataclass(frozen=True)
class TheoremComparison:
    params: SchemeParams
    metric: Metric
    rho: float
    theorem_rate: float
    lp_rate: float
    gap: float
    gap_bound: float
    lp_support: Tuple[int, ...]
    diagnostics: DiagnosticsReport


@dataclass(frozen=True)
class TheoremCheck:
    sweep: str
    n_servers: int
    strength: int
    n_files: int
    metric: Metric
    rho: float
    theorem_rate: float
    lp_rate: float
    gap: float
    support: Tuple[int, ...]
    status: str


def compare_with_theorem(params: SchemeParams, metric: Metric | str, rho: float) -> TheoremComparison:
    metric = Metric(metric)
    closed_form = theorem_rate(params, metric, rho)
    solution = solve_optimal(params, metric, rho)
    diagnostics = d_coefficients(params, metric)

    gap_bound = 0.0
    if rho < leakage_cap(params, metric):
        q = params.ratio
        best_gain = max(0.0, float(diagnostics.sensitivity.max(initial=0.0)))
        ceiling = min(q, tight_objective(params, metric, rho) + best_gain)
        gap_bound = (1 - q) / (1 - ceiling) - closed_form

    return TheoremComparison(
        params=params,
        metric=metric,
        rho=rho,
        theorem_rate=closed_form,
        lp_rate=solution.rate,
        gap=solution.rate - closed_form,
        gap_bound=gap_bound,
        lp_support=solution.support,
        diagnostics=diagnostics,
    )


def classify(comparison: TheoremComparison) -> str:
    """pass when the LP matches the closed form, refuted when it provably beats it."""
    gap = comparison.gap
    improving = bool(comparison.diagnostics.improving_indices)
    if gap < -NEGATIVE_GAP_TOLERANCE or gap > comparison.gap_bound + NEGATIVE_GAP_TOLERANCE:
        return FAIL
    if gap <= EQUALITY_TOLERANCE:
        return PASS
    return REFUTED if improving else FAIL


def sweep_points(sweep: TheoremSweep) -> List[Tuple[SchemeParams, float]]:
    points: List[Tuple[SchemeParams, float]] = []
    for n_servers in range(sweep.servers[0], sweep.servers[1] + 1):
        for strength in sweep.strengths(n_servers):
            if sweep.max_ratio is not None and strength / n_servers > sweep.max_ratio:
                continue
            for n_files in range(sweep.files[0], sweep.files[1] + 1):
                params = make_params(sweep.setting, n_servers, strength, n_files)
                cap = leakage_cap(params, sweep.metric)
                for rho in np.linspace(0.0, cap, sweep.rho_points):
                    points.append((params, float(rho)))
    return points


def _check(sweep: TheoremSweep, params: SchemeParams, rho: float) -> TheoremCheck:
    comparison = compare_with_theorem(params, sweep.metric, rho)
    return TheoremCheck(
        sweep=sweep.name,
        n_servers=params.n_servers,
        strength=params.strength,
        n_files=params.n_files,
        metric=sweep.metric,
        rho=rho,
        theorem_rate=comparison.theorem_rate,
        lp_rate=comparison.lp_rate,
        gap=comparison.gap,
        support=comparison.lp_support,
        status=classify(comparison),
    )


def sweep_theorems(config: SweepConfig | Iterable[TheoremSweep], threads: int = 1) -> List[TheoremCheck]:
    sweeps = config.sweeps if isinstance(config, SweepConfig) else list(config)
    jobs = [(sweep, params, rho) for sweep in sweeps for params, rho in sweep_points(sweep)]
    logger.info("Checking %d grid points across %d sweeps", len(jobs), len(sweeps))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            checks = list(pool.map(lambda job: _check(*job), jobs))
    else:
        checks = [_check(*job) for job in jobs]

    refuted = {(c.sweep, c.n_servers, c.strength, c.n_files) for c in checks if c.status == REFUTED}
    for sweep_name, n, s, m in sorted(refuted):
        logger.warning("%s: LP beats the two-point trade-off at N=%d s=%d M=%d", sweep_name, n, s, m)
    failures = sum(c.status == FAIL for c in checks)
    if failures:
        logger.error("%d grid points disagree with the sensitivity prediction", failures)
    return checks
