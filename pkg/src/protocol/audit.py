"""Exact leakage and download of the weak Sun-Jafar scheme by enumeration.

``full`` enumerates every random choice of the client, chunk permutations
included. ``sufficient`` enumerates only what a single server can tell apart:
nothing, a direct request for one file, or a Sun-Jafar query over a file set.
The full mode also reports whether, for each server and file set, the query
distribution is the same whichever involved file is desired, which is what
makes the sufficient statistic exact.
"""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Dict, Hashable, List, Optional, Tuple

from src.analytics.formulas import maxl_leakage, mil_leakage, retrieval_rate
from src.model.params import MixingDistribution, SchemeParams, Setting
from src.protocol.entities import Direct, Null, WrapperDraw, download_size
from src.protocol.sun_jafar import build_queries, run_download
from src.utils.errors import EnumerationLimitError, ParameterError, UnsupportedSettingError

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10**7
AGREEMENT_TOLERANCE = 1e-9

FULL = "full"
SUFFICIENT = "sufficient"

# conditional[server][theta][query] = P(Q_server = query | theta)
Conditional = List[Dict[int, Dict[Hashable, Fraction]]]


@dataclass(frozen=True)
class QueryShape:
    files: Tuple[int, ...]


@dataclass(frozen=True)
class ExactStats:
    mode: str
    expected_download: Fraction
    rate: float
    mil_per_server: Tuple[float, ...]
    maxl_per_server: Tuple[float, ...]
    inner_private: Optional[bool] = None

    @property
    def mil(self) -> float:
        return math.fsum(self.mil_per_server) / len(self.mil_per_server)

    @property
    def maxl(self) -> float:
        return max(self.maxl_per_server)


@dataclass(frozen=True)
class AuditComparison:
    stats: ExactStats
    formula_mil: float
    formula_maxl: float
    formula_rate: float

    @property
    def agrees(self) -> bool:
        return (
            abs(self.stats.mil - self.formula_mil) <= AGREEMENT_TOLERANCE
            and abs(self.stats.maxl - self.formula_maxl) <= AGREEMENT_TOLERANCE
            and abs(self.stats.rate - self.formula_rate) <= AGREEMENT_TOLERANCE
        )


def _empty(n_servers: int, n_files: int) -> Conditional:
    return [{theta: defaultdict(Fraction) for theta in range(1, n_files + 1)} for _ in range(n_servers)]


def _mutual_information(conditional: Dict[int, Dict[Hashable, Fraction]]) -> float:
    prior = Fraction(1, len(conditional))
    marginal: Dict[Hashable, Fraction] = defaultdict(Fraction)
    for dist in conditional.values():
        for query, prob in dist.items():
            marginal[query] += prior * prob
    terms = [
        float(prior * prob) * math.log2(prob / marginal[query])
        for dist in conditional.values()
        for query, prob in dist.items()
        if prob > 0
    ]
    return math.fsum(terms)


def _maximal_leakage(conditional: Dict[int, Dict[Hashable, Fraction]]) -> float:
    queries = {query for dist in conditional.values() for query in dist}
    total = sum((max(dist.get(query, Fraction(0)) for dist in conditional.values()) for query in queries), Fraction(0))
    return math.log2(total)


def _sufficient(params: SchemeParams, p: MixingDistribution) -> Tuple[Conditional, Fraction]:
    n, m = params.n_servers, params.n_files
    conditional = _empty(n, m)
    expected = Fraction(0)
    for mprime in p.support:
        weight = Fraction(p[mprime])
        expected += weight * run_download(n, m, mprime)
        for theta in range(1, m + 1):
            others = [f for f in range(1, m + 1) if f != theta]
            for server in range(n):
                dist = conditional[server][theta]
                if mprime == 0:
                    dist[Null()] += weight * Fraction(n - 1, n)
                    dist[Direct(theta)] += weight / n
                    continue
                share = weight / math.comb(m - 1, mprime)
                for undesired in combinations(others, mprime):
                    dist[QueryShape(tuple(sorted((theta, *undesired))))] += share
    return conditional, expected


def _full(params: SchemeParams, p: MixingDistribution) -> Tuple[Conditional, Fraction, bool]:
    n, m = params.n_servers, params.n_files
    cost = sum(math.factorial(n ** (k + 1)) ** (k + 1) for k in p.support if k > 0)
    if cost > ENUMERATION_LIMIT:
        raise EnumerationLimitError(f"Full enumeration needs {cost} permutation tuples, limit {ENUMERATION_LIMIT}")

    conditional = _empty(n, m)
    by_set: Dict[Tuple[int, Tuple[int, ...], int], Counter] = defaultdict(Counter)
    expected = Fraction(0)
    prior = Fraction(1, m)

    for mprime in p.support:
        weight = Fraction(p[mprime])
        for theta in range(1, m + 1):
            others = [f for f in range(1, m + 1) if f != theta]
            subsets = list(combinations(others, mprime))
            if mprime == 0:
                draws = [(WrapperDraw(theta, 0, (), server), {}) for server in range(n)]
            else:
                orderings = list(permutations(range(n ** (mprime + 1))))
                draws = [
                    (draw, dict(zip(draw.involved, combo)))
                    for draw in (WrapperDraw(theta, mprime, undesired) for undesired in subsets)
                    for combo in product(orderings, repeat=mprime + 1)
                ]
            share = weight / len(draws)
            for draw, chunk_orders in draws:
                queries, _ = build_queries(n, m, draw, chunk_orders)
                expected += prior * share * sum(download_size(q, params.subpacketization) for q in queries)
                for server, query in enumerate(queries):
                    conditional[server][theta][query] += share
                    if mprime:
                        by_set[(server, draw.involved, theta)][query] += 1

    inner_private = True
    for server in range(n):
        for involved in {key[1] for key in by_set if key[0] == server}:
            views = [by_set[(server, involved, theta)] for theta in involved]
            inner_private = inner_private and all(view == views[0] for view in views[1:])
    return conditional, expected, inner_private


def exact_audit(params: SchemeParams, p: MixingDistribution, mode: str = SUFFICIENT) -> ExactStats:
    if params.setting is not Setting.REPLICATED:
        raise UnsupportedSettingError(f"Exact audit covers replicated storage only, got {params.setting.value}")
    if p.n_files != params.n_files:
        raise ParameterError(f"Distribution has {p.n_files} entries, expected M={params.n_files}")

    inner_private: Optional[bool] = None
    if mode == FULL:
        conditional, expected, inner_private = _full(params, p)
    elif mode == SUFFICIENT:
        conditional, expected = _sufficient(params, p)
    else:
        raise ParameterError(f"Unknown audit mode {mode!r}")

    stats = ExactStats(
        mode=mode,
        expected_download=expected,
        rate=float(Fraction(params.subpacketization) / expected),
        mil_per_server=tuple(_mutual_information(dist) for dist in conditional),
        maxl_per_server=tuple(_maximal_leakage(dist) for dist in conditional),
        inner_private=inner_private,
    )
    logger.info("Exact audit (%s): MIL %.12g, MaxL %.12g, E[D] %s", mode, stats.mil, stats.maxl, expected)
    return stats


def compare_audit(params: SchemeParams, p: MixingDistribution, mode: str = SUFFICIENT) -> AuditComparison:
    return AuditComparison(
        stats=exact_audit(params, p, mode),
        formula_mil=mil_leakage(params, p),
        formula_maxl=maxl_leakage(params, p),
        formula_rate=retrieval_rate(params, p),
    )
