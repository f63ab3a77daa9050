from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from src.model.params import Metric, SchemeParams


class LeakageCalculus(Protocol):
    """Linear view of a leakage metric: leakage = transform(sum_m' p(m') * b_m')."""

    metric: Metric

    def coefficients_at(self, n_files: int, ratio: float) -> np.ndarray:
        ...

    def coefficients(self, params: SchemeParams) -> np.ndarray:
        ...

    def budget(self, rho: float) -> float:
        ...

    def leakage(self, linear_value: float) -> float:
        ...

    def cap(self, params: SchemeParams) -> float:
        ...

    def mixing_weight(self, params: SchemeParams, rho: float) -> float:
        ...


@dataclass(frozen=True)
class MutualInformationLeakage:
    metric: Metric = Metric.MIL

    def coefficients_at(self, n_files: int, ratio: float) -> np.ndarray:
        b = np.zeros(n_files)
        b[0] = ratio * math.log2(n_files)
        for mprime in range(1, n_files - 1):
            b[mprime] = math.log2(n_files / (mprime + 1))
        return b

    def coefficients(self, params: SchemeParams) -> np.ndarray:
        b = self.coefficients_at(params.n_files, params.ratio)
        b[0] = self.cap(params)
        return b

    def budget(self, rho: float) -> float:
        return rho

    def leakage(self, linear_value: float) -> float:
        return linear_value

    def cap(self, params: SchemeParams) -> float:
        return params.strength * math.log2(params.n_files) / params.n_servers

    def mixing_weight(self, params: SchemeParams, rho: float) -> float:
        # rho N / (s log M), before clamping to [0, 1]
        return rho * params.n_servers / (params.strength * math.log2(params.n_files))


@dataclass(frozen=True)
class MaximalLeakage:
    metric: Metric = Metric.MAXL

    def coefficients_at(self, n_files: int, ratio: float) -> np.ndarray:
        b = n_files / np.arange(1, n_files + 1, dtype=float)
        b[0] = 1 + ratio * (n_files - 1)
        return b

    def coefficients(self, params: SchemeParams) -> np.ndarray:
        b = self.coefficients_at(params.n_files, params.ratio)
        n, s = params.n_servers, params.strength
        b[0] = (n + s * params.n_files - s) / n
        return b

    def budget(self, rho: float) -> float:
        return 2.0**rho

    def leakage(self, linear_value: float) -> float:
        return math.log2(linear_value)

    def cap(self, params: SchemeParams) -> float:
        return math.log2(1 + params.strength * (params.n_files - 1) / params.n_servers)

    def mixing_weight(self, params: SchemeParams, rho: float) -> float:
        return params.n_servers * (2.0**rho - 1) / (params.strength * (params.n_files - 1))


CALCULI: dict[Metric, LeakageCalculus] = {
    Metric.MIL: MutualInformationLeakage(),
    Metric.MAXL: MaximalLeakage(),
}


def calculus_for(metric: Metric | str) -> LeakageCalculus:
    return CALCULI[Metric(metric)]
