from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from src.utils.errors import DistributionError, ParameterError

logger = logging.getLogger(__name__)

# Invariant tolerance for stored distributions; input tolerance for user vectors.
SUM_TOLERANCE = 1e-12
INPUT_SUM_TOLERANCE = 1e-9


class Setting(str, Enum):
    REPLICATED = "replicated"
    MDS_CODED = "mds"
    T_COLLUDING = "tcolluding"


class Metric(str, Enum):
    MIL = "mil"
    MAXL = "maxl"


@dataclass(frozen=True)
class SchemeParams:
    """Server count, file count and strength s (1, K or T) of one WPIR setting."""

    setting: Setting
    n_servers: int
    n_files: int
    strength: int
    ratio: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratio", self.strength / self.n_servers)

    @property
    def subpacketization(self) -> int:
        return self.n_servers**self.n_files


def make_params(setting: Setting | str, n_servers: int, strength: int, n_files: int) -> SchemeParams:
    try:
        setting = Setting(setting)
    except ValueError as exc:
        raise ParameterError(f"Unknown setting {setting!r}") from exc
    if n_servers < 2:
        raise ParameterError(f"Need at least two servers, got N={n_servers}")
    if n_files < 2:
        raise ParameterError(f"Need at least two files, got M={n_files}")
    if strength >= n_servers:
        raise ParameterError(f"Strength s={strength} must be below N={n_servers} (s = N makes the rate degenerate)")
    if strength < 1:
        raise ParameterError(f"Strength s={strength} must be positive")
    if setting is Setting.REPLICATED and strength != 1:
        raise ParameterError(f"Replicated storage forces s=1, got s={strength}")
    return SchemeParams(setting=setting, n_servers=n_servers, n_files=n_files, strength=strength)


@dataclass(frozen=True)
class MixingDistribution:
    """Distribution of M', the number of undesired files mixed into one retrieval."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 1 or probs.size < 2:
            raise DistributionError(f"Distribution needs at least two entries, got shape {probs.shape}")
        if np.any(probs < 0):
            raise DistributionError(f"Negative probability in {probs.tolist()}")
        if abs(probs.sum() - 1.0) > SUM_TOLERANCE:
            raise DistributionError(f"Probabilities sum to {probs.sum()!r}, not 1")

    @property
    def n_files(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.probs > 0))

    def __getitem__(self, mprime: int) -> float:
        return float(self.probs[mprime])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixingDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


def make_distribution(values: Sequence[float], n_files: int | None = None) -> MixingDistribution:
    probs = np.asarray(values, dtype=float)
    if probs.ndim != 1 or probs.size < 2:
        raise DistributionError(f"Distribution needs at least two entries, got {list(np.atleast_1d(values))}")
    if n_files is not None and probs.size != n_files:
        raise DistributionError(f"Distribution has {probs.size} entries, expected M={n_files}")
    if np.any(probs < 0):
        raise DistributionError(f"Negative probability in {probs.tolist()}")
    total = probs.sum()
    if abs(total - 1.0) > INPUT_SUM_TOLERANCE:
        raise DistributionError(f"Probabilities sum to {total!r}, not 1")
    if abs(total - 1.0) > SUM_TOLERANCE:
        logger.warning("Renormalising distribution with sum %r", total)
    if total != 1.0:
        probs = probs / total
    return MixingDistribution(probs)


def point_mass(n_files: int, mprime: int) -> MixingDistribution:
    probs = np.zeros(n_files)
    probs[mprime] = 1.0
    return MixingDistribution(probs)


@dataclass(frozen=True)
class LeakageBudget:
    metric: Metric
    rho: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric(self.metric))
        if not self.rho >= 0:
            raise ParameterError(f"Leakage budget must be non-negative, got {self.rho!r}")
