from __future__ import annotations

import os
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.model.params import Metric, Setting
from src.utils.errors import ConfigError

SEED_ENV_VAR = "WPIR_SEED"
DEFAULT_SWEEPS = Path(__file__).resolve().parents[2] / "configs" / "theorem_sweeps.yaml"
GRID_SLACK = 1e-9


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


class RhoGrid(BaseModel):
    start: float = Field(ge=0)
    stop: float = Field(ge=0)
    step: float = Field(gt=0)

    @model_validator(mode="after")
    def _ordered(self) -> "RhoGrid":
        if self.stop < self.start:
            raise ValueError(f"Grid stop {self.stop} is below start {self.start}")
        return self

    @classmethod
    def parse(cls, text: str) -> "RhoGrid":
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"Expected start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(part) for part in parts)
            return cls(start=start, stop=stop, step=step)
        except (ValueError, ValidationError) as exc:
            raise ConfigError(f"Invalid rho grid {text!r}: {exc}") from exc

    @property
    def count(self) -> int:
        return int(np.floor((self.stop - self.start) / self.step + GRID_SLACK)) + 1

    def points(self) -> np.ndarray:
        """start + k * step up to stop; the last point snaps to stop when it lands within slack."""
        points = self.start + self.step * np.arange(self.count, dtype=float)
        if abs(points[-1] - self.stop) <= GRID_SLACK * self.step:
            points[-1] = self.stop
        return points


class RunConfig(BaseModel):
    command: str
    setting: Setting = Setting.REPLICATED
    n_servers: int = Field(default=2, ge=2)
    strength: int = Field(default=1, ge=1)
    n_files: int = Field(default=2, ge=2)
    metric: Metric = Metric.MIL
    rho: Optional[float] = Field(default=None, ge=0)
    rho_grid: Optional[RhoGrid] = None
    trials: int = Field(default=1, ge=1)
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    output: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"


class TheoremSweep(BaseModel):
    """One equality check family: LP optimum against the closed-form trade-off."""

    name: str
    setting: Setting
    metric: Metric
    servers: Tuple[int, int]
    files: Tuple[int, int]
    rho_points: int = Field(default=25, ge=2)
    max_ratio: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def _ranges(self) -> "TheoremSweep":
        if self.servers[0] < 2 or self.servers[1] < self.servers[0]:
            raise ValueError(f"Bad server range {self.servers}")
        if self.files[0] < 2 or self.files[1] < self.files[0]:
            raise ValueError(f"Bad file range {self.files}")
        return self

    def strengths(self, n_servers: int) -> List[int]:
        if self.setting is Setting.REPLICATED:
            return [1]
        return list(range(2, n_servers))


class SweepConfig(BaseModel):
    sweeps: List[TheoremSweep]


def load_sweeps(path: Path | str = DEFAULT_SWEEPS) -> SweepConfig:
    file_path = Path(path)
    try:
        with file_path.open("r", encoding="utf-8") as f:
            raw = yaml.safe_load(f)
        return SweepConfig(**raw)
    except FileNotFoundError as exc:
        raise ConfigError(f"Sweep file not found: {file_path}") from exc
    except (yaml.YAMLError, ValidationError, TypeError) as exc:
        raise ConfigError(f"Invalid sweep file {file_path}: {exc}") from exc
