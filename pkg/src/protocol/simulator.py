from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.model.params import MixingDistribution, SchemeParams
from src.protocol.entities import FileLibrary
from src.protocol.sun_jafar import build_library, make_rng, run_protocol
from src.utils.errors import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialOutcome:
    mprime: int
    download: int
    decoded_ok: bool


@dataclass(frozen=True)
class EmpiricalStats:
    trials: int
    mean_download: float
    empirical_rate: float
    mprime_frequencies: Tuple[float, ...]
    decode_success: float


def run_trial(params: SchemeParams, library: FileLibrary, p: MixingDistribution, seed: int, trial: int) -> TrialOutcome:
    # sub-seed by counter so the outcome does not depend on scheduling
    rng = make_rng(seed ^ trial)
    theta = int(rng.integers(1, params.n_files + 1))
    transcript = run_protocol(params, library, p, theta, rng)
    return TrialOutcome(
        mprime=transcript.draw.mprime,
        download=transcript.download,
        decoded_ok=bool(np.array_equal(transcript.decoded, library.file(theta))),
    )


def run_trials(
    params: SchemeParams,
    p: MixingDistribution,
    trials: int,
    seed: int,
    threads: int = 1,
) -> EmpiricalStats:
    if trials < 1:
        raise ParameterError(f"Need at least one trial, got {trials}")
    library = build_library(params, seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda t: run_trial(params, library, p, seed, t), range(trials)))
    else:
        outcomes = [run_trial(params, library, p, seed, t) for t in range(trials)]

    downloads = np.array([o.download for o in outcomes], dtype=np.int64)
    counts = np.bincount([o.mprime for o in outcomes], minlength=params.n_files)
    mean_download = float(downloads.sum()) / trials
    failures = sum(not o.decoded_ok for o in outcomes)
    if failures:
        logger.error("%d of %d runs failed to recover the desired file", failures, trials)
    logger.info("Ran %d trials, mean download %.6g", trials, mean_download)

    return EmpiricalStats(
        trials=trials,
        mean_download=mean_download,
        empirical_rate=library.length / mean_download,
        mprime_frequencies=tuple(float(c) / trials for c in counts),
        decode_success=(trials - failures) / trials,
    )
