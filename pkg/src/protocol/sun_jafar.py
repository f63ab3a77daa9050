"""Weak Sun-Jafar retrieval over replicated storage.

The wrapper draws M' ~ p and a uniform set J of M' undesired files. With
M' = 0 one uniformly chosen server is asked for the whole desired file and the
others receive nothing. Otherwise the capacity-achieving Sun-Jafar scheme runs
on the K = M'+1 involved files, each cut into N^K chunks of N^(M-K) octets.
"""
from __future__ import annotations

import logging
from itertools import combinations
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from src.model.params import MixingDistribution, SchemeParams, Setting
from src.protocol.entities import (
    ChunkRef,
    DecodingState,
    Direct,
    FileLibrary,
    Null,
    Query,
    QueryTranscript,
    SumRequests,
    WrapperDraw,
    download_size,
)
from src.utils.errors import DecodingError, ParameterError, UnsupportedSettingError

logger = logging.getLogger(__name__)


def _require_replicated(params: SchemeParams) -> None:
    if params.setting is not Setting.REPLICATED:
        raise UnsupportedSettingError(f"Only replicated storage runs end to end, got {params.setting.value}")


def make_rng(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ParameterError(f"Seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


def build_library(params: SchemeParams, seed: int) -> FileLibrary:
    _require_replicated(params)
    rng = make_rng(seed)
    files = rng.integers(0, 256, size=(params.n_files, params.subpacketization), dtype=np.uint8)
    return FileLibrary(n_servers=params.n_servers, files=files)


def run_download(n_servers: int, n_files: int, mprime: int) -> int:
    """Octets downloaded by one run with M' = mprime."""
    if mprime == 0:
        return n_servers**n_files
    involved = mprime + 1
    per_server = (n_servers**involved - 1) // (n_servers - 1)
    return n_servers * per_server * n_servers ** (n_files - involved)


def draw_plan(
    params: SchemeParams,
    p: MixingDistribution,
    theta: int,
    rng: np.random.Generator,
) -> WrapperDraw:
    if not 1 <= theta <= params.n_files:
        raise ParameterError(f"Desired file {theta} outside [1, {params.n_files}]")
    if p.n_files != params.n_files:
        raise ParameterError(f"Distribution has {p.n_files} entries, expected M={params.n_files}")

    mprime = int(np.searchsorted(np.cumsum(p.probs), rng.random(), side="right"))
    mprime = min(mprime, params.n_files - 1)
    others = [f for f in range(1, params.n_files + 1) if f != theta]
    undesired = tuple(sorted(int(f) for f in rng.choice(others, size=mprime, replace=False)))
    direct_server = int(rng.integers(params.n_servers)) if mprime == 0 else None
    return WrapperDraw(theta=theta, mprime=mprime, undesired=undesired, direct_server=direct_server)


def build_queries(
    n_servers: int,
    n_files: int,
    draw: WrapperDraw,
    permutations: Mapping[int, Sequence[int]],
) -> Tuple[Tuple[Query, ...], DecodingState]:
    """Deterministic query construction given one chunk permutation per involved file."""
    length = n_servers**n_files
    theta = draw.theta

    if draw.mprime == 0:
        direct = draw.direct_server
        queries = tuple(Direct(theta) if n == direct else Null() for n in range(n_servers))
        shapes = tuple((1, length) if n == direct else (0, 0) for n in range(n_servers))
        state = DecodingState(theta, chunk_size=length, n_chunks=1, shapes=shapes, recipes=((0, (direct, 0), None),))
        return queries, state

    involved = draw.involved
    n_chunks = n_servers ** len(involved)
    chunk_size = n_servers ** (n_files - len(involved))
    cursor = {f: 0 for f in involved}

    def fresh(file_id: int) -> int:
        index = int(permutations[file_id][cursor[file_id]])
        cursor[file_id] += 1
        return index

    requests: List[List[Tuple[ChunkRef, ...]]] = [[] for _ in range(n_servers)]
    side_info: Dict[Tuple[int, Tuple[int, ...]], List[Tuple[int, Tuple[ChunkRef, ...]]]] = {}
    recipes = []

    def emit(server: int, pairs: Tuple[ChunkRef, ...]) -> int:
        requests[server].append(tuple(sorted(pairs)))
        return len(requests[server]) - 1

    for size in range(1, len(involved) + 1):
        for server in range(n_servers):
            for subset in combinations(involved, size):
                if theta not in subset:
                    for _ in range((n_servers - 1) ** (size - 1)):
                        pairs = tuple((f, fresh(f)) for f in subset)
                        row = emit(server, pairs)
                        side_info.setdefault((server, subset), []).append((row, pairs))
                elif size == 1:
                    chunk = fresh(theta)
                    recipes.append((chunk, (server, emit(server, ((theta, chunk),))), None))
                else:
                    rest = tuple(f for f in subset if f != theta)
                    for other in range(n_servers):
                        if other == server:
                            continue
                        for side_row, side_pairs in side_info.get((other, rest), []):
                            chunk = fresh(theta)
                            row = emit(server, ((theta, chunk),) + side_pairs)
                            recipes.append((chunk, (server, row), (other, side_row)))

    queries = tuple(SumRequests(chunk_size=chunk_size, requests=tuple(rows)) for rows in requests)
    shapes = tuple((len(rows), chunk_size) for rows in requests)
    state = DecodingState(theta, chunk_size=chunk_size, n_chunks=n_chunks, shapes=shapes, recipes=tuple(recipes))
    return queries, state


def generate_queries(
    params: SchemeParams,
    draw: WrapperDraw,
    rng: np.random.Generator,
) -> Tuple[Tuple[Query, ...], DecodingState]:
    _require_replicated(params)
    n_chunks = params.n_servers ** (draw.mprime + 1)
    permutations = {f: rng.permutation(n_chunks) for f in draw.involved} if draw.mprime else {}
    return build_queries(params.n_servers, params.n_files, draw, permutations)


def answer(query: Query, library: FileLibrary) -> np.ndarray:
    if isinstance(query, Null):
        return np.zeros((0, 0), dtype=np.uint8)
    if isinstance(query, Direct):
        return library.file(query.file).reshape(1, -1).copy()
    out = np.zeros((len(query.requests), query.chunk_size), dtype=np.uint8)
    for row, request in enumerate(query.requests):
        for ref in request:
            np.bitwise_xor(out[row], library.chunk(ref, query.chunk_size), out=out[row])
    return out


def decode(state: DecodingState, answers: Sequence[np.ndarray]) -> np.ndarray:
    state.check_answers(answers)
    chunks = np.zeros((state.n_chunks, state.chunk_size), dtype=np.uint8)
    recovered = np.zeros(state.n_chunks, dtype=bool)
    for chunk, (server, row), side in state.recipes:
        value = answers[server][row]
        if side is not None:
            value = value ^ answers[side[0]][side[1]]
        chunks[chunk] = value
        recovered[chunk] = True
    if not recovered.all():
        raise DecodingError(f"Recovered {int(recovered.sum())} of {state.n_chunks} chunks of file {state.theta}")
    return chunks.reshape(-1)


def run_protocol(
    params: SchemeParams,
    library: FileLibrary,
    p: MixingDistribution,
    theta: int,
    rng: np.random.Generator,
) -> QueryTranscript:
    draw = draw_plan(params, p, theta, rng)
    queries, state = generate_queries(params, draw, rng)
    answers = tuple(answer(query, library) for query in queries)
    decoded = decode(state, answers)
    download = sum(download_size(query, library.length) for query in queries)
    logger.debug("Run theta=%d m'=%d downloaded %d octets", theta, draw.mprime, download)
    return QueryTranscript(
        n_files=params.n_files, draw=draw, queries=queries, answers=answers, download=download, decoded=decoded
    )
