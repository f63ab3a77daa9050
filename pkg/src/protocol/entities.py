from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.errors import DecodingError, ParameterError, QueryBoundsError

# (file id, chunk index); file ids are 1-based
ChunkRef = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class FileLibrary:
    """M replicated files of N^M octets; octets add under bitwise XOR."""

    n_servers: int
    files: np.ndarray

    def __post_init__(self) -> None:
        files = np.array(self.files, dtype=np.uint8)
        files.setflags(write=False)
        object.__setattr__(self, "files", files)
        if files.ndim != 2 or files.shape[0] < 2:
            raise ParameterError(f"Library needs at least two files, got shape {files.shape}")
        if files.shape[1] != self.n_servers ** files.shape[0]:
            raise ParameterError(f"Files must hold N^M = {self.n_servers ** files.shape[0]} octets, got {files.shape[1]}")

    @property
    def n_files(self) -> int:
        return int(self.files.shape[0])

    @property
    def length(self) -> int:
        return int(self.files.shape[1])

    def file(self, file_id: int) -> np.ndarray:
        if not 1 <= file_id <= self.n_files:
            raise QueryBoundsError(f"File {file_id} outside [1, {self.n_files}]")
        return self.files[file_id - 1]

    def chunk(self, ref: ChunkRef, chunk_size: int) -> np.ndarray:
        file_id, index = ref
        if not 0 <= index < self.length // chunk_size:
            raise QueryBoundsError(f"Chunk {index} of size {chunk_size} outside file of {self.length} octets")
        return self.file(file_id)[index * chunk_size : (index + 1) * chunk_size]


@dataclass(frozen=True)
class WrapperDraw:
    theta: int
    mprime: int
    undesired: Tuple[int, ...]
    direct_server: Optional[int] = None

    def __post_init__(self) -> None:
        if self.theta in self.undesired:
            raise ParameterError(f"Desired file {self.theta} cannot be mixed in as undesired")
        if len(self.undesired) != self.mprime:
            raise ParameterError(f"Expected {self.mprime} undesired files, got {self.undesired}")
        if (self.mprime == 0) != (self.direct_server is not None):
            raise ParameterError("A direct server is drawn exactly when no file is mixed in")

    @property
    def involved(self) -> Tuple[int, ...]:
        return tuple(sorted((self.theta, *self.undesired)))


@dataclass(frozen=True)
class Null:
    pass


@dataclass(frozen=True)
class Direct:
    file: int


@dataclass(frozen=True)
class SumRequests:
    """Each request asks for the XOR of the named chunks."""

    chunk_size: int
    requests: Tuple[Tuple[ChunkRef, ...], ...]

    @property
    def files(self) -> Tuple[int, ...]:
        return tuple(sorted({file_id for request in self.requests for file_id, _ in request}))


Query = Union[Null, Direct, SumRequests]


def download_size(query: Query, length: int) -> int:
    if isinstance(query, Null):
        return 0
    if isinstance(query, Direct):
        return length
    return len(query.requests) * query.chunk_size


@dataclass(frozen=True)
class DecodingState:
    """What the client keeps to cancel side information.

    Each recipe is (chunk, (server, row), side) where side is None or the
    (server, row) of the answer holding the interference to subtract.
    """

    theta: int
    chunk_size: int
    n_chunks: int
    shapes: Tuple[Tuple[int, int], ...]
    recipes: Tuple[Tuple[int, Tuple[int, int], Optional[Tuple[int, int]]], ...]

    def check_answers(self, answers: Sequence[np.ndarray]) -> None:
        if len(answers) != len(self.shapes):
            raise DecodingError(f"Expected answers from {len(self.shapes)} servers, got {len(answers)}")
        for server, (shape, answer) in enumerate(zip(self.shapes, answers)):
            if answer.shape != shape:
                raise DecodingError(f"Server {server} answered shape {answer.shape}, expected {shape}")


@dataclass(frozen=True, eq=False)
class QueryTranscript:
    n_files: int
    draw: WrapperDraw
    queries: Tuple[Query, ...]
    answers: Tuple[np.ndarray, ...]
    download: int
    decoded: np.ndarray
