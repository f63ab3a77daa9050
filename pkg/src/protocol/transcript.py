"""Binary transcript dump.

Layout, all integers big-endian:
  b"WPTR", version (1 octet)
  N, M, theta, m', direct server (1 octet each; 0xFF when no direct server)
  m' undesired file ids (1 octet each)
  per server, the query: tag (0 null, 1 direct, 2 sums)
    direct: file id (1 octet)
    sums:   chunk size (4), request count (4), then per request a pair count
            (4) followed by (file id: 1 octet, chunk index: 4 octets) pairs
  per server, the answer: rows (4), width (4), rows * width octets
  decoded file: length (4) then the octets
"""
from __future__ import annotations

import struct
from typing import List, Tuple

import numpy as np

from src.protocol.entities import Direct, Null, Query, QueryTranscript, SumRequests, WrapperDraw, download_size
from src.utils.errors import DecodingError

MAGIC = b"WPTR"
VERSION = 1
NO_SERVER = 0xFF

_TAG_NULL, _TAG_DIRECT, _TAG_SUMS = 0, 1, 2
_HEADER = struct.Struct(">4sBBBBBB")
_U8 = struct.Struct(">B")
_U32 = struct.Struct(">I")
_PAIR = struct.Struct(">BI")
_SHAPE = struct.Struct(">II")


def _encode_query(query: Query) -> bytes:
    if isinstance(query, Null):
        return _U8.pack(_TAG_NULL)
    if isinstance(query, Direct):
        return _U8.pack(_TAG_DIRECT) + _U8.pack(query.file)
    parts = [_U8.pack(_TAG_SUMS), _SHAPE.pack(query.chunk_size, len(query.requests))]
    for request in query.requests:
        parts.append(_U32.pack(len(request)))
        parts.extend(_PAIR.pack(file_id, chunk) for file_id, chunk in sorted(request))
    return b"".join(parts)


def encode_transcript(transcript: QueryTranscript) -> bytes:
    draw = transcript.draw
    direct = NO_SERVER if draw.direct_server is None else draw.direct_server
    parts = [
        _HEADER.pack(MAGIC, VERSION, len(transcript.queries), transcript.n_files, draw.theta, draw.mprime, direct),
        bytes(draw.undesired),
    ]
    parts.extend(_encode_query(query) for query in transcript.queries)
    for answer in transcript.answers:
        rows, width = answer.shape
        parts.append(_SHAPE.pack(rows, width))
        parts.append(np.ascontiguousarray(answer, dtype=np.uint8).tobytes())
    decoded = np.ascontiguousarray(transcript.decoded, dtype=np.uint8)
    parts.append(_U32.pack(decoded.size))
    parts.append(decoded.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise DecodingError(f"Transcript truncated at octet {self.offset}, needed {size} more")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout: struct.Struct) -> Tuple:
        return layout.unpack(self.take(layout.size))


def _decode_query(reader: _Reader) -> Query:
    (tag,) = reader.unpack(_U8)
    if tag == _TAG_NULL:
        return Null()
    if tag == _TAG_DIRECT:
        (file_id,) = reader.unpack(_U8)
        return Direct(file_id)
    if tag != _TAG_SUMS:
        raise DecodingError(f"Unknown query tag {tag}")
    chunk_size, count = reader.unpack(_SHAPE)
    requests: List[Tuple[Tuple[int, int], ...]] = []
    for _ in range(count):
        (pairs,) = reader.unpack(_U32)
        requests.append(tuple(reader.unpack(_PAIR) for _ in range(pairs)))
    return SumRequests(chunk_size=chunk_size, requests=tuple(requests))


def decode_transcript(data: bytes) -> QueryTranscript:
    reader = _Reader(data)
    magic, version, n_servers, n_files, theta, mprime, direct = reader.unpack(_HEADER)
    if magic != MAGIC or version != VERSION:
        raise DecodingError(f"Not a version {VERSION} transcript")
    undesired = tuple(reader.take(mprime))
    draw = WrapperDraw(
        theta=theta,
        mprime=mprime,
        undesired=undesired,
        direct_server=None if direct == NO_SERVER else direct,
    )
    queries = tuple(_decode_query(reader) for _ in range(n_servers))
    answers = []
    for _ in range(n_servers):
        rows, width = reader.unpack(_SHAPE)
        answers.append(np.frombuffer(reader.take(rows * width), dtype=np.uint8).reshape(rows, width))
    (length,) = reader.unpack(_U32)
    decoded = np.frombuffer(reader.take(length), dtype=np.uint8)
    if reader.offset != len(data):
        raise DecodingError(f"{len(data) - reader.offset} trailing octets after transcript")
    return QueryTranscript(
        n_files=n_files,
        draw=draw,
        queries=queries,
        answers=tuple(answers),
        download=sum(download_size(query, length) for query in queries),
        decoded=decoded,
    )
