"""Temporal edge streams: domain types and edge-list file ingestion.

A stream is an immutable, time-sorted sequence of directed timestamped
edges over a dense 0..n-1 node index space. Ties in timestamps are broken
by ingestion order (the ``seq`` ordinal), so every stream carries a strict
total order on its edges and all downstream counts are deterministic even
on real data with coarse (e.g. integer-second) timestamps.
"""

from __future__ import annotations

import gzip
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "NodeRegistry",
    "ParseError",
    "TemporalEdge",
    "TemporalStream",
    "parse_stream",
    "stream_slice",
    "write_stream",
]

COMMENT_PREFIXES = ("#", "%")


class ParseError(ValueError):
    """A malformed line in an edge-list file."""

    def __init__(self, message: str, path: str | None = None, line_no: int | None = None):
        loc = f"{path or '<input>'}:{line_no}" if line_no is not None else (path or "<input>")
        super().__init__(f"{loc}: {message}")
        self.path = path
        self.line_no = line_no


@dataclass(frozen=True)
class TemporalEdge:
    """One directed timestamped edge; ``seq`` is the ingestion ordinal."""

    src: int
    dst: int
    time: float
    seq: int


class NodeRegistry:
    """Bijection between original node labels and dense integer indices."""

    __slots__ = ("_labels", "_index")

    def __init__(self, labels: Iterable[str] = ()):
        self._labels: list[str] = list(labels)
        self._index: dict[str, int] = {lab: i for i, lab in enumerate(self._labels)}
        if len(self._index) != len(self._labels):
            raise ValueError("duplicate node labels")

    def intern(self, label: str) -> int:
        """Return the index for ``label``, assigning the next free one if new."""
        idx = self._index.get(label)
        if idx is None:
            idx = len(self._labels)
            self._index[label] = idx
            self._labels.append(label)
        return idx

    def label(self, node: int) -> str:
        return self._labels[node]

    def index(self, label: str) -> int:
        return self._index[label]

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __repr__(self) -> str:
        return f"NodeRegistry(n={len(self._labels)})"


class TemporalStream:
    """Immutable sequence of directed temporal edges sorted by (time, seq).

    The (time, seq) order is strict: ``seq`` values are distinct, so no two
    edges compare equal even when their timestamps tie. Instances are safe
    for concurrent read-only use.
    """

    __slots__ = ("_src", "_dst", "_time", "_seq", "registry", "dropped_self_loops")

    def __init__(
        self,
        src: np.ndarray,
        dst: np.ndarray,
        time: np.ndarray,
        seq: np.ndarray,
        registry: NodeRegistry,
        dropped_self_loops: int = 0,
    ):
        src = np.ascontiguousarray(src, dtype=np.int64)
        dst = np.ascontiguousarray(dst, dtype=np.int64)
        time = np.ascontiguousarray(time, dtype=np.float64)
        seq = np.ascontiguousarray(seq, dtype=np.int64)
        m = len(time)
        if not (len(src) == len(dst) == len(seq) == m):
            raise ValueError("edge arrays must have equal length")
        if m:
            if np.any(src == dst):
                raise ValueError("self-loop edge in stream")
            if src.min() < 0 or max(src.max(), dst.max()) >= len(registry):
                raise ValueError("node index outside registry range")
            dt = np.diff(time)
            if np.any(dt < 0) or np.any((dt == 0) & (np.diff(seq) <= 0)):
                raise ValueError("edges not strictly sorted by (time, seq)")
            if len(np.unique(seq)) != m:
                raise ValueError("seq ordinals not distinct")
        for arr in (src, dst, time, seq):
            arr.setflags(write=False)
        self._src = src
        self._dst = dst
        self._time = time
        self._seq = seq
        self.registry = registry
        self.dropped_self_loops = dropped_self_loops

    @property
    def src(self) -> np.ndarray:
        return self._src

    @property
    def dst(self) -> np.ndarray:
        return self._dst

    @property
    def times(self) -> np.ndarray:
        return self._time

    @property
    def seq(self) -> np.ndarray:
        return self._seq

    @property
    def n_nodes(self) -> int:
        return len(self.registry)

    def __len__(self) -> int:
        return len(self._time)

    def __getitem__(self, i: int) -> TemporalEdge:
        return TemporalEdge(
            int(self._src[i]), int(self._dst[i]), float(self._time[i]), int(self._seq[i])
        )

    def __iter__(self) -> Iterator[TemporalEdge]:
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"TemporalStream(m={len(self)}, n_nodes={self.n_nodes})"

    def __reduce__(self):
        return (
            _rebuild_stream,
            (
                np.asarray(self._src),
                np.asarray(self._dst),
                np.asarray(self._time),
                np.asarray(self._seq),
                list(self.registry._labels),
                self.dropped_self_loops,
            ),
        )

    @classmethod
    def from_records(
        cls,
        records: Iterable[tuple[int, int, float]],
        registry: NodeRegistry,
        dropped_self_loops: int = 0,
    ) -> "TemporalStream":
        """Build a stream from (src, dst, time) records in ingestion order."""
        recs = list(records)
        m = len(recs)
        src = np.fromiter((r[0] for r in recs), dtype=np.int64, count=m)
        dst = np.fromiter((r[1] for r in recs), dtype=np.int64, count=m)
        time = np.fromiter((r[2] for r in recs), dtype=np.float64, count=m)
        seq = np.arange(m, dtype=np.int64)
        order = np.argsort(time, kind="stable")
        return cls(src[order], dst[order], time[order], seq[order], registry, dropped_self_loops)


def _rebuild_stream(src, dst, time, seq, labels, dropped):
    return TemporalStream(src, dst, time, seq, NodeRegistry(labels), dropped)


def parse_stream(path: str, time_unit: float | None = None) -> TemporalStream:
    """Parse a whitespace-separated ``SRC DST TIME`` edge-list file.

    Lines starting with '#' or '%' and blank lines are skipped; trailing
    fields beyond the third are ignored. Node labels are interned in
    first-seen order among retained edges. Self-loop lines (SRC == DST) are
    dropped and counted on the returned stream's ``dropped_self_loops``.
    Duplicate lines are retained: recurrent edges are legitimate. Files
    ending in ``.gz`` are decompressed transparently.

    Parameters
    ----------
    path : str
        Edge-list file path.
    time_unit : float, optional
        Scale factor applied to every parsed timestamp.

    Raises
    ------
    ParseError
        On a line with fewer than 3 fields or a non-numeric/non-finite
        timestamp. An empty file is not an error (empty stream).
    """
    registry = NodeRegistry()
    records: list[tuple[int, int, float]] = []
    dropped = 0
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(COMMENT_PREFIXES):
                continue
            parts = stripped.split()
            if len(parts) < 3:
                raise ParseError(
                    f"expected at least 3 fields, got {len(parts)}", str(path), line_no
                )
            try:
                t = float(parts[2])
            except ValueError:
                raise ParseError(
                    f"non-numeric timestamp {parts[2]!r}", str(path), line_no
                ) from None
            if not math.isfinite(t):
                raise ParseError(f"non-finite timestamp {parts[2]!r}", str(path), line_no)
            if time_unit is not None:
                t *= time_unit
            if parts[0] == parts[1]:
                dropped += 1
                continue
            records.append((registry.intern(parts[0]), registry.intern(parts[1]), t))
    if dropped:
        log.warning("%s: dropped %d self-loop line(s)", path, dropped)
    return TemporalStream.from_records(records, registry, dropped_self_loops=dropped)


def write_stream(stream: TemporalStream, path: str) -> None:
    """Write a stream back to the ``SRC DST TIME`` edge-list format.

    Timestamps are written with full round-trip precision, so parsing the
    output recovers (src, dst, time) of every edge exactly.
    """
    reg = stream.registry
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(stream)):
            fh.write(
                f"{reg.label(int(stream.src[i]))} {reg.label(int(stream.dst[i]))} "
                f"{float(stream.times[i])!r}\n"
            )


def stream_slice(stream: TemporalStream, t_lo: float, t_hi: float) -> TemporalStream:
    """Contiguous view of the edges with t_lo <= time <= t_hi.

    Locates the window in O(log m); the returned stream shares the parent's
    arrays and registry. An empty window is allowed.
    """
    if t_lo > t_hi:
        raise ValueError(f"t_lo={t_lo} exceeds t_hi={t_hi}")
    lo = int(np.searchsorted(stream.times, t_lo, side="left"))
    hi = int(np.searchsorted(stream.times, t_hi, side="right"))
    return TemporalStream(
        stream.src[lo:hi],
        stream.dst[lo:hi],
        stream.times[lo:hi],
        stream.seq[lo:hi],
        stream.registry,
    )
