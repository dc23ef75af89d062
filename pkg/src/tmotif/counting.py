"""Exact motif counting over temporal streams.

Two independent routes are provided. ``exact_count`` computes per-edge
local counts by chronological backtracking: for every anchor edge and every
template position, the anchor is pinned at that position and the remaining
positions are filled with candidate edges drawn from the anchor's duration
window in stream order, pruning on node-map inconsistency, time-order
violation, and window overflow. ``brute_force_count`` enumerates windowed
edge combinations directly against the matching predicate; it is
definitionally correct and exists to cross-check the backtracking route.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .motif import DeltaQuery, matches_instance
from .stream import TemporalStream

__all__ = [
    "InvariantViolation",
    "LocalCountProfile",
    "brute_force_count",
    "exact_count",
    "local_count",
]


class InvariantViolation(RuntimeError):
    """An internal counting identity failed; results cannot be trusted."""


@dataclass(frozen=True)
class LocalCountProfile:
    """Per-edge local counts and the global count they determine.

    ``eta[i]`` is the number of motif instances whose edge set contains
    stream edge i; the global count is sum(eta) / l, an exact integer.
    Power sums of eta are computed once with exact integer arithmetic;
    they drive the estimator's variance and the asymptotic-regime
    diagnostics.
    """

    eta: np.ndarray
    total: int
    query: DeltaQuery
    sum_eta: int = field(init=False)
    sum_eta2: int = field(init=False)
    sum_eta3: int = field(init=False)

    def __post_init__(self):
        eta = np.ascontiguousarray(self.eta, dtype=np.int64)
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)
        s1 = s2 = s3 = 0
        for e in eta.tolist():
            s1 += e
            sq = e * e
            s2 += sq
            s3 += sq * e
        object.__setattr__(self, "sum_eta", s1)
        object.__setattr__(self, "sum_eta2", s2)
        object.__setattr__(self, "sum_eta3", s3)
        if s1 != self.total * self.query.motif.l:
            raise InvariantViolation(
                f"sum(eta)={s1} is not l*total={self.query.motif.l * self.total}"
            )

    @property
    def m(self) -> int:
        return len(self.eta)

    @property
    def max_eta(self) -> int:
        return int(self.eta.max()) if len(self.eta) else 0


class _StreamIndex:
    """Time and adjacency indexes used by the windowed backtracking."""

    __slots__ = ("times", "src", "dst", "by_src", "by_dst", "by_pair", "m")

    def __init__(self, stream: TemporalStream):
        self.times = stream.times.tolist()
        self.src = stream.src.tolist()
        self.dst = stream.dst.tolist()
        self.m = len(self.times)
        by_src: dict[int, list[int]] = {}
        by_dst: dict[int, list[int]] = {}
        by_pair: dict[tuple[int, int], list[int]] = {}
        for i, (s, d) in enumerate(zip(self.src, self.dst)):
            by_src.setdefault(s, []).append(i)
            by_dst.setdefault(d, []).append(i)
            by_pair.setdefault((s, d), []).append(i)
        self.by_src = by_src
        self.by_dst = by_dst
        self.by_pair = by_pair


def _window_lo(times: list[float], t_ref: float, delta: float, m: int) -> int:
    """Smallest index whose time t satisfies t_ref - t < delta.

    The boundary is located with bisect and then corrected against the
    exact subtraction predicate, which is what the matching rule evaluates;
    a bisect on t_ref - delta alone can disagree with it by one ulp.
    """
    lo = bisect_right(times, t_ref - delta)
    while lo > 0 and t_ref - times[lo - 1] < delta:
        lo -= 1
    while lo < m and t_ref - times[lo] >= delta:
        lo += 1
    return lo


def _window_hi(times: list[float], t_ref: float, delta: float, m: int) -> int:
    """One past the largest index whose time t satisfies t - t_ref < delta."""
    hi = bisect_left(times, t_ref + delta)
    while hi < m and times[hi] - t_ref < delta:
        hi += 1
    while hi > 0 and times[hi - 1] - t_ref >= delta:
        hi -= 1
    return hi


def _pinned_count(index: _StreamIndex, query: DeltaQuery, anchor: int, pin: int) -> int:
    """Instances with the anchor edge at template position ``pin``."""
    motif_edges = query.motif.edges
    l = len(motif_edges)
    delta = query.delta
    times = index.times
    src = index.src
    dst = index.dst
    t_anchor = times[anchor]

    # Every edge of an instance containing the anchor lies strictly within
    # (t_anchor - delta, t_anchor + delta).
    w_lo = _window_lo(times, t_anchor, delta, index.m)

    fwd: dict[int, int] = {}
    rev: dict[int, int] = {}
    au, av = motif_edges[pin]
    fwd[src[anchor]] = au
    rev[au] = src[anchor]
    fwd[dst[anchor]] = av
    rev[av] = dst[anchor]

    count = 0

    def extend(pos: int, prev: int, hi_span: int) -> None:
        nonlocal count
        if pos == l:
            count += 1
            return
        if pos == pin:
            if pos == 0:
                hi_span = _window_hi(times, t_anchor, delta, index.m)
            extend(pos + 1, anchor, hi_span)
            return
        mu, mv = motif_edges[pos]
        su = rev.get(mu)
        sv = rev.get(mv)
        if pos < pin:
            lo = prev + 1 if prev + 1 > w_lo else w_lo
            hi = anchor  # exclusive: earlier positions precede the anchor
        else:
            lo = prev + 1
            hi = hi_span  # exclusive: keeps span below delta
        if lo >= hi:
            return
        if su is not None:
            arr = index.by_pair.get((su, sv)) if sv is not None else index.by_src.get(su)
        elif sv is not None:
            arr = index.by_dst.get(sv)
        else:
            arr = None
        if arr is None and (su is not None or sv is not None):
            return
        candidates = range(lo, hi) if arr is None else _slice(arr, lo, hi)
        for c in candidates:
            bound_s = bound_m = None
            cs = src[c]
            cd = dst[c]
            got = fwd.get(cs)
            if got is None:
                if mu in rev:
                    continue
                fwd[cs] = mu
                rev[mu] = cs
                bound_s = cs
                bound_m = mu
            elif got != mu:
                continue
            got = fwd.get(cd)
            if got is None:
                if mv in rev:
                    if bound_s is not None:
                        del fwd[bound_s]
                        del rev[bound_m]
                    continue
                fwd[cd] = mv
                rev[mv] = cd
                if pos == 0:
                    extend(1, c, _window_hi(times, times[c], delta, index.m))
                else:
                    extend(pos + 1, c, hi_span)
                del fwd[cd]
                del rev[mv]
            elif got != mv:
                if bound_s is not None:
                    del fwd[bound_s]
                    del rev[bound_m]
                continue
            else:
                if pos == 0:
                    extend(1, c, _window_hi(times, times[c], delta, index.m))
                else:
                    extend(pos + 1, c, hi_span)
            if bound_s is not None:
                del fwd[bound_s]
                del rev[bound_m]

    extend(0, -1, index.m)
    return count


def _slice(arr: list[int], lo: int, hi: int):
    """Values of a sorted index list falling in [lo, hi)."""
    start = bisect_left(arr, lo)
    stop = bisect_left(arr, hi, start)
    return arr[start:stop]


def _local_count_indexed(index: _StreamIndex, query: DeltaQuery, anchor: int) -> int:
    # An instance's index set contains the anchor at exactly one position,
    # so summing the pinned counts introduces no double counting.
    return sum(_pinned_count(index, query, anchor, j) for j in range(query.motif.l))


def local_count(stream: TemporalStream, query: DeltaQuery, anchor: int) -> int:
    """Number of motif instances whose edge-index set contains ``anchor``."""
    if not 0 <= anchor < len(stream):
        raise ValueError(f"anchor {anchor} outside stream of {len(stream)} edges")
    return _local_count_indexed(_StreamIndex(stream), query, anchor)


_worker_index: _StreamIndex | None = None
_worker_query: DeltaQuery | None = None


def _init_worker(stream: TemporalStream, query: DeltaQuery) -> None:
    global _worker_index, _worker_query
    _worker_index = _StreamIndex(stream)
    _worker_query = query


def _count_chunk(bounds: tuple[int, int]) -> list[int]:
    lo, hi = bounds
    return [_local_count_indexed(_worker_index, _worker_query, i) for i in range(lo, hi)]


def exact_count(stream: TemporalStream, query: DeltaQuery, workers: int = 1) -> LocalCountProfile:
    """Exact profile of local counts and the global count over the stream.

    With ``workers > 1`` anchors are partitioned into contiguous chunks
    farmed to worker processes; each per-anchor count is an independent
    pure computation and the final integer reduction is exact, so results
    are identical for any worker count.
    """
    m = len(stream)
    l = query.motif.l
    if workers > 1 and m > 0:
        n_chunks = min(m, workers * 4)
        step = -(-m // n_chunks)
        bounds = [(lo, min(lo + step, m)) for lo in range(0, m, step)]
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(stream, query)
        ) as pool:
            chunks = list(pool.map(_count_chunk, bounds))
        eta_list = [e for chunk in chunks for e in chunk]
    else:
        index = _StreamIndex(stream)
        eta_list = [_local_count_indexed(index, query, i) for i in range(m)]
    total_sum = sum(eta_list)
    total, rem = divmod(total_sum, l)
    if rem:
        raise InvariantViolation(f"sum(eta)={total_sum} not divisible by l={l}")
    return LocalCountProfile(
        eta=np.asarray(eta_list, dtype=np.int64), total=total, query=query
    )


def brute_force_count(stream: TemporalStream, query: DeltaQuery) -> LocalCountProfile:
    """Oracle count by enumeration of windowed edge combinations.

    Walks every l-subset of edge indices whose time span can stay below
    delta (first edge fixed, companions drawn from its forward window) and
    applies the matching predicate. Intended for small streams; cost grows
    with the number of windowed combinations.
    """
    m = len(stream)
    l = query.motif.l
    times = stream.times.tolist()
    edges = [stream[i] for i in range(m)]
    eta = [0] * m
    total = 0
    for first in range(m):
        hi = _window_hi(times, times[first], query.delta, m)
        if l == 1:
            if matches_instance(query, [edges[first]]):
                total += 1
                eta[first] += 1
            continue
        for combo in combinations(range(first + 1, hi), l - 1):
            if matches_instance(query, [edges[first], *(edges[c] for c in combo)]):
                total += 1
                eta[first] += 1
                for c in combo:
                    eta[c] += 1
    return LocalCountProfile(eta=np.asarray(eta, dtype=np.int64), total=total, query=query)
