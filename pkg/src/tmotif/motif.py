"""Motif templates and the ordered-edge matching predicate.

A motif is an ordered list of directed edges on k abstract nodes; list
position is temporal order. A candidate sequence of stream edges matches
when mapping each candidate edge's endpoints onto the template edge at the
same position yields a single consistent injective node map, and the
candidate's time span is strictly below the query duration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

from .stream import TemporalEdge

__all__ = [
    "DeltaQuery",
    "MotifError",
    "MotifSpec",
    "cyclic_triangle",
    "load_motif",
    "matches_instance",
    "validate_motif",
]


class MotifError(ValueError):
    """An invalid motif description."""


@dataclass(frozen=True)
class MotifSpec:
    """Ordered edge template on nodes 0..k-1; position = temporal order.

    The induced static multigraph (directions and order ignored) must be
    connected, every node must appear in at least one edge, and self-loop
    template edges are rejected. Repeated (u, v) pairs at different
    positions are allowed: recurrent edges are part of the model.
    """

    k: int
    edges: tuple[tuple[int, int], ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.k < 2:
            raise MotifError(f"motif needs k >= 2 nodes, got k={self.k}")
        if len(self.edges) < 1:
            raise MotifError("motif needs at least one edge")
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        seen: set[int] = set()
        for pos, (u, v) in enumerate(self.edges):
            if u == v:
                raise MotifError(f"self-loop edge ({u},{v}) at position {pos}")
            if not (0 <= u < self.k and 0 <= v < self.k):
                raise MotifError(f"edge ({u},{v}) at position {pos} outside 0..{self.k - 1}")
            seen.add(u)
            seen.add(v)
        if seen != set(range(self.k)):
            missing = sorted(set(range(self.k)) - seen)
            raise MotifError(f"nodes {missing} appear in no edge")
        if not self._connected():
            raise MotifError("induced static graph is disconnected")

    def _connected(self) -> bool:
        adj: dict[int, set[int]] = {i: set() for i in range(self.k)}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = frontier.pop()
            for w in adj[nxt]:
                if w not in seen:
                    seen.add(w)
                    frontier.append(w)
        return len(seen) == self.k

    @property
    def l(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        tag = f" {self.name!r}" if self.name else ""
        return f"MotifSpec(k={self.k}, l={self.l}{tag})"


@dataclass(frozen=True)
class DeltaQuery:
    """A motif paired with the duration bound its instances must fit in."""

    motif: MotifSpec
    delta: float

    def __post_init__(self):
        if not (isinstance(self.delta, (int, float)) and math.isfinite(self.delta)):
            raise MotifError(f"delta must be finite, got {self.delta!r}")
        if self.delta <= 0:
            raise MotifError(f"delta must be positive, got {self.delta}")
        object.__setattr__(self, "delta", float(self.delta))


def validate_motif(raw: Mapping) -> MotifSpec:
    """Validate a raw motif description ({"k": int, "edges": [[u,v],...], "name"?})."""
    try:
        k = int(raw["k"])
        edges = tuple((int(u), int(v)) for u, v in raw["edges"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MotifError(f"bad motif description: {exc}") from None
    return MotifSpec(k=k, edges=edges, name=raw.get("name"))


def load_motif(path: str) -> MotifSpec:
    """Load a motif from a JSON file with keys ``name``, ``k``, ``edges``."""
    with open(path, "r", encoding="utf-8") as fh:
        return validate_motif(json.load(fh))


def cyclic_triangle() -> MotifSpec:
    """The directed cyclic triangle: 0->1, 1->2, 2->0 in temporal order."""
    data = resources.files("tmotif").joinpath("motifs/cyclic_triangle.json").read_text()
    return validate_motif(json.loads(data))


def matches_instance(query: DeltaQuery, candidate: Sequence[TemporalEdge]) -> bool:
    """True iff a strictly time-ordered candidate realizes the queried motif.

    Position j of the candidate is matched against template edge j by
    incremental extension of a partial node map; extension fails on any
    inconsistency or injectivity violation. The duration condition is
    strict: last time minus first time must be < delta. The candidate is
    assumed already ordered by the stream's (time, seq) total order.
    """
    motif = query.motif
    if len(candidate) != motif.l:
        raise ValueError(f"candidate has {len(candidate)} edges, motif has {motif.l}")
    if candidate[-1].time - candidate[0].time >= query.delta:
        return False
    fwd: dict[int, int] = {}
    used = [False] * motif.k
    for edge, (mu, mv) in zip(candidate, motif.edges):
        for node, target in ((edge.src, mu), (edge.dst, mv)):
            got = fwd.get(node)
            if got is None:
                if used[target]:
                    return False
                fwd[node] = target
                used[target] = True
            elif got != target:
                return False
    return True
