"""Stochastic temporal-stream generators.

Two models are provided. The uniform model draws arrival times from a
homogeneous Poisson process on (0, tau] and marks each arrival with an
ordered node pair chosen uniformly among all distinct pairs. The
block-model variant runs an independent Poisson process on every ordered
node pair with a rate determined by the (source block, destination block)
entry of an intensity matrix; the stream is the time-sorted superposition.
Both support an exact-length mode that draws inter-arrival times from the
model's aggregate-rate exponential until a target edge count is reached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stream import NodeRegistry, TemporalStream

__all__ = [
    "SBMPoissonConfig",
    "UniformPoissonConfig",
    "generate_fixed_length",
    "generate_sbm",
    "generate_uniform",
]


@dataclass(frozen=True)
class UniformPoissonConfig:
    """Poisson arrivals at ``rate`` on (0, tau], uniform ordered-pair marks."""

    rate: float
    tau: float
    n_nodes: int
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be positive, got {self.rate}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.n_nodes < 2:
            raise ValueError(f"need at least 2 nodes, got {self.n_nodes}")


@dataclass(frozen=True)
class SBMPoissonConfig:
    """Independent per-pair Poisson processes with block-structured rates.

    ``intensity[a][b]`` is the rate of the process on each ordered node pair
    whose source lies in block a and destination in block b; a symmetric
    matrix recovers the undirected-intent case.
    """

    block_sizes: tuple[int, ...]
    intensity: tuple[tuple[float, ...], ...]
    tau: float
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        object.__setattr__(self, "block_sizes", sizes)
        inten = tuple(tuple(float(x) for x in row) for row in self.intensity)
        object.__setattr__(self, "intensity", inten)
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        b = len(sizes)
        if len(inten) != b or any(len(row) != b for row in inten):
            raise ValueError(f"intensity must be a {b}x{b} matrix")
        flat = [x for row in inten for x in row]
        if any(not math.isfinite(x) or x < 0 for x in flat):
            raise ValueError("intensity entries must be finite and non-negative")
        if not any(x > 0 for x in flat):
            raise ValueError("at least one intensity entry must be positive")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def n_nodes(self) -> int:
        return sum(self.block_sizes)

    @property
    def memberships(self) -> np.ndarray:
        """Block index of every node, blocks laid out contiguously."""
        return np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)


def _registry(n_nodes: int) -> NodeRegistry:
    return NodeRegistry(str(i) for i in range(n_nodes))


def _assemble(src: np.ndarray, dst: np.ndarray, times: np.ndarray, n_nodes: int) -> TemporalStream:
    order = np.argsort(times, kind="stable")
    m = len(times)
    return TemporalStream(
        src[order],
        dst[order],
        times[order],
        np.arange(m, dtype=np.int64),
        _registry(n_nodes),
    )


def _uniform_pairs(rng: np.random.Generator, n_nodes: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    # Flat index over the n*(n-1) ordered pairs with distinct endpoints.
    idx = rng.integers(0, n_nodes * (n_nodes - 1), size=count)
    src = idx // (n_nodes - 1)
    off = idx % (n_nodes - 1)
    dst = off + (off >= src)
    return src.astype(np.int64), dst.astype(np.int64)


def generate_uniform(config: UniformPoissonConfig) -> TemporalStream:
    """Draw one stream from the uniform-mark Poisson model.

    The event count is Poisson(rate * tau); conditional on the count the
    arrival times are i.i.d. uniform on the horizon, which matches the
    conditional law of Poisson-process arrivals.
    """
    rng = np.random.default_rng(config.seed)
    n = int(rng.poisson(config.rate * config.tau))
    times = np.sort(rng.uniform(0.0, config.tau, size=n))
    src, dst = _uniform_pairs(rng, config.n_nodes, n)
    return _assemble(src, dst, times, config.n_nodes)


def _pair_rates(config: SBMPoissonConfig) -> np.ndarray:
    z = config.memberships
    rates = np.asarray(config.intensity, dtype=np.float64)[np.ix_(z, z)]
    np.fill_diagonal(rates, 0.0)
    return rates


def generate_sbm(config: SBMPoissonConfig) -> TemporalStream:
    """Draw one stream from the block-structured Poisson-process model."""
    rng = np.random.default_rng(config.seed)
    rates = _pair_rates(config)
    counts = rng.poisson(rates * config.tau)
    total = int(counts.sum())
    pair_src, pair_dst = np.nonzero(counts)
    reps = counts[pair_src, pair_dst]
    src = np.repeat(pair_src, reps).astype(np.int64)
    dst = np.repeat(pair_dst, reps).astype(np.int64)
    times = rng.uniform(0.0, config.tau, size=total)
    return _assemble(src, dst, times, config.n_nodes)


def generate_fixed_length(
    config: UniformPoissonConfig | SBMPoissonConfig, m_target: int
) -> TemporalStream:
    """Draw a stream with exactly ``m_target`` edges.

    Inter-arrival times are exponential at the model's aggregate rate, so
    the arrival spacings have the correct conditional law; edge marks
    follow the model's edge distribution. The configured horizon is
    ignored - the stream ends at the m_target-th arrival.
    """
    if m_target < 0:
        raise ValueError(f"m_target must be non-negative, got {m_target}")
    rng = np.random.default_rng(config.seed)
    if isinstance(config, UniformPoissonConfig):
        agg_rate = config.rate
        if m_target == 0:
            return _assemble(
                np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), config.n_nodes
            )
        times = np.cumsum(rng.exponential(1.0 / agg_rate, size=m_target))
        src, dst = _uniform_pairs(rng, config.n_nodes, m_target)
        return _assemble(src, dst, times, config.n_nodes)
    rates = _pair_rates(config)
    agg_rate = float(rates.sum())
    if m_target == 0:
        return _assemble(
            np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), config.n_nodes
        )
    if agg_rate <= 0.0:
        raise ValueError("aggregate rate is zero; cannot produce events")
    times = np.cumsum(rng.exponential(1.0 / agg_rate, size=m_target))
    n = config.n_nodes
    flat = rng.choice(n * n, size=m_target, p=(rates / agg_rate).ravel())
    src, dst = np.divmod(flat, n)
    return _assemble(src.astype(np.int64), dst.astype(np.int64), times, n)
