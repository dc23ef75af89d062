"""Closed-form and Monte-Carlo expectations for the uniform Poisson model.

Under Poisson arrivals with uniform ordered-pair marks, the expected motif
count factorizes exactly:

    E[count] = E[binom(N, l)] * pi * q

where N ~ Poisson(rate * tau) so E[binom(N, l)] = (rate * tau)^l / l!
(the Poisson factorial moment), ``pi`` is the probability that l i.i.d.
Uniform(0, tau) times span at most delta, and ``q`` is the probability that
l uniform random ordered edges form, in time order, a sequence realizing
the motif. For l = 2 the span probability has the closed form
2*delta/tau - (delta/tau)^2; for general l it admits the lower bound
floor(tau/delta) * (delta/tau)^l (disjoint diagonal hypercubes) and is
cheap to estimate by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TheoryParams",
    "expected_count_uniform",
    "motif_match_probability",
    "pi_closed_form_l2",
    "pi_lower_bound",
    "pi_monte_carlo",
]

_MC_CHUNK = 1 << 18


@dataclass(frozen=True)
class TheoryParams:
    """Parameters of the expected-count identity for the uniform model."""

    delta: float
    tau: float
    l: int
    k: int
    n_nodes: int
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not (math.isfinite(self.tau) and self.tau >= self.delta):
            raise ValueError(f"tau must be >= delta, got tau={self.tau}, delta={self.delta}")
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if not 2 <= self.k <= self.n_nodes:
            raise ValueError(f"need 2 <= k <= n_nodes, got k={self.k}, n_nodes={self.n_nodes}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError(f"rate must be positive, got {self.rate}")


def _check_delta_tau(delta: float, tau: float) -> None:
    if not (math.isfinite(delta) and delta > 0):
        raise ValueError(f"delta must be positive, got {delta}")
    if not (math.isfinite(tau) and tau >= delta):
        raise ValueError(f"need 0 < delta <= tau, got delta={delta}, tau={tau}")


def pi_closed_form_l2(delta: float, tau: float) -> float:
    """P(two i.i.d. Uniform(0, tau) times differ by at most delta)."""
    _check_delta_tau(delta, tau)
    r = delta / tau
    return 2.0 * r - r * r


def pi_lower_bound(delta: float, tau: float, l: int) -> float:
    """Lower bound floor(tau/delta) * (delta/tau)^l on the span probability.

    The diagonal of the unit l-cube is covered by floor(tau/delta) disjoint
    hypercubes of side delta/tau, each entirely inside the span event.
    """
    _check_delta_tau(delta, tau)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    return math.floor(tau / delta) * (delta / tau) ** l


def pi_monte_carlo(
    delta: float, tau: float, l: int, n_draws: int, seed: int = 0
) -> tuple[float, float]:
    """Monte-Carlo estimate of the l-point span probability.

    Returns (estimate, binomial standard error) for the event that l i.i.d.
    Uniform(0, tau) times have range at most delta.
    """
    _check_delta_tau(delta, tau)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = n_draws
    while remaining > 0:
        block = min(remaining, _MC_CHUNK)
        u = rng.uniform(0.0, tau, size=(block, l))
        hits += int((u.max(axis=1) - u.min(axis=1) <= delta).sum())
        remaining -= block
    est = hits / n_draws
    se = math.sqrt(est * (1.0 - est) / n_draws)
    return est, se


def motif_match_probability(n_nodes: int, k: int, l: int) -> float:
    """P(l uniform ordered edges form, in time order, the motif pattern).

    Choosing which k of the n nodes participate and one of the k! label
    assignments fully determines the required edge at every position (the
    template pins the node map), and distinct choices give distinct edge
    sequences, so the events are disjoint:

        binom(n, k) * k! / (n * (n - 1))^l

    Exact for every connected motif on k nodes with l edges, including
    recurrent-edge templates.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if n_nodes < k:
        raise ValueError(f"need n_nodes >= k, got n_nodes={n_nodes}, k={k}")
    if l < k - 1:
        raise ValueError(f"a connected motif needs l >= k-1, got l={l}, k={k}")
    return math.comb(n_nodes, k) * math.factorial(k) / (n_nodes * (n_nodes - 1)) ** l


def expected_count_uniform(
    params: TheoryParams,
    pi: float | None = None,
    mc_draws: int = 500_000,
    seed: int = 0,
) -> float:
    """Exact expected motif count under the uniform Poisson model.

    ``pi`` can be supplied directly; otherwise it is 1 for l = 1, the
    closed form for l = 2, and a Monte-Carlo estimate (mc_draws, seed) for
    l >= 3, making the result an estimate in that regime.
    """
    if pi is None:
        if params.l == 1:
            pi = 1.0
        elif params.l == 2:
            pi = pi_closed_form_l2(params.delta, params.tau)
        else:
            pi, _ = pi_monte_carlo(params.delta, params.tau, params.l, mc_draws, seed)
    mean_events = params.rate * params.tau
    expected_combos = mean_events**params.l / math.factorial(params.l)
    return expected_combos * pi * motif_match_probability(params.n_nodes, params.k, params.l)
