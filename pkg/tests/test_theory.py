import math
from itertools import permutations, product

import numpy as np
import pytest

from tmotif import (
    DeltaQuery,
    MotifSpec,
    TheoryParams,
    UniformPoissonConfig,
    cyclic_triangle,
    exact_count,
    expected_count_uniform,
    generate_uniform,
    motif_match_probability,
    pi_closed_form_l2,
    pi_lower_bound,
    pi_monte_carlo,
)


class TestPiClosedForm:
    def test_delta_equals_tau(self):
        assert pi_closed_form_l2(10.0, 10.0) == 1.0

    def test_half_ratio(self):
        assert pi_closed_form_l2(5.0, 10.0) == 0.75

    def test_small_ratio(self):
        assert pi_closed_form_l2(1.0, 100.0) == pytest.approx(0.0199)

    def test_rejects_delta_above_tau(self):
        with pytest.raises(ValueError):
            pi_closed_form_l2(11.0, 10.0)


class TestPiLowerBound:
    def test_l1_bound_below_truth(self):
        # the l=1 span probability is identically 1
        assert pi_lower_bound(3.0, 10.0, 1) <= 1.0

    def test_half_ratio_l2(self):
        assert pi_lower_bound(5.0, 10.0, 2) == 0.5
        assert pi_lower_bound(5.0, 10.0, 2) <= pi_closed_form_l2(5.0, 10.0)

    def test_tenth_ratio_l3(self):
        assert pi_lower_bound(1.0, 10.0, 3) == pytest.approx(0.01)

    def test_bound_below_closed_form_on_grid(self):
        for ratio in (0.01, 0.1, 0.5, 1.0):
            assert pi_lower_bound(ratio, 1.0, 2) <= pi_closed_form_l2(ratio, 1.0) + 1e-12


class TestPiMonteCarlo:
    def test_delta_equals_tau_is_certain(self):
        est, se = pi_monte_carlo(5.0, 5.0, 3, 1000, seed=0)
        assert est == 1.0 and se == 0.0

    def test_matches_closed_form_l2(self):
        for ratio in (0.01, 0.1, 0.5, 1.0):
            est, se = pi_monte_carlo(ratio, 1.0, 2, 200_000, seed=42)
            assert abs(est - pi_closed_form_l2(ratio, 1.0)) <= 3 * max(se, 1e-9)

    def test_lower_bound_respected_l3(self):
        est, se = pi_monte_carlo(0.2, 1.0, 3, 200_000, seed=7)
        assert pi_lower_bound(0.2, 1.0, 3) <= est + 3 * se

    def test_deterministic(self):
        assert pi_monte_carlo(0.3, 1.0, 2, 10_000, seed=5) == pi_monte_carlo(
            0.3, 1.0, 2, 10_000, seed=5
        )


def exhaustive_match_probability(n_nodes: int, motif: MotifSpec) -> float:
    """Oracle: enumerate every ordered edge sequence and test the pattern."""
    pairs = [(a, b) for a in range(n_nodes) for b in range(n_nodes) if a != b]
    hits = 0
    for seq in product(pairs, repeat=motif.l):
        for perm in permutations(range(n_nodes), motif.k):
            # perm[j] = stream node assigned to motif node j
            if all(seq[i] == (perm[u], perm[v]) for i, (u, v) in enumerate(motif.edges)):
                hits += 1
                break
    return hits / len(pairs) ** motif.l


class TestMatchProbability:
    def test_two_nodes_single_edge(self):
        assert motif_match_probability(2, 2, 1) == 1.0

    def test_three_nodes_single_edge(self):
        assert motif_match_probability(3, 2, 1) == 1.0

    def test_cyclic_triangle_value(self):
        val = motif_match_probability(100, 3, 3)
        assert val == pytest.approx(math.comb(100, 3) * 6 / 9900**3, rel=1e-12)

    @pytest.mark.parametrize(
        "n_nodes,motif",
        [
            (4, MotifSpec(k=2, edges=((0, 1), (1, 0)))),
            (4, MotifSpec(k=2, edges=((0, 1), (0, 1)))),
            (4, MotifSpec(k=3, edges=((0, 1), (1, 2)))),
            (5, MotifSpec(k=3, edges=((0, 1), (1, 2), (2, 0)))),
        ],
    )
    def test_exhaustive_enumeration_agrees(self, n_nodes, motif):
        expected = exhaustive_match_probability(n_nodes, motif)
        assert motif_match_probability(n_nodes, motif.k, motif.l) == pytest.approx(expected)

    def test_monte_carlo_match_event_agrees(self):
        # draw random ordered edge triples and test the cyclic-triangle pattern
        n, reps = 12, 300_000
        rng = np.random.default_rng(3)
        tri = cyclic_triangle()
        q = DeltaQuery(tri, 10.0)
        from tmotif import TemporalEdge, matches_instance

        idx = rng.integers(0, n * (n - 1), size=(reps, 3))
        srcs = idx // (n - 1)
        offs = idx % (n - 1)
        dsts = offs + (offs >= srcs)
        hits = 0
        for r in range(reps):
            cand = [TemporalEdge(int(srcs[r, j]), int(dsts[r, j]), float(j), j) for j in range(3)]
            if matches_instance(q, cand):
                hits += 1
        est = hits / reps
        se = math.sqrt(max(est * (1 - est), 1e-12) / reps)
        assert abs(est - motif_match_probability(n, 3, 3)) <= 3 * se

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            motif_match_probability(2, 3, 3)
        with pytest.raises(ValueError):
            motif_match_probability(5, 3, 1)


class TestExpectedCount:
    def test_single_edge_motif_mean_is_rate_times_tau(self):
        params = TheoryParams(delta=1.0, tau=50.0, l=1, k=2, n_nodes=10, rate=3.0)
        assert expected_count_uniform(params) == pytest.approx(150.0)

    def test_vanishes_with_rate(self):
        params = TheoryParams(delta=1.0, tau=10.0, l=2, k=2, n_nodes=10, rate=1e-9)
        assert expected_count_uniform(params) < 1e-12

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TheoryParams(delta=2.0, tau=1.0, l=2, k=2, n_nodes=10, rate=1.0)
        with pytest.raises(ValueError):
            TheoryParams(delta=1.0, tau=2.0, l=2, k=12, n_nodes=10, rate=1.0)

    def test_matches_simulation_l2(self):
        # reciprocal pair motif on a small node set, moderate traffic
        motif = MotifSpec(k=2, edges=((0, 1), (1, 0)))
        delta, tau, rate, n_nodes = 2.0, 60.0, 10.0, 12
        params = TheoryParams(delta=delta, tau=tau, l=2, k=2, n_nodes=n_nodes, rate=rate)
        predicted = expected_count_uniform(params)
        q = DeltaQuery(motif, delta)
        counts = []
        for seed in range(250):
            s = generate_uniform(UniformPoissonConfig(rate=rate, tau=tau, n_nodes=n_nodes, seed=seed))
            counts.append(exact_count(s, q).total)
        mc_err = 3 * float(np.std(counts, ddof=1)) / math.sqrt(len(counts))
        assert abs(float(np.mean(counts)) - predicted) <= mc_err
