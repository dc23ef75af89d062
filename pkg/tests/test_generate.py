import math

import numpy as np
import pytest
from scipy import stats

from tmotif import (
    SBMPoissonConfig,
    UniformPoissonConfig,
    generate_fixed_length,
    generate_sbm,
    generate_uniform,
)


class TestConfigs:
    def test_uniform_validation(self):
        with pytest.raises(ValueError):
            UniformPoissonConfig(rate=0.0, tau=1.0, n_nodes=5)
        with pytest.raises(ValueError):
            UniformPoissonConfig(rate=1.0, tau=-1.0, n_nodes=5)
        with pytest.raises(ValueError):
            UniformPoissonConfig(rate=1.0, tau=1.0, n_nodes=1)

    def test_sbm_validation(self):
        with pytest.raises(ValueError):
            SBMPoissonConfig(block_sizes=(), intensity=(), tau=1.0)
        with pytest.raises(ValueError):
            SBMPoissonConfig(block_sizes=(2,), intensity=((-0.1,),), tau=1.0)
        with pytest.raises(ValueError):
            SBMPoissonConfig(block_sizes=(2,), intensity=((0.0,),), tau=1.0)
        with pytest.raises(ValueError):
            SBMPoissonConfig(block_sizes=(2, 2), intensity=((0.1,),), tau=1.0)

    def test_memberships_layout(self):
        cfg = SBMPoissonConfig(block_sizes=(2, 3), intensity=((0.1, 0.2), (0.3, 0.4)), tau=1.0)
        assert cfg.memberships.tolist() == [0, 0, 1, 1, 1]
        assert cfg.n_nodes == 5


class TestUniformModel:
    def test_determinism(self):
        cfg = UniformPoissonConfig(rate=20.0, tau=5.0, n_nodes=10, seed=99)
        a, b = generate_uniform(cfg), generate_uniform(cfg)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)

    def test_registry_covers_all_nodes(self):
        cfg = UniformPoissonConfig(rate=1.0, tau=1.0, n_nodes=50, seed=0)
        assert generate_uniform(cfg).n_nodes == 50

    def test_times_within_horizon_and_sorted(self):
        cfg = UniformPoissonConfig(rate=100.0, tau=3.0, n_nodes=5, seed=1)
        s = generate_uniform(cfg)
        assert len(s) > 0
        assert float(s.times.min()) >= 0.0 and float(s.times.max()) <= 3.0
        assert np.all(np.diff(s.times) >= 0)

    def test_poisson_mean_of_edge_count(self):
        lam_tau = 200.0
        counts = [
            len(generate_uniform(UniformPoissonConfig(rate=50.0, tau=4.0, n_nodes=20, seed=s)))
            for s in range(200)
        ]
        mc_err = 3 * math.sqrt(lam_tau) / math.sqrt(200)
        assert abs(float(np.mean(counts)) - lam_tau) <= mc_err

    def test_two_node_marginal(self):
        cfg = UniformPoissonConfig(rate=4000.0, tau=1.0, n_nodes=2, seed=3)
        s = generate_uniform(cfg)
        frac01 = np.mean((s.src == 0) & (s.dst == 1))
        assert abs(frac01 - 0.5) <= 3 * 0.5 / math.sqrt(len(s))

    def test_uniform_pair_chi_square(self):
        n = 6
        cfg = UniformPoissonConfig(rate=30000.0, tau=1.0, n_nodes=n, seed=8)
        s = generate_uniform(cfg)
        pair_ids = s.src * n + s.dst
        counts = np.bincount(pair_ids, minlength=n * n).reshape(n, n)
        observed = counts[~np.eye(n, dtype=bool)]
        chi2 = ((observed - observed.mean()) ** 2 / observed.mean()).sum()
        crit = stats.chi2.ppf(0.99, df=n * (n - 1) - 1)
        assert chi2 < crit

    def test_thinning_matches_lower_rate(self):
        # keeping each event w.p. q is distributionally Poisson(rate*q)
        q = 0.3
        kept, direct = [], []
        for seed in range(150):
            s = generate_uniform(UniformPoissonConfig(rate=100.0, tau=2.0, n_nodes=10, seed=seed))
            keep = np.random.default_rng(seed + 10_000).random(len(s)) < q
            kept.append(int(keep.sum()))
            s2 = generate_uniform(
                UniformPoissonConfig(rate=100.0 * q, tau=2.0, n_nodes=10, seed=seed + 20_000)
            )
            direct.append(len(s2))
        mu = 100.0 * q * 2.0
        se = math.sqrt(mu / 150)
        assert abs(np.mean(kept) - mu) <= 3 * se
        assert abs(np.mean(direct) - mu) <= 3 * se
        assert abs(np.var(kept) / np.mean(kept) - 1.0) < 0.35


class TestSBMModel:
    def test_single_positive_class_contains_all_edges(self):
        cfg = SBMPoissonConfig(
            block_sizes=(3, 3),
            intensity=((0.0, 2.0), (0.0, 0.0)),
            tau=5.0,
            seed=4,
        )
        s = generate_sbm(cfg)
        assert len(s) > 0
        z = cfg.memberships
        assert all(z[e.src] == 0 and z[e.dst] == 1 for e in s)

    def test_superposition_mean(self):
        cfg_base = dict(
            block_sizes=(50, 50),
            intensity=((0.2, 0.06), (0.06, 0.2)),
            tau=0.5,
        )
        # aggregate rate: within-block ordered pairs 2*50*49 at 0.2, across 2*50*50 at 0.06
        agg = (2 * 50 * 49) * 0.2 + (2 * 50 * 50) * 0.06
        counts = [len(generate_sbm(SBMPoissonConfig(**cfg_base, seed=s))) for s in range(60)]
        mu = agg * 0.5
        se = math.sqrt(mu / 60)
        assert abs(float(np.mean(counts)) - mu) <= 3 * se

    def test_variance_to_mean_ratio_near_one(self):
        cfg_base = dict(block_sizes=(10, 10), intensity=((0.3, 0.1), (0.1, 0.3)), tau=1.0)
        counts = [len(generate_sbm(SBMPoissonConfig(**cfg_base, seed=s))) for s in range(2000)]
        ratio = float(np.var(counts)) / float(np.mean(counts))
        assert 0.9 <= ratio <= 1.1

    def test_single_block_reduces_to_uniform_rate(self):
        rate = 0.4
        n = 8
        counts = [
            len(generate_sbm(SBMPoissonConfig(block_sizes=(n,), intensity=((rate,),), tau=1.0, seed=s)))
            for s in range(300)
        ]
        mu = n * (n - 1) * rate
        assert abs(float(np.mean(counts)) - mu) <= 3 * math.sqrt(mu / 300)
        assert abs(float(np.var(counts)) / float(np.mean(counts)) - 1.0) < 0.25

    def test_determinism(self):
        cfg = SBMPoissonConfig(block_sizes=(4, 4), intensity=((0.5, 0.1), (0.1, 0.5)), tau=2.0, seed=6)
        a, b = generate_sbm(cfg), generate_sbm(cfg)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.src, b.src)


class TestFixedLength:
    def test_zero_target(self):
        cfg = UniformPoissonConfig(rate=5.0, tau=1.0, n_nodes=4, seed=0)
        assert len(generate_fixed_length(cfg, 0)) == 0

    def test_exact_length(self):
        cfg = UniformPoissonConfig(rate=250.0, tau=28.0, n_nodes=100, seed=1)
        assert len(generate_fixed_length(cfg, 7000)) == 7000

    def test_determinism(self):
        cfg = UniformPoissonConfig(rate=10.0, tau=1.0, n_nodes=5, seed=11)
        a = generate_fixed_length(cfg, 200)
        b = generate_fixed_length(cfg, 200)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.dst, b.dst)

    def test_negative_target_rejected(self):
        cfg = UniformPoissonConfig(rate=10.0, tau=1.0, n_nodes=5, seed=0)
        with pytest.raises(ValueError):
            generate_fixed_length(cfg, -1)

    def test_zero_aggregate_rate_rejected(self):
        # positive intensity exists but only on a size-1 block's diagonal
        cfg = SBMPoissonConfig(block_sizes=(1, 1), intensity=((5.0, 0.0), (0.0, 0.0)), tau=1.0)
        with pytest.raises(ValueError):
            generate_fixed_length(cfg, 10)

    def test_sbm_fixed_length(self):
        cfg = SBMPoissonConfig(
            block_sizes=(5, 5), intensity=((0.3, 0.05), (0.05, 0.3)), tau=1.0, seed=2
        )
        s = generate_fixed_length(cfg, 500)
        assert len(s) == 500
        assert np.all(s.src != s.dst)

    def test_interarrival_rate(self):
        # mean spacing is 1/aggregate-rate
        cfg = UniformPoissonConfig(rate=50.0, tau=1.0, n_nodes=10, seed=3)
        s = generate_fixed_length(cfg, 20000)
        spacing = float(np.mean(np.diff(s.times)))
        assert abs(spacing - 1 / 50.0) < 3 * (1 / 50.0) / math.sqrt(20000)
