"""Edge sampling, the inverse-probability count estimator, and diagnostics.

Each stream edge is retained independently with probability p; the count
estimator reweights the observed local counts by 1/p, which makes it
unbiased:

    c_hat      = (1 / (p l)) * sum_i omega_i * eta_i
    sigma2     = ((1 - p) / (p l^2)) * sum_i eta_i^2        (exact variance)
    sigma2_hat = ((1 - p) / (p^2 l^2)) * sum_i omega_i * eta_i^2

sigma2_hat is itself unbiased for sigma2 and yields normal-theory
confidence intervals c_hat +/- z_{alpha/2} * sqrt(sigma2_hat). Two ratios
of eta power sums certify the asymptotic regimes: consistency needs
sum(eta^2)/sum(eta)^2 -> 0 and normality needs
sum(eta^3)/sum(eta^2)^{3/2} -> 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.special import ndtri

from .counting import LocalCountProfile

__all__ = [
    "ConditionDiagnostics",
    "ReplicateRow",
    "ReplicateTable",
    "SampleEstimate",
    "SampleMask",
    "derive_seed",
    "diagnostics",
    "draw_mask",
    "ht_estimate",
    "normal_quantile",
    "replicate_estimates",
]

REPLICATE_CSV_HEADER = ("rep", "seed", "c_hat", "ratio", "sigma2_hat", "ci_lo", "ci_hi", "covered")


def normal_quantile(q: float) -> float:
    """Standard normal inverse CDF (accurate to well below 1e-9)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must be in (0,1), got {q}")
    return float(ndtri(q))


def derive_seed(base_seed: int, *path: int) -> int:
    """Derive a 64-bit child seed from a base seed and an index path.

    The derivation depends only on (base_seed, path), not on the order in
    which seeds are requested, so replicates can be generated independently
    and concurrently yet reproducibly.
    """
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(i) for i in path))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SampleMask:
    """An i.i.d. Bernoulli(p) edge-retention mask, deterministic given seed."""

    omega: np.ndarray
    p: float
    seed: int

    def __post_init__(self):
        omega = np.ascontiguousarray(self.omega, dtype=bool)
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @property
    def m(self) -> int:
        return len(self.omega)

    @property
    def popcount(self) -> int:
        return int(self.omega.sum())


@dataclass(frozen=True)
class SampleEstimate:
    """Point estimate with exact variance, estimated variance, and CI.

    ``z_stat`` standardizes the estimation error by the exact sampling
    standard deviation and is None when that variance is zero. The CI is
    built from the estimated variance; when nothing informative was sampled
    the interval degenerates to a point and ``degenerate`` is set.
    """

    c_hat: float
    sigma2_true: float
    sigma2_hat: float
    z_stat: float | None
    ci_lo: float
    ci_hi: float
    alpha: float
    degenerate: bool

    def covers(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


def draw_mask(m: int, p: float, seed: int) -> SampleMask:
    """Draw an m-edge Bernoulli(p) retention mask from the given seed."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling probability must be in (0,1], got {p}")
    if m < 0:
        raise ValueError(f"mask length must be non-negative, got {m}")
    rng = np.random.default_rng(seed)
    omega = rng.random(m) < p
    return SampleMask(omega=omega, p=float(p), seed=int(seed))


def _estimate_from_sums(
    s_eta: int, s_eta2: int, profile: LocalCountProfile, p: float, alpha: float
) -> SampleEstimate:
    l = profile.query.motif.l
    c_hat = s_eta / (p * l)
    sigma2_hat = (1.0 - p) / (p * p * l * l) * s_eta2
    sigma2_true = (1.0 - p) / (p * l * l) * profile.sum_eta2
    if sigma2_true > 0.0:
        z = (c_hat - profile.total) / math.sqrt(sigma2_true)
    else:
        z = None
    half = normal_quantile(1.0 - alpha / 2.0) * math.sqrt(sigma2_hat)
    return SampleEstimate(
        c_hat=c_hat,
        sigma2_true=sigma2_true,
        sigma2_hat=sigma2_hat,
        z_stat=z,
        ci_lo=c_hat - half,
        ci_hi=c_hat + half,
        alpha=alpha,
        degenerate=(sigma2_hat == 0.0),
    )


def ht_estimate(profile: LocalCountProfile, mask: SampleMask, alpha: float = 0.05) -> SampleEstimate:
    """Inverse-probability count estimate from one sampled-edge mask.

    The weighted sums over sampled local counts are accumulated in exact
    integer arithmetic and scaled once, so c_hat is exact whenever
    representable in a double.
    """
    if mask.m != profile.m:
        raise ValueError(f"mask length {mask.m} != profile length {profile.m}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    eta = profile.eta
    sampled = eta[mask.omega]
    s_eta = int(sampled.sum())
    s_eta2 = int((sampled * sampled).sum())
    return _estimate_from_sums(s_eta, s_eta2, profile, mask.p, alpha)


@dataclass(frozen=True)
class ConditionDiagnostics:
    """Computable checks of the regimes that make the estimator trustworthy.

    ``r_consistency`` = sum(eta^2)/sum(eta)^2 and ``r_clt`` =
    sum(eta^3)/sum(eta^2)^{3/2} must be small for the relative error to
    vanish and for the standardized error to be near normal, respectively.
    ``berry_esseen_bound`` scales r_clt by ((1-p)^2 + p^2)/sqrt(p(1-p)), a
    proxy for the normal-approximation error of the standardized statistic.
    ``count_growth`` reports total/m^(2/3): the normality regime needs the
    count to dominate m^(2/3) while no single edge dominates (``max_eta``).
    """

    r_consistency: float
    r_clt: float
    berry_esseen_bound: float
    max_eta: int
    count_growth: float
    defined: bool


def diagnostics(profile: LocalCountProfile, p: float) -> ConditionDiagnostics:
    """Condition ratios and normal-approximation proxy for a profile."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling probability must be in (0,1], got {p}")
    s1, s2, s3 = profile.sum_eta, profile.sum_eta2, profile.sum_eta3
    m = profile.m
    growth = profile.total / m ** (2.0 / 3.0) if m else math.nan
    if s1 == 0:
        return ConditionDiagnostics(
            r_consistency=math.nan,
            r_clt=math.nan,
            berry_esseen_bound=math.nan,
            max_eta=profile.max_eta,
            count_growth=growth,
            defined=False,
        )
    r_cons = s2 / s1**2
    r_clt = s3 / s2**1.5
    be_factor = math.inf if p == 1.0 else ((1.0 - p) ** 2 + p**2) / math.sqrt(p * (1.0 - p))
    return ConditionDiagnostics(
        r_consistency=r_cons,
        r_clt=r_clt,
        berry_esseen_bound=be_factor * r_clt,
        max_eta=profile.max_eta,
        count_growth=growth,
        defined=True,
    )


@dataclass(frozen=True)
class ReplicateRow:
    rep: int
    seed: int
    c_hat: float
    ratio: float
    sigma2_hat: float
    ci_lo: float
    ci_hi: float
    covered: bool


class ReplicateTable:
    """Replicated sampling estimates for one fixed profile.

    Replicate r draws its mask from a seed derived as (base_seed, r), so
    the table is reproducible and independent of execution order. Rows are
    always in replicate order. ``covered`` records whether the replicate CI
    contains the true count; a degenerate [0,0] interval therefore counts
    as covering only when the true count is 0.
    """

    def __init__(self, rows: Sequence[ReplicateRow], true_total: int, p: float, alpha: float):
        self.rows = list(rows)
        self.true_total = true_total
        self.p = p
        self.alpha = alpha

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows], dtype=np.float64)

    @property
    def c_hats(self) -> np.ndarray:
        return np.array([r.c_hat for r in self.rows], dtype=np.float64)

    @property
    def sigma2_hats(self) -> np.ndarray:
        return np.array([r.sigma2_hat for r in self.rows], dtype=np.float64)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def std_ratio(self) -> float:
        """Sample standard deviation (ddof=1) of the ratio over replicates."""
        vals = self.ratios
        return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

    @property
    def coverage_rf(self) -> float:
        return sum(r.covered for r in self.rows) / len(self.rows)

    def write_csv(self, out: TextIO) -> None:
        out.write(",".join(REPLICATE_CSV_HEADER) + "\n")
        for r in self.rows:
            out.write(
                f"{r.rep},{r.seed},{r.c_hat!r},{r.ratio!r},{r.sigma2_hat!r},"
                f"{r.ci_lo!r},{r.ci_hi!r},{int(r.covered)}\n"
            )


def _replicate_range(
    profile: LocalCountProfile,
    p: float,
    alpha: float,
    base_seed: int,
    reps: Iterable[int],
) -> list[ReplicateRow]:
    eta = profile.eta
    eta2 = eta * eta
    m = profile.m
    total = profile.total
    l = profile.query.motif.l
    rows = []
    for rep in reps:
        seed = derive_seed(base_seed, rep)
        omega = np.random.default_rng(seed).random(m) < p
        s1 = int(eta[omega].sum())
        s2 = int(eta2[omega].sum())
        est = _estimate_from_sums(s1, s2, profile, p, alpha)
        ratio = est.c_hat / total if total > 0 else math.nan
        rows.append(
            ReplicateRow(
                rep=rep,
                seed=seed,
                c_hat=est.c_hat,
                ratio=ratio,
                sigma2_hat=est.sigma2_hat,
                ci_lo=est.ci_lo,
                ci_hi=est.ci_hi,
                covered=est.covers(total),
            )
        )
    return rows


def _replicate_chunk(args) -> list[ReplicateRow]:
    profile, p, alpha, base_seed, lo, hi = args
    return _replicate_range(profile, p, alpha, base_seed, range(lo, hi))


def replicate_estimates(
    profile: LocalCountProfile,
    p: float,
    alpha: float = 0.05,
    reps: int = 100,
    base_seed: int = 0,
    workers: int = 1,
) -> ReplicateTable:
    """Run ``reps`` independent sampling replicates against a fixed profile.

    Replicates are embarrassingly parallel; with ``workers > 1`` they are
    chunked across processes and reassembled in replicate order, producing
    output identical to a serial run.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling probability must be in (0,1], got {p}")
    if workers > 1 and reps > 1:
        n_chunks = min(reps, workers * 4)
        step = -(-reps // n_chunks)
        tasks = [
            (profile, p, alpha, base_seed, lo, min(lo + step, reps))
            for lo in range(0, reps, step)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_replicate_chunk, tasks))
        rows = [row for chunk in chunks for row in chunk]
    else:
        rows = _replicate_range(profile, p, alpha, base_seed, range(reps))
    return ReplicateTable(rows, true_total=profile.total, p=p, alpha=alpha)
