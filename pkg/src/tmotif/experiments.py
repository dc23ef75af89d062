"""Batch experiment harness: replicated sampling studies emitted as CSV.

Three modes:

* deterministic - per sweep value, one stream is generated and frozen, its
  exact profile computed once, and sampling replicates run against it.
* stochastic - per sweep value, every replicate draws a fresh stream and a
  fresh mask, so the stream model's randomness enters the estimates.
* coverage - one fixed stream (from file or generated), sweeping the
  sampling ratio and reporting how often the confidence interval covers
  the true count.

All randomness is derived from (base_seed, sweep index, replicate index,
purpose), so outputs are byte-identical across runs and worker counts.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .counting import exact_count
from .estimation import (
    derive_seed,
    draw_mask,
    ht_estimate,
    normal_quantile,
    replicate_estimates,
)
from .generate import (
    SBMPoissonConfig,
    UniformPoissonConfig,
    generate_fixed_length,
    generate_sbm,
    generate_uniform,
)
from .motif import DeltaQuery, MotifSpec, load_motif, validate_motif
from .stream import parse_stream

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "fd_histogram",
    "run_coverage_experiment",
    "run_deterministic_experiment",
    "run_stochastic_experiment",
    "wilson_interval",
]

# Namespaces for seed derivation so stream and mask randomness never collide.
_NS_STREAM = 0
_NS_MASK = 1

MODES = ("deterministic", "stochastic", "coverage")
SWEEP_PARAMS = ("rate", "diag_intensity", "tau", "p")

DET_SUMMARY_HEADER = (
    "sweep_param,sweep_value,m,n_nodes,total_count,p,reps,mean_ratio,std_ratio\n"
)
DET_REPLICATES_HEADER = "sweep_value,rep,seed,c_hat,ratio,sigma2_hat,ci_lo,ci_hi,covered\n"
HIST_HEADER = "sweep_value,bin_lo,bin_hi,count\n"
STO_SUMMARY_HEADER = (
    "sweep_param,sweep_value,p,reps,valid_reps,empty_streams,zero_count_reps,"
    "mean_ratio,std_ratio\n"
)
STO_REPLICATES_HEADER = (
    "sweep_value,rep,stream_seed,mask_seed,m,total_count,c_hat,ratio,z,flag\n"
)
COV_SUMMARY_HEADER = (
    "p,reps,total_count,covered,coverage_rf,wilson_lo,wilson_hi,mean_ratio,std_ratio\n"
)
COV_REPLICATES_HEADER = "p,rep,seed,c_hat,ratio,sigma2_hat,ci_lo,ci_hi,covered\n"

HISTOGRAM_MIN_REPS = 1000


def _fmt(x) -> str:
    """Full round-trip formatting: repr for floats, plain str otherwise."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _row(*values) -> str:
    return ",".join(_fmt(v) for v in values) + "\n"


def wilson_interval(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    z = normal_quantile(0.5 + level / 2.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n)) / denom
    return center - half, center + half


def fd_histogram(values: Sequence[float]) -> list[tuple[float, float, int]]:
    """Freedman-Diaconis histogram as (bin_lo, bin_hi, count) rows."""
    vals = np.asarray([v for v in values if math.isfinite(v)], dtype=np.float64)
    n = len(vals)
    if n == 0:
        return []
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        return [(lo, hi, n)]
    q25, q75 = np.percentile(vals, [25.0, 75.0])
    width = 2.0 * (q75 - q25) / n ** (1.0 / 3.0)
    nbins = max(1, math.ceil((hi - lo) / width)) if width > 0 else 1
    counts, edges = np.histogram(vals, bins=nbins, range=(lo, hi))
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))
    ]


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one experiment run.

    ``sweep_param`` names the quantity the sweep values are applied to:
    the uniform model's rate, the block model's diagonal intensity, the
    horizon tau, or the sampling ratio p. ``m_target`` switches generation
    to exact-length mode. For coverage mode an ``input_path`` stream file
    may replace the generator.
    """

    mode: str
    motif: MotifSpec
    delta: float
    sweep_param: str
    sweep: tuple[float, ...]
    p: float = 0.03
    alpha: float = 0.05
    reps: int = 100
    base_seed: int = 0
    workers: int = 1
    model: str | None = None
    rate: float | None = None
    tau: float | None = None
    n_nodes: int | None = None
    block_sizes: tuple[int, ...] | None = None
    intensity: tuple[tuple[float, ...], ...] | None = None
    m_target: int | None = None
    input_path: str | None = None
    output: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"sweep_param must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}")
        if not self.sweep:
            raise ValueError("sweep must be non-empty")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        object.__setattr__(self, "sweep", tuple(float(v) for v in self.sweep))
        if self.mode == "coverage":
            if self.sweep_param != "p":
                raise ValueError("coverage mode sweeps the sampling ratio p")
            if self.input_path is None and self.model is None:
                raise ValueError("coverage mode needs an input stream or a generator model")
        elif self.model is None:
            raise ValueError(f"{self.mode} mode needs a generator model")
        if self.model is not None and self.model not in ("uniform", "sbm"):
            raise ValueError(f"model must be 'uniform' or 'sbm', got {self.model!r}")
        if self.sweep_param == "diag_intensity" and self.model != "sbm":
            raise ValueError("diag_intensity sweep requires the sbm model")

    @property
    def query(self) -> DeltaQuery:
        return DeltaQuery(self.motif, self.delta)

    @classmethod
    def from_mapping(cls, raw: dict, base_dir: str | None = None) -> "ExperimentSpec":
        """Build a spec from a JSON-shaped mapping (CLI --spec file)."""
        raw = dict(raw)
        motif_raw = raw.pop("motif")
        if isinstance(motif_raw, str):
            path = Path(motif_raw)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            motif = load_motif(str(path))
        else:
            motif = validate_motif(motif_raw)
        if "sweep" in raw:
            raw["sweep"] = tuple(raw["sweep"])
        if raw.get("block_sizes") is not None:
            raw["block_sizes"] = tuple(raw["block_sizes"])
        if raw.get("intensity") is not None:
            raw["intensity"] = tuple(tuple(r) for r in raw["intensity"])
        return cls(motif=motif, **raw)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_mapping(json.load(fh), base_dir=str(Path(path).parent))

    def generator_config(self, sweep_value: float, seed: int):
        """Materialize the generator config with the sweep value applied."""
        rate = self.rate
        tau = self.tau
        intensity = self.intensity
        if self.sweep_param == "rate":
            rate = sweep_value
        elif self.sweep_param == "tau":
            tau = sweep_value
        elif self.sweep_param == "diag_intensity":
            intensity = tuple(
                tuple(sweep_value if i == j else x for j, x in enumerate(row))
                for i, row in enumerate(self.intensity)
            )
        if self.model == "uniform":
            if rate is None or self.n_nodes is None:
                raise ValueError("uniform model needs rate and n_nodes")
            if tau is None:
                if self.m_target is None:
                    raise ValueError("uniform model needs tau unless m_target is set")
                tau = self.m_target / rate  # nominal horizon; unused in fixed-length mode
            return UniformPoissonConfig(rate=rate, tau=tau, n_nodes=self.n_nodes, seed=seed)
        if self.block_sizes is None or intensity is None:
            raise ValueError("sbm model needs block_sizes and intensity")
        if tau is None:
            if self.m_target is None:
                raise ValueError("sbm model needs tau unless m_target is set")
            tau = 1.0  # nominal; unused in fixed-length mode
        return SBMPoissonConfig(
            block_sizes=self.block_sizes, intensity=intensity, tau=tau, seed=seed
        )

    def p_at(self, sweep_value: float) -> float:
        return sweep_value if self.sweep_param == "p" else self.p

    def draw_stream(self, sweep_value: float, seed: int):
        cfg = self.generator_config(sweep_value, seed)
        if self.m_target is not None:
            return generate_fixed_length(cfg, self.m_target)
        if isinstance(cfg, UniformPoissonConfig):
            return generate_uniform(cfg)
        return generate_sbm(cfg)


@dataclass
class ExperimentResult:
    """CSV text blocks produced by one experiment run."""

    summary: str
    replicates: str
    histogram: str | None = None
    files: dict[str, str] = field(default_factory=dict)

    def write(self, output: str) -> dict[str, str]:
        """Write the blocks next to ``output`` (a path, .csv optional)."""
        base = output[:-4] if output.endswith(".csv") else output
        paths = {"summary": f"{base}.summary.csv", "replicates": f"{base}.replicates.csv"}
        Path(paths["summary"]).parent.mkdir(parents=True, exist_ok=True)
        Path(paths["summary"]).write_text(self.summary, encoding="utf-8")
        Path(paths["replicates"]).write_text(self.replicates, encoding="utf-8")
        if self.histogram is not None:
            paths["histogram"] = f"{base}.hist.csv"
            Path(paths["histogram"]).write_text(self.histogram, encoding="utf-8")
        self.files = paths
        return paths


def run_deterministic_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Fixed-stream sampling study: one generated stream per sweep value.

    The stream and its exact profile are computed once per sweep value and
    frozen; sampling masks are the only randomness across replicates. Ratio
    histograms are emitted when reps >= 1000.
    """
    if spec.mode != "deterministic":
        raise ValueError(f"spec mode is {spec.mode!r}, expected 'deterministic'")
    summary = [DET_SUMMARY_HEADER]
    reps_out = [DET_REPLICATES_HEADER]
    hist_out = [HIST_HEADER]
    emit_hist = spec.reps >= HISTOGRAM_MIN_REPS
    for si, value in enumerate(spec.sweep):
        stream = spec.draw_stream(value, derive_seed(spec.base_seed, si, _NS_STREAM))
        profile = exact_count(stream, spec.query, workers=spec.workers)
        table = replicate_estimates(
            profile,
            p=spec.p_at(value),
            alpha=spec.alpha,
            reps=spec.reps,
            base_seed=derive_seed(spec.base_seed, si, _NS_MASK),
            workers=spec.workers,
        )
        summary.append(
            _row(
                spec.sweep_param,
                value,
                len(stream),
                stream.n_nodes,
                profile.total,
                table.p,
                spec.reps,
                table.mean_ratio,
                table.std_ratio,
            )
        )
        for r in table.rows:
            reps_out.append(
                _row(value, r.rep, r.seed, r.c_hat, r.ratio, r.sigma2_hat, r.ci_lo, r.ci_hi, r.covered)
            )
        if emit_hist:
            for lo, hi, count in fd_histogram(table.ratios):
                hist_out.append(_row(value, lo, hi, count))
    return ExperimentResult(
        summary="".join(summary),
        replicates="".join(reps_out),
        histogram="".join(hist_out) if emit_hist else None,
    )


def _sto_replicate(args) -> tuple:
    spec, si, value, rep = args
    stream_seed = derive_seed(spec.base_seed, si, rep, _NS_STREAM)
    mask_seed = derive_seed(spec.base_seed, si, rep, _NS_MASK)
    stream = spec.draw_stream(value, stream_seed)
    m = len(stream)
    if m == 0:
        return (si, rep, stream_seed, mask_seed, 0, 0, math.nan, math.nan, math.nan, "empty_stream")
    profile = exact_count(stream, spec.query)
    est = ht_estimate(profile, draw_mask(m, spec.p_at(value), mask_seed), spec.alpha)
    if profile.total == 0:
        return (
            si, rep, stream_seed, mask_seed, m, 0, est.c_hat, math.nan, math.nan, "zero_count",
        )
    z = math.nan if est.z_stat is None else est.z_stat
    return (
        si, rep, stream_seed, mask_seed, m, profile.total, est.c_hat,
        est.c_hat / profile.total, z, "ok",
    )


def run_stochastic_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Fresh-stream sampling study: every replicate redraws the stream.

    Replicates with an empty stream or a zero true count are flagged and
    excluded from the ratio summary rather than failing the run.
    """
    if spec.mode != "stochastic":
        raise ValueError(f"spec mode is {spec.mode!r}, expected 'stochastic'")
    tasks = [
        (spec, si, value, rep)
        for si, value in enumerate(spec.sweep)
        for rep in range(spec.reps)
    ]
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_sto_replicate, tasks, chunksize=max(1, len(tasks) // (spec.workers * 4))))
    else:
        rows = [_sto_replicate(t) for t in tasks]

    summary = [STO_SUMMARY_HEADER]
    reps_out = [STO_REPLICATES_HEADER]
    hist_out = [HIST_HEADER]
    emit_hist = spec.reps >= HISTOGRAM_MIN_REPS
    for si, value in enumerate(spec.sweep):
        block = [r for r in rows if r[0] == si]
        ratios = [r[7] for r in block if r[9] == "ok"]
        empty = sum(1 for r in block if r[9] == "empty_stream")
        zero = sum(1 for r in block if r[9] == "zero_count")
        mean_ratio = float(np.mean(ratios)) if ratios else math.nan
        std_ratio = float(np.std(ratios, ddof=1)) if len(ratios) > 1 else math.nan
        summary.append(
            _row(
                spec.sweep_param, value, spec.p_at(value), spec.reps, len(ratios),
                empty, zero, mean_ratio, std_ratio,
            )
        )
        for r in block:
            reps_out.append(_row(value, r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8], r[9]))
        if emit_hist:
            for lo, hi, count in fd_histogram(ratios):
                hist_out.append(_row(value, lo, hi, count))
    return ExperimentResult(
        summary="".join(summary),
        replicates="".join(reps_out),
        histogram="".join(hist_out) if emit_hist else None,
    )


def run_coverage_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Coverage of the confidence interval across sampling ratios.

    One fixed stream (parsed from ``input_path`` or generated once) is
    profiled, then for every p in the sweep the relative frequency of the
    CI covering the true count is reported with a Wilson interval.
    """
    if spec.mode != "coverage":
        raise ValueError(f"spec mode is {spec.mode!r}, expected 'coverage'")
    if spec.input_path is not None:
        stream = parse_stream(spec.input_path)
    else:
        stream = spec.draw_stream(spec.sweep[0], derive_seed(spec.base_seed, _NS_STREAM))
    profile = exact_count(stream, spec.query, workers=spec.workers)
    summary = [COV_SUMMARY_HEADER]
    reps_out = [COV_REPLICATES_HEADER]
    for pi_idx, p in enumerate(spec.sweep):
        table = replicate_estimates(
            profile,
            p=p,
            alpha=spec.alpha,
            reps=spec.reps,
            base_seed=derive_seed(spec.base_seed, pi_idx, _NS_MASK),
            workers=spec.workers,
        )
        covered = sum(r.covered for r in table.rows)
        w_lo, w_hi = wilson_interval(covered, spec.reps)
        summary.append(
            _row(
                p, spec.reps, profile.total, covered, table.coverage_rf,
                w_lo, w_hi, table.mean_ratio, table.std_ratio,
            )
        )
        for r in table.rows:
            reps_out.append(
                _row(p, r.rep, r.seed, r.c_hat, r.ratio, r.sigma2_hat, r.ci_lo, r.ci_hi, r.covered)
            )
    return ExperimentResult(summary="".join(summary), replicates="".join(reps_out))
