"""Command-line interface.

Exit codes: 0 success, 2 argument error, 3 input parse error, 4 internal
invariant violation. All randomized subcommands take --seed and are fully
reproducible from it; experiment subcommands also honor --threads without
changing any output byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .counting import InvariantViolation, exact_count
from .estimation import (
    diagnostics,
    draw_mask,
    ht_estimate,
    replicate_estimates,
)
from .experiments import (
    ExperimentSpec,
    run_coverage_experiment,
    run_deterministic_experiment,
    run_stochastic_experiment,
)
from .generate import (
    SBMPoissonConfig,
    UniformPoissonConfig,
    generate_fixed_length,
    generate_sbm,
    generate_uniform,
)
from .motif import DeltaQuery, MotifError, load_motif
from .stream import ParseError, parse_stream, write_stream
from .theory import (
    TheoryParams,
    expected_count_uniform,
    motif_match_probability,
    pi_closed_form_l2,
    pi_lower_bound,
    pi_monte_carlo,
)

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="base RNG seed")
    sub.add_argument("--threads", type=int, default=1, help="worker processes")
    sub.add_argument("--output", type=str, default=None, help="output path")


def _motif_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--motif", required=True, help="motif JSON file")
    sub.add_argument("--delta", type=float, required=True, help="instance duration bound")


def _query(args) -> DeltaQuery:
    return DeltaQuery(load_motif(args.motif), args.delta)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _parse_matrix(text: str) -> tuple[tuple[float, ...], ...]:
    return tuple(_parse_floats(row) for row in text.split(";"))


def _write_or_print(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_count(args) -> int:
    stream = parse_stream(args.stream)
    profile = exact_count(stream, _query(args), workers=args.threads)
    print(f"m={len(stream)} n_nodes={stream.n_nodes} total={profile.total}")
    if args.output:
        _dump_eta(stream, profile, args.output)
    return EXIT_OK


def _cmd_local_counts(args) -> int:
    stream = parse_stream(args.stream)
    profile = exact_count(stream, _query(args), workers=args.threads)
    _dump_eta(stream, profile, args.output)
    return EXIT_OK


def _dump_eta(stream, profile, output) -> None:
    lines = ["index,src,dst,time,eta\n"]
    reg = stream.registry
    for i in range(len(stream)):
        lines.append(
            f"{i},{reg.label(int(stream.src[i]))},{reg.label(int(stream.dst[i]))},"
            f"{float(stream.times[i])!r},{int(profile.eta[i])}\n"
        )
    _write_or_print("".join(lines), output)


def _cmd_estimate(args) -> int:
    stream = parse_stream(args.stream)
    profile = exact_count(stream, _query(args), workers=args.threads)
    mask = draw_mask(len(stream), args.p, args.seed)
    est = ht_estimate(profile, mask, alpha=args.alpha)
    print(f"true_total={profile.total}")
    print(f"sampled_edges={mask.popcount}")
    print(f"c_hat={est.c_hat!r}")
    print(f"sigma2_hat={est.sigma2_hat!r}")
    print(f"ci=[{est.ci_lo!r}, {est.ci_hi!r}] alpha={est.alpha!r}")
    if est.degenerate:
        print("warning: degenerate interval (no informative edge sampled)")
    return EXIT_OK


def _cmd_replicate(args) -> int:
    stream = parse_stream(args.stream)
    profile = exact_count(stream, _query(args), workers=args.threads)
    table = replicate_estimates(
        profile,
        p=args.p,
        alpha=args.alpha,
        reps=args.reps,
        base_seed=args.seed,
        workers=args.threads,
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            table.write_csv(fh)
    else:
        table.write_csv(sys.stdout)
    print(
        f"mean_ratio={table.mean_ratio!r} std_ratio={table.std_ratio!r} "
        f"coverage_rf={table.coverage_rf!r}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_diagnostics(args) -> int:
    stream = parse_stream(args.stream)
    profile = exact_count(stream, _query(args), workers=args.threads)
    diag = diagnostics(profile, args.p)
    print(f"m={len(stream)} total={profile.total}")
    print(f"r_consistency={diag.r_consistency!r}")
    print(f"r_clt={diag.r_clt!r}")
    print(f"berry_esseen_bound={diag.berry_esseen_bound!r}")
    print(f"max_eta={diag.max_eta}")
    print(f"count_growth={diag.count_growth!r}")
    print(f"defined={diag.defined}")
    return EXIT_OK


def _generator_config(args):
    if args.model == "uniform":
        if args.rate is None or args.nodes is None:
            raise ValueError("uniform model needs --rate and --nodes")
        tau = args.tau if args.tau is not None else (
            args.m_target / args.rate if args.m_target else None
        )
        if tau is None:
            raise ValueError("uniform model needs --tau unless --m-target is set")
        return UniformPoissonConfig(rate=args.rate, tau=tau, n_nodes=args.nodes, seed=args.seed)
    if args.block_sizes is None or args.intensity is None:
        raise ValueError("sbm model needs --block-sizes and --intensity")
    return SBMPoissonConfig(
        block_sizes=tuple(int(s) for s in _parse_floats(args.block_sizes)),
        intensity=_parse_matrix(args.intensity),
        tau=args.tau if args.tau is not None else 1.0,
        seed=args.seed,
    )


def _cmd_generate(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        raw.setdefault("seed", args.seed)
        if raw.pop("model", args.model) == "uniform":
            cfg = UniformPoissonConfig(**raw)
        else:
            raw["block_sizes"] = tuple(raw["block_sizes"])
            raw["intensity"] = tuple(tuple(r) for r in raw["intensity"])
            cfg = SBMPoissonConfig(**raw)
    else:
        cfg = _generator_config(args)
    if args.m_target is not None:
        stream = generate_fixed_length(cfg, args.m_target)
    elif isinstance(cfg, UniformPoissonConfig):
        stream = generate_uniform(cfg)
    else:
        stream = generate_sbm(cfg)
    if args.output is None:
        raise ValueError("generate requires --output FILE")
    write_stream(stream, args.output)
    print(f"wrote m={len(stream)} edges, n_nodes={stream.n_nodes} to {args.output}")
    return EXIT_OK


def _experiment_spec(args, mode: str) -> ExperimentSpec:
    if args.spec:
        spec = ExperimentSpec.from_json(args.spec)
        if spec.mode != mode:
            raise ValueError(f"spec file mode {spec.mode!r} does not match subcommand {mode!r}")
        return spec
    motif = load_motif(args.motif)
    return ExperimentSpec(
        mode=mode,
        motif=motif,
        delta=args.delta,
        sweep_param=args.sweep_param,
        sweep=_parse_floats(args.sweep),
        p=args.p,
        alpha=args.alpha,
        reps=args.reps,
        base_seed=args.seed,
        workers=args.threads,
        model=args.model,
        rate=args.rate,
        tau=args.tau,
        n_nodes=args.nodes,
        block_sizes=tuple(int(s) for s in _parse_floats(args.block_sizes))
        if args.block_sizes
        else None,
        intensity=_parse_matrix(args.intensity) if args.intensity else None,
        m_target=args.m_target,
        input_path=getattr(args, "input", None),
        output=args.output,
    )


def _run_experiment(args, mode: str, runner) -> int:
    spec = _experiment_spec(args, mode)
    if args.threads != 1:
        spec = dataclasses.replace(spec, workers=args.threads)
    result = runner(spec)
    output = args.output or spec.output
    if output is None:
        sys.stdout.write(result.summary)
    else:
        paths = result.write(output)
        print("wrote " + " ".join(sorted(paths.values())))
    return EXIT_OK


def _cmd_simulate_det(args) -> int:
    return _run_experiment(args, "deterministic", run_deterministic_experiment)


def _cmd_simulate_sto(args) -> int:
    return _run_experiment(args, "stochastic", run_stochastic_experiment)


def _cmd_coverage(args) -> int:
    return _run_experiment(args, "coverage", run_coverage_experiment)


def _cmd_theory(args) -> int:
    lines = ["quantity,parameters,value,std_error\n"]
    if args.quantity == "pi":
        params = f"delta={args.delta};tau={args.tau};l={args.l}"
        if args.l == 2 and not args.mc:
            lines.append(f"pi_closed_form,{params},{pi_closed_form_l2(args.delta, args.tau)!r},\n")
        else:
            est, se = pi_monte_carlo(args.delta, args.tau, args.l, args.mc_draws, args.seed)
            lines.append(f"pi_monte_carlo,{params};n={args.mc_draws},{est!r},{se!r}\n")
        lines.append(
            f"pi_lower_bound,{params},{pi_lower_bound(args.delta, args.tau, args.l)!r},\n"
        )
    elif args.quantity == "match-prob":
        val = motif_match_probability(args.nodes, args.k, args.l)
        lines.append(f"motif_match_probability,n={args.nodes};k={args.k};l={args.l},{val!r},\n")
    elif args.quantity == "expected-count":
        params = TheoryParams(
            delta=args.delta, tau=args.tau, l=args.l, k=args.k,
            n_nodes=args.nodes, rate=args.rate,
        )
        val = expected_count_uniform(params, mc_draws=args.mc_draws, seed=args.seed)
        lines.append(
            f"expected_count_uniform,rate={args.rate};tau={args.tau};delta={args.delta};"
            f"l={args.l};k={args.k};n={args.nodes},{val!r},\n"
        )
    _write_or_print("".join(lines), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmotif",
        description="Exact and sampled counting of duration-bounded temporal motifs.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, func, help_text):
        s = subs.add_parser(name, help=help_text)
        s.set_defaults(func=func)
        _common_flags(s)
        return s

    s = sub("count", _cmd_count, "exact motif count of a stream file")
    s.add_argument("stream", help="edge-list file")
    _motif_flags(s)

    s = sub("local-counts", _cmd_local_counts, "per-edge local counts as CSV")
    s.add_argument("stream")
    _motif_flags(s)

    s = sub("estimate", _cmd_estimate, "one sampled estimate with CI")
    s.add_argument("stream")
    _motif_flags(s)
    s.add_argument("--p", type=float, required=True, help="sampling probability")
    s.add_argument("--alpha", type=float, default=0.05)

    s = sub("replicate", _cmd_replicate, "replicated sampling estimates as CSV")
    s.add_argument("stream")
    _motif_flags(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--reps", type=int, default=100)

    s = sub("diagnostics", _cmd_diagnostics, "asymptotic-regime diagnostics")
    s.add_argument("stream")
    _motif_flags(s)
    s.add_argument("--p", type=float, default=0.03)

    s = sub("generate", _cmd_generate, "draw a stream from a stochastic model")
    s.add_argument("--model", choices=("uniform", "sbm"), default="uniform")
    s.add_argument("--rate", type=float, default=None)
    s.add_argument("--tau", type=float, default=None)
    s.add_argument("--nodes", type=int, default=None)
    s.add_argument("--block-sizes", type=str, default=None, help="comma-separated sizes")
    s.add_argument("--intensity", type=str, default=None, help="rows ';'-separated, entries ','")
    s.add_argument("--m-target", type=int, default=None, help="exact edge count")
    s.add_argument("--config", type=str, default=None, help="JSON generator config")

    for name, func, helptxt in (
        ("simulate-det", _cmd_simulate_det, "fixed-stream replicated sampling sweep"),
        ("simulate-sto", _cmd_simulate_sto, "fresh-stream replicated sampling sweep"),
        ("coverage", _cmd_coverage, "CI coverage across sampling ratios"),
    ):
        s = sub(name, func, helptxt)
        s.add_argument("--spec", type=str, default=None, help="JSON experiment spec (overrides flags)")
        s.add_argument("--motif", default=None)
        s.add_argument("--delta", type=float, default=None)
        s.add_argument("--sweep-param", dest="sweep_param", default="p" if name == "coverage" else "rate")
        s.add_argument("--sweep", type=str, default=None, help="comma-separated values")
        s.add_argument("--p", type=float, default=0.03)
        s.add_argument("--alpha", type=float, default=0.05)
        s.add_argument("--reps", type=int, default=100)
        s.add_argument("--model", choices=("uniform", "sbm"), default=None)
        s.add_argument("--rate", type=float, default=None)
        s.add_argument("--tau", type=float, default=None)
        s.add_argument("--nodes", type=int, default=None)
        s.add_argument("--block-sizes", type=str, default=None)
        s.add_argument("--intensity", type=str, default=None)
        s.add_argument("--m-target", type=int, default=None)
        if name == "coverage":
            s.add_argument("--input", type=str, default=None, help="fixed stream file")

    s = sub("theory", _cmd_theory, "closed-form/Monte-Carlo model quantities")
    s.add_argument("quantity", choices=("pi", "match-prob", "expected-count"))
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--tau", type=float, default=10.0)
    s.add_argument("--l", type=int, default=2)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--nodes", type=int, default=100)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--mc", action="store_true", help="force Monte Carlo for pi")
    s.add_argument("--mc-draws", type=int, default=1_000_000)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (MotifError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
