"""Command-line interface.

Exit codes: 0 success, 1 a validated requirement failed, 2 invalid input,
3 runtime failure (for example a setting pair with no kept trials).
"""
from __future__ import annotations

import argparse
import datetime
import sys
import time
from pathlib import Path as FsPath

from . import formats, kernels
from .config_validator import all_pass, validate
from .lhv import model_beta_franson, paper_model
from .montecarlo import (
    LhvSource,
    QuantumSource,
    RunConfig,
    estimate_chsh,
    keep_fractions,
    run,
    split_fractions,
)
from .phys_model import EmptyKeptEnsembleError, PhaseConfig, qm_chsh
from .postselect import Scheme
from .strategy_search import ConstraintClass, extremal_beta, verify_fake_violation

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _phases(text: str) -> PhaseConfig:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"phases must be four comma-separated numbers: {text!r}")
    if len(values) != 4:
        raise argparse.ArgumentTypeError(f"expected 4 phases, got {len(values)}")
    try:
        return PhaseConfig(*values)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        FsPath(out).write_text(text)


def _simulate_defaults(args) -> None:
    """Fill unset simulate flags from the [simulate] section of --config."""
    if args.config is None:
        return
    parser = formats.read_config(args.config)
    if not parser.has_section("simulate"):
        return
    section = parser["simulate"]
    converters = {"scheme": str, "source": str, "phases": _phases, "p": float,
                  "model_file": str, "trials": int, "seed": int, "threads": int}
    unknown = set(section) - set(converters)
    if unknown:
        raise UsageError(f"unknown [simulate] keys: {', '.join(sorted(unknown))}")
    for key, conv in converters.items():
        if key in section and getattr(args, key) is None:
            try:
                setattr(args, key, conv(section[key].strip()))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"[simulate] {key}: {exc}")


def cmd_simulate(args) -> int:
    _simulate_defaults(args)
    scheme = Scheme(args.scheme or "genuine")
    source_kind = args.source or "qm"
    if args.trials is None:
        args.trials = 100_000
    if args.seed is None:
        args.seed = 0
    threads = args.threads or 1
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if threads < 1:
        raise UsageError("--threads must be >= 1")

    echo = {"scheme": scheme.value, "source": source_kind, "n_trials": args.trials,
            "seed": args.seed, "setting_probs": [0.25] * 4,
            "rng": "splitmix64, counter = 4*trial + draw + 1"}
    if source_kind == "qm":
        if args.p is not None or args.model_file is not None:
            raise UsageError("--p/--model-file only apply to --source lhv")
        phases = args.phases or PhaseConfig.optimal()
        source = QuantumSource(phases)
        exact = qm_chsh(phases)
        echo["phases"] = list(phases.as_tuple())
    else:
        if args.phases is not None:
            raise UsageError("--phases only applies to --source qm")
        if (args.p is None) == (args.model_file is None):
            raise UsageError("--source lhv needs exactly one of --p or --model-file")
        if args.p is not None:
            model = paper_model(args.p)
            echo["p"] = args.p
        else:
            model = formats.load_model(args.model_file)
        echo["model"] = [[str(s), w] for s, w in model.support()]
        source = LhvSource(model)
        exact = model_beta_franson(model).chsh
    config = RunConfig(args.trials, args.seed, source, scheme)

    start = time.perf_counter()
    tallies = run(config, threads=threads)
    estimate = estimate_chsh(tallies)
    wall = time.perf_counter() - start

    report = formats.RunReport(
        config=echo,
        tallies={"kept": tallies.kept.tolist(), "total": tallies.total.tolist(),
                 "patterns": tallies.patterns.tolist(),
                 "rejected_per_pair": tallies.rejected_per_pair().ravel().tolist()},
        estimate={"beta_hat": estimate.beta_hat, "stderr": estimate.stderr,
                  "correlators": list(estimate.correlators),
                  "correlator_stderrs": list(estimate.correlator_stderrs),
                  "kept_counts": list(estimate.kept_counts)},
        split_fractions=split_fractions(tallies),
        keep_fractions=[float(x) for x in keep_fractions(tallies).ravel()],
        exact={"beta": exact.beta, "components": list(exact.components)},
        runtime=None if args.no_timestamp else {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "wall_time_s": wall, "threads": threads, "kernel": kernels.IMPLEMENTATION},
    )
    text = report.to_csv() if args.format == "csv" else report.to_json()
    summary = (f"beta = {estimate.beta_hat:.6f} +/- {estimate.stderr:.6f} "
               f"(exact {exact.beta:.6f}; kept {sum(estimate.kept_counts)} of {args.trials})\n")
    if args.out is None:
        sys.stderr.write(summary)
        _write(text, None)
    else:
        sys.stdout.write(summary)
        _write(text, args.out)
    return EXIT_OK


def _model_json(model) -> list:
    return [[str(s), w] for s, w in model.support()]


def cmd_enumerate(args) -> int:
    result = extremal_beta(ConstraintClass(args.constraint_class), Scheme(args.scheme))
    data = {
        "schema_version": formats.SCHEMA_VERSION, "command": "enumerate",
        "class": result.constraint_class.value, "scheme": result.scheme.value,
        "max_beta": result.max_beta, "min_beta": result.min_beta,
        "argmax": _model_json(result.argmax), "argmin": _model_json(result.argmin),
        "n_strategies": result.n_strategies, "n_excluded": result.n_excluded,
        "setting_independent_keep": result.setting_independent_keep,
        "notes": list(result.notes),
    }
    sys.stderr.write(f"max beta = {result.max_beta:g}, min beta = {result.min_beta:g}\n")
    _write(formats.dumps(data), args.out)
    return EXIT_OK


def cmd_fake(args) -> int:
    if not -4.0 <= args.target <= 4.0:
        raise UsageError(f"--target must lie in [-4, 4], got {args.target}")
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    r = verify_fake_violation(args.target, n_trials=args.trials, seed=args.seed,
                              scheme=Scheme(args.scheme), threads=args.threads)
    data = {
        "schema_version": formats.SCHEMA_VERSION, "command": "fake",
        "target": r.target, "p": r.p, "exact_beta": r.exact_beta,
        "keep_fractions": list(r.keep_fractions),
        "kept_joint": [list(row) for row in r.kept_joint],
        "max_deviation_from_quantum": r.max_deviation_from_quantum,
        "mc_beta": r.mc_beta, "mc_stderr": r.mc_stderr, "mc_trials": r.mc_trials,
        "scheme": args.scheme, "seed": args.seed,
    }
    sys.stderr.write(f"p = {r.p:.6f}, exact beta = {r.exact_beta:.6f}\n")
    _write(formats.dumps(data), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = formats.geometry_from_config(formats.read_config(args.config))
    checks = validate(cfg)
    data = {
        "schema_version": formats.SCHEMA_VERSION, "command": "validate",
        "scheme": cfg.scheme.value,
        "checks": [{"id": c.id, "passed": c.passed, "margin": c.margin,
                    "detail": c.detail, "convention": c.convention} for c in checks],
        "all_pass": all_pass(checks),
    }
    for c in checks:
        status = {True: "PASS", False: "FAIL", None: "NOTE"}[c.passed]
        margin = "" if c.margin is None else f" (margin {c.margin:+.4g})"
        sys.stderr.write(f"{status:4} {c.id:12} {c.detail}{margin}\n")
    _write(formats.dumps(data), args.out)
    return EXIT_OK if data["all_pass"] else EXIT_FAILED


def cmd_export_model(args) -> int:
    _write(formats.format_model(paper_model(args.p)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etbell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo run of a Bell-CHSH experiment")
    sim.add_argument("--scheme", choices=[s.value for s in Scheme])
    sim.add_argument("--source", choices=["qm", "lhv"])
    sim.add_argument("--phases", type=_phases, help="a0,a1,b0,b1 in radians (use --phases=-x,... for a leading minus)")
    sim.add_argument("--p", type=float, help="mixture parameter of the 64-set LHV model")
    sim.add_argument("--model-file", help="LHV model file (cells and weights)")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--threads", type=int)
    sim.add_argument("--config", help="INI file whose [simulate] section supplies defaults")
    sim.add_argument("--out")
    sim.add_argument("--format", choices=["json", "csv"], default="json")
    sim.add_argument("--no-timestamp", action="store_true", help="omit timestamp, wall time and thread count")
    sim.set_defaults(func=cmd_simulate)

    enum = sub.add_parser("enumerate", help="extremal CHSH values over deterministic strategies")
    enum.add_argument("--class", dest="constraint_class", required=True,
                      choices=[c.value for c in ConstraintClass])
    enum.add_argument("--scheme", choices=[s.value for s in Scheme], default="franson")
    enum.add_argument("--out")
    enum.set_defaults(func=cmd_enumerate)

    fake = sub.add_parser("fake", help="LHV model forging a chosen CHSH value under Franson selection")
    fake.add_argument("--target", type=float, required=True)
    fake.add_argument("--trials", type=int, default=100_000)
    fake.add_argument("--seed", type=int, default=0)
    fake.add_argument("--threads", type=int, default=1)
    fake.add_argument("--scheme", choices=[s.value for s in Scheme], default="franson")
    fake.add_argument("--out")
    fake.set_defaults(func=cmd_fake)

    val = sub.add_parser("validate", help="check geometry and timing requirements")
    val.add_argument("--config", required=True)
    val.add_argument("--out")
    val.set_defaults(func=cmd_validate)

    exp = sub.add_parser("export-model", help="write the 64-set model for a given p as a model file")
    exp.add_argument("--p", type=float, required=True)
    exp.add_argument("--out")
    exp.set_defaults(func=cmd_export_model)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EmptyKeptEnsembleError, ArithmeticError, RuntimeError) as exc:
        return _fail(exc, EXIT_RUNTIME)
    except (UsageError, ValueError, OSError) as exc:
        return _fail(exc, EXIT_USAGE)


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(f"etbell: error: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
