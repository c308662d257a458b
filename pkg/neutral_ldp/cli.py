"""Command-line entry point: ``python -m neutral_ldp <subcommand> ...``.

Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure,
3 acceptance check failed (only with --check).
"""
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, List, Optional

from .config import AuditOptions, RuntimeOptions
from .errors import ConfigurationError, DomainError, NumericError, UnsupportedError
from .harness.bounds import compute_bounds
from .harness.config import ExperimentConfig, load_config
from .harness.outputs import write_csv, write_summary
from .harness.stats import (
    EQUIVALENCE_COLUMNS,
    SUP_TAIL_COLUMNS,
    SWEEP_COLUMNS,
    asymptote_trend_ok,
    decreasing_trend_ok,
    sup_tail_decay_ok,
    tail_shrinks_ok,
)
from .harness.studies import (
    DEFAULT_PARTICLE_COUNTS,
    MN_COLUMNS,
    MOMENT_COLUMNS,
    PARTICLE_COLUMNS,
    StudyContext,
    gap_levels,
    ratio_check_ok,
    run_eps_sweep,
    run_equivalence_study,
    run_moment_study,
    run_mn_convergence,
    run_particle_convergence,
    run_sup_tail_study,
)
from .models.audit import audit_assumptions
from .models.builtin import builtin
from .models.truncation import truncate
from .rate.minimize import rate_lower_bound_scan
from .solvers.stochastic import ito_tail_check
from .utils.logger import setup_logger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_CHECK = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports bad usage through UsageError so it maps to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _echo(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump()


def cmd_sweep(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    result = run_eps_sweep(cfg, runtime)
    out = cfg.output_path()
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, [row.csv_row() for row in result.rows])

    trend = asymptote_trend_ok(result.rows, result.asymptote)
    references_ok = all(
        ref is None or not row.resolved or row.ci_lo <= ref <= row.ci_hi
        for row, ref in zip(result.rows, result.references)
    )
    checks = {"trend": trend, "references": references_ok, "rate_converged": result.rate.converged}
    write_summary(out / "sweep.json", "sweep", _echo(cfg), {
        "rate": result.rate.to_dict(), "asymptote": result.asymptote,
        "references": result.references, "checks": checks,
    }, started)
    return all(checks.values())


def cmd_equivalence(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    result = run_equivalence_study(cfg, runtime)
    out = cfg.output_path()
    write_csv(out / "equivalence.csv", EQUIVALENCE_COLUMNS, [row.csv_row() for row in result.rows])
    unresolved = [[row.epsilon, row.delta, row.gap_kind] for row in result.rows if not row.resolved]
    # the check reads event.delta; the extra levels only report whether the X-Y tail shrinks with eps
    trend = decreasing_trend_ok(result.rows, "X-Y", cfg.event.delta)
    tails = {f"{level:g}": tail_shrinks_ok(result.rows, "X-Y", level) for level in gap_levels(cfg)}
    write_summary(out / "equivalence.json", "equivalence", _echo(cfg), {
        "unresolved": unresolved, "mean_sup_gaps": result.mean_gap_table(),
        "checks": {"trend": trend, "tail_shrinks": tails},
    }, started)
    return trend


def cmd_sup_tail(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    rows = run_sup_tail_study(cfg, runtime)
    out = cfg.output_path()
    write_csv(out / "sup_tail.csv", SUP_TAIL_COLUMNS, [row.csv_row() for row in rows])
    decay = sup_tail_decay_ok(rows)
    write_summary(out / "sup_tail.json", "sup-tail", _echo(cfg), {"checks": {"decay_in_R": decay}}, started)
    return decay


def cmd_bounds(args, runtime: RuntimeOptions) -> bool:
    record = compute_bounds(args.alpha, args.L, args.L1, args.T, args.eps, args.xi)
    for key, value in record.to_dict().items():
        print(f"{key}={value:.17g}")
    return True


def cmd_audit(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    spec = builtin(args.model)
    report = audit_assumptions(spec, trials=args.trials, opts=AuditOptions(seed=args.seed), runtime=runtime)
    if args.output:
        write_summary(args.output / "audit.json", "audit", None, report.to_dict(), started)
    print(json.dumps({name: {"passed": c.passed, "worst_margin": c.worst_margin}
                      for name, c in report.conditions.items()}, indent=2))
    return report.passed


def cmd_rate(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    ctx = StudyContext.from_config(cfg, runtime)
    event = cfg.rare_event(ctx.x0)
    spec = ctx.spec if args.truncation is None else truncate(ctx.spec, args.truncation)
    estimate = rate_lower_bound_scan(spec, ctx.xi, ctx.x0, event, cfg.restarts, seed=cfg.master_seed,
                                     solver=ctx.solver, runtime=runtime)
    write_summary(cfg.output_path() / "rate.json", "rate", _echo(cfg), estimate.to_dict(), started)
    print(f"rate={estimate.value:.17g} converged={estimate.converged} residual={estimate.residual:.3g}")
    return estimate.converged


def cmd_mn_convergence(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    rows = run_mn_convergence(cfg)
    out = cfg.output_path()
    write_csv(out / "mn_convergence.csv", MN_COLUMNS, [row.csv_row() for row in rows])
    ok = ratio_check_ok(rows)
    write_summary(out / "mn_convergence.json", "mn-convergence", _echo(cfg), {"checks": {"ratio": ok}}, started)
    return ok


def cmd_moments(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    rows = run_moment_study(cfg, runtime)
    out = cfg.output_path()
    write_csv(out / "moments.csv", MOMENT_COLUMNS, [row.csv_row() for row in rows])
    ok = all(row.within_bounds for row in rows)
    write_summary(out / "moments.json", "moments", _echo(cfg), {"checks": {"within_bounds": ok}}, started)
    return ok


def cmd_tail(args, runtime: RuntimeOptions) -> bool:
    check = ito_tail_check(args.A, args.B, args.d, args.T, args.R, args.replicas,
                           master_seed=args.seed, steps=args.steps, runtime=runtime)
    print(json.dumps(check.to_dict(), indent=2))
    return check.below_bound and check.matches_reference is not False


def cmd_particle_convergence(args, runtime: RuntimeOptions) -> bool:
    started = time.time()
    cfg = load_config(args.config)
    rows = run_particle_convergence(cfg, runtime, args.particles)
    out = cfg.output_path()
    write_csv(out / "particle_convergence.csv", PARTICLE_COLUMNS, [row.csv_row() for row in rows])
    write_summary(out / "particle_convergence.json", "particle-convergence", _echo(cfg), {}, started)
    return True


def create_argparser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    common.add_argument("--threads", type=int, default=1, help="Worker threads (results do not depend on it)")
    common.add_argument("--progress", action="store_true", help="Show progress bars")
    common.add_argument("--check", action="store_true", help="Exit 3 when the study's acceptance check fails")

    parser = _Parser(prog="neutral_ldp", description="Neutral McKean-Vlasov large-deviation laboratory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, handler: Callable, help_text: str, with_config: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        if with_config:
            p.add_argument("--config", required=True, help="Experiment config (YAML)")
        p.set_defaults(handler=handler)
        return p

    add("sweep", cmd_sweep, "eps-sweep of a rare-event probability against the rate estimate")
    add("equivalence", cmd_equivalence, "paired tails of the X-Y, Y-Y^n and Y-Y^R gaps")
    add("sup-tail", cmd_sup_tail, "tails of sup|Y| over the configured truncation levels")
    p = add("rate", cmd_rate, "multi-start rate estimate for the configured event")
    p.add_argument("--truncation", type=float, default=None, metavar="R",
                   help="Estimate the rate of the model truncated at level R")
    add("mn-convergence", cmd_mn_convergence, "sup|M^n(phi) - M(phi)| over the configured n list")
    add("moments", cmd_moments, "Monte Carlo second moments against the closed-form bounds")
    p = add("particle-convergence", cmd_particle_convergence, "particle-count study of sup|X^N - Y|")
    p.add_argument("--particles", type=int, nargs="+", default=list(DEFAULT_PARTICLE_COUNTS),
                   help="Particle counts to compare")

    p = add("bounds", cmd_bounds, "evaluate L2, L3, the X0 bound and L4", with_config=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--L1", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--xi", type=float, required=True, help="sup-norm of the initial segment")

    p = add("audit", cmd_audit, "sample-based check of a model's declared constants", with_config=False)
    p.add_argument("--model", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, default=None, help="Directory for audit.json")

    p = add("tail", cmd_tail, "Monte Carlo tail of a constant-coefficient Ito process against its bound",
            with_config=False)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--B", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=1024)
    return parser


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = create_argparser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_CONFIG
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    setup_logger("neutral_ldp", logging.DEBUG if args.verbose else logging.INFO)
    try:
        runtime = RuntimeOptions(threads=args.threads, progress=args.progress)
        ok = args.handler(args, runtime)
    except (ConfigurationError, DomainError, UnsupportedError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_CONFIG
    except NumericError as e:
        logger.error(f"{args.command}: numeric failure: {e} (residual {e.residual:.3g})")
        return EXIT_NUMERIC

    if args.check and not ok:
        logger.error(f"{args.command}: acceptance check failed")
        return EXIT_CHECK
    return EXIT_OK


def main():
    sys.exit(cli_main())
