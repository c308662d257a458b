"""Config-driven Monte Carlo studies.

Replicas are split into fixed chunks (a replica chunk for frozen-law processes, one cloud of N
particles for the particle system). Each chunk is a pure function of its index, and chunk
results are reduced in index order, so tables do not depend on the worker count.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import RuntimeOptions, SolverOptions
from ..core.grid import PathBatch, PathGrid, Segment, TimeGrid
from ..errors import ConfigurationError
from ..models.builtin import SCHILDER
from ..models.spec import ModelSpec
from ..models.truncation import truncate
from ..rate.control import Control
from ..rate.events import EventKind, RareEvent
from ..rate.minimize import RateEstimate, rate_lower_bound_scan
from ..solvers.deterministic import solve_limit_ode, solve_skeleton, solve_skeleton_discretized
from ..solvers.noise import NoiseBundle
from ..solvers.stochastic import (
    reflection_tail,
    simulate_frozen_batch,
    simulate_frozen_discretized_batch,
    simulate_particles,
)
from ..utils.workers import WorkerPool
from .bounds import bounds_for_model
from .config import ExperimentConfig
from .stats import EquivalenceRow, SupTailRow, SweepRow

logger = logging.getLogger(__name__)

DEFAULT_PARTICLE_COUNTS = (64, 256, 1024)


@dataclass
class StudyContext:
    cfg: ExperimentConfig
    spec: ModelSpec
    grid: TimeGrid
    xi: Segment
    x0: PathGrid
    solver: SolverOptions
    runtime: RuntimeOptions

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None) -> "StudyContext":
        spec = cfg.model_spec()
        grid = cfg.time_grid()
        xi = cfg.initial_segment(spec)
        solver = cfg.solver_options()
        x0 = solve_limit_ode(spec, xi, grid, solver)
        logger.debug(f"Limit path of {spec.name}: X0(T)={x0.terminal()}")
        return cls(cfg, spec, grid, xi, x0, solver, runtime or RuntimeOptions())

    @property
    def pool(self) -> WorkerPool:
        return WorkerPool(self.runtime.threads, self.runtime.progress)

    def replica_chunks(self) -> List[range]:
        size = self.runtime.chunk_size
        replicas = self.cfg.replicas
        return [range(start, min(start + size, replicas)) for start in range(0, replicas, size)]

    def clouds(self, particles: int) -> int:
        return max(1, math.ceil(self.cfg.replicas / particles))

    def frozen(self, eps: float, noise: NoiseBundle) -> PathBatch:
        return simulate_frozen_batch(self.spec, self.xi, eps, self.grid, noise, self.x0, self.solver)

    def particles(self, eps: float, noise: NoiseBundle) -> PathBatch:
        return simulate_particles(self.spec, self.xi, eps, noise.size, self.grid, noise, self.solver).paths


def _process_chunks(ctx: StudyContext) -> Tuple[List[NoiseBundle], Callable[[float, NoiseBundle], PathBatch]]:
    """Noise chunks and the simulator for the configured process."""
    seed = ctx.cfg.master_seed
    if ctx.cfg.process == "particles":
        n = ctx.cfg.particles
        return [NoiseBundle.for_cloud(seed, c, n) for c in range(ctx.clouds(n))], ctx.particles
    return [NoiseBundle.for_replicas(seed, chunk) for chunk in ctx.replica_chunks()], ctx.frozen


@dataclass
class SweepResult:
    rows: List[SweepRow]
    rate: RateEstimate
    references: List[Optional[float]] = field(default_factory=list)

    @property
    def asymptote(self) -> float:
        return -self.rate.value


def _reflection_reference(ctx: StudyContext, event: RareEvent, eps: float) -> Optional[float]:
    """Exact tail for the Brownian model with a constant reference path, else None."""
    if ctx.spec.name != SCHILDER or event.kind is not EventKind.SUP_EXCEED or ctx.spec.dim_d != 1:
        return None
    return reflection_tail(event.delta / math.sqrt(eps), ctx.grid.T, h=ctx.grid.h)


def run_eps_sweep(cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None) -> SweepResult:
    ctx = StudyContext.from_config(cfg, runtime)
    event = cfg.rare_event(ctx.x0)
    chunks, simulate = _process_chunks(ctx)
    logger.info(f"Sweep: {cfg.model}, process={cfg.process}, eps={cfg.epsilons}, {len(chunks)} chunks")

    def count(noise: NoiseBundle) -> Tuple[List[int], int]:
        hits = [int(np.count_nonzero(event.occurs(simulate(eps, noise)))) for eps in cfg.epsilons]
        return hits, noise.size

    totals = np.zeros(len(cfg.epsilons), dtype=np.int64)
    used = 0
    for hits, size in ctx.pool.map(count, chunks, desc="sweep"):
        totals += hits
        used += size

    rows = [SweepRow.from_counts(eps, int(h), used) for eps, h in zip(cfg.epsilons, totals)]
    for row in rows:
        status = "" if row.resolved else " (UNRESOLVED)"
        logger.info(f"eps={row.epsilon:g}: p_hat={row.p_hat:.6g}, eps log p={row.eps_log_p:.6g}{status}")

    rate = rate_lower_bound_scan(ctx.spec, ctx.xi, ctx.x0, event, cfg.restarts, seed=cfg.master_seed,
                                 solver=ctx.solver, runtime=ctx.runtime)
    references = [_reflection_reference(ctx, event, eps) for eps in cfg.epsilons]
    return SweepResult(rows, rate, references)


def gap_levels(cfg: ExperimentConfig) -> List[float]:
    """event.delta followed by the extra gap levels of the config."""
    if cfg.event.delta is None:
        raise ConfigurationError("the equivalence study reads its gap level from event.delta")
    return [cfg.event.delta] + [level for level in cfg.gap_levels if level != cfg.event.delta]


def gap_kinds(cfg: ExperimentConfig) -> List[str]:
    return ["X-Y"] + [f"Y-Yn:n={n}" for n in cfg.n_list] + [f"Y-YR:R={r:g}" for r in cfg.r_list]


@dataclass
class EquivalenceResult:
    rows: List[EquivalenceRow]
    # (epsilon, gap kind) -> E[sup gap]
    mean_gaps: Dict[Tuple[float, str], float]

    def mean_gap_table(self) -> List[list]:
        return [[eps, kind, value] for (eps, kind), value in self.mean_gaps.items()]


def run_equivalence_study(cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None) -> EquivalenceResult:
    """Paired tails and means of sup|X - Y|, sup|Y - Y^n| and sup|Y - Y^R| under one set of noise streams.

    Particle i of cloud c and the frozen-law processes of the same replica share stream (c, i).
    Rows run over eps, then gap level, then gap kind.
    """
    ctx = StudyContext.from_config(cfg, runtime)
    levels = np.array(gap_levels(cfg))
    kinds = gap_kinds(cfg)
    truncated = {r: truncate(ctx.spec, r) for r in cfg.r_list}
    particles = cfg.particles
    clouds = ctx.clouds(particles)
    logger.info(f"Equivalence: {cfg.model}, eps={cfg.epsilons}, levels={levels.tolist()}, "
                f"{clouds} clouds of {particles}")

    def count(cloud: int) -> Tuple[np.ndarray, np.ndarray]:
        noise = NoiseBundle.for_cloud(cfg.master_seed, cloud, particles)
        hits = np.zeros((len(cfg.epsilons), len(levels), len(kinds)), dtype=np.int64)
        sums = np.zeros((len(cfg.epsilons), len(kinds)))
        for e, eps in enumerate(cfg.epsilons):
            y = ctx.frozen(eps, noise)
            gaps = [ctx.particles(eps, noise).sup_gaps(y)]
            for n in cfg.n_list:
                yn = simulate_frozen_discretized_batch(ctx.spec, ctx.xi, eps, n, ctx.grid, noise, ctx.x0, ctx.solver)
                gaps.append(y.sup_gaps(yn))
            for r in cfg.r_list:
                yr = simulate_frozen_batch(truncated[r], ctx.xi, eps, ctx.grid, noise, ctx.x0, ctx.solver)
                gaps.append(y.sup_gaps(yr))
            stacked = np.stack(gaps)
            hits[e] = np.count_nonzero(stacked[None] > levels[:, None, None], axis=-1)
            sums[e] = stacked.sum(axis=-1)
        return hits, sums

    totals = np.zeros((len(cfg.epsilons), len(levels), len(kinds)), dtype=np.int64)
    gap_sums = np.zeros((len(cfg.epsilons), len(kinds)))
    for hits, sums in ctx.pool.map(count, range(clouds), desc="equivalence"):
        totals += hits
        gap_sums += sums

    replicas = clouds * particles
    rows = []
    mean_gaps = {}
    for e, eps in enumerate(cfg.epsilons):
        for j, delta in enumerate(levels):
            for k, kind in enumerate(kinds):
                rows.append(EquivalenceRow.from_counts(eps, float(delta), kind, int(totals[e, j, k]), replicas))
        for k, kind in enumerate(kinds):
            mean_gaps[(eps, kind)] = float(gap_sums[e, k] / replicas)
    return EquivalenceResult(rows, mean_gaps)


def run_sup_tail_study(cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None) -> List[SupTailRow]:
    """P(sup over [-tau, T] of |Y(t)| > R) for every eps and every R of the config's R list.

    All levels read the same paths, so at fixed eps the hit counts never increase with R.
    """
    if not cfg.r_list:
        raise ConfigurationError("the sup-tail study reads its levels from r_list, which is empty")
    ctx = StudyContext.from_config(cfg, runtime)
    levels = np.array(cfg.r_list)
    chunks, simulate = _process_chunks(ctx)
    logger.info(f"Sup tail: {cfg.model}, process={cfg.process}, eps={cfg.epsilons}, R={cfg.r_list}")

    def count(noise: NoiseBundle) -> Tuple[np.ndarray, int]:
        hits = np.zeros((len(cfg.epsilons), len(levels)), dtype=np.int64)
        for e, eps in enumerate(cfg.epsilons):
            sups = np.sqrt(simulate(eps, noise).sup_sq_norms())
            hits[e] = np.count_nonzero(sups[None] > levels[:, None], axis=-1)
        return hits, noise.size

    totals = np.zeros((len(cfg.epsilons), len(levels)), dtype=np.int64)
    used = 0
    for hits, size in ctx.pool.map(count, chunks, desc="sup tail"):
        totals += hits
        used += size

    rows = []
    for e, eps in enumerate(cfg.epsilons):
        for j, R in enumerate(cfg.r_list):
            row = SupTailRow(R, SweepRow.from_counts(eps, int(totals[e, j]), used))
            logger.info(f"eps={eps:g}, R={R:g}: p_hat={row.estimate.p_hat:.6g}, "
                        f"eps log p={row.estimate.eps_log_p:.6g}{'' if row.resolved else ' (UNRESOLVED)'}")
            rows.append(row)
    return rows


@dataclass(frozen=True)
class MomentRow:
    epsilon: float
    second_moment: float
    L3: float
    gap_moment: float
    L4: float
    x0_sup_sq: float
    x0_bound: float

    @property
    def within_bounds(self) -> bool:
        return self.second_moment <= self.L3 and self.gap_moment <= self.L4 and self.x0_sup_sq <= self.x0_bound

    def csv_row(self) -> list:
        return [self.epsilon, self.second_moment, self.L3, self.gap_moment, self.L4, self.x0_sup_sq, self.x0_bound]


MOMENT_COLUMNS = ("epsilon", "second_moment", "L3", "gap_moment", "L4", "x0_sup_sq", "x0_bound")


def run_moment_study(cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None) -> List[MomentRow]:
    """E[sup ||X_t||^2] and E[sup ||X_t - X0_t||^2] against L3(eps) and L4(eps), plus the X0 bound."""
    ctx = StudyContext.from_config(cfg, runtime)
    chunks, simulate = _process_chunks(ctx)
    norm_xi = ctx.xi.sup_norm()
    x0_sup_sq = float(PathBatch(ctx.grid, ctx.x0.values[None]).sup_sq_norms()[0])

    def sums(noise: NoiseBundle) -> np.ndarray:
        out = np.zeros((len(cfg.epsilons), 3))
        for e, eps in enumerate(cfg.epsilons):
            paths = simulate(eps, noise)
            out[e] = [paths.sup_sq_norms().sum(), (paths.sup_gaps(ctx.x0) ** 2).sum(), paths.size]
        return out

    totals = np.zeros((len(cfg.epsilons), 3))
    for part in ctx.pool.map(sums, chunks, desc="moments"):
        totals += part

    rows = []
    for e, eps in enumerate(cfg.epsilons):
        bounds = bounds_for_model(ctx.spec, ctx.grid.T, eps, norm_xi)
        count = totals[e, 2]
        row = MomentRow(eps, totals[e, 0] / count, bounds.L3, totals[e, 1] / count, bounds.L4,
                        x0_sup_sq, bounds.X0_bound)
        logger.info(f"eps={eps:g}: E sup|X|^2={row.second_moment:.6g} (L3={row.L3:.6g}), "
                    f"E sup|X-X0|^2={row.gap_moment:.6g} (L4={row.L4:.6g})")
        rows.append(row)
    return rows


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    sup_gap: float
    ratio_to_previous: float

    def csv_row(self) -> list:
        return [self.n, self.sup_gap, self.ratio_to_previous]


MN_COLUMNS = ("n", "sup_gap", "ratio_to_previous")


def run_mn_convergence(cfg: ExperimentConfig, control: Optional[Control] = None) -> List[ConvergenceRow]:
    """sup_t |M^n(phi)(t) - M(phi)(t)| for each n of the config, phi(t) = t (1, ..., 1) by default."""
    ctx = StudyContext.from_config(cfg)
    m = ctx.spec.dim_m
    phi = control or Control.from_function(ctx.grid, lambda t: np.outer(t, np.ones(m)), m)
    skeleton = solve_skeleton(ctx.spec, ctx.xi, phi, ctx.x0, ctx.solver)
    reference = PathBatch(ctx.grid, skeleton.values[None])

    rows = []
    previous = None
    for n in cfg.n_list:
        discretized = solve_skeleton_discretized(ctx.spec, ctx.xi, phi, n, ctx.x0, ctx.solver)
        gap = float(reference.sup_gaps(discretized)[0])
        ratio = gap / previous if previous else float("nan")
        rows.append(ConvergenceRow(n, gap, ratio))
        logger.info(f"n={n}: sup|M^n - M|={gap:.6g}")
        previous = gap
    return rows


def ratio_check_ok(rows: Sequence[ConvergenceRow], factor: int = 4, limit: float = 0.7) -> bool:
    """gap(factor * n) / gap(n) <= limit for every such pair present; at least one pair required."""
    gaps: Dict[int, float] = {row.n: row.sup_gap for row in rows}
    pairs = [(n, factor * n) for n in gaps if factor * n in gaps]
    if not pairs:
        logger.warning(f"No pair (n, {factor}n) in the n list; ratio check cannot run")
        return False
    return all(gaps[n] > 0 and gaps[big] / gaps[n] <= limit for n, big in pairs)


@dataclass(frozen=True)
class ParticleRow:
    epsilon: float
    particles: int
    mean_sup_gap: float

    def csv_row(self) -> list:
        return [self.epsilon, self.particles, self.mean_sup_gap]


PARTICLE_COLUMNS = ("epsilon", "particles", "mean_sup_gap")


def run_particle_convergence(cfg: ExperimentConfig, runtime: Optional[RuntimeOptions] = None,
                             particle_counts: Sequence[int] = DEFAULT_PARTICLE_COUNTS) -> List[ParticleRow]:
    """E[sup_t |X^{eps,N}(t) - Y^eps(t)|] per N, each particle paired with the frozen-law path on its stream."""
    ctx = StudyContext.from_config(cfg, runtime)
    rows = []
    for particles in particle_counts:
        if particles < 1:
            raise ConfigurationError(f"particle counts must be >= 1, got {particles}")

        def sums(cloud: int) -> np.ndarray:
            noise = NoiseBundle.for_cloud(cfg.master_seed, cloud, particles)
            return np.array([
                ctx.particles(eps, noise).sup_gaps(ctx.frozen(eps, noise)).sum() for eps in cfg.epsilons
            ])

        clouds = ctx.clouds(particles)
        total = np.zeros(len(cfg.epsilons))
        for part in ctx.pool.map(sums, range(clouds), desc=f"N={particles}"):
            total += part
        for eps, value in zip(cfg.epsilons, total / (clouds * particles)):
            rows.append(ParticleRow(eps, particles, float(value)))
            logger.info(f"N={particles}, eps={eps:g}: E sup|X - Y|={value:.6g}")
    return rows
