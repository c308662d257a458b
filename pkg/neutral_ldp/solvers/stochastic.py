import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import binomtest, norm

from ..config import RuntimeOptions, SolverOptions
from ..core.grid import PathBatch, PathGrid, Segment, TimeGrid
from ..core.laws import EmpiricalLaw
from ..errors import ConfigurationError, DomainError
from ..models.spec import ModelSpec
from ..models.truncation import truncate
from ..utils.workers import WorkerPool
from .engine import DiracAlong, OwnLaw, march
from .noise import NoiseBundle

logger = logging.getLogger(__name__)

# first-order shift of the barrier for a Brownian sup monitored on a grid of step h
DISCRETE_MONITORING_SHIFT = 0.5826


def _check_eps(eps: float) -> float:
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"noise scale eps must lie in [0, 1], got {eps}")
    return float(eps)


def _scaled_increments(spec: ModelSpec, eps: float, grid: TimeGrid, noise: NoiseBundle) -> np.ndarray:
    return np.sqrt(_check_eps(eps)) * noise.increments(grid, spec.dim_m)


def _initial(xi: Segment, grid: TimeGrid) -> np.ndarray:
    if xi.grid.tau != grid.tau or xi.grid.h != grid.h:
        raise ConfigurationError(f"initial segment lives on {xi.grid}, simulation grid is {grid}")
    return xi.values


def _check_limit(x0: PathGrid, grid: TimeGrid) -> None:
    if x0.grid != grid:
        raise ConfigurationError(f"limit path lives on {x0.grid}, simulation grid is {grid}")


def _single(noise: NoiseBundle) -> None:
    if noise.size != 1:
        raise ConfigurationError(f"a single path needs exactly one noise stream, got {noise.size}")


@dataclass(frozen=True)
class ParticleCloud:
    paths: PathBatch
    eps: float
    model: ModelSpec

    @property
    def particles(self) -> int:
        return self.paths.size

    @property
    def grid(self) -> TimeGrid:
        return self.paths.grid

    def path(self, i: int) -> PathGrid:
        return self.paths.path(i)

    def law_at(self, t: float) -> EmpiricalLaw:
        k = self.grid.anchor_index(t)
        return EmpiricalLaw(self.paths.values[:, k - self.grid.lag:k + 1])

    def mean(self) -> np.ndarray:
        """Cloud mean at every node, shape (nodes, d)."""
        return self.paths.values.mean(axis=0)


def simulate_particles(spec: ModelSpec, xi: Segment, eps: float, N: int, grid: TimeGrid,
                       noise: NoiseBundle, opts: Optional[SolverOptions] = None) -> ParticleCloud:
    """Interacting particles: each step every particle sees the cloud's empirical law at the step's start."""
    if N < 1:
        raise ConfigurationError(f"a particle cloud needs N >= 1, got {N}")
    if noise.size != N:
        raise ConfigurationError(f"{N} particles need {N} noise streams, got {noise.size}")
    increments = _scaled_increments(spec, eps, grid, noise)
    paths = march(spec, _initial(xi, grid), grid, N, OwnLaw(), forcing=increments, opts=opts)
    return ParticleCloud(paths, eps, spec)


def simulate_frozen_batch(spec: ModelSpec, xi: Segment, eps: float, grid: TimeGrid, noise: NoiseBundle,
                          x0: PathGrid, opts: Optional[SolverOptions] = None) -> PathBatch:
    """Y^eps for every stream of ``noise``: the law argument is frozen at delta_{X0_t}."""
    _check_limit(x0, grid)
    increments = _scaled_increments(spec, eps, grid, noise)
    return march(spec, _initial(xi, grid), grid, noise.size, DiracAlong(x0), forcing=increments, opts=opts)


def simulate_frozen(spec: ModelSpec, xi: Segment, eps: float, grid: TimeGrid, noise: NoiseBundle,
                    x0: PathGrid, opts: Optional[SolverOptions] = None) -> PathGrid:
    _single(noise)
    return simulate_frozen_batch(spec, xi, eps, grid, noise, x0, opts).path(0)


def simulate_frozen_discretized_batch(spec: ModelSpec, xi: Segment, eps: float, n: int, grid: TimeGrid,
                                      noise: NoiseBundle, x0: PathGrid,
                                      opts: Optional[SolverOptions] = None) -> PathBatch:
    """Y^{eps,n}: drift on the live segment, diffusion on the segments of Y and X0 frozen at t_n."""
    _check_limit(x0, grid)
    increments = _scaled_increments(spec, eps, grid, noise)
    return march(spec, _initial(xi, grid), grid, noise.size, DiracAlong(x0),
                 forcing=increments, freeze_n=n, opts=opts)


def simulate_frozen_discretized(spec: ModelSpec, xi: Segment, eps: float, n: int, grid: TimeGrid,
                                noise: NoiseBundle, x0: PathGrid,
                                opts: Optional[SolverOptions] = None) -> PathGrid:
    _single(noise)
    return simulate_frozen_discretized_batch(spec, xi, eps, n, grid, noise, x0, opts).path(0)


def simulate_truncated_batch(spec: ModelSpec, xi: Segment, eps: float, R: float, grid: TimeGrid,
                             noise: NoiseBundle, x0: PathGrid, opts: Optional[SolverOptions] = None,
                             truncated: Optional[ModelSpec] = None) -> PathBatch:
    """Y^{eps,R}: Y^eps for the model truncated at level R.

    Pass ``truncated`` to reuse a model already built by ``truncate(spec, R)``.
    """
    truncated = truncated or truncate(spec, R)
    return simulate_frozen_batch(truncated, xi, eps, grid, noise, x0, opts)


def simulate_truncated(spec: ModelSpec, xi: Segment, eps: float, R: float, grid: TimeGrid,
                       noise: NoiseBundle, x0: PathGrid, opts: Optional[SolverOptions] = None) -> PathGrid:
    _single(noise)
    return simulate_truncated_batch(spec, xi, eps, R, grid, noise, x0, opts).path(0)


def reflection_tail(level: float, T: float, h: Optional[float] = None, terms: int = 200) -> float:
    """P(sup_{t <= T} |W(t)| >= level) for one-dimensional Brownian motion.

    Alternating image series 4 sum_k (-1)^k P(N > (2k + 1) level / sqrt(T)). With ``h`` the
    level is shifted up by 0.5826 sqrt(h), approximating a sup monitored only at grid nodes.
    """
    if T <= 0:
        raise DomainError(f"horizon must be positive, got T={T}")
    if h is not None:
        level = level + DISCRETE_MONITORING_SHIFT * np.sqrt(h)
    if level <= 0:
        return 1.0
    k = np.arange(terms)
    series = 4.0 * np.sum((-1.0) ** k * norm.sf((2 * k + 1) * level / np.sqrt(T)))
    return float(np.clip(series, 0.0, 1.0))


def ito_tail_bound(A: float, B: float, d: int, T: float, R: float) -> float:
    """2d exp(-(R - sqrt(d) B T)^2 / (2 A^2 d T))."""
    return float(2 * d * np.exp(-(R - np.sqrt(d) * B * T) ** 2 / (2.0 * A ** 2 * d * T)))


@dataclass(frozen=True)
class TailCheck:
    hits: int
    replicas: int
    empirical: float
    ci_lo: float
    ci_hi: float
    bound: float
    reference: Optional[float] = None

    @property
    def below_bound(self) -> bool:
        """Empirical tail below the bound up to Monte Carlo error."""
        return self.ci_lo <= self.bound

    @property
    def matches_reference(self) -> Optional[bool]:
        if self.reference is None:
            return None
        return self.ci_lo <= self.reference <= self.ci_hi

    def to_dict(self) -> dict:
        return {
            "hits": self.hits, "replicas": self.replicas, "empirical": self.empirical,
            "ci_lo": self.ci_lo, "ci_hi": self.ci_hi, "bound": self.bound, "reference": self.reference,
        }


def wilson_interval(hits: int, trials: int, confidence: float = 0.95):
    ci = binomtest(int(hits), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def ito_tail_check(A: float, B: float, d: int, T: float, R: float, replicas: int, master_seed: int = 0,
                   steps: int = 1024, runtime: Optional[RuntimeOptions] = None) -> TailCheck:
    """Monte Carlo of P(sup_t |xi(t)| >= R) for xi(t) = a W(t) + beta t with ||a||_HS = A, |beta| = B.

    a = (A / sqrt(d)) I and beta = (B / sqrt(d)) (1, ..., 1); replica r uses noise stream (r, 0).
    """
    if A <= 0 or B < 0 or d < 1 or T <= 0 or replicas < 1:
        raise ConfigurationError(
            f"tail check needs A > 0, B >= 0, d >= 1, T > 0 and replicas >= 1; "
            f"got A={A}, B={B}, d={d}, T={T}, replicas={replicas}"
        )
    if np.sqrt(d) * B * T >= R:
        raise DomainError(f"tail bound needs sqrt(d) B T < R, got sqrt({d}) * {B} * {T} >= {R}")

    runtime = runtime or RuntimeOptions()
    grid = TimeGrid(tau=T / steps, T=T, h=T / steps)
    drift = (B / np.sqrt(d)) * grid.forward_times[:, None]
    scale = A / np.sqrt(d)

    def count_hits(start: int) -> int:
        stop = min(start + runtime.chunk_size, replicas)
        noise = NoiseBundle.for_replicas(master_seed, range(start, stop))
        xi = scale * noise.brownian(grid, d) + drift[None]
        sup = np.max(np.linalg.norm(xi, axis=-1), axis=-1)
        return int(np.count_nonzero(sup >= R))

    pool = WorkerPool(runtime.threads, runtime.progress)
    hits = sum(pool.map(count_hits, range(0, replicas, runtime.chunk_size), desc="tail"))
    lo, hi = wilson_interval(hits, replicas)
    reference = reflection_tail(R / A, T, h=grid.h) if d == 1 and B == 0 else None
    check = TailCheck(hits, replicas, hits / replicas, lo, hi, ito_tail_bound(A, B, d, T, R), reference)
    logger.info(f"Tail check: empirical {check.empirical:.6g} in [{lo:.6g}, {hi:.6g}], bound {check.bound:.6g}")
    return check
