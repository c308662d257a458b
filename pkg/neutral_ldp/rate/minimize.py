"""Numerical estimates of the rate inf{I(phi) : M(phi) in event}.

The control is parameterized by its cell derivatives u, so I(phi) = h/2 sum |u|^2 has the exact
gradient h u. The event enters through a quadratic penalty c * violation(M(phi))^2 whose
gradient is taken by forward differences, all perturbed skeletons solved as one batch. The
penalty weight c grows geometrically over a fixed number of stages, each stage an L-BFGS-B run
warm-started from the previous one.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize

from ..config import RateOptions, RuntimeOptions, SolverOptions
from ..core.grid import PathGrid, Segment
from ..errors import ConfigurationError, NumericError
from ..models.spec import ModelSpec
from ..models.truncation import truncate
from ..solvers.deterministic import solve_skeleton, solve_skeleton_batch
from ..utils.workers import WorkerPool
from .control import Control, action
from .events import RareEvent

logger = logging.getLogger(__name__)

FD_BATCH = 256


@dataclass
class RateEstimate:
    value: float
    argmin: Control
    converged: bool
    iterations: int
    residual: float
    stages: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
            "stages": self.stages,
        }


class _PenaltyObjective:
    def __init__(self, spec: ModelSpec, xi: Segment, x0: PathGrid, event: RareEvent,
                 opts: RateOptions, solver: Optional[SolverOptions]):
        self.spec, self.xi, self.x0, self.event = spec, xi, x0, event
        self.opts, self.solver = opts, solver
        self.grid = x0.grid
        self.shape = (self.grid.cells, spec.dim_m)
        self.weight = opts.penalty_start

    def violations(self, u_stack: np.ndarray) -> np.ndarray:
        out = []
        for start in range(0, len(u_stack), FD_BATCH):
            increments = u_stack[start:start + FD_BATCH].reshape((-1,) + self.shape) * self.grid.h
            paths = solve_skeleton_batch(self.spec, self.xi, increments, self.x0, opts=self.solver)
            out.append(self.event.violation(paths))
        return np.concatenate(out)

    def __call__(self, u: np.ndarray):
        h = self.grid.h
        steps = self.opts.fd_step * np.maximum(1.0, np.abs(u))
        stack = np.vstack([u[None], u[None] + np.diag(steps)])
        v = self.violations(stack)
        base, grad_v = v[0], (v[1:] - v[0]) / steps
        value = 0.5 * h * float(u @ u) + self.weight * base ** 2
        grad = h * u + 2.0 * self.weight * base * grad_v
        if not np.isfinite(value):
            raise NumericError("penalty objective is not finite", residual=float(base))
        return value, grad


def minimize_rate(spec: ModelSpec, xi: Segment, x0: PathGrid, event: RareEvent,
                  init: Optional[Control] = None, opts: Optional[RateOptions] = None,
                  solver: Optional[SolverOptions] = None) -> RateEstimate:
    opts = opts or RateOptions()
    grid = x0.grid
    init = init or Control.zero(grid, spec.dim_m)
    if init.grid.cells != grid.cells or init.dim != spec.dim_m:
        raise ConfigurationError(f"initial control lives on {init.grid} with m={init.dim}, need {grid}, m={spec.dim_m}")

    objective = _PenaltyObjective(spec, xi, x0, event, opts, solver)
    u = init.derivative().ravel()
    iterations = 0
    stages = []
    for stage in range(opts.stages):
        objective.weight = opts.penalty_start * opts.penalty_growth ** stage
        result = minimize(objective, u, jac=True, method="L-BFGS-B",
                          options={"maxiter": opts.max_iter_per_stage, "ftol": opts.ftol, "gtol": opts.gtol})
        u = result.x
        iterations += int(result.nit)
        residual = float(objective.violations(u[None])[0])
        stages.append({"penalty": objective.weight, "iterations": int(result.nit),
                       "residual": residual, "message": str(result.message)})
        logger.debug(f"Penalty stage {stage}: c={objective.weight:g}, nit={result.nit}, residual={residual:.3g}")

    argmin = Control.from_derivative(grid, u.reshape(objective.shape))
    residual = float(event.violation(solve_skeleton(spec, xi, argmin, x0, solver))[0])
    converged = residual <= event.tol
    estimate = RateEstimate(action(argmin), argmin, converged, iterations, residual, stages)
    if not converged:
        logger.warning(f"Rate minimization for {spec.name} did not reach the event: residual {residual:.3g} > tol {event.tol:g}")
    return estimate


def minimize_truncated_rate(spec: ModelSpec, xi: Segment, x0: PathGrid, event: RareEvent, R: float,
                            init: Optional[Control] = None, opts: Optional[RateOptions] = None,
                            solver: Optional[SolverOptions] = None) -> RateEstimate:
    """I_R: minimize_rate for the model truncated at level R.

    Agrees with the untruncated rate on events reached by skeletons that stay within R.
    """
    return minimize_rate(truncate(spec, R), xi, x0, event, init, opts, solver)


def _better(candidate: RateEstimate, best: Optional[RateEstimate]) -> bool:
    if best is None:
        return True
    if candidate.converged != best.converged:
        return candidate.converged
    if candidate.converged:
        return candidate.value < best.value
    return candidate.residual < best.residual


def rate_lower_bound_scan(spec: ModelSpec, xi: Segment, x0: PathGrid, event: RareEvent, restarts: int,
                          init: Optional[Control] = None, seed: int = 0, opts: Optional[RateOptions] = None,
                          solver: Optional[SolverOptions] = None,
                          runtime: Optional[RuntimeOptions] = None) -> RateEstimate:
    """Multi-start minimize_rate; restart 0 starts from ``init`` (zero by default), restart r from
    a random control whose cell derivatives are N(0, init_scale^2) drawn from the stream (seed, r).

    Returns the smallest converged value, scanning restarts in index order; if none converged, the
    estimate with the smallest residual.
    """
    if restarts < 1:
        raise ConfigurationError(f"restarts must be >= 1, got {restarts}")
    opts = opts or RateOptions()
    runtime = runtime or RuntimeOptions()
    grid = x0.grid

    def start_from(r: int) -> Control:
        if r == 0:
            return init or Control.zero(grid, spec.dim_m)
        rng = np.random.default_rng([seed, r])
        return Control.from_derivative(grid, opts.init_scale * rng.standard_normal((grid.cells, spec.dim_m)))

    def run(r: int) -> RateEstimate:
        return minimize_rate(spec, xi, x0, event, start_from(r), opts, solver)

    pool = WorkerPool(runtime.threads, runtime.progress)
    best = None
    for r, estimate in enumerate(pool.map(run, range(restarts), desc="restarts")):
        logger.debug(f"Restart {r}: value={estimate.value:.6g}, converged={estimate.converged}")
        if _better(estimate, best):
            best = estimate
    logger.info(f"Rate estimate for {spec.name}: {best.value:.6g} (converged={best.converged})")
    return best
