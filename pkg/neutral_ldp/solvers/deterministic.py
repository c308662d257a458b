import logging
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..config import SolverOptions
from ..core.grid import PathBatch, PathGrid, Segment, TimeGrid
from ..errors import ConfigurationError
from ..models.spec import ModelSpec
from ..models.truncation import truncate
from .engine import DiracAlong, OwnLaw, march

if TYPE_CHECKING:
    from ..rate.control import Control

logger = logging.getLogger(__name__)


def _check_initial(xi: Segment, grid: TimeGrid) -> np.ndarray:
    if xi.grid.tau != grid.tau or xi.grid.h != grid.h:
        raise ConfigurationError(f"initial segment lives on {xi.grid}, solver grid is {grid}")
    return xi.values


def solve_limit_ode(spec: ModelSpec, xi: Segment, grid: TimeGrid,
                    opts: Optional[SolverOptions] = None) -> PathGrid:
    """X0: the noise-free equation with the law argument the Dirac mass at X0's own segment."""
    values = _check_initial(xi, grid)
    logger.debug(f"Solving limit equation for {spec.name} on {grid}")
    return march(spec, values, grid, 1, OwnLaw(), opts=opts).path(0)


def solve_skeleton_batch(spec: ModelSpec, xi: Segment, increments: np.ndarray, x0: PathGrid,
                         n: Optional[int] = None, opts: Optional[SolverOptions] = None) -> PathBatch:
    """Skeleton paths for a stack of control increments of shape (B, cells, m).

    With ``n`` the diffusion argument and law are frozen at t_n, giving the discretized skeleton.
    """
    grid = x0.grid
    values = _check_initial(xi, grid)
    increments = np.asarray(increments, dtype=float)
    if increments.ndim == 2:
        increments = increments[None]
    return march(spec, values, grid, increments.shape[0], DiracAlong(x0),
                 forcing=increments, freeze_n=n, opts=opts)


def _control_increments(phi: "Control", grid: TimeGrid) -> np.ndarray:
    if phi.grid.T != grid.T or phi.grid.h != grid.h:
        raise ConfigurationError(f"control lives on {phi.grid}, solver grid is {grid}")
    return phi.increments()


def solve_skeleton(spec: ModelSpec, xi: Segment, phi: "Control", x0: PathGrid,
                   opts: Optional[SolverOptions] = None) -> PathGrid:
    """M(phi): the limit equation forced by sigma(M_s, delta_{X0_s}) dphi."""
    increments = _control_increments(phi, x0.grid)
    return solve_skeleton_batch(spec, xi, increments, x0, opts=opts).path(0)


def solve_skeleton_discretized(spec: ModelSpec, xi: Segment, phi: "Control", n: int, x0: PathGrid,
                               opts: Optional[SolverOptions] = None) -> PathGrid:
    """M^n(phi): as M(phi) but sigma reads the segments of M^n and X0 frozen at t_n."""
    increments = _control_increments(phi, x0.grid)
    return solve_skeleton_batch(spec, xi, increments, x0, n=n, opts=opts).path(0)


def solve_skeleton_truncated(spec: ModelSpec, xi: Segment, phi: "Control", R: float, x0: PathGrid,
                             opts: Optional[SolverOptions] = None,
                             truncated: Optional[ModelSpec] = None) -> PathGrid:
    """M^R(phi): the skeleton of the model truncated at level R, law still frozen along X0.

    Coincides with M(phi) whenever every segment of M(phi) stays in the ball of radius R.
    """
    truncated = truncated or truncate(spec, R)
    return solve_skeleton(truncated, xi, phi, x0, opts)


def neutral_gap_norms(spec: ModelSpec, a: PathGrid, b: PathGrid) -> Tuple[float, float]:
    """(sup_t ||a_t - b_t||_inf, sup_t |G(t)|) over t in [0, T], G(t) = a(t) - b(t) - (D(a_t) - D(b_t)).

    For two solutions from the same initial segment the pair satisfies
    sup||a_t - b_t|| <= sup|G| / (1 - alpha) and |G(t)| <= (1 + alpha) ||a_t - b_t||.
    """
    if a.grid != b.grid:
        raise ConfigurationError("paths live on different grids")
    grid = a.grid
    lag = grid.lag

    def windows(path: PathGrid) -> np.ndarray:
        view = np.lib.stride_tricks.sliding_window_view(path.values, grid.window, axis=0)
        return np.swapaxes(view, 1, 2)

    diff = a.values - b.values
    segment_gap = float(np.max(np.linalg.norm(diff, axis=-1)))
    g = diff[lag:] - (spec.neutral(windows(a)) - spec.neutral(windows(b)))
    return segment_gap, float(np.max(np.linalg.norm(g, axis=-1)))


def empirical_order(coarse, fine, finer) -> float:
    """Convergence order from three solutions at steps h, h/2, h/4: log2(|coarse - fine| / |fine - finer|)."""
    first = float(np.linalg.norm(np.asarray(coarse) - np.asarray(fine)))
    second = float(np.linalg.norm(np.asarray(fine) - np.asarray(finer)))
    if second == 0.0:
        return float("inf") if first > 0 else float("nan")
    return float(np.log2(first / second))
