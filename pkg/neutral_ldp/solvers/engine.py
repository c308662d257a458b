"""The explicit Euler march shared by every scheme.

Each step advances Z(t) = X(t) - D(X_t) by b dt + sigma * forcing and recovers X(t + h)
by the neutral inversion. Schemes differ only in the forcing (sqrt(eps) dW or a control
increment), in whether the diffusion argument is frozen at t_n = floor(n t)/n, and in the
law argument (the batch's own empirical law or the Dirac mass along a fixed path).
"""
import logging
from typing import Optional

import numpy as np

from ..config import SolverOptions
from ..core.grid import PathBatch, PathGrid, TimeGrid
from ..core.laws import EmpiricalLaw
from ..errors import ConfigurationError, NumericError
from ..models.spec import ModelSpec
from .neutral import solve_neutral_head

logger = logging.getLogger(__name__)


class LawSource:
    def live(self, grid: TimeGrid, k: int, values: np.ndarray) -> EmpiricalLaw:
        raise NotImplementedError

    def frozen(self, grid: TimeGrid, k: int, cap: int, values: np.ndarray) -> EmpiricalLaw:
        raise NotImplementedError


class OwnLaw(LawSource):
    """The empirical law of the batch being marched (a Dirac mass for a batch of one)."""

    def live(self, grid, k, values):
        return EmpiricalLaw(values[:, k - grid.lag:k + 1])

    def frozen(self, grid, k, cap, values):
        return EmpiricalLaw(values[:, grid.window_indices(k, cap)])


class DiracAlong(LawSource):
    """The Dirac mass at the segment of a fixed path, usually the limit X0."""

    def __init__(self, path: PathGrid):
        self.path = path

    def live(self, grid, k, values):
        return EmpiricalLaw.dirac(self.path.values[k - grid.lag:k + 1])

    def frozen(self, grid, k, cap, values):
        return EmpiricalLaw.dirac(self.path.values[grid.window_indices(k, cap)])


def initial_window(spec: ModelSpec, xi_values: np.ndarray, grid: TimeGrid) -> np.ndarray:
    window = np.asarray(xi_values, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    if window.shape != (grid.window, spec.dim_d):
        raise ConfigurationError(
            f"initial segment has shape {window.shape}, grid and model need {(grid.window, spec.dim_d)}"
        )
    return window


def march(
    spec: ModelSpec,
    xi_values: np.ndarray,
    grid: TimeGrid,
    batch: int,
    law: LawSource,
    forcing: Optional[np.ndarray] = None,
    freeze_n: Optional[int] = None,
    opts: Optional[SolverOptions] = None,
) -> PathBatch:
    """March ``batch`` paths from the initial window; ``forcing`` is (batch, cells, m) or (cells, m)."""
    opts = opts or SolverOptions()
    lag, cells, h = grid.lag, grid.cells, grid.h
    window = initial_window(spec, xi_values, grid)

    if forcing is not None:
        forcing = np.asarray(forcing, dtype=float)
        if forcing.ndim == 2:
            forcing = np.broadcast_to(forcing, (batch,) + forcing.shape)
        if forcing.shape != (batch, cells, spec.dim_m):
            raise ConfigurationError(f"forcing has shape {forcing.shape}, expected {(batch, cells, spec.dim_m)}")
    if freeze_n is not None:
        grid.steps_per_block(freeze_n)

    values = np.empty((batch, grid.nodes, spec.dim_d))
    values[:, :lag + 1] = window
    z = values[:, lag] - spec.neutral(values[:, :lag + 1])

    for k in range(lag, lag + cells):
        j = k - lag
        current = values[:, k - lag:k + 1]
        live_law = law.live(grid, k, values)
        z = z + h * spec.drift(current, live_law)

        if forcing is not None:
            if freeze_n is None:
                sigma = spec.diffusion(current, live_law)
            else:
                cap = grid.block_start_index(k, freeze_n)
                frozen = values[:, grid.window_indices(k, cap)]
                sigma = spec.diffusion(frozen, law.frozen(grid, k, cap, values))
            z = z + np.matmul(sigma, forcing[:, j, :, None])[..., 0]

        values[:, k + 1] = values[:, k]
        values[:, k + 1] = solve_neutral_head(spec, z, values[:, k + 1 - lag:k + 2], opts)
        if not np.all(np.isfinite(values[:, k + 1])):
            raise NumericError(f"{spec.name}: non-finite state at t={grid.times[k + 1]:.6g}")

    return PathBatch(grid, values)
