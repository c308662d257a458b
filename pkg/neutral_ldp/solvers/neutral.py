import logging
from typing import Optional, Union

import numpy as np

from ..config import SolverOptions
from ..core.grid import Segment
from ..errors import NumericError
from ..models.spec import ModelSpec

logger = logging.getLogger(__name__)


def solve_neutral_head(spec: ModelSpec, z: np.ndarray, windows: np.ndarray,
                       opts: Optional[SolverOptions] = None) -> np.ndarray:
    """Solve x - D(window with head x) = z for a batch.

    ``windows`` is (B, W, d) with every node known except the head; the head slot is
    used as the starting guess and is overwritten with the solution.
    """
    opts = opts or SolverOptions()
    if not spec.head_dependent:
        return z + spec.neutral(windows)

    # contraction at rate alpha: plain Picard iteration converges geometrically
    tol = opts.fixed_point_tol * (1.0 + np.linalg.norm(z, axis=-1))
    residual = np.inf
    for _ in range(opts.fixed_point_max_iter):
        x = z + spec.neutral(windows)
        residuals = np.linalg.norm(x - windows[:, -1, :], axis=-1)
        windows[:, -1, :] = x
        residual = float(np.max(residuals))
        if np.all(residuals <= tol):
            return x
    raise NumericError(
        f"neutral inversion for {spec.name} did not converge in {opts.fixed_point_max_iter} iterations",
        residual=residual,
    )


def neutral_step_solve(spec: ModelSpec, z, history: Union[Segment, np.ndarray],
                       opts: Optional[SolverOptions] = None) -> np.ndarray:
    """Single-vector form: x with x - D(history completed by head x) = z."""
    window = np.array(history.values if isinstance(history, Segment) else history, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return solve_neutral_head(spec, z[None], window[None], opts)[0]
