import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core.grid import TimeGrid
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Control:
    """An absolutely continuous phi on [0, T] with phi(0) = 0, piecewise linear between nodes.

    ``values`` holds phi at the cells + 1 nodes of [0, T], shape (cells + 1, m).
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.cells + 1:
            raise ConfigurationError(f"control needs {self.grid.cells + 1} node values, got shape {values.shape}")
        if np.any(values[0] != 0.0):
            raise ConfigurationError(f"control must start at 0, got phi(0)={values[0]}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls, grid: TimeGrid, m: int = 1) -> "Control":
        return cls(grid, np.zeros((grid.cells + 1, m)))

    @classmethod
    def from_function(cls, grid: TimeGrid, f: Callable[[np.ndarray], np.ndarray], m: int = 1) -> "Control":
        """Sample f at the nodes of [0, T]; f(0) is subtracted so the control starts at 0."""
        t = grid.forward_times
        values = np.asarray(f(t), dtype=float).reshape(len(t), m)
        return cls(grid, values - values[0])

    @classmethod
    def from_derivative(cls, grid: TimeGrid, u: np.ndarray) -> "Control":
        """The control whose derivative on cell j is u[j], shape (cells, m)."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u[:, None]
        if u.shape[0] != grid.cells:
            raise ConfigurationError(f"derivative needs {grid.cells} cell values, got {u.shape[0]}")
        values = np.zeros((grid.cells + 1, u.shape[1]))
        np.cumsum(u * grid.h, axis=0, out=values[1:])
        return cls(grid, values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def increments(self) -> np.ndarray:
        """Per-cell increments, shape (cells, m)."""
        return np.diff(self.values, axis=0)

    def derivative(self) -> np.ndarray:
        return self.increments() / self.grid.h

    def scaled(self, c: float) -> "Control":
        return Control(self.grid, c * self.values)

    def action(self) -> float:
        return action(self)


def action(phi: Control) -> float:
    """I(phi) = 1/2 int |phi'|^2, exact for the piecewise constant derivative."""
    return float(0.5 * np.sum(phi.increments() ** 2) / phi.grid.h)
