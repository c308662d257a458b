"""Rare events shared by the rate minimizer (applied to skeleton paths) and the Monte Carlo estimators."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from ..core.grid import PathBatch, PathGrid
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)


class EventKind(Enum):
    TERMINAL_TARGET = "terminal_target"
    SUP_EXCEED = "sup_exceed"


@dataclass(frozen=True)
class RareEvent:
    """TERMINAL_TARGET: |path(T) - target| <= tol.  SUP_EXCEED: sup_{t in [0, T]} |path(t) - reference(t)| > delta.

    ``reference`` is a path on the same grid (usually X0); ``tol`` is also the feasibility
    tolerance the minimizer must reach on the violation.
    """

    kind: EventKind
    target: Optional[np.ndarray] = None
    delta: Optional[float] = None
    reference: Optional[PathGrid] = None
    tol: float = 1e-3

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigurationError(f"event tolerance must be positive, got {self.tol}")
        if self.kind is EventKind.TERMINAL_TARGET:
            if self.target is None:
                raise ConfigurationError("TERMINAL_TARGET needs a target")
            object.__setattr__(self, "target", np.atleast_1d(np.asarray(self.target, dtype=float)))
        elif self.kind is EventKind.SUP_EXCEED:
            if self.delta is None or self.delta <= 0:
                raise ConfigurationError(f"SUP_EXCEED needs delta > 0, got {self.delta}")
            if self.reference is None:
                raise ConfigurationError("SUP_EXCEED needs a reference path")

    @classmethod
    def terminal_target(cls, target, tol: float = 1e-3) -> "RareEvent":
        return cls(EventKind.TERMINAL_TARGET, target=target, tol=tol)

    @classmethod
    def sup_exceed(cls, delta: float, reference: PathGrid, tol: float = 1e-3) -> "RareEvent":
        return cls(EventKind.SUP_EXCEED, delta=delta, reference=reference, tol=tol)

    def _values(self, paths: Union[PathGrid, PathBatch, np.ndarray]) -> np.ndarray:
        values = paths.values if isinstance(paths, (PathGrid, PathBatch)) else np.asarray(paths)
        return values[None] if values.ndim == 2 else values

    def sup_deviation(self, paths) -> np.ndarray:
        """sup over t in [0, T] of |path(t) - reference(t)|, one value per path."""
        values = self._values(paths)
        lag = self.reference.grid.lag
        diff = values[:, lag:] - self.reference.values[None, lag:]
        return np.max(np.linalg.norm(diff, axis=-1), axis=-1)

    def violation(self, paths) -> np.ndarray:
        """Distance from the event, zero inside it (for SUP_EXCEED, up to the boundary)."""
        values = self._values(paths)
        if self.kind is EventKind.TERMINAL_TARGET:
            return np.linalg.norm(values[:, -1, :] - self.target[None], axis=-1)
        return np.maximum(0.0, self.delta - self.sup_deviation(values))

    def occurs(self, paths) -> np.ndarray:
        values = self._values(paths)
        if self.kind is EventKind.TERMINAL_TARGET:
            return self.violation(values) <= self.tol
        return self.sup_deviation(values) > self.delta

    def describe(self) -> dict:
        if self.kind is EventKind.TERMINAL_TARGET:
            return {"kind": self.kind.name, "target": self.target.tolist(), "tol": self.tol}
        return {"kind": self.kind.name, "delta": self.delta, "tol": self.tol}
