"""Uniform time grids on [-tau, T], continuous paths stored on them, and segment windows.

Paths are piecewise linear between nodes, so every sup-norm is a max over nodes.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

_ALIGN_TOL = 1e-9


def _multiple_of(length: float, h: float, what: str) -> int:
    ratio = length / h
    count = int(round(ratio))
    if count < 1 or abs(ratio - count) > _ALIGN_TOL * max(1.0, ratio):
        raise ConfigurationError(f"{what}={length} is not a positive integer multiple of h={h}")
    return count


@dataclass(frozen=True)
class TimeGrid:
    tau: float
    T: float
    h: float

    def __post_init__(self):
        if not (self.tau > 0 and self.T > 0 and self.h > 0):
            raise ConfigurationError(f"tau, T and h must be positive, got tau={self.tau}, T={self.T}, h={self.h}")
        _multiple_of(self.tau, self.h, "tau")
        _multiple_of(self.T, self.h, "T")

    @property
    def lag(self) -> int:
        """Number of cells covering the delay window [-tau, 0]."""
        return _multiple_of(self.tau, self.h, "tau")

    @property
    def cells(self) -> int:
        return _multiple_of(self.T, self.h, "T")

    @property
    def nodes(self) -> int:
        return self.lag + self.cells + 1

    @property
    def window(self) -> int:
        """Nodes covered by one segment."""
        return self.lag + 1

    @property
    def times(self) -> np.ndarray:
        return -self.tau + self.h * np.arange(self.nodes)

    @property
    def forward_times(self) -> np.ndarray:
        """The nodes of [0, T]."""
        return self.h * np.arange(self.cells + 1)

    def index_of(self, t: float) -> int:
        position = (t + self.tau) / self.h
        k = int(round(position))
        if abs(position - k) > _ALIGN_TOL * max(1.0, abs(position)) or not 0 <= k < self.nodes:
            raise DomainError(f"t={t} is not a node of the grid {self}")
        return k

    def anchor_index(self, t: float) -> int:
        """Node index of a segment anchor t in [0, T]."""
        k = self.index_of(t)
        if k < self.lag:
            raise DomainError(f"segment anchor t={t} lies outside [0, {self.T}]")
        return k

    def steps_per_block(self, n: int) -> int:
        """Cells per discretization block of length 1/n; 1/n must be a multiple of h."""
        if n < 1:
            raise ConfigurationError(f"discretization index n must be >= 1, got {n}")
        return _multiple_of(1.0 / n, self.h, f"1/n (n={n})")

    def block_start_index(self, k: int, n: int) -> int:
        """Node index of t_n = floor(n t)/n for the node k >= lag."""
        c = self.steps_per_block(n)
        return self.lag + ((k - self.lag) // c) * c

    def window_indices(self, k: int, cap: Optional[int] = None) -> np.ndarray:
        idx = np.arange(k - self.lag, k + 1)
        if cap is not None:
            idx = np.minimum(idx, cap)
        return idx

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.tau, self.T, self.h / factor)


@dataclass(frozen=True)
class PathGrid:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.nodes:
            raise ConfigurationError(
                f"path needs {self.grid.nodes} node values, got array of shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def evaluate(self, t: float) -> np.ndarray:
        if not -self.grid.tau - _ALIGN_TOL <= t <= self.grid.T + _ALIGN_TOL:
            raise DomainError(f"t={t} outside [-{self.grid.tau}, {self.grid.T}]")
        times = self.grid.times
        return np.array([np.interp(t, times, self.values[:, j]) for j in range(self.dim)])

    def restrict(self, coarse: TimeGrid) -> "PathGrid":
        """Values at the nodes of a coarser grid with the same tau and T."""
        factor = int(round(coarse.h / self.grid.h))
        if coarse.tau != self.grid.tau or coarse.T != self.grid.T or factor < 1 \
                or abs(coarse.h - factor * self.grid.h) > _ALIGN_TOL * coarse.h:
            raise ConfigurationError(f"{coarse} is not a coarsening of {self.grid}")
        return PathGrid(coarse, self.values[::factor])

    def terminal(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class PathBatch:
    """B paths on one grid, stored as a (B, nodes, d) array."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[1] != self.grid.nodes:
            raise ConfigurationError(f"batch needs shape (B, {self.grid.nodes}, d), got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

    def path(self, i: int) -> PathGrid:
        return PathGrid(self.grid, self.values[i])

    def sup_sq_norms(self) -> np.ndarray:
        """sup_t ||X_t||^2_inf per path, i.e. the max of |X|^2 over all nodes of [-tau, T]."""
        return np.max(np.sum(self.values ** 2, axis=-1), axis=-1)

    def sup_gaps(self, other: Union["PathBatch", PathGrid, np.ndarray]) -> np.ndarray:
        """sup over t in [0, T] of |X(t) - other(t)| per path."""
        reference = other.values if isinstance(other, (PathBatch, PathGrid)) else np.asarray(other)
        lag = self.grid.lag
        if reference.ndim == 2:
            reference = reference[None]
        diff = self.values[:, lag:] - reference[:, lag:]
        return np.max(np.linalg.norm(diff, axis=-1), axis=-1)


@dataclass(frozen=True)
class Segment:
    """The window theta -> path(anchor + theta), theta in [-tau, 0].

    With ``cap`` set, the window reads path(min(anchor + theta, cap)) instead.
    """

    source: PathGrid
    anchor: float
    cap: Optional[float] = None

    @property
    def grid(self) -> TimeGrid:
        return self.source.grid

    @property
    def indices(self) -> np.ndarray:
        k = self.grid.anchor_index(self.anchor)
        cap = None if self.cap is None else self.grid.index_of(self.cap)
        return self.grid.window_indices(k, cap)

    @property
    def values(self) -> np.ndarray:
        return self.source.values[self.indices]

    @property
    def head(self) -> np.ndarray:
        return self.values[-1]

    def sup_norm(self) -> float:
        return sup_norm(self)


def segment_sup_norms(windows: np.ndarray) -> np.ndarray:
    """Sup-norms of a (B, W, d) batch of windows."""
    return np.max(np.linalg.norm(windows, axis=-1), axis=-1)


def sup_norm(seg: Segment) -> float:
    return float(np.max(np.linalg.norm(seg.values, axis=-1)))


def segment_at(path: PathGrid, t: float) -> Segment:
    path.grid.anchor_index(t)
    return Segment(path, t)


def frozen_segment_at(path: PathGrid, t: float, n: int) -> Segment:
    """The window theta -> path((t + theta) ^ t_n) with t_n = floor(n t)/n."""
    grid = path.grid
    k = grid.anchor_index(t)
    cap_index = grid.block_start_index(k, n)
    return Segment(path, t, cap=float(grid.times[cap_index]))


def _window_of(value: Union[float, Sequence[float], np.ndarray], grid: TimeGrid, dim: Optional[int]) -> np.ndarray:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    if dim is not None and value.shape[-1] != dim:
        raise ConfigurationError(f"initial value has dimension {value.shape[-1]}, model needs {dim}")
    return value


def constant_initial(grid: TimeGrid, value: Union[float, Sequence[float]], dim: Optional[int] = None) -> Segment:
    """The constant initial segment xi = value on [-tau, 0]."""
    value = _window_of(value, grid, dim)
    path = PathGrid(grid, np.tile(value, (grid.nodes, 1)))
    return segment_at(path, 0.0)


def initial_from_nodes(grid: TimeGrid, nodes: Sequence[Sequence[float]]) -> Segment:
    """An initial segment given by its values at the tau/h + 1 nodes of [-tau, 0]."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    if nodes.shape[0] != grid.window:
        raise ConfigurationError(f"initial segment needs {grid.window} node values, got {nodes.shape[0]}")
    tail = np.tile(nodes[-1], (grid.cells, 1))
    return segment_at(PathGrid(grid, np.vstack([nodes, tail])), 0.0)
