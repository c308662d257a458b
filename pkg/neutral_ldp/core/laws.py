"""Uniform empirical laws on segment space and the exact Wasserstein-2 distance between them."""
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import ConfigurationError, UnsupportedError
from .grid import Segment, segment_sup_norms

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATOMS = 64


@dataclass(frozen=True)
class EmpiricalLaw:
    """N equally weighted segments, stored as an (N, W, d) array of window values."""

    atoms: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 2:
            atoms = atoms[:, :, None]
        if atoms.ndim != 3 or atoms.shape[0] < 1:
            raise ConfigurationError(f"an empirical law needs at least one (W, d) atom, got shape {atoms.shape}")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_segments(cls, segments: Iterable[Segment]) -> "EmpiricalLaw":
        windows = [seg.values for seg in segments]
        if not windows:
            raise ConfigurationError("an empirical law needs at least one segment")
        shapes = {w.shape for w in windows}
        if len(shapes) != 1:
            raise ConfigurationError(f"atoms must share grid geometry, got window shapes {sorted(shapes)}")
        return cls(np.stack(windows))

    @classmethod
    def dirac(cls, window) -> "EmpiricalLaw":
        values = window.values if isinstance(window, Segment) else np.asarray(window, dtype=float)
        return cls(values[None])

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, 1.0 / self.size)

    def second_moment(self) -> float:
        """mu(||.||_inf^2)."""
        return float(np.mean(segment_sup_norms(self.atoms) ** 2))

    def head_mean(self) -> np.ndarray:
        """Mean of the head value eta(0) under the law."""
        return self.atoms[:, -1, :].mean(axis=0)


def wasserstein2(a: EmpiricalLaw, b: EmpiricalLaw, max_atoms: int = DEFAULT_MAX_ATOMS) -> float:
    """Exact W2 between equal-size uniform laws with squared sup-norm ground cost."""
    if a.size != b.size:
        raise UnsupportedError(f"wasserstein2 needs equal atom counts, got {a.size} and {b.size}")
    if a.size > max_atoms:
        raise UnsupportedError(f"laws with {a.size} atoms exceed the exact-assignment threshold {max_atoms}")
    if a.atoms.shape[1:] != b.atoms.shape[1:]:
        raise ConfigurationError(f"atom geometry differs: {a.atoms.shape[1:]} vs {b.atoms.shape[1:]}")

    diff = a.atoms[:, None] - b.atoms[None, :]
    cost = np.max(np.sum(diff ** 2, axis=-1), axis=-1)
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(cost[rows, cols].mean()))
