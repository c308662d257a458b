import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from ..core.grid import Segment, segment_sup_norms, sup_norm
from ..core.laws import EmpiricalLaw
from ..errors import ConfigurationError

logger = logging.getLogger(__name__)

# (B, W, d) windows -> (B, d)
NeutralFn = Callable[[np.ndarray], np.ndarray]
# (B, W, d) windows, shared law -> (B, d) drift or (B, d, m) diffusion
CoefficientFn = Callable[[np.ndarray, EmpiricalLaw], np.ndarray]


@dataclass(frozen=True)
class ModelSpec:
    """The coefficient triple (D, b, sigma) of one neutral McKean-Vlasov SDE and its declared constants.

    Coefficients act on batches of windows against one shared law; ``D``, ``b`` and ``sigma``
    are the single-segment views.
    """

    name: str
    dim_d: int
    dim_m: int
    neutral: NeutralFn
    drift: CoefficientFn
    diffusion: CoefficientFn
    alpha: float
    L: float
    L1: float
    L5: Optional[float] = None
    head_dependent: bool = False

    def __post_init__(self):
        if self.dim_d < 1 or self.dim_m < 1:
            raise ConfigurationError(f"model {self.name}: dimensions must be >= 1, got d={self.dim_d}, m={self.dim_m}")
        if not 0 < self.alpha < 1:
            raise ConfigurationError(f"model {self.name}: alpha must lie in (0, 1), got {self.alpha}")
        if self.L <= 0 or self.L1 <= 0:
            raise ConfigurationError(f"model {self.name}: L and L1 must be positive, got L={self.L}, L1={self.L1}")
        if self.L5 is not None and self.L5 < 0:
            raise ConfigurationError(f"model {self.name}: L5 must be nonnegative, got {self.L5}")

    @property
    def L2(self) -> float:
        return max(self.L + (1 + self.alpha) ** 2, self.L + self.L1)

    def with_constants(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def D(self, seg: Segment) -> np.ndarray:
        return self.neutral(seg.values[None])[0]

    def b(self, seg: Segment, law: EmpiricalLaw) -> np.ndarray:
        return self.drift(seg.values[None], law)[0]

    def sigma(self, seg: Segment, law: EmpiricalLaw) -> np.ndarray:
        return self.diffusion(seg.values[None], law)[0]


def chi_R_of_norms(norms: np.ndarray, R: float) -> np.ndarray:
    """The cutoff multiplier as a function of sup-norms: 1 inside the ball R, 0 outside R + 1, linear between."""
    return np.clip(R + 1.0 - np.asarray(norms, dtype=float), 0.0, 1.0)


def chi_R(seg: Segment, R: float) -> float:
    return float(chi_R_of_norms(sup_norm(seg), R))


def cutoff(windows: np.ndarray, R: float) -> np.ndarray:
    return chi_R_of_norms(segment_sup_norms(windows), R)
