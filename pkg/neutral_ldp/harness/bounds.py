"""Closed-form a-priori bounds: L2, the moment bound L3(eps), the bound on X0 and the gap bound L4(eps)."""
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DomainError
from ..models.spec import ModelSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundsRecord:
    L2: float
    L3: float
    X0_bound: float
    L4: float

    def to_dict(self) -> dict:
        return asdict(self)


def compute_bounds(alpha: float, L: float, L1: float, T: float, eps: float, norm_xi: float) -> BoundsRecord:
    """Evaluate

        L2 = max{L + (1 + alpha)^2, L + L1}
        L3 = [(2 alpha^2 + 3 alpha + 3) |xi|^2 + 2 L2 T (1 + 65 eps)] / (1 - alpha)^2 * exp{4 L2 T (1 + 65 eps) / (1 - alpha)^2}
        X0 = [(alpha^2 + alpha + 2) |xi|^2 + L2 T] / (1 - alpha)^2 * exp{2 L2 T / (1 - alpha)^2}
        L4 = 130 eps L2 T (1 + 2 L3) / (1 - alpha)^2 * exp{4 L / (1 - alpha)^2}

    Overflow gives inf rather than an error. alpha = 0 and L = 0 are accepted so the formulas
    can be evaluated at their edges.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"bounds need alpha in [0, 1), got {alpha}")
    if L < 0 or L1 < 0 or T <= 0 or eps < 0 or norm_xi < 0:
        raise DomainError(f"bounds need L, L1, eps, |xi| >= 0 and T > 0; got L={L}, L1={L1}, T={T}, eps={eps}, |xi|={norm_xi}")

    contraction = (1.0 - alpha) ** 2
    xi_sq = norm_xi ** 2
    L2 = max(L + (1.0 + alpha) ** 2, L + L1)
    noise = 1.0 + 65.0 * eps
    with np.errstate(over="ignore"):
        L3 = ((2 * alpha ** 2 + 3 * alpha + 3) * xi_sq + 2 * L2 * T * noise) / contraction \
            * np.exp(4 * L2 * T * noise / contraction)
        x0 = ((alpha ** 2 + alpha + 2) * xi_sq + L2 * T) / contraction * np.exp(2 * L2 * T / contraction)
        L4 = 130 * eps * L2 * T * (1 + 2 * L3) / contraction * np.exp(4 * L / contraction)
    return BoundsRecord(float(L2), float(L3), float(x0), float(L4))


def bounds_for_model(spec: ModelSpec, T: float, eps: float, norm_xi: float) -> BoundsRecord:
    return compute_bounds(spec.alpha, spec.L, spec.L1, T, eps, norm_xi)
