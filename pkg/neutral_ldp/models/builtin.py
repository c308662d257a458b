"""Built-in models and the registry that maps config names to them."""
import logging
from typing import Callable, Dict, Optional

import numpy as np

from ..core.laws import EmpiricalLaw
from ..errors import ConfigurationError
from .spec import ModelSpec

logger = logging.getLogger(__name__)

SCHILDER = "SCHILDER"
TEST_1 = "TEST-1"
TEST_1_BOUNDED = "TEST-1-BOUNDED"
TEST_1_LOCAL = "TEST-1-LOCAL"
TEST_1_CONST_SIGMA = "TEST-1-CONST-SIGMA"
ZERO = "ZERO"

# twice the worst ratios lhs/rhs of the drift and growth conditions observed for the delay family
TEST_1_L = 0.625
TEST_1_L1 = 0.5


def make_delay_model(
    name: str = "delay",
    neutral_weight: float = 0.25,
    mean_field_weight: float = 0.5,
    sigma_base: float = 0.3,
    sigma_amplitude: float = 0.1,
    clamp: Optional[float] = None,
    neutral_at_head: bool = False,
    alpha: Optional[float] = None,
    L: float = TEST_1_L,
    L1: float = TEST_1_L1,
    L5: Optional[float] = None,
    dim: int = 1,
) -> ModelSpec:
    """The delay family behind TEST-1, one independent copy per coordinate.

    D(xi) = w * xi(-tau) (or w * xi(0) with ``neutral_at_head``),
    b(xi, mu) = -xi(0) + k * mean of eta(0) under mu, optionally passed through clamp * tanh(. / clamp),
    sigma(xi, mu) = diag(s0 + s1 * sin(xi(0))).
    ``alpha`` defaults to |w|; declaring a smaller one gives a deliberately broken model.
    """
    alpha = abs(neutral_weight) if alpha is None else alpha
    read = -1 if neutral_at_head else 0

    def neutral(windows: np.ndarray) -> np.ndarray:
        return neutral_weight * windows[:, read, :]

    def drift(windows: np.ndarray, law: EmpiricalLaw) -> np.ndarray:
        b = -windows[:, -1, :] + mean_field_weight * law.head_mean()[None, :]
        if clamp is not None:
            b = clamp * np.tanh(b / clamp)
        return b

    def diffusion(windows: np.ndarray, law: EmpiricalLaw) -> np.ndarray:
        diagonal = sigma_base + sigma_amplitude * np.sin(windows[:, -1, :])
        return diagonal[:, :, None] * np.eye(dim)[None]

    return ModelSpec(
        name=name, dim_d=dim, dim_m=dim,
        neutral=neutral, drift=drift, diffusion=diffusion,
        alpha=alpha, L=L, L1=L1, L5=L5,
        head_dependent=neutral_at_head and neutral_weight != 0,
    )


def make_constant_model(name: str, sigma: float, alpha: float = 0.01, L: float = 0.1, L1: float = 1.0,
                        dim: int = 1) -> ModelSpec:
    """D = 0, b = 0 and sigma = sigma * identity."""

    def neutral(windows: np.ndarray) -> np.ndarray:
        return np.zeros((windows.shape[0], dim))

    def drift(windows: np.ndarray, law: EmpiricalLaw) -> np.ndarray:
        return np.zeros((windows.shape[0], dim))

    def diffusion(windows: np.ndarray, law: EmpiricalLaw) -> np.ndarray:
        return np.broadcast_to(sigma * np.eye(dim), (windows.shape[0], dim, dim)).copy()

    return ModelSpec(name=name, dim_d=dim, dim_m=dim, neutral=neutral, drift=drift, diffusion=diffusion,
                     alpha=alpha, L=L, L1=L1, L5=abs(sigma) * np.sqrt(dim))


_FACTORIES: Dict[str, Callable[[], ModelSpec]] = {
    SCHILDER: lambda: make_constant_model(SCHILDER, sigma=1.0),
    ZERO: lambda: make_constant_model(ZERO, sigma=0.0, L1=0.1),
    TEST_1: lambda: make_delay_model(TEST_1),
    TEST_1_BOUNDED: lambda: make_delay_model(TEST_1_BOUNDED, clamp=4.0, L5=4.0),
    TEST_1_LOCAL: lambda: make_delay_model(TEST_1_LOCAL, mean_field_weight=0.0),
    TEST_1_CONST_SIGMA: lambda: make_delay_model(TEST_1_CONST_SIGMA, sigma_amplitude=0.0),
}
_REGISTERED: Dict[str, ModelSpec] = {}


def builtin(name: str) -> ModelSpec:
    if name in _REGISTERED:
        return _REGISTERED[name]
    try:
        return _FACTORIES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; known models: {', '.join(available())}") from None


def register(spec: ModelSpec, replace: bool = False) -> None:
    """Make a custom model selectable by name from experiment configs."""
    if not replace and (spec.name in _FACTORIES or spec.name in _REGISTERED):
        raise ConfigurationError(f"model {spec.name!r} is already defined")
    _REGISTERED[spec.name] = spec
    logger.info(f"Registered model {spec.name}")


def available() -> list:
    return sorted(set(_FACTORIES) | set(_REGISTERED))
