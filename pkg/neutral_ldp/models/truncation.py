import logging
from typing import Optional

import numpy as np

from ..config import AuditOptions
from ..errors import DomainError
from .audit import SegmentSampler
from .spec import ModelSpec, cutoff

logger = logging.getLogger(__name__)

L5_SAFETY = 1.5
L5_SAMPLES = 2000


def estimate_bound(spec: ModelSpec, radius: float, sampler: Optional[SegmentSampler] = None,
                   samples: int = L5_SAMPLES, seed: int = 0) -> float:
    """Sampled sup of |b| v ||sigma||_HS over windows in the sup-norm ball of the given radius.

    Windows cover the whole ball; laws come from the sampler itself, so their atoms stay within
    its amplitude.
    """
    sampler = sampler or SegmentSampler.from_options(spec.dim_d, AuditOptions())
    rng = np.random.default_rng([seed, int(np.ceil(radius * 1000))])
    windows = sampler.ball(rng, samples, radius)
    best = 0.0
    # one law per block of windows keeps the law argument varied without a call per sample
    for block in np.array_split(np.arange(samples), max(1, samples // 50)):
        law = sampler.law(rng, int(rng.integers(1, sampler.max_atoms + 1)))
        b = spec.drift(windows[block], law)
        s = spec.diffusion(windows[block], law)
        best = max(best, float(np.max(np.linalg.norm(b, axis=-1))),
                   float(np.max(np.sqrt(np.sum(s ** 2, axis=(-2, -1))))))
    return best


def truncate(spec: ModelSpec, R: float, sampler: Optional[SegmentSampler] = None) -> ModelSpec:
    """b and sigma multiplied by chi_R of the segment's sup-norm.

    L5 is the sampled sup of |b| v ||sigma||_HS over the ball of radius R + 1, times 1.5.
    L grows to L + 2(1 + alpha) L5 for the drift and 2L + 2 L5^2 for the diffusion, the
    constants the cutoff costs in the one-sided and Lipschitz conditions.
    """
    if R < 0:
        raise DomainError(f"truncation level must be nonnegative, got R={R}")

    base_drift, base_diffusion = spec.drift, spec.diffusion

    def drift(windows, law):
        return cutoff(windows, R)[:, None] * base_drift(windows, law)

    def diffusion(windows, law):
        return cutoff(windows, R)[:, None, None] * base_diffusion(windows, law)

    L5 = L5_SAFETY * estimate_bound(spec, R + 1.0, sampler)
    L = max(spec.L + 2.0 * (1.0 + spec.alpha) * L5, 2.0 * spec.L + 2.0 * L5 ** 2)
    logger.debug(f"Truncated {spec.name} at R={R}: L5={L5:.6g}, L={L:.6g}")
    return spec.with_constants(name=f"{spec.name}@R={R:g}", drift=drift, diffusion=diffusion, L=L, L5=L5)
