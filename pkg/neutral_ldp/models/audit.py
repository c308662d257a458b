"""Sample-based audit of the regularity conditions a model declares.

Every condition is a universally quantified inequality; the audit evaluates it at random
segments and laws and reports the worst margin (right side minus left side) it saw.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..config import AuditOptions, RuntimeOptions
from ..core.grid import segment_sup_norms
from ..core.laws import EmpiricalLaw, wasserstein2
from ..errors import ConfigurationError
from ..utils.workers import WorkerPool
from .spec import ModelSpec

logger = logging.getLogger(__name__)

CONDITIONS = ("A1", "A2-drift", "A2-diffusion", "A3", "growth")


class Trial(NamedTuple):
    xi: np.ndarray
    eta: np.ndarray
    mu: EmpiricalLaw
    nu: EmpiricalLaw


class SegmentSampler:
    """Random windows shaped like Brownian bridges, clipped to [-amplitude, amplitude]."""

    def __init__(self, dim: int = 1, window: int = 11, amplitude: float = 5.0, max_atoms: int = 8):
        if window < 1 or amplitude <= 0 or max_atoms < 1:
            raise ConfigurationError(
                f"sampler needs window >= 1, amplitude > 0, max_atoms >= 1; got {window}, {amplitude}, {max_atoms}"
            )
        self.dim = dim
        self.window = window
        self.amplitude = amplitude
        self.max_atoms = max_atoms

    @classmethod
    def from_options(cls, dim: int, opts: AuditOptions) -> "SegmentSampler":
        return cls(dim=dim, window=opts.window, amplitude=opts.amplitude, max_atoms=opts.max_atoms)

    def segments(self, rng: np.random.Generator, count: int, radius: Optional[float] = None) -> np.ndarray:
        """``count`` windows of shape (W, d); with ``radius`` they are scaled into the sup-norm ball."""
        a = self.amplitude
        start = rng.uniform(-a, a, size=(count, 1, self.dim))
        end = rng.uniform(-a, a, size=(count, 1, self.dim))
        s = np.linspace(0.0, 1.0, self.window)[None, :, None]
        steps = rng.standard_normal((count, self.window, self.dim)) / np.sqrt(max(self.window - 1, 1))
        walk = np.cumsum(steps, axis=1)
        bridge = walk - s * walk[:, -1:, :]
        scale = rng.uniform(0.0, a, size=(count, 1, 1))
        values = np.clip(start + s * (end - start) + scale * bridge, -a, a)
        if radius is not None:
            norms = segment_sup_norms(values)
            # skewed toward the sphere, where the sup of the coefficients is usually attained
            target = radius * rng.uniform(0.0, 1.0, size=count) ** 0.25
            factor = np.where(norms > 0, np.minimum(1.0, target / np.maximum(norms, 1e-300)), 1.0)
            values = values * factor[:, None, None]
        return values

    def ball(self, rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
        """``count`` windows in the sup-norm ball of ``radius``, even when it is wider than the amplitude."""
        wide = SegmentSampler(self.dim, self.window, max(self.amplitude, radius), self.max_atoms)
        return wide.segments(rng, count, radius=radius)

    def perturb(self, rng: np.random.Generator, windows: np.ndarray) -> np.ndarray:
        size = rng.uniform(0.0, 0.5)
        noisy = windows + size * rng.standard_normal(windows.shape)
        return np.clip(noisy, -self.amplitude, self.amplitude)

    def law(self, rng: np.random.Generator, atoms: int, radius: Optional[float] = None) -> EmpiricalLaw:
        return EmpiricalLaw(self.segments(rng, atoms, radius))

    def draw(self, rng: np.random.Generator, radius: Optional[float] = None) -> Trial:
        """One audit input (xi, eta, mu, nu); eta and nu are independent or perturbations, with equal atom counts."""
        xi, other = self.segments(rng, 2, radius)
        eta = self.perturb(rng, xi[None])[0] if rng.random() < 0.5 else other
        atoms = int(rng.integers(1, self.max_atoms + 1))
        mu = self.law(rng, atoms, radius)
        nu = EmpiricalLaw(self.perturb(rng, mu.atoms)) if rng.random() < 0.5 else self.law(rng, atoms, radius)
        return Trial(xi, eta, mu, nu)


@dataclass
class ConditionResult:
    name: str
    passed: bool = True
    worst_margin: float = np.inf
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst_margin": self.worst_margin, "witness": self.witness}


@dataclass
class AuditReport:
    model: str
    samples: int
    conditions: Dict[str, ConditionResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failures(self) -> List[str]:
        return [name for name, c in self.conditions.items() if not c.passed]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "samples": self.samples,
            "passed": self.passed,
            "conditions": {name: c.to_dict() for name, c in self.conditions.items()},
        }


class _Check(NamedTuple):
    condition: str
    lhs: float
    rhs: float
    witness: dict


def _witness(trial: Trial, index: int, note: str = "") -> dict:
    return {
        "trial": index,
        "note": note,
        "xi": trial.xi.tolist(),
        "eta": trial.eta.tolist(),
        "mu_atoms": trial.mu.size,
    }


def _checks_for(spec: ModelSpec, trial: Trial, index: int) -> List[_Check]:
    xi, eta, mu, nu = trial
    zero = np.zeros_like(xi)
    d_xi, d_eta, d_zero = spec.neutral(np.stack([xi, eta, zero]))
    b_xi = spec.drift(xi[None], mu)[0]
    b_eta = spec.drift(eta[None], nu)[0]
    s_xi = spec.diffusion(xi[None], mu)[0]
    s_eta = spec.diffusion(eta[None], nu)[0]
    b_zero = spec.drift(zero[None], mu)[0]
    s_zero = spec.diffusion(zero[None], mu)[0]

    gap = float(segment_sup_norms((xi - eta)[None])[0])
    w2 = wasserstein2(mu, nu)
    xi_norm = float(segment_sup_norms(xi[None])[0])
    mu_moment = mu.second_moment()
    witness = _witness(trial, index)

    head_gap = xi[-1] - eta[-1] - (d_xi - d_eta)
    checks = [
        _Check("A1", float(np.linalg.norm(d_xi - d_eta)), spec.alpha * gap, witness),
        _Check(
            "A2-drift",
            float(2.0 * head_gap @ (b_xi - b_eta)),
            spec.L * (gap ** 2 + w2 ** 2),
            witness,
        ),
        _Check(
            "A2-diffusion",
            float(np.sum((s_xi - s_eta) ** 2)),
            spec.L * (gap ** 2 + w2 ** 2),
            witness,
        ),
        _Check(
            "A3",
            max(float(b_zero @ b_zero), float(np.sum(s_zero ** 2))),
            spec.L1 * (1.0 + mu_moment),
            _witness(trial, index, "evaluated at the zero segment against mu"),
        ),
        _Check(
            "growth",
            max(float(2.0 * (xi[-1] - d_xi) @ b_xi), float(np.sum(s_xi ** 2))),
            spec.L2 * (1.0 + xi_norm ** 2 + mu_moment),
            witness,
        ),
        _Check(
            "growth",
            float(np.linalg.norm(d_xi)),
            spec.alpha * xi_norm,
            _witness(trial, index, "|D(xi)| <= alpha ||xi||"),
        ),
    ]
    if index == 0:
        checks.append(_Check("A1", float(np.linalg.norm(d_zero)), 0.0, {"note": "D(0) = 0"}))
    return checks


def _margin(check: _Check) -> float:
    return check.rhs - check.lhs


def audit_assumptions(
    spec: ModelSpec,
    sampler: Optional[SegmentSampler] = None,
    trials: int = 1000,
    opts: Optional[AuditOptions] = None,
    runtime: Optional[RuntimeOptions] = None,
) -> AuditReport:
    if trials < 1:
        raise ConfigurationError(f"audit needs trials >= 1, got {trials}")
    opts = opts or AuditOptions()
    runtime = runtime or RuntimeOptions()
    sampler = sampler or SegmentSampler.from_options(spec.dim_d, opts)
    if sampler.dim != spec.dim_d:
        raise ConfigurationError(f"sampler dimension {sampler.dim} does not match model dimension {spec.dim_d}")

    logger.info(f"Auditing model {spec.name} at {trials} samples")
    chunk = max(1, min(runtime.chunk_size, 256))
    starts = list(range(0, trials, chunk))

    def violated(check: _Check) -> bool:
        return _margin(check) < -opts.relative_tol * (1.0 + abs(check.rhs))

    def run_chunk(start: int) -> Dict[str, Tuple[_Check, Optional[_Check]]]:
        # per condition: the worst check and the first violating one
        found: Dict[str, Tuple[_Check, Optional[_Check]]] = {}
        for i in range(start, min(start + chunk, trials)):
            rng = np.random.default_rng([opts.seed, i])
            for check in _checks_for(spec, sampler.draw(rng), i):
                worst, failure = found.get(check.condition, (check, None))
                if _margin(check) < _margin(worst):
                    worst = check
                if failure is None and violated(check):
                    failure = check
                found[check.condition] = (worst, failure)
        return found

    pool = WorkerPool(runtime.threads, runtime.progress)
    report = AuditReport(model=spec.name, samples=trials,
                         conditions={name: ConditionResult(name) for name in CONDITIONS})
    for found in pool.map(run_chunk, starts, desc=f"audit {spec.name}"):
        for name, (worst, failure) in found.items():
            result = report.conditions[name]
            if _margin(worst) < result.worst_margin:
                result.worst_margin = _margin(worst)
                if result.passed:
                    result.witness = worst.witness
            if failure is not None and result.passed:
                result.passed = False
                result.witness = failure.witness

    for name in report.failures():
        logger.warning(f"Model {spec.name} fails {name}: worst margin {report.conditions[name].worst_margin:.6g}")
    logger.info(f"Audit of {spec.name}: {'pass' if report.passed else 'FAIL'}")
    return report
