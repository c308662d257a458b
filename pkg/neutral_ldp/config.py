from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class SolverOptions:
    fixed_point_tol: float = 1e-12
    fixed_point_max_iter: int = 100

    def __post_init__(self):
        if self.fixed_point_tol <= 0:
            raise ConfigurationError(f"fixed_point_tol must be positive, got {self.fixed_point_tol}")
        if self.fixed_point_max_iter < 1:
            raise ConfigurationError(f"fixed_point_max_iter must be >= 1, got {self.fixed_point_max_iter}")


@dataclass(frozen=True)
class RateOptions:
    penalty_start: float = 10.0
    penalty_growth: float = 10.0
    stages: int = 5
    max_iter_per_stage: int = 500
    fd_step: float = 1e-7
    ftol: float = 1e-15
    gtol: float = 1e-10
    init_scale: float = 1.0  # spread of randomized restart controls


@dataclass(frozen=True)
class RuntimeOptions:
    threads: int = 1
    chunk_size: int = 4096
    progress: bool = False

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {self.threads}")
        if self.chunk_size < 1:
            raise ConfigurationError(f"chunk_size must be >= 1, got {self.chunk_size}")


@dataclass(frozen=True)
class AuditOptions:
    amplitude: float = 5.0
    max_atoms: int = 8
    window: int = 11
    relative_tol: float = 1e-12
    seed: int = 0
