from .deterministic import (
    empirical_order,
    neutral_gap_norms,
    solve_limit_ode,
    solve_skeleton,
    solve_skeleton_batch,
    solve_skeleton_discretized,
    solve_skeleton_truncated,
)
from .neutral import neutral_step_solve, solve_neutral_head
from .noise import NoiseBundle
from .stochastic import (
    ParticleCloud,
    TailCheck,
    ito_tail_check,
    reflection_tail,
    simulate_frozen,
    simulate_frozen_batch,
    simulate_frozen_discretized,
    simulate_frozen_discretized_batch,
    simulate_particles,
    simulate_truncated,
    simulate_truncated_batch,
)
