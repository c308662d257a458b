from .grid import (
    PathBatch,
    PathGrid,
    Segment,
    TimeGrid,
    constant_initial,
    frozen_segment_at,
    initial_from_nodes,
    segment_at,
    segment_sup_norms,
    sup_norm,
)
from .laws import EmpiricalLaw, wasserstein2

__all__ = [
    'TimeGrid', 'PathGrid', 'PathBatch', 'Segment', 'EmpiricalLaw',
    'sup_norm', 'segment_at', 'frozen_segment_at', 'segment_sup_norms',
    'constant_initial', 'initial_from_nodes', 'wasserstein2',
]
