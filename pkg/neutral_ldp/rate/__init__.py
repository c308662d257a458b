from .control import Control, action
from .events import EventKind, RareEvent
from .minimize import RateEstimate, minimize_rate, minimize_truncated_rate, rate_lower_bound_scan

__all__ = [
    'Control', 'action', 'EventKind', 'RareEvent',
    'RateEstimate', 'minimize_rate', 'minimize_truncated_rate', 'rate_lower_bound_scan',
]
