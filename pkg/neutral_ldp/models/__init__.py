from .audit import AuditReport, ConditionResult, SegmentSampler, audit_assumptions
from .builtin import builtin, make_constant_model, make_delay_model, register
from .spec import ModelSpec, chi_R, chi_R_of_norms
from .truncation import truncate

__all__ = [
    'ModelSpec', 'AuditReport', 'ConditionResult', 'SegmentSampler',
    'audit_assumptions', 'builtin', 'register', 'make_delay_model', 'make_constant_model',
    'chi_R', 'chi_R_of_norms', 'truncate',
]
