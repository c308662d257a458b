import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from ..solvers.stochastic import wilson_interval

logger = logging.getLogger(__name__)

MIN_TREND_POINTS = 3

SWEEP_COLUMNS = ("epsilon", "p_hat", "ci_lo", "ci_hi", "eps_log_p", "replicas", "resolved")
EQUIVALENCE_COLUMNS = ("epsilon", "delta", "gap_kind", "p_hat", "ci_lo", "ci_hi", "eps_log_p")
SUP_TAIL_COLUMNS = ("R",) + SWEEP_COLUMNS


def _eps_log(epsilon: float, hits: int, p_hat: float, ci_hi: float) -> float:
    # without hits only the Wilson upper bound is known
    return epsilon * math.log(p_hat if hits > 0 else ci_hi)


@dataclass(frozen=True)
class SweepRow:
    """Finite-eps estimate of eps log P(event).

    A row with no hits is UNRESOLVED: p_hat is reported as 0 and eps_log_p is the upper bound
    eps log ci_hi from the Wilson interval.
    """

    epsilon: float
    hits: int
    replicas: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    eps_log_p: float
    resolved: bool

    @classmethod
    def from_counts(cls, epsilon: float, hits: int, replicas: int) -> "SweepRow":
        lo, hi = wilson_interval(hits, replicas)
        p_hat = hits / replicas
        return cls(epsilon, hits, replicas, p_hat, lo, hi, _eps_log(epsilon, hits, p_hat, hi), hits > 0)

    def csv_row(self) -> list:
        return [self.epsilon, self.p_hat, self.ci_lo, self.ci_hi, self.eps_log_p, self.replicas,
                "true" if self.resolved else "UNRESOLVED"]


@dataclass(frozen=True)
class EquivalenceRow:
    """Tail estimate of one paired gap at level delta; unresolved rows carry eps log ci_hi."""

    epsilon: float
    delta: float
    gap_kind: str
    hits: int
    replicas: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    eps_log_p: float

    @property
    def resolved(self) -> bool:
        return self.hits > 0

    @classmethod
    def from_counts(cls, epsilon: float, delta: float, gap_kind: str, hits: int, replicas: int) -> "EquivalenceRow":
        lo, hi = wilson_interval(hits, replicas)
        p_hat = hits / replicas
        return cls(epsilon, delta, gap_kind, hits, replicas, p_hat, lo, hi, _eps_log(epsilon, hits, p_hat, hi))

    def csv_row(self) -> list:
        return [self.epsilon, self.delta, self.gap_kind, self.p_hat, self.ci_lo, self.ci_hi, self.eps_log_p]


@dataclass(frozen=True)
class SupTailRow:
    """P(sup over [-tau, T] of |Y(t)| > R) at one eps."""

    R: float
    estimate: SweepRow

    @property
    def epsilon(self) -> float:
        return self.estimate.epsilon

    @property
    def resolved(self) -> bool:
        return self.estimate.resolved

    def csv_row(self) -> list:
        return [self.R] + self.estimate.csv_row()


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _enough(resolved: Sequence, what: str) -> bool:
    if len(resolved) < MIN_TREND_POINTS:
        logger.warning(f"{what}: UNRESOLVED, needs {MIN_TREND_POINTS} resolved rows, got {len(resolved)}")
        return False
    return True


def asymptote_trend_ok(rows: Sequence[SweepRow], asymptote: float) -> bool:
    """|eps log p_hat - asymptote| strictly shrinks as eps decreases, over at least three resolved rows."""
    resolved = [row for row in rows if row.resolved]
    if not _enough(resolved, "Trend check"):
        return False
    return strictly_decreasing([abs(row.eps_log_p - asymptote) for row in resolved])


def _resolved_gap_rows(rows: Sequence[EquivalenceRow], gap_kind: str,
                       delta: Optional[float]) -> List[EquivalenceRow]:
    return [row for row in rows
            if row.gap_kind == gap_kind and (delta is None or row.delta == delta) and row.resolved]


def decreasing_trend_ok(rows: Sequence[EquivalenceRow], gap_kind: str, delta: Optional[float] = None) -> bool:
    """eps log p_hat of one gap kind strictly decreases along the eps list.

    Only resolved rows count, and at least three are needed; with ``delta`` only that gap level is read.
    """
    resolved = _resolved_gap_rows(rows, gap_kind, delta)
    if not _enough(resolved, f"Trend check for {gap_kind}"):
        return False
    return strictly_decreasing([row.eps_log_p for row in resolved])


def tail_shrinks_ok(rows: Sequence[EquivalenceRow], gap_kind: str, delta: float) -> bool:
    """p_hat of one gap kind at level delta strictly decreases along the eps list, every row resolved."""
    selected = [row for row in rows if row.gap_kind == gap_kind and row.delta == delta]
    resolved = [row for row in selected if row.resolved]
    if len(resolved) < len(selected) or not _enough(resolved, f"Tail check for {gap_kind} at {delta:g}"):
        return False
    return strictly_decreasing([row.p_hat for row in resolved])


def sup_tail_decay_ok(rows: Sequence[SupTailRow]) -> bool:
    """For every eps with at least three resolved levels, eps log p_hat strictly decreases in R.

    At least one eps must qualify.
    """
    by_eps: Dict[float, List[SupTailRow]] = {}
    for row in rows:
        by_eps.setdefault(row.epsilon, []).append(row)

    checked = 0
    for eps, group in by_eps.items():
        resolved = sorted((row for row in group if row.resolved), key=lambda row: row.R)
        if len(resolved) < MIN_TREND_POINTS:
            logger.info(f"eps={eps:g}: {len(resolved)} resolved truncation levels, not checked")
            continue
        checked += 1
        if not strictly_decreasing([row.estimate.eps_log_p for row in resolved]):
            logger.warning(f"eps={eps:g}: sup tail does not decrease in R")
            return False
    if checked == 0:
        logger.warning("Sup-tail check: UNRESOLVED, no eps has three resolved levels")
    return checked > 0
