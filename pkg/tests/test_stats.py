import math

import pytest

from neutral_ldp.harness.stats import (
    SUP_TAIL_COLUMNS,
    EquivalenceRow,
    SupTailRow,
    SweepRow,
    asymptote_trend_ok,
    decreasing_trend_ok,
    strictly_decreasing,
    sup_tail_decay_ok,
    tail_shrinks_ok,
)


def test_resolved_sweep_row():
    row = SweepRow.from_counts(0.5, 25, 100)
    assert row.resolved
    assert row.p_hat == 0.25
    assert row.ci_lo < 0.25 < row.ci_hi
    assert row.eps_log_p == pytest.approx(0.5 * math.log(0.25))
    assert row.csv_row()[-1] == "true"


def test_unresolved_sweep_row_reports_upper_bound():
    row = SweepRow.from_counts(0.1, 0, 1000)
    assert not row.resolved
    assert row.p_hat == 0.0
    assert row.ci_lo == pytest.approx(0.0, abs=1e-12)
    assert 0 < row.ci_hi < 0.01
    assert row.eps_log_p == pytest.approx(0.1 * math.log(row.ci_hi))
    assert row.csv_row() == [0.1, 0.0, row.ci_lo, row.ci_hi, row.eps_log_p, 1000, "UNRESOLVED"]


def test_equivalence_row_without_hits_reports_upper_bound():
    row = EquivalenceRow.from_counts(0.2, 0.1, "X-Y", 0, 500)
    assert not row.resolved
    assert row.p_hat == 0.0
    assert row.eps_log_p == pytest.approx(0.2 * math.log(row.ci_hi))
    assert row.csv_row()[:3] == [0.2, 0.1, "X-Y"]


def _sweep(eps_and_hits, replicas=1000):
    return [SweepRow.from_counts(eps, hits, replicas) for eps, hits in eps_and_hits]


def test_asymptote_trend():
    # -0.5 is the Brownian rate of exceeding 1
    rows = _sweep([(0.25, 46), (0.125, 3), (0.0625, 1)], replicas=1000)
    distances = [abs(row.eps_log_p + 0.5) for row in rows]
    assert asymptote_trend_ok(rows, -0.5) == strictly_decreasing(distances)
    assert asymptote_trend_ok(_sweep([(0.5, 300), (0.25, 100), (0.125, 20)]), -0.5)
    assert not asymptote_trend_ok(_sweep([(0.5, 10), (0.25, 100), (0.125, 300)]), -0.5)


def test_asymptote_trend_needs_three_resolved_rows():
    assert not asymptote_trend_ok(_sweep([(0.5, 300), (0.25, 100), (0.125, 0)]), -0.5)


def _equivalence(hits, kind="X-Y", delta=0.1, replicas=1000):
    return [EquivalenceRow.from_counts(eps, delta, kind, k, replicas) for eps, k in zip((0.4, 0.2, 0.1), hits)]


def test_decreasing_trend():
    assert decreasing_trend_ok(_equivalence([500, 100, 5]), "X-Y")
    assert not decreasing_trend_ok(_equivalence([5, 500, 100]), "X-Y")


@pytest.mark.parametrize("hits", [[0, 0, 0], [500, 0, 0], [500, 100, 0], [0, 5, 0]])
def test_decreasing_trend_ignores_rows_without_hits(hits):
    assert not decreasing_trend_ok(_equivalence(hits), "X-Y")


def test_decreasing_trend_filters_by_kind_and_level():
    rows = (_equivalence([500, 100, 5]) + _equivalence([1, 2, 3], kind="Y-Yn:n=8")
            + _equivalence([0, 0, 0], delta=0.5))
    assert decreasing_trend_ok(rows, "X-Y")
    assert decreasing_trend_ok(rows, "X-Y", 0.1)
    assert not decreasing_trend_ok(rows, "X-Y", 0.5)
    assert not decreasing_trend_ok(rows, "Y-Yn:n=8")
    assert not decreasing_trend_ok(rows, "Y-YR:R=1")


def test_tail_shrinks():
    rows = _equivalence([900, 500, 200], delta=0.002) + _equivalence([0, 0, 0])
    assert tail_shrinks_ok(rows, "X-Y", 0.002)
    assert not tail_shrinks_ok(rows, "X-Y", 0.1)
    assert not tail_shrinks_ok(_equivalence([900, 500, 0], delta=0.002), "X-Y", 0.002)
    assert not tail_shrinks_ok(_equivalence([900, 900, 200], delta=0.002), "X-Y", 0.002)


def _sup_tail(eps, hits_by_R, replicas=1000):
    return [SupTailRow(R, SweepRow.from_counts(eps, hits, replicas)) for R, hits in hits_by_R]


def test_sup_tail_row():
    row = _sup_tail(0.4, [(0.3, 50)])[0]
    assert row.epsilon == 0.4
    assert row.resolved
    assert row.csv_row() == [0.3] + row.estimate.csv_row()
    assert len(row.csv_row()) == len(SUP_TAIL_COLUMNS)


def test_sup_tail_decay():
    rows = _sup_tail(0.4, [(0.2, 400), (0.3, 90), (0.4, 10)]) + _sup_tail(0.1, [(0.2, 20), (0.3, 1), (0.4, 0)])
    assert sup_tail_decay_ok(rows)
    # levels are read in increasing R whatever the row order
    assert sup_tail_decay_ok(list(reversed(rows)))
    assert not sup_tail_decay_ok(_sup_tail(0.4, [(0.2, 400), (0.3, 400), (0.4, 10)]))


def test_sup_tail_decay_needs_three_resolved_levels():
    assert not sup_tail_decay_ok(_sup_tail(0.1, [(0.2, 20), (0.3, 1), (0.4, 0)]))
    assert not sup_tail_decay_ok([])
