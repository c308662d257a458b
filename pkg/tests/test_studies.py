import copy
import math

import numpy as np
import pytest

from neutral_ldp.config import RuntimeOptions
from neutral_ldp.errors import ConfigurationError
from neutral_ldp.harness.config import parse_config
from neutral_ldp.harness.studies import (
    ConvergenceRow,
    StudyContext,
    gap_kinds,
    gap_levels,
    ratio_check_ok,
    run_eps_sweep,
    run_equivalence_study,
    run_mn_convergence,
    run_moment_study,
    run_particle_convergence,
    run_sup_tail_study,
)

BROWNIAN = {
    "model": "SCHILDER",
    "process": "frozen",
    "xi": {"kind": "constant", "value": 0.0},
    "grid": {"tau": 0.0625, "T": 1.0, "h": 0.0625},
    "epsilons": [0.5, 0.25, 0.125],
    "particles": 1,
    "n_list": [],
    "r_list": [],
    "gap_levels": [],
    "replicas": 200,
    "restarts": 1,
    "master_seed": 5,
    "event": {"kind": "SUP_EXCEED", "delta": 0.01, "tol": 0.001},
    "output_dir": "out/test",
}

DELAY = {
    "model": "TEST-1",
    "process": "particles",
    "xi": {"kind": "constant", "value": 1.0},
    "grid": {"tau": 1.0, "T": 1.0, "h": 0.015625},
    "epsilons": [0.4, 0.2, 0.1],
    "particles": 32,
    "n_list": [1, 4],
    "r_list": [50.0],
    "gap_levels": [],
    "replicas": 64,
    "restarts": 1,
    "master_seed": 9,
    "event": {"kind": "SUP_EXCEED", "delta": 0.1, "tol": 0.001},
    "output_dir": "out/test",
}


def _cfg(base, **changes):
    raw = copy.deepcopy(base)
    raw.update(changes)
    return parse_config(raw)


def test_context_from_config():
    ctx = StudyContext.from_config(_cfg(DELAY), RuntimeOptions(chunk_size=50))
    assert ctx.x0.grid == ctx.grid
    assert ctx.clouds(32) == 2
    assert [len(chunk) for chunk in ctx.replica_chunks()] == [50, 14]


def test_unknown_model():
    with pytest.raises(ConfigurationError):
        StudyContext.from_config(_cfg(DELAY, model="NOPE"))


def test_sweep_with_tiny_threshold_is_certain():
    result = run_eps_sweep(_cfg(BROWNIAN), RuntimeOptions(chunk_size=64))
    assert [row.epsilon for row in result.rows] == [0.5, 0.25, 0.125]
    for row in result.rows:
        assert row.replicas == 200
        assert row.resolved
        assert row.eps_log_p == pytest.approx(0.0, abs=0.01)
    assert result.rate.converged
    assert result.asymptote == pytest.approx(-0.01 ** 2 / 2, abs=1e-3)
    assert all(ref is not None and 0 < ref <= 1 for ref in result.references)


def test_sweep_independent_of_threads():
    cfg = _cfg(BROWNIAN, event={"kind": "SUP_EXCEED", "delta": 1.0, "tol": 0.001})
    single = run_eps_sweep(cfg, RuntimeOptions(threads=1, chunk_size=32))
    pooled = run_eps_sweep(cfg, RuntimeOptions(threads=4, chunk_size=32))
    assert single.rows == pooled.rows
    assert single.rate.value == pooled.rate.value


def test_particle_sweep_counts_whole_clouds():
    result = run_eps_sweep(_cfg(DELAY, replicas=40, restarts=1))
    assert all(row.replicas == 64 for row in result.rows)
    assert result.references == [None, None, None]


def test_equivalence_with_constant_diffusion():
    cfg = _cfg(DELAY, model="TEST-1-CONST-SIGMA")
    result = run_equivalence_study(cfg)
    kinds = gap_kinds(cfg)
    assert kinds == ["X-Y", "Y-Yn:n=1", "Y-Yn:n=4", "Y-YR:R=50"]
    assert len(result.rows) == len(cfg.epsilons) * len(kinds)
    for row in result.rows:
        assert row.replicas == 64
        if row.gap_kind != "X-Y":
            assert row.hits == 0
            assert not row.resolved
            assert row.eps_log_p == pytest.approx(row.epsilon * math.log(row.ci_hi))
            assert result.mean_gaps[(row.epsilon, row.gap_kind)] == 0.0
    for eps in cfg.epsilons:
        assert result.mean_gaps[(eps, "X-Y")] > 0.0
    assert len(result.mean_gap_table()) == len(result.rows)


def test_equivalence_discretization_gap_shrinks():
    cfg = _cfg(DELAY, epsilons=[0.2], n_list=[1, 4, 16], r_list=[])
    gaps = run_equivalence_study(cfg).mean_gaps
    assert gaps[(0.2, "Y-Yn:n=1")] > gaps[(0.2, "Y-Yn:n=4")] > gaps[(0.2, "Y-Yn:n=16")] > 0.0


def test_equivalence_needs_delta():
    cfg = _cfg(DELAY, event={"kind": "TERMINAL_TARGET", "target": 1.0, "tol": 0.001})
    with pytest.raises(ConfigurationError):
        run_equivalence_study(cfg)


def test_equivalence_rows_per_gap_level():
    cfg = _cfg(DELAY, model="TEST-1-CONST-SIGMA", gap_levels=[1e-9, 0.1])
    assert gap_levels(cfg) == [0.1, 1e-9]
    result = run_equivalence_study(cfg)
    kinds = gap_kinds(cfg)
    assert len(result.rows) == len(cfg.epsilons) * 2 * len(kinds)
    assert [(row.delta, row.gap_kind) for row in result.rows[:2 * len(kinds)]] == \
        [(0.1, kind) for kind in kinds] + [(1e-9, kind) for kind in kinds]
    # every particle drifts off its frozen-law partner, so the tiny level is always exceeded
    for row in result.rows:
        if row.delta == 1e-9 and row.gap_kind == "X-Y":
            assert row.hits == row.replicas
    assert len(result.mean_gaps) == len(cfg.epsilons) * len(kinds)


def test_sup_tail_counts_never_grow_with_R():
    cfg = _cfg(DELAY, process="frozen", r_list=[0.5, 1.1, 1.3, 50.0], replicas=200)
    rows = run_sup_tail_study(cfg, RuntimeOptions(chunk_size=64))
    assert [(row.epsilon, row.R) for row in rows] == [(eps, R) for eps in cfg.epsilons for R in cfg.r_list]
    for eps in cfg.epsilons:
        hits = [row.estimate.hits for row in rows if row.epsilon == eps]
        assert all(b <= a for a, b in zip(hits, hits[1:]))
        # the initial segment already has sup-norm 1
        assert hits[0] == 200
        assert hits[-1] == 0
    assert all(row.estimate.replicas == 200 for row in rows)


def test_sup_tail_independent_of_threads():
    cfg = _cfg(DELAY, process="frozen", r_list=[1.05, 1.2], replicas=150)
    single = run_sup_tail_study(cfg, RuntimeOptions(threads=1, chunk_size=40))
    pooled = run_sup_tail_study(cfg, RuntimeOptions(threads=4, chunk_size=40))
    assert single == pooled


def test_sup_tail_needs_levels():
    with pytest.raises(ConfigurationError):
        run_sup_tail_study(_cfg(DELAY, r_list=[]))


@pytest.mark.parametrize("process", ["frozen", "particles"])
def test_moments_within_bounds(process):
    rows = run_moment_study(_cfg(DELAY, process=process))
    assert [row.epsilon for row in rows] == [0.4, 0.2, 0.1]
    for row in rows:
        assert row.within_bounds
        assert row.second_moment > 0
        assert len(row.csv_row()) == 7
    # the fluctuation shrinks with eps
    assert rows[0].gap_moment > rows[-1].gap_moment


def test_mn_convergence_ratio():
    cfg = _cfg(DELAY, grid={"tau": 1.0, "T": 1.0, "h": 0.00390625}, n_list=[4, 16, 64])
    rows = run_mn_convergence(cfg)
    assert [row.n for row in rows] == [4, 16, 64]
    assert math.isnan(rows[0].ratio_to_previous)
    assert rows[1].ratio_to_previous == pytest.approx(rows[1].sup_gap / rows[0].sup_gap)
    assert ratio_check_ok(rows)


def test_ratio_check_needs_a_pair():
    rows = [ConvergenceRow(2, 0.1, math.nan), ConvergenceRow(4, 0.06, 0.6)]
    assert not ratio_check_ok(rows)
    assert ratio_check_ok(rows, factor=2)
    assert not ratio_check_ok(rows, factor=2, limit=0.5)


def test_particle_convergence():
    cfg = _cfg(DELAY, epsilons=[0.4], replicas=128)
    rows = run_particle_convergence(cfg, particle_counts=(4, 64))
    assert [(row.epsilon, row.particles) for row in rows] == [(0.4, 4), (0.4, 64)]
    assert rows[0].mean_sup_gap > rows[1].mean_sup_gap > 0.0


def test_particle_counts_validated():
    with pytest.raises(ConfigurationError):
        run_particle_convergence(_cfg(DELAY), particle_counts=(0,))


def test_particle_rows_independent_of_threads():
    cfg = _cfg(DELAY, epsilons=[0.2], replicas=96)
    single = run_particle_convergence(cfg, RuntimeOptions(threads=1), particle_counts=(16,))
    pooled = run_particle_convergence(cfg, RuntimeOptions(threads=3), particle_counts=(16,))
    np.testing.assert_array_equal([row.mean_sup_gap for row in single], [row.mean_sup_gap for row in pooled])
