import time

import pytest

from cvedr.gaussian import make_coherent, make_vacuum
from cvedr.metrics import build_report
from cvedr.sampling import QUANTITIES, TrialSummary
from cvedr.sweep import (
    DEFAULT_STATES,
    ConfigError,
    StateSpec,
    SweepConfig,
    SweepResult,
    SweepRow,
    compare_analytic_empirical,
    run_sweep,
)


def test_default_sweep_shape_and_speed():
    t0 = time.perf_counter()
    res = run_sweep(SweepConfig())
    assert time.perf_counter() - t0 < 1.0
    assert len(res.rows) == 297
    labels = [r.state for r in res.rows]
    assert labels[0] == labels[98] != labels[99]
    for i in range(3):
        ts = [r.t for r in res.rows[99 * i : 99 * (i + 1)]]
        assert ts == sorted(ts) and ts[0] == 0.01 and ts[-1] == 0.99
    assert res.metadata["config"]["n"] == 500_000
    assert not res.has_empirical


def test_delegates_to_metrics():
    res = run_sweep(SweepConfig())
    row = next(r for r in res.rows if r.state == "coherent(0,0)" and r.t == 0.5)
    assert row.analytic == build_report(make_coherent(), make_vacuum(), 0.5)
    assert row.analytic.lhs_branciard == pytest.approx(1.082392, abs=1e-5)


def test_headline_pattern():
    for row in run_sweep(SweepConfig()).rows:
        a = row.analytic
        assert a.lhs_heisenberg < 1
        assert a.lhs_ozawa >= 1 - 1e-9 and a.lhs_branciard >= 1 - 1e-9


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"t_step": 0}, "t_step"),
        ({"t_start": -0.1}, "t_start"),
        ({"t_stop": 1.2}, "t_stop"),
        ({"t_start": 0.8, "t_stop": 0.2}, "t_start"),
        ({"n": 0}, "n"),
        ({"trials": 0}, "trials"),
        ({"loss_eff": 1.5}, "loss_eff"),
        ({"states": ()}, "states"),
    ],
)
def test_config_validation_names_field(kwargs, field):
    with pytest.raises(ConfigError) as info:
        SweepConfig(**kwargs)
    assert info.value.field == field
    assert field in str(info.value)


def test_state_spec():
    assert StateSpec("coherent").params == (0.0, 0.0)
    assert StateSpec("squeezed_db", (-2.9, 3.9)).label == "squeezed_db(-2.9,3.9)"
    with pytest.raises(ConfigError):
        StateSpec("cat", ())
    with pytest.raises(ConfigError):
        StateSpec("thermal", (0.1, 0.2))
    with pytest.raises(ConfigError):
        StateSpec("squeezed_db", (-3.0, 2.0)).build()


def test_grid_endpoints_allowed():
    cfg = SweepConfig(t_start=0.0, t_stop=1.0, t_step=0.25)
    assert list(cfg.t_grid) == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert len(run_sweep(cfg).rows) == 15


def test_loss_applied_before_coupling():
    cfg = SweepConfig(states=(StateSpec("squeezed_db", (-2.9, 3.9)),), t_start=0.5, t_stop=0.5, loss_eff=0.9)
    row = run_sweep(cfg).rows[0]
    assert row.analytic.sigma_a**2 == pytest.approx(0.9 * 10**-0.29 + 0.1, abs=1e-12)


def _small_empirical(**kw):
    base = dict(t_start=0.2, t_stop=0.8, t_step=0.3, n=2000, trials=3, include_empirical=True, master_seed=5)
    base.update(kw)
    return SweepConfig(**base)


def test_parallel_equals_serial():
    cfg = _small_empirical()
    a = run_sweep(cfg, workers=1)
    b = run_sweep(cfg, workers=4)
    assert a.rows == b.rows


def test_empirical_rows_and_seed_dependence():
    a = run_sweep(_small_empirical())
    assert a.has_empirical and all(r.error_bars is not None for r in a.rows)
    assert set(a.rows[0].error_bars) == set(QUANTITIES)
    b = run_sweep(_small_empirical(master_seed=6))
    assert a.rows[0].error_bars["epsilon"] != b.rows[0].error_bars["epsilon"]


def test_result_dict_round_trip():
    res = run_sweep(_small_empirical())
    assert SweepResult.from_dict(res.to_dict()) == res
    assert SweepConfig.from_dict(res.metadata["config"]) == _small_empirical()


def test_compare_requires_empirical():
    with pytest.raises(ValueError, match="no empirical data"):
        compare_analytic_empirical(run_sweep(SweepConfig(t_step=0.1)))


def test_compare_with_injected_analytic():
    res = run_sweep(SweepConfig(t_step=0.1))
    rows = []
    for r in res.rows:
        bars = {q: TrialSummary.from_values([getattr(r.analytic, q)] * 4) for q in QUANTITIES}
        rows.append(SweepRow(r.state, r.t, r.analytic, r.analytic, bars))
    out = compare_analytic_empirical(SweepResult(tuple(rows)))
    for q in QUANTITIES:
        assert out[q]["max_abs_dev"] == 0 and out[q]["outside_3_bars"] == 0


def test_compare_coherent_sweep_coverage():
    cfg = SweepConfig(
        states=(DEFAULT_STATES[0],), t_start=0.1, t_stop=0.9, t_step=0.1, n=500_000, trials=10,
        include_empirical=True,
    )
    out = compare_analytic_empirical(run_sweep(cfg, workers=4))
    for q in ("epsilon", "eta"):
        assert out[q]["points"] == 9
        assert out[q]["outside_3_bars"] / out[q]["points"] < 0.05
        assert out[q]["max_abs_dev"] < 5e-3
