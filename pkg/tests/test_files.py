import csv
import json

import numpy as np
import pytest

from cvedr.files import (
    RecordedDataError,
    analyze_recorded,
    parse_config,
    read_recorded,
    read_report,
    sweep_header,
    write_recorded,
    write_results,
)
from cvedr.gaussian import beam_split, make_coherent, make_thermal, make_vacuum
from cvedr.sampling import SampleBatch, draw_pairs, run_trials, trial_batches
from cvedr.sweep import DEFAULT_STATES, ConfigError, StateSpec, SweepConfig, run_sweep


def test_empty_config_is_default():
    cfg = parse_config("")
    assert cfg == SweepConfig()
    assert cfg.states == DEFAULT_STATES
    assert (cfg.n, cfg.trials, cfg.master_seed) == (500_000, 10, 0)
    assert len(cfg.t_grid) == 99


def test_config_full():
    cfg = parse_config(
        """
        # measured squeezing levels
        squeezed_db=-2.9,3.9
        thermal = 0.2   # trailing comment
        t_start=0.1
        t_stop=0.9
        t_step=0.2
        n=1000
        trials=3
        seed=42
        include_empirical=yes
        loss_eff=detector
        """
    )
    assert cfg.states == (StateSpec("squeezed_db", (-2.9, 3.9)), StateSpec("thermal", (0.2,)))
    assert cfg.master_seed == 42 and cfg.include_empirical
    assert cfg.loss_eff == pytest.approx(0.99 * 0.996)
    assert list(cfg.t_grid) == [0.1, 0.3, 0.5, 0.7, 0.9]


@pytest.mark.parametrize(
    "text, field, line",
    [
        ("t_step=0", "t_step", 1),
        ("n=100\nbogus=3", "bogus", 2),
        ("\n\ntrials=many", "trials", 3),
        ("squeezed_db=-3.0,2.0", "squeezed_db", 1),
        ("thermal=abc", "thermal", 1),
        ("t_start=0.7\nt_stop=0.2", "t_start", 1),
        ("just a line", "just a line", 1),
    ],
)
def test_config_errors_have_line_numbers(text, field, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_write_results_shape(tmp_path):
    res = run_sweep(SweepConfig())
    paths = write_results(res, tmp_path)
    lines = paths["sweep"].read_text().splitlines()
    assert len(lines) == 298
    assert lines[0].split(",") == sweep_header(False)
    rows = list(csv.DictReader(open(paths["sweep"])))
    row = next(r for r in rows if r["state"] == "coherent(0,0)" and r["t"] == "0.5")
    assert row["lhs_branciard"].startswith("1.082392")
    assert float(row["lhs_branciard"]) == res.rows[49].analytic.lhs_branciard
    assert row["heisenberg_violated"] == "1" and row["ozawa_violated"] == "0"
    assert all(r["format_version"] == "1" for r in rows)


def test_report_json_round_trip(tmp_path):
    cfg = SweepConfig(t_start=0.3, t_stop=0.6, t_step=0.3, n=500, trials=2, include_empirical=True)
    res = run_sweep(cfg)
    paths = write_results(res, tmp_path)
    assert read_report(paths["report"]) == res
    meta = json.loads(paths["report"].read_text())["metadata"]
    assert meta["format_version"] == 1 and "timestamp" in meta


def test_bounds_csv(tmp_path):
    cfg = SweepConfig(t_start=0.1, t_stop=0.9, t_step=0.4, n=500, trials=2, include_empirical=True)
    paths = write_results(run_sweep(cfg), tmp_path)
    rows = list(csv.DictReader(open(paths["bounds"])))
    series = {(r["state"], r["series"]) for r in rows}
    for s in DEFAULT_STATES:
        for name in ("analytic", "empirical", "heisenberg", "ozawa", "branciard"):
            assert (s.label, name) in series
    emp = [r for r in rows if r["series"] == "empirical"]
    assert all(r["epsilon_err"] for r in emp)
    heis = [r for r in rows if r["series"] == "heisenberg"]
    assert all(float(r["epsilon"]) * float(r["eta"]) == pytest.approx(1) for r in heis)


def test_empirical_columns(tmp_path):
    cfg = SweepConfig(t_start=0.5, t_stop=0.5, n=500, trials=2, include_empirical=True)
    paths = write_results(run_sweep(cfg), tmp_path)
    header = paths["sweep"].read_text().splitlines()[0].split(",")
    assert header == sweep_header(True)
    assert "emp_epsilon_err" in header and header[-1] == "emp_clamp_count"


def test_csv_ignores_locale(tmp_path, monkeypatch):
    import locale

    try:
        locale.setlocale(locale.LC_ALL, "de_DE.UTF-8")
    except locale.Error:
        pass
    try:
        paths = write_results(run_sweep(SweepConfig(t_step=0.49)), tmp_path)
    finally:
        locale.setlocale(locale.LC_ALL, "C")
    body = paths["sweep"].read_text().splitlines()[1]
    assert "0.01" in body


def test_recorded_round_trip(tmp_path):
    j = beam_split(make_thermal(0.3), make_vacuum(), 0.4)
    b = draw_pairs(j, "X", 300, seed=8, t=0.4)
    p = write_recorded(tmp_path / "x.csv", b, seed=8)
    ds = read_recorded(p)
    assert ds.basis == "X" and ds.t == 0.4 and ds.declared_n == 300
    assert np.array_equal(ds.ch1, b.ch1) and np.array_equal(ds.ch2, b.ch2)
    assert p.read_text().startswith("# format_version=1\n# basis=x\n")


def _write(path, text):
    path.write_text(text)
    return path


@pytest.mark.parametrize(
    "text, match",
    [
        ("# basis=x\n# t=0.5\n", "no samples"),
        ("# t=0.5\n1,2\n", "basis"),
        ("# basis=x\n1,2\n", "missing t"),
        ("# basis=x\n# t=0.5\n1,2\n3;4\n", r":4: malformed"),
        ("# basis=x\n# t=0.5\n1,2\n3,4,5\n", r":4: malformed"),
        ("# basis=x\n# t=0.5\n# n=3\n1,2\n", "declares n=3"),
    ],
)
def test_recorded_errors(tmp_path, text, match):
    with pytest.raises(RecordedDataError, match=match):
        read_recorded(_write(tmp_path / "bad.csv", text))


def test_analyze_zero_files(tmp_path):
    x = _write(tmp_path / "x.csv", "# basis=x\n# t=0.5\n0,0\n0,0\n")
    p = _write(tmp_path / "p.csv", "# basis=p\n# t=0.5\n0,0\n0,0\n")
    res = analyze_recorded(x, p, 0.5)
    assert res.report.epsilon == 0 and res.report.eta == 0
    assert res.report.lhs_heisenberg == 0


def test_analyze_mismatches(tmp_path):
    x = _write(tmp_path / "x.csv", "# basis=x\n# t=0.5\n1,0\n")
    p = _write(tmp_path / "p.csv", "# basis=p\n# t=0.5\n0,1\n")
    with pytest.raises(RecordedDataError, match="basis mismatch"):
        analyze_recorded(p, p, 0.5)
    with pytest.raises(RecordedDataError, match="t mismatch"):
        analyze_recorded(x, p, 0.4)
    with pytest.raises(RecordedDataError):
        analyze_recorded([x, x], [p], 0.5)


def test_analyze_coherent_band(tmp_path):
    xb, pb, _ = trial_batches(make_coherent(), make_vacuum(), 0.5, 500_000, 3, 0)
    x = write_recorded(tmp_path / "x.csv", xb)
    p = write_recorded(tmp_path / "p.csv", pb)
    res = analyze_recorded(x, p, 0.5)
    assert 0.7631 <= res.report.epsilon <= 0.7677
    assert 0.7631 <= res.report.eta <= 0.7677
    assert res.signal_source == "reconstructed"


def test_gen_analyze_matches_run_trials(tmp_path):
    sig, met = make_thermal(0.334), make_vacuum()
    n, trials, seed = 2000, 3, 11
    xs, ps, ss = [], [], []
    for k in range(trials):
        xb, pb, sb = trial_batches(sig, met, 0.3, n, seed, k)
        xs.append(write_recorded(tmp_path / f"x{k}.csv", xb))
        ps.append(write_recorded(tmp_path / f"p{k}.csv", pb))
        ss.append(write_recorded(tmp_path / f"s{k}.csv", sb))
    res = analyze_recorded(xs, ps, 0.3, ss)
    run = run_trials(sig, met, 0.3, n, trials, seed)
    assert res.reports == run.reports
    assert res.summaries == run.summaries


def test_signal_batch_basis_checked(tmp_path):
    b = SampleBatch("X", np.ones(3), np.ones(3), t=0.5)
    x = write_recorded(tmp_path / "x.csv", b)
    p = write_recorded(tmp_path / "p.csv", SampleBatch("P", np.ones(3), np.ones(3), t=0.5))
    with pytest.raises(RecordedDataError, match="expected s"):
        analyze_recorded(x, p, 0.5, x)
