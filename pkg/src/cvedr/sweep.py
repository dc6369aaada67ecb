"""Transmission sweeps over a list of signal states."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .gaussian import (
    GaussianState,
    apply_loss,
    make_coherent,
    make_squeezed_db,
    make_squeezed_pure,
    make_thermal,
    make_vacuum,
)
from .metrics import VIOLATION_TOL, EdrReport, build_report, commutator_bound
from .sampling import QUANTITIES, TrialSummary, run_trials

FORMAT_VERSION = 1

#: family -> (constructor, number of parameters)
FAMILIES = {
    "coherent": (make_coherent, 2),
    "squeezed_pure": (make_squeezed_pure, 1),
    "squeezed_db": (make_squeezed_db, 2),
    "thermal": (make_thermal, 1),
}

#: Combined interference (0.99) and photodiode (0.996) efficiency.
DETECTION_EFFICIENCY = 0.99 * 0.996


class ConfigError(ValueError):
    """Invalid sweep configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.message = message
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {message}")


@dataclass(frozen=True)
class StateSpec:
    family: str
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError("states", f"unknown state family {self.family!r}")
        if self.family == "coherent" and len(self.params) == 0:
            object.__setattr__(self, "params", (0.0, 0.0))
        params = tuple(float(p) for p in self.params)
        want = FAMILIES[self.family][1]
        if len(params) != want:
            raise ConfigError(self.family, f"expects {want} parameter(s), got {len(params)}")
        object.__setattr__(self, "params", params)

    @property
    def label(self) -> str:
        return f"{self.family}({','.join(f'{p:g}' for p in self.params)})"

    def build(self) -> GaussianState:
        ctor = FAMILIES[self.family][0]
        try:
            return ctor(*self.params)
        except ValueError as e:
            raise ConfigError(self.family, str(e)) from None


DEFAULT_STATES = (
    StateSpec("coherent", (0.0, 0.0)),
    StateSpec("squeezed_db", (-2.9, 3.9)),
    StateSpec("thermal", (0.334,)),
)


@dataclass(frozen=True)
class SweepConfig:
    states: tuple = DEFAULT_STATES
    t_start: float = 0.01
    t_stop: float = 0.99
    t_step: float = 0.01
    n: int = 500_000
    trials: int = 10
    master_seed: int = 0
    include_empirical: bool = False
    loss_eff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        self.validate()

    def validate(self) -> None:
        if not self.states:
            raise ConfigError("states", "at least one state is required")
        for name in ("t_start", "t_stop"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {v}")
        if not self.t_step > 0:
            raise ConfigError("t_step", f"must be > 0, got {self.t_step}")
        if self.t_start > self.t_stop:
            raise ConfigError("t_start", "must not exceed t_stop")
        if self.n < 1:
            raise ConfigError("n", f"must be >= 1, got {self.n}")
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if self.loss_eff is not None and not 0.0 <= self.loss_eff <= 1.0:
            raise ConfigError("loss_eff", f"must lie in [0, 1], got {self.loss_eff}")

    @property
    def t_grid(self) -> np.ndarray:
        count = int(np.floor((self.t_stop - self.t_start) / self.t_step + 1e-9)) + 1
        ts = np.round(self.t_start + self.t_step * np.arange(count), 12)
        return np.clip(ts, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "states": [{"family": s.family, "params": list(s.params)} for s in self.states],
            "t_start": self.t_start,
            "t_stop": self.t_stop,
            "t_step": self.t_step,
            "n": self.n,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "include_empirical": self.include_empirical,
            "loss_eff": self.loss_eff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        d["states"] = tuple(StateSpec(s["family"], tuple(s["params"])) for s in d["states"])
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    state: str
    t: float
    analytic: EdrReport
    empirical: EdrReport | None = None
    error_bars: dict | None = None
    clamp_count: int = 0

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "t": self.t,
            "analytic": self.analytic.to_dict(),
            "empirical": None if self.empirical is None else self.empirical.to_dict(),
            "error_bars": None
            if self.error_bars is None
            else {q: s.to_dict() for q, s in self.error_bars.items()},
            "clamp_count": self.clamp_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepRow":
        return cls(
            state=d["state"],
            t=d["t"],
            analytic=EdrReport.from_dict(d["analytic"]),
            empirical=None if d["empirical"] is None else EdrReport.from_dict(d["empirical"]),
            error_bars=None
            if d["error_bars"] is None
            else {q: TrialSummary.from_dict(s) for q, s in d["error_bars"].items()},
            clamp_count=d["clamp_count"],
        )


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    metadata: dict = field(default_factory=dict)

    @property
    def has_empirical(self) -> bool:
        return any(r.empirical is not None for r in self.rows)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepResult":
        return cls(tuple(SweepRow.from_dict(r) for r in d["rows"]), d["metadata"])


def empirical_report(summaries: dict, t: float, clamped: bool) -> EdrReport:
    """Report whose fields are trial means; flags are evaluated on those means."""
    m = {q: summaries[q].mean for q in QUANTITIES}
    c_ab = commutator_bound()
    return EdrReport(
        t=float(t),
        c_ab=c_ab,
        heisenberg_violated=m["lhs_heisenberg"] < c_ab - VIOLATION_TOL,
        ozawa_violated=m["lhs_ozawa"] < c_ab - VIOLATION_TOL,
        branciard_violated=m["lhs_branciard"] < c_ab - VIOLATION_TOL,
        branciard_clamped=clamped,
        **m,
    )


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (
        datetime.fromtimestamp(int(epoch), tz=timezone.utc)
        if epoch
        else datetime.now(timezone.utc)
    )
    return now.isoformat(timespec="seconds")


def _signal(spec: StateSpec, loss_eff: float | None) -> GaussianState:
    state = spec.build()
    if loss_eff is not None:
        state = apply_loss(state, loss_eff)
    return state


def _row(config: SweepConfig, signals, meter, i: int, j: int, t: float) -> SweepRow:
    signal = signals[i]
    analytic = build_report(signal, meter, t)
    if not config.include_empirical:
        return SweepRow(config.states[i].label, float(t), analytic)
    run = run_trials(
        signal, meter, t, config.n, config.trials, config.master_seed, key=(i, j)
    )
    return SweepRow(
        config.states[i].label,
        float(t),
        analytic,
        empirical_report(run.summaries, t, run.clamp_count > 0),
        dict(run.summaries),
        run.clamp_count,
    )


def run_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Analytic (and optionally Monte Carlo) reports for every state and ``t``.

    Rows are ordered by state then ascending ``t``. Subseeds depend only on
    ``(master_seed, state index, t index, trial, basis)`` so the result does
    not depend on ``workers``.
    """
    config.validate()
    meter = make_vacuum()
    signals = [_signal(s, config.loss_eff) for s in config.states]
    grid = config.t_grid
    jobs = [(i, j, t) for i in range(len(signals)) for j, t in enumerate(grid)]
    if workers > 1 and config.include_empirical:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _row(config, signals, meter, *a), jobs))
    else:
        rows = [_row(config, signals, meter, *a) for a in jobs]
    metadata = {
        "format_version": FORMAT_VERSION,
        "artifact_version": __version__,
        "timestamp": _timestamp(),
        "config": config.to_dict(),
    }
    return SweepResult(tuple(rows), metadata)


def compare_analytic_empirical(result: SweepResult) -> dict:
    """Deviation of empirical trial means from the analytic values.

    Returns:
        dict: per quantity, ``max_abs_dev``, ``mean_abs_dev``, ``points`` and
        ``outside_3_bars`` (points whose deviation exceeds three RMS error bars)
    """
    rows = [r for r in result.rows if r.error_bars is not None]
    if not rows:
        raise ValueError("no empirical data")
    out = {}
    for q in QUANTITIES:
        dev = np.array([abs(r.error_bars[q].mean - getattr(r.analytic, q)) for r in rows])
        bars = np.array([r.error_bars[q].rms_error_bar for r in rows])
        out[q] = {
            "max_abs_dev": float(dev.max()),
            "mean_abs_dev": float(dev.mean()),
            "points": len(rows),
            "outside_3_bars": int(np.sum(dev > 3 * bars)),
        }
    return out

