"""Finite quadrature records and Monte Carlo estimates of error/disturbance.

Each record is a pair of simultaneously measured commuting quadratures:
``(x_c, x_d)`` for basis ``"X"`` or ``(p_c, p_d)`` for basis ``"P"``. The two
bases are drawn independently, as two separate runs would be in the lab.
Basis ``"S"`` holds a direct draw ``(x, p)`` of the signal before the beam
splitter and is only used to estimate its spreads.

Seeds: every batch is generated from ``mix_seed(master, *key, trial, basis)``,
which feeds the integers to :class:`numpy.random.SeedSequence` (master as
entropy, the rest as spawn key) and takes one 64-bit word of its output.
The batch itself is drawn from a PCG64 generator seeded with that word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import GaussianState, TwoModeState, beam_split, validate_transmission
from .metrics import EdrReport, report_from_values

BASES = ("X", "P", "S")
BASIS_CODE = {"X": 0, "P": 1, "S": 2}

#: Quantities summarised by :func:`run_trials`, in output order.
QUANTITIES = (
    "epsilon",
    "eta",
    "sigma_a",
    "sigma_b",
    "lhs_heisenberg",
    "lhs_ozawa",
    "lhs_branciard",
)

CHOLESKY_JITTER = 1e-10


class BasisMismatchError(ValueError):
    pass


def mix_seed(master: int, *indices: int) -> int:
    """Derive a 64-bit subseed from a master seed and integer indices."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(i) for i in indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def cholesky_factor(cov) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == cov``.

    A single diagonal jitter of ``1e-10`` is tried if the plain factorisation
    fails.

    Raises:
        numpy.linalg.LinAlgError: if ``cov`` is not positive-definite
    """
    cov = np.asarray(cov, dtype=np.float64)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(cov + CHOLESKY_JITTER * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "covariance is not positive-definite even after jitter"
        ) from None


@dataclass(frozen=True)
class SampleBatch:
    """``n`` joint samples of one commuting quadrature pair."""

    basis: str
    ch1: np.ndarray
    ch2: np.ndarray
    seed: int | None = None
    t: float | None = None

    def __post_init__(self):
        basis = self.basis.upper()
        if basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        ch1 = np.asarray(self.ch1, dtype=np.float64)
        ch2 = np.asarray(self.ch2, dtype=np.float64)
        if ch1.ndim != 1 or ch1.shape != ch2.shape:
            raise ValueError("ch1 and ch2 must be 1-d arrays of equal length")
        if ch1.size < 1:
            raise ValueError("a batch needs at least one sample")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "ch1", ch1)
        object.__setattr__(self, "ch2", ch2)

    @property
    def n(self) -> int:
        return self.ch1.size


def _draw(mean: np.ndarray, cov: np.ndarray, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    L = cholesky_factor(cov)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    return mean + z @ L.T


def draw_pairs(joint: TwoModeState, basis: str, n: int, seed: int, t: float | None = None) -> SampleBatch:
    """Sample the commuting pair selected by ``basis`` from the output state."""
    basis = basis.upper()
    if basis not in ("X", "P"):
        raise ValueError(f"output basis must be 'X' or 'P', got {basis!r}")
    mean, cov = joint.quadrature_pair(basis)
    s = _draw(mean, cov, n, seed)
    return SampleBatch(basis, s[:, 0], s[:, 1], seed=seed, t=t)


def draw_signal(signal: GaussianState, n: int, seed: int) -> SampleBatch:
    """Direct ``(x, p)`` draw of the signal, used for its pre-measurement spreads."""
    s = _draw(signal.mean, signal.cov, n, seed)
    return SampleBatch("S", s[:, 0], s[:, 1], seed=seed)


def _check(batch: SampleBatch, basis: str, t: float) -> float:
    if batch.basis != basis:
        raise BasisMismatchError(f"expected basis {basis}, got {batch.basis}")
    t = validate_transmission(t)
    if batch.t is not None and batch.t != t:
        raise ValueError(f"batch was recorded at t={batch.t}, not t={t}")
    return t


def empirical_second_moment(samples) -> float:
    """Mean of squares (second moment about zero)."""
    a = np.asarray(samples, dtype=np.float64)
    if a.size == 0:
        raise ValueError("empty sample array")
    return float(np.mean(a * a))


def empirical_error(batch: SampleBatch, t: float) -> float:
    """RMS of ``(1 - sqrt(T)) x_c - sqrt(R) x_d`` over an X-basis record."""
    t = _check(batch, "X", t)
    return math.sqrt(empirical_second_moment((1 - math.sqrt(t)) * batch.ch1 - math.sqrt(1 - t) * batch.ch2))


def empirical_disturbance(batch: SampleBatch, t: float) -> float:
    """RMS of ``(1 - sqrt(R)) p_d - sqrt(T) p_c`` over a P-basis record."""
    t = _check(batch, "P", t)
    return math.sqrt(empirical_second_moment((1 - math.sqrt(1 - t)) * batch.ch2 - math.sqrt(t) * batch.ch1))


def reconstruct_signal(x_batch: SampleBatch, p_batch: SampleBatch, t: float) -> tuple[float, float]:
    """Signal spreads inferred from output records by inverting the beam splitter.

    Fallback for recorded data that comes without a direct signal
    measurement.
    """
    a, b = math.sqrt(t), math.sqrt(1 - t)
    sa = math.sqrt(empirical_second_moment(a * x_batch.ch1 + b * x_batch.ch2))
    sb = math.sqrt(empirical_second_moment(a * p_batch.ch1 + b * p_batch.ch2))
    return sa, sb


def estimate_report(
    x_batch: SampleBatch,
    p_batch: SampleBatch,
    t: float,
    signal_batch: SampleBatch | None = None,
) -> EdrReport:
    """Empirical :class:`EdrReport` from one X record and one P record."""
    eps = empirical_error(x_batch, t)
    eta = empirical_disturbance(p_batch, t)
    if signal_batch is None:
        sa, sb = reconstruct_signal(x_batch, p_batch, t)
    else:
        if signal_batch.basis != "S":
            raise BasisMismatchError(f"expected basis S, got {signal_batch.basis}")
        sa = math.sqrt(empirical_second_moment(signal_batch.ch1))
        sb = math.sqrt(empirical_second_moment(signal_batch.ch2))
    return report_from_values(t, eps, eta, sa, sb)


@dataclass(frozen=True)
class TrialSummary:
    """Mean of repeated estimates and their RMS spread about that mean."""

    mean: float
    rms_error_bar: float
    trials: int
    per_trial_values: tuple = field(default=())

    @classmethod
    def from_values(cls, values) -> "TrialSummary":
        v = np.asarray(values, dtype=np.float64)
        if v.size < 1:
            raise ValueError("need at least one trial")
        m = float(np.mean(v))
        bar = float(np.sqrt(np.mean((v - m) ** 2)))
        return cls(m, bar, int(v.size), tuple(float(x) for x in v))

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "rms_error_bar": self.rms_error_bar,
            "trials": self.trials,
            "per_trial_values": list(self.per_trial_values),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialSummary":
        return cls(d["mean"], d["rms_error_bar"], d["trials"], tuple(d["per_trial_values"]))


def trial_batches(
    signal: GaussianState,
    meter: GaussianState,
    t: float,
    n: int,
    seed: int,
    trial: int,
    key: tuple = (),
) -> tuple[SampleBatch, SampleBatch, SampleBatch]:
    """The X, P and signal records used by trial ``trial``."""
    t = validate_transmission(t)
    joint = beam_split(signal, meter, t)
    xb = draw_pairs(joint, "X", n, mix_seed(seed, *key, trial, BASIS_CODE["X"]), t=t)
    pb = draw_pairs(joint, "P", n, mix_seed(seed, *key, trial, BASIS_CODE["P"]), t=t)
    sb = draw_signal(signal, n, mix_seed(seed, *key, trial, BASIS_CODE["S"]))
    return xb, pb, sb


def summarize_reports(reports) -> dict[str, TrialSummary]:
    return {
        q: TrialSummary.from_values([getattr(r, q) for r in reports]) for q in QUANTITIES
    }


@dataclass(frozen=True)
class TrialRun:
    """Per-quantity summaries plus the individual trial reports."""

    summaries: dict
    reports: tuple

    @property
    def clamp_count(self) -> int:
        return sum(r.branciard_clamped for r in self.reports)

    def __getitem__(self, quantity: str) -> TrialSummary:
        return self.summaries[quantity]


def run_trials(
    signal: GaussianState,
    meter: GaussianState,
    t: float,
    n: int,
    trials: int,
    seed: int,
    key: tuple = (),
) -> TrialRun:
    """Repeat the measurement ``trials`` times with independent records.

    Args:
        signal: signal state (already including any loss)
        meter: meter state, normally vacuum
        t: beam-splitter transmission
        n: samples per record
        trials: number of repetitions
        seed: master seed
        key: extra indices mixed into every subseed, e.g. ``(state_index, t_index)``
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    reports = []
    for k in range(trials):
        xb, pb, sb = trial_batches(signal, meter, t, n, seed, k, key)
        reports.append(estimate_report(xb, pb, t, sb))
    return TrialRun(summarize_reports(reports), tuple(reports))
