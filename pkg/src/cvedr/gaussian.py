"""Single- and two-mode Gaussian states in shot-noise units.

Quadratures follow ``x = a + a^dag`` and ``p = (a - a^dag)/i`` so the vacuum
has unit variance in both and ``[x, p] = 2i``. Two-mode vectors are ordered
``(x_c, p_c, x_d, p_d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Slack on the Robertson bound ``det(cov) >= 1``.
PHYSICALITY_TOL = 1e-9


class PhysicalityError(ValueError):
    """Raised when a covariance matrix cannot describe a quantum state."""


def validate_transmission(t: float) -> float:
    """Return ``t`` as a float, raising ``ValueError`` outside ``[0, 1]``."""
    t = float(t)
    if not 0.0 <= t <= 1.0 or np.isnan(t):
        raise ValueError(f"transmission must lie in [0, 1], got {t!r}")
    return t


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def _check_cov(cov: np.ndarray) -> None:
    if not np.all(np.isfinite(cov)):
        raise PhysicalityError("covariance has non-finite entries")
    if not np.array_equal(cov, cov.T):
        raise PhysicalityError("covariance is not symmetric")
    if np.linalg.eigvalsh(cov).min() <= 0.0:
        raise PhysicalityError("covariance is not positive-definite")


@dataclass(frozen=True)
class GaussianState:
    """One-mode Gaussian state.

    Attributes:
        mean_x: mean of the amplitude quadrature
        mean_p: mean of the phase quadrature
        cov: 2x2 covariance of ``(x, p)``, vacuum = identity
        label: free-text family name
    """

    mean_x: float
    mean_p: float
    cov: np.ndarray
    label: str = ""

    def __post_init__(self):
        cov = _frozen(self.cov)
        if cov.shape != (2, 2):
            raise ValueError(f"single-mode covariance must be 2x2, got {cov.shape}")
        _check_cov(cov)
        if np.linalg.det(cov) < 1.0 - PHYSICALITY_TOL:
            raise PhysicalityError(
                f"unphysical covariance: det = {np.linalg.det(cov):.12g} < 1"
            )
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean_x", float(self.mean_x))
        object.__setattr__(self, "mean_p", float(self.mean_p))

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_p])

    @property
    def var_x(self) -> float:
        return float(self.cov[0, 0])

    @property
    def var_p(self) -> float:
        return float(self.cov[1, 1])

    @property
    def second_moment_x(self) -> float:
        """``<x^2>`` about zero (variance plus squared mean)."""
        return self.var_x + self.mean_x**2

    @property
    def second_moment_p(self) -> float:
        return self.var_p + self.mean_p**2


@dataclass(frozen=True)
class TwoModeState:
    """Joint Gaussian state of the two beam-splitter output ports."""

    mean: np.ndarray
    cov: np.ndarray
    labels: tuple = field(default=("c", "d"))

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.shape != (4,) or cov.shape != (4, 4):
            raise ValueError("two-mode state needs a length-4 mean and 4x4 covariance")
        _check_cov(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def mode(self, which: str) -> GaussianState:
        """Reduced single-mode state of port ``"c"`` or ``"d"``."""
        i = {"c": 0, "d": 2}[which]
        return GaussianState(
            self.mean[i], self.mean[i + 1], self.cov[i : i + 2, i : i + 2], label=which
        )

    def quadrature_pair(self, basis: str) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance of the commuting pair ``(x_c, x_d)`` or ``(p_c, p_d)``."""
        idx = {"X": [0, 2], "P": [1, 3]}[basis.upper()]
        return self.mean[idx].copy(), self.cov[np.ix_(idx, idx)].copy()


def make_vacuum() -> GaussianState:
    return GaussianState(0.0, 0.0, np.eye(2), label="vacuum")


def make_coherent(mean_x: float = 0.0, mean_p: float = 0.0) -> GaussianState:
    return GaussianState(mean_x, mean_p, np.eye(2), label="coherent")


def make_squeezed_pure(r: float) -> GaussianState:
    """Pure x-squeezed vacuum with variances ``(e^{-2r}, e^{2r})``."""
    if r < 0:
        raise ValueError("squeezing parameter must be >= 0 (x-squeezing only)")
    return GaussianState(
        0.0, 0.0, np.diag([np.exp(-2 * r), np.exp(2 * r)]), label="squeezed_pure"
    )


def db_to_variance(db: float) -> float:
    """Noise level in dB relative to shot noise -> variance in shot-noise units."""
    return 10.0 ** (db / 10.0)


def make_squeezed_db(sqz_db: float, antisqz_db: float) -> GaussianState:
    """x-squeezed state from measured squeezing/antisqueezing levels in dB.

    Args:
        sqz_db: amplitude-quadrature noise relative to shot noise (negative)
        antisqz_db: phase-quadrature noise relative to shot noise

    Raises:
        PhysicalityError: if the pair violates ``Vx * Vp >= 1``
    """
    vx, vp = db_to_variance(sqz_db), db_to_variance(antisqz_db)
    if vx * vp < 1.0 - PHYSICALITY_TOL:
        raise PhysicalityError(
            f"unphysical covariance: {sqz_db} dB / {antisqz_db} dB gives det = {vx * vp:.6g} < 1"
        )
    return GaussianState(0.0, 0.0, np.diag([vx, vp]), label="squeezed_db")


def make_thermal(r: float) -> GaussianState:
    """Single-mode marginal of a two-mode squeezed state with parameter ``r``."""
    if r < 0:
        raise ValueError("squeezing parameter must be >= 0")
    v = (np.exp(-2 * r) + np.exp(2 * r)) / 2
    return GaussianState(0.0, 0.0, np.diag([v, v]), label="thermal")


def beam_splitter_matrix(t: float) -> np.ndarray:
    """Symplectic map from ``(x_s, p_s, x_m, p_m)`` to ``(x_c, p_c, x_d, p_d)``.

    Port c receives ``sqrt(T) s - sqrt(R) m``, port d receives
    ``sqrt(R) s + sqrt(T) m``.
    """
    t = validate_transmission(t)
    a, b = np.sqrt(t), np.sqrt(1.0 - t)
    return np.array(
        [
            [a, 0.0, -b, 0.0],
            [0.0, a, 0.0, -b],
            [b, 0.0, a, 0.0],
            [0.0, b, 0.0, a],
        ]
    )


def symplectic_form(num_modes: int = 2) -> np.ndarray:
    """Block-diagonal symplectic form for mode-interleaved ordering."""
    return np.kron(np.eye(num_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def beam_split(signal: GaussianState, meter: GaussianState, t: float) -> TwoModeState:
    """Mix ``signal`` and ``meter`` on a beam splitter of power transmission ``t``."""
    S = beam_splitter_matrix(t)
    mean_in = np.concatenate([signal.mean, meter.mean])
    cov_in = np.zeros((4, 4))
    cov_in[:2, :2] = signal.cov
    cov_in[2:, 2:] = meter.cov
    cov = S @ cov_in @ S.T
    # kill round-off asymmetry so the symmetry check is exact
    cov = (cov + cov.T) / 2
    return TwoModeState(S @ mean_in, cov)


def apply_loss(state: GaussianState, eff: float) -> GaussianState:
    """Pure-loss channel: mix with vacuum at efficiency ``eff``."""
    eff = float(eff)
    if not 0.0 <= eff <= 1.0:
        raise ValueError(f"efficiency must lie in [0, 1], got {eff!r}")
    if eff == 1.0:
        return state
    g = np.sqrt(eff)
    return GaussianState(
        g * state.mean_x,
        g * state.mean_p,
        eff * state.cov + (1.0 - eff) * np.eye(2),
        label=state.label,
    )


def purity(state: GaussianState) -> float:
    det = np.linalg.det(state.cov)
    if det <= 0:
        raise PhysicalityError("covariance is not positive-definite")
    return float(1.0 / np.sqrt(det))
