"""Error, disturbance and the three error-disturbance bounds for (x, p).

``A = x`` of the signal is approximated by ``C = x_c`` and ``B = p`` of the
signal by ``D = p_d``. All relations share the right-hand side
``C_AB = |<[x, p]>| / 2 = 1`` in shot-noise units.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .gaussian import GaussianState, TwoModeState, validate_transmission

#: Slack used for every "LHS below the bound" comparison.
VIOLATION_TOL = 1e-9

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def commutator_bound() -> float:
    """``|<[x, p]>| / 2`` with ``[x, p] = 2i``; independent of the state."""
    return 1.0


@dataclass(frozen=True)
class EdrReport:
    t: float
    epsilon: float
    eta: float
    sigma_a: float
    sigma_b: float
    c_ab: float
    lhs_heisenberg: float
    lhs_ozawa: float
    lhs_branciard: float
    heisenberg_violated: bool
    ozawa_violated: bool
    branciard_violated: bool
    branciard_clamped: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EdrReport":
        return cls(**d)


def error_amplitude(signal: GaussianState, meter: GaussianState, t: float) -> float:
    """RMS error of ``x_c`` as an estimate of the signal's ``x``.

    ``eps^2 = (sqrt(T) - 1)^2 <x_s^2> + R <x_m^2>`` with second moments taken
    about zero, so a displaced signal contributes its mean.
    """
    t = validate_transmission(t)
    r = 1.0 - t
    return math.sqrt((math.sqrt(t) - 1.0) ** 2 * signal.second_moment_x + r * meter.second_moment_x)


def disturbance_phase(signal: GaussianState, meter: GaussianState, t: float) -> float:
    """RMS disturbance: deviation of ``p_d`` from the signal's ``p``."""
    t = validate_transmission(t)
    r = 1.0 - t
    return math.sqrt((math.sqrt(r) - 1.0) ** 2 * signal.second_moment_p + t * meter.second_moment_p)


def error_weights(t: float) -> np.ndarray:
    """Weights on ``(x_c, p_c, x_d, p_d)`` whose combination equals ``C - A``."""
    t = validate_transmission(t)
    return np.array([1.0 - math.sqrt(t), 0.0, -math.sqrt(1.0 - t), 0.0])


def disturbance_weights(t: float) -> np.ndarray:
    """Weights on ``(x_c, p_c, x_d, p_d)`` whose combination equals ``D - B``.

    Inverting the beam splitter gives ``p_s = sqrt(T) p_c + sqrt(R) p_d`` so
    ``p_d - p_s = (1 - sqrt(R)) p_d - sqrt(T) p_c``.
    """
    t = validate_transmission(t)
    return np.array([0.0, -math.sqrt(t), 0.0, 1.0 - math.sqrt(1.0 - t)])


def _output_rms(joint: TwoModeState, w: np.ndarray) -> float:
    m2 = joint.cov + np.outer(joint.mean, joint.mean)
    return math.sqrt(max(float(w @ m2 @ w), 0.0))


def error_from_output(joint: TwoModeState, t: float) -> float:
    """Error evaluated from the output-port moments alone."""
    return _output_rms(joint, error_weights(t))


def disturbance_from_output(joint: TwoModeState, t: float) -> float:
    return _output_rms(joint, disturbance_weights(t))


def heisenberg_lhs(eps: float, eta: float) -> float:
    return eps * eta


def ozawa_lhs(eps: float, eta: float, sigma_a: float, sigma_b: float) -> float:
    return eps * eta + eps * sigma_b + sigma_a * eta


def branciard_discriminant(sigma_a: float, sigma_b: float, c_ab: float = 1.0) -> float:
    """``sigma_A^2 sigma_B^2 - C_AB^2``; negative only for sampled variances."""
    return sigma_a**2 * sigma_b**2 - c_ab**2


def branciard_lhs(
    eps: float, eta: float, sigma_a: float, sigma_b: float, c_ab: float = 1.0
) -> float:
    """Left-hand side of Branciard's relation.

    The discriminant under the inner root is clamped at zero; use
    :func:`branciard_discriminant` to see whether the clamp was active.
    """
    disc = max(0.0, branciard_discriminant(sigma_a, sigma_b, c_ab))
    return math.sqrt(
        eps**2 * sigma_b**2 + sigma_a**2 * eta**2 + 2.0 * eps * eta * math.sqrt(disc)
    )


def report_from_values(
    t: float, eps: float, eta: float, sigma_a: float, sigma_b: float
) -> EdrReport:
    """Assemble an :class:`EdrReport` from error, disturbance and spreads."""
    c_ab = commutator_bound()
    h = heisenberg_lhs(eps, eta)
    o = ozawa_lhs(eps, eta, sigma_a, sigma_b)
    b = branciard_lhs(eps, eta, sigma_a, sigma_b, c_ab)
    return EdrReport(
        t=float(t),
        epsilon=float(eps),
        eta=float(eta),
        sigma_a=float(sigma_a),
        sigma_b=float(sigma_b),
        c_ab=c_ab,
        lhs_heisenberg=float(h),
        lhs_ozawa=float(o),
        lhs_branciard=float(b),
        heisenberg_violated=bool(h < c_ab - VIOLATION_TOL),
        ozawa_violated=bool(o < c_ab - VIOLATION_TOL),
        branciard_violated=bool(b < c_ab - VIOLATION_TOL),
        branciard_clamped=bool(branciard_discriminant(sigma_a, sigma_b, c_ab) < 0.0),
    )


def build_report(signal: GaussianState, meter: GaussianState, t: float) -> EdrReport:
    """Analytic report at transmission ``t``.

    ``sigma_a`` and ``sigma_b`` are the signal's standard deviations before
    the measurement.
    """
    t = validate_transmission(t)
    return report_from_values(
        t,
        error_amplitude(signal, meter, t),
        disturbance_phase(signal, meter, t),
        math.sqrt(signal.var_x),
        math.sqrt(signal.var_p),
    )


def report_from_output(
    joint: TwoModeState, signal: GaussianState, t: float
) -> EdrReport:
    """Same as :func:`build_report` but with error/disturbance from port moments."""
    return report_from_values(
        t,
        error_from_output(joint, t),
        disturbance_from_output(joint, t),
        math.sqrt(signal.var_x),
        math.sqrt(signal.var_p),
    )


def golden_section(f, lo: float, hi: float, tol: float = 1e-6, max_iter: int = 200):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; ties move toward ``lo``.

    Returns:
        tuple: ``(x, f(x))`` at the midpoint of the final bracket
    """
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def branciard_curve(signal: GaussianState, meter: GaussianState, ts) -> np.ndarray:
    """Analytic Branciard LHS for every transmission in ``ts``."""
    return np.array([build_report(signal, meter, t).lhs_branciard for t in ts])


def minimize_branciard(
    signal: GaussianState, meter: GaussianState, grid_step: float = 1e-3, tol: float = 1e-6
) -> tuple[float, float]:
    """Transmission minimising the Branciard LHS.

    A coarse grid over ``[0, 1]`` picks the best bracket (first minimum wins),
    then golden-section search refines it to ``tol``.

    Returns:
        tuple: ``(t_star, lhs_star)``
    """
    n = int(round(1.0 / grid_step))
    ts = np.arange(n + 1) / n
    values = branciard_curve(signal, meter, ts)
    i = int(np.argmin(values))

    def f(t):
        return build_report(signal, meter, t).lhs_branciard

    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, n)]
    t_star, lhs_star = golden_section(f, lo, hi, tol=tol)
    if lhs_star > values[i]:
        return float(ts[i]), float(values[i])
    return float(t_star), float(lhs_star)


def bound_curves(eps, sigma_a: float, sigma_b: float, c_ab: float = 1.0) -> dict:
    """Smallest disturbance allowed by each relation at error ``eps``.

    Heisenberg: ``eta = C/eps``. Ozawa and Branciard are solved for ``eta``
    and floored at zero once ``eps * sigma_b`` alone meets the bound.

    Returns:
        dict: ``"heisenberg"``, ``"ozawa"``, ``"branciard"`` -> arrays like ``eps``
    """
    eps = np.asarray(eps, dtype=np.float64)
    with np.errstate(divide="ignore"):
        heis = c_ab / eps
    oz = np.maximum((c_ab - eps * sigma_b) / (eps + sigma_a), 0.0)
    # sigma_a^2 eta^2 + 2 eps d eta + (eps^2 sigma_b^2 - C^2) = 0
    d = math.sqrt(max(0.0, branciard_discriminant(sigma_a, sigma_b, c_ab)))
    disc = np.maximum(eps**2 * d**2 - sigma_a**2 * (eps**2 * sigma_b**2 - c_ab**2), 0.0)
    br = np.maximum((-eps * d + np.sqrt(disc)) / sigma_a**2, 0.0)
    return {"heisenberg": heis, "ozawa": oz, "branciard": br}
