"""
Closed-form two-level evolution under hyperbolic-secant pulses.

For a two-level transition driven by Omega(t) = a*sigma*sech(sigma t) with
detuning Delta, the evolution from t = -inf to +inf has diagonal entries
2F1(-a, a; (sigma -/+ i Delta)/(2 sigma); 1). For integer area index a the
off-diagonal vanishes and the pulse only imprints the phase phi_a(Delta).
"""

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from sechgate.errors import NumericalError, PoleError

logger = logging.getLogger(__name__)

POLE_TOLERANCE = 1e-12
CROSS_CHECK_RTOL = 1e-12


def _is_gamma_pole(z: complex) -> bool:
    nearest = round(z.real)
    return nearest <= 0 and abs(z - nearest) < POLE_TOLERANCE


def _terminating_2f1(a: int, c: complex, z: complex = 1.0) -> complex:
    """2F1(-a, a; c; z) by its finite series (a + 1 terms)."""
    term = 1.0 + 0.0j
    total = 1.0 + 0.0j
    for k in range(a):
        term *= (k - a) * (k + a) / ((c + k) * (k + 1)) * z
        total += term
    return total


def _gauss_summation(a: int, c: complex) -> complex:
    """
    Gamma(c)^2 / (Gamma(c + a) Gamma(c - a)), zero when c - a is a pole.

    For integer a the Gamma ratios reduce to the Pochhammer quotient
    (c - a)_a / (c)_a.
    """
    if _is_gamma_pole(c - a):
        return 0.0j
    ratio = 1.0 + 0.0j
    for k in range(a):
        ratio *= (c - a + k) / (c + k)
    return ratio


def gauss_2f1_unit(a: int, c: complex, *, cross_check: bool = True) -> complex:
    """
    2F1(-a, a; c; 1) for a non-negative integer ``a``.

    The terminating series is the value returned; with ``cross_check`` it is
    compared against Gauss's summation theorem.
    """
    if isinstance(a, bool) or int(a) != a or a < 0:
        raise ValueError(f"area index must be a non-negative integer, got {a}")
    a = int(a)
    c = complex(c)
    if _is_gamma_pole(c):
        raise PoleError(f"c = {c} is a non-positive integer")

    series = _terminating_2f1(a, c)
    if cross_check and a > 0:
        gauss = _gauss_summation(a, c)
        if abs(series - gauss) > CROSS_CHECK_RTOL * max(1.0, abs(series)):
            raise NumericalError(f"2F1 series {series} and Gauss summation {gauss} disagree at c={c}")
    return series


def sech_final_propagator(delta: float, sigma: float, a: int) -> np.ndarray:
    """Evolution operator U(+inf, -inf) for a sech pulse of area index ``a``."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    x = delta / sigma
    u00 = gauss_2f1_unit(a, (1.0 - 1j * x) / 2.0)
    u11 = gauss_2f1_unit(a, (1.0 + 1j * x) / 2.0)
    # Integer area: sin(a pi) vanishes identically.
    off = 0.0j if float(a).is_integer() else -1j * math.sin(a * math.pi) / math.cosh(math.pi * x / 2.0)
    return np.array([[u00, off], [off, u11]], dtype=complex)


def phase_phi(delta: float, sigma: float, a: int) -> float:
    """
    Phase phi_a(Delta) imprinted on the lower state, in (-pi, pi].

    Taken as -arg U00 of the closed-form propagator, continuous through
    Delta = 0 from above.
    """
    if a not in (1, 2):
        raise ValueError(f"phase_phi is defined for a in (1, 2), got {a}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    u00 = gauss_2f1_unit(a, (1.0 - 1j * delta / sigma) / 2.0, cross_check=False)
    phi = -math.atan2(u00.imag, u00.real)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return phi


def phase_phi_closed_form(delta: float, sigma: float, a: int) -> float:
    """Printed arctangent forms of phi_1 and phi_2; singular at (Delta/sigma)**2 = 3 for a = 2."""
    with np.errstate(divide="ignore"):
        if a == 1:
            return float(2.0 * np.arctan(np.float64(sigma) / np.float64(delta)))
        if a == 2:
            x = np.float64(delta) / np.float64(sigma)
            return float(2.0 * np.arctan(4.0 * x / (x * x - 3.0)))
    raise ValueError(f"closed form exists for a in (1, 2), got {a}")


def integrate_two_level(delta: float, sigma: float, a: int, *, half_window: float = None,
                        t_end: float = None, rtol: float = 1e-11, atol: float = 1e-13) -> np.ndarray:
    """
    Numerically integrate H(t) = [[0, W e^{i D t}], [W e^{-i D t}, 0]], W = a sigma sech(sigma t).

    Integration starts at -half_window (default 20/sigma) and stops at
    ``t_end`` (default +half_window).
    """
    half_window = half_window if half_window is not None else 20.0 / sigma
    t_end = half_window if t_end is None else t_end
    amplitude = a * sigma

    def rhs(t, y):
        u = y.reshape(2, 2)
        coupling = amplitude / math.cosh(sigma * t) * complex(math.cos(delta * t), math.sin(delta * t))
        h = np.array([[0.0, coupling], [np.conj(coupling), 0.0]])
        return (-1j * (h @ u)).ravel()

    y0 = np.eye(2, dtype=complex).ravel()
    solution = solve_ivp(rhs, (-half_window, t_end), y0, method="DOP853", rtol=rtol, atol=atol)
    if solution.status != 0:
        raise NumericalError(f"Two-level integration failed: {solution.message}")
    return solution.y[:, -1].reshape(2, 2)
