"""
Sech-pulse CPHASE protocol design.

Resolves a requested angle theta into sech-pulse parameters for the five
protocol families. Each family drives a pair of transitions that differ only
in the state of the undriven qubit: one (the target, chosen by lam) is driven
on resonance or at a designed detuning, the other (harmful) must close with a
phase. The difference of the two phases is the conditional phase.

lam = +1 targets the transition with the undriven qubit in |0>, lam = -1 the
one with it in |1>.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from sechgate.errors import (
    AngleOutOfDomain,
    BandwidthOutOfRange,
    ConfigError,
    DegenerateSplitting,
)
from sechgate.invariants import (
    cphase_target_invariants,
    diagonal_cphase_angle,
    invariants_distance,
    local_invariants,
)
from sechgate.models import (
    BandwidthRange,
    Branch,
    ProtocolFamily,
    ProtocolSpec,
    TransitionPair,
    TransitionTable,
    angular_to_mhz,
    block_order,
    mhz_to_angular,
    wrap_angle,
)
from sechgate.sech_engine import gauss_2f1_unit, phase_phi

logger = logging.getLogger(__name__)

DEGENERATE_SPLITTING = mhz_to_angular(0.01)

SQRT3 = math.sqrt(3.0)
SQRT7 = math.sqrt(7.0)


# ===========================================
# Helpers
# ===========================================

def _check_theta(theta: float, family: ProtocolFamily):
    below = theta <= math.pi if family.allows_pi else theta < math.pi
    if not (theta > 0 and below):
        domain = "(0, pi]" if family.allows_pi else "(0, pi)"
        raise AngleOutOfDomain(f"{family.value} needs theta in {domain}, got {theta}")


def _check_lambda(lam: int):
    if lam not in (1, -1):
        raise ConfigError(f"lambda selector must be +1 or -1, got {lam}")


def _splitting(tt: TransitionTable, pair: TransitionPair, threshold: float) -> float:
    splitting = tt.splitting(pair)
    if abs(splitting) < threshold:
        raise DegenerateSplitting(
            f"|d{pair.value}| = {angular_to_mhz(abs(splitting)):.4g} MHz is below "
            f"{angular_to_mhz(threshold):.4g} MHz")
    return splitting


def _target(tt: TransitionTable, pair: TransitionPair, lam: int) -> tuple[float, float, float]:
    """(omega_target, omega_harmful, target dipole)."""
    w1, w2 = tt.frequencies(pair)
    d1, d2 = tt.dipole_pair(pair)
    return (w1, w2, d1) if lam == 1 else (w2, w1, d2)


def bandwidth_range(family: ProtocolFamily, theta: Optional[float] = None, orientation: int = 1) -> BandwidthRange:
    """Allowed sigma / |delta omega| intervals; orientation picks the off-resonant root."""
    if family in (ProtocolFamily.IQSS_2PI_RES, ProtocolFamily.OQSS_2PI_RES):
        return BandwidthRange(((0.0, math.inf),))
    if family is ProtocolFamily.IQSS_4PI_RES:
        return BandwidthRange(((0.0, 1.0 / (2.0 + SQRT7)), (1.0 / (SQRT7 - 2.0), math.inf)))
    if family is ProtocolFamily.OQSS_4PI_RES:
        return BandwidthRange(((0.0, 1.0 / SQRT3), (1.0 / SQRT3, math.inf)))
    if theta is None:
        raise ValueError("The off-resonant range depends on theta")
    quarter = math.tan(theta / 4.0)
    return BandwidthRange(((0.0, 0.5 / quarter if orientation > 0 else 0.5 * quarter),))


def analytic_diagonal(pair: TransitionPair, area_index: int, sigma: float, omega_p: float,
                      tt: TransitionTable) -> np.ndarray:
    """Diagonal of the ideal qubit-subspace evolution, |00>,|01>,|10>,|11> order."""
    w1, w2 = tt.frequencies(pair)
    f1, f2 = (gauss_2f1_unit(area_index, (1.0 - 1j * (omega_p - w) / sigma) / 2.0) for w in (w1, w2))
    if pair is TransitionPair.IQSS:
        blocks = (f1, np.conj(f1), f2, np.conj(f2))
    else:
        blocks = (1.0, f1, 1.0, f2)
    diagonal = np.empty(4, dtype=complex)
    for position, index in enumerate(block_order(tt.driven_qubit)):
        diagonal[index] = blocks[position]
    return diagonal


def analytic_propagator(spec: ProtocolSpec, tt: TransitionTable) -> np.ndarray:
    return np.diag(analytic_diagonal(spec.pair, spec.area_index, spec.sigma, spec.omega_p, tt))


def _resolve(family: ProtocolFamily, theta: float, lam: int, branch: Branch, sigma: float,
             omega_p: float, tt: TransitionTable, threshold: float, *, orientation: int = 1,
             **derived) -> ProtocolSpec:
    pair = family.pair
    splitting = tt.splitting(pair)
    if sigma <= threshold:
        raise DegenerateSplitting(
            f"{family.value} at theta={theta:.6g} needs sigma = {angular_to_mhz(sigma):.3g} MHz")
    allowed = bandwidth_range(family, theta, orientation)
    if not allowed.contains(sigma / abs(splitting)):
        raise BandwidthOutOfRange(
            f"sigma/|dw| = {sigma / abs(splitting):.6g} outside {allowed} for {family.value}")

    _, _, dipole = _target(tt, pair, lam)
    diagonal = analytic_diagonal(pair, family.area_index, sigma, omega_p, tt)
    spec = ProtocolSpec(
        family=family,
        theta=theta,
        lam=lam,
        branch=branch,
        sigma=sigma,
        omega_p=omega_p,
        area_index=family.area_index,
        bandwidth_range=allowed,
        splitting=splitting,
        target_dipole=dipole,
        driven_qubit=tt.driven_qubit,
        analytic_theta=diagonal_cphase_angle(diagonal),
        **derived,
    )
    logger.debug(
        f"{family.value} theta={theta:.6g} lam={lam:+d} {branch.value}: "
        f"sigma={angular_to_mhz(sigma):.6g} MHz, gate time {spec.gate_time:.4g} ns")
    if spec.mirrored:
        logger.debug(f"{family.value} theta={theta:.6g} {branch.value} realizes the mirror angle {spec.analytic_theta:.6g}")
    return spec


# ===========================================
# Resonant families
# ===========================================

def design_iqss_2pi(theta: float, tt: TransitionTable, lam: int = -1, branch: Branch = Branch.PLUS,
                    *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    """2pi pulse on an inner transition; PLUS gives sigma_1, MINUS sigma_2."""
    family = ProtocolFamily.IQSS_2PI_RES
    _check_theta(theta, family)
    _check_lambda(lam)
    dw = abs(_splitting(tt, family.pair, threshold))
    quarter = math.tan(theta / 4.0)
    sigma = dw / quarter if branch is Branch.PLUS else dw * quarter
    omega_t, _, _ = _target(tt, family.pair, lam)
    return _resolve(family, theta, lam, branch, sigma, omega_t, tt, threshold)


def design_iqss_4pi(theta: float, tt: TransitionTable, lam: int = -1, branch: Branch = Branch.PLUS,
                    *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    family = ProtocolFamily.IQSS_4PI_RES
    _check_theta(theta, family)
    _check_lambda(lam)
    dw = abs(_splitting(tt, family.pair, threshold))
    t = math.tan(theta / 4.0)
    sigma = dw * t / (math.sqrt(4.0 + 3.0 * t * t) + branch.sign * 2.0)
    omega_t, _, _ = _target(tt, family.pair, lam)
    return _resolve(family, theta, lam, branch, sigma, omega_t, tt, threshold)


def design_oqss_2pi_res(theta: float, tt: TransitionTable, lam: int = -1,
                        *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    family = ProtocolFamily.OQSS_2PI_RES
    _check_theta(theta, family)
    _check_lambda(lam)
    dw = abs(_splitting(tt, family.pair, threshold))
    sigma = dw / math.tan(theta / 2.0)
    omega_t, _, _ = _target(tt, family.pair, lam)
    return _resolve(family, theta, lam, Branch.PLUS, sigma, omega_t, tt, threshold)


def design_oqss_4pi_res(theta: float, tt: TransitionTable, lam: int = -1, branch: Branch = Branch.PLUS,
                        *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    family = ProtocolFamily.OQSS_4PI_RES
    _check_theta(theta, family)
    _check_lambda(lam)
    dw = abs(_splitting(tt, family.pair, threshold))
    t = math.tan(theta / 2.0)
    sigma = dw * t / (math.sqrt(4.0 + 3.0 * t * t) + branch.sign * 2.0)
    omega_t, _, _ = _target(tt, family.pair, lam)
    return _resolve(family, theta, lam, branch, sigma, omega_t, tt, threshold)


# ===========================================
# Off-resonant family
# ===========================================

def _offres_offset(theta: float, sigma: float, dw: float, orientation: int) -> float:
    """Magnitude of the pulse-frequency offset from the outer-transition midpoint."""
    half_sin = math.sin(theta / 2.0)
    kappa = orientation * math.cos(theta / 2.0) - 2.0 * half_sin * sigma / dw
    return dw / (2.0 * half_sin) * math.sqrt(max(0.0, 1.0 - kappa * kappa))


def offres_orientation(theta: float, tt: TransitionTable) -> int:
    """
    Which root of the angle condition realizes +theta on this table.

    Both roots satisfy cos(gap) = cos(theta); +1 is the one whose phase gap
    has magnitude theta, -1 the one with magnitude 2 pi - theta. Which of the
    two comes out as +theta rather than its mirror depends on the sign of the
    outer splitting, so it is read off the analytic diagonal.
    """
    dw = abs(tt.delta_omega_o)
    if dw == 0.0:
        return 1
    quarter = math.tan(theta / 4.0)
    sigma = 0.25 * dw * min(quarter, 1.0 / quarter)
    omega_p = 0.5 * (tt.omega_o1 + tt.omega_o2) + _offres_offset(theta, sigma, dw, 1)
    realized = diagonal_cphase_angle(analytic_diagonal(TransitionPair.OQSS, 1, sigma, omega_p, tt))
    return 1 if abs(wrap_angle(realized - theta)) < 1e-6 else -1


def offres_sigma_max(theta: float, tt: TransitionTable, orientation: Optional[int] = None) -> float:
    """Largest bandwidth with a real off-resonant pulse frequency realizing +theta."""
    orientation = offres_orientation(theta, tt) if orientation is None else orientation
    quarter = math.tan(theta / 4.0)
    return abs(tt.delta_omega_o) / 2.0 * (1.0 / quarter if orientation > 0 else quarter)


def _recover_delta_theta(theta: float, sigma: float, dw: float, orientation: int = 1) -> float:
    """Invert sigma(theta, delta_theta) on (|gap|, 2 pi)."""
    half_sin = math.sin(theta / 2.0)
    half_cos = orientation * math.cos(theta / 2.0)
    gap = theta if orientation > 0 else 2.0 * math.pi - theta

    def residual(delta_theta):
        return dw * (half_cos - math.cos(delta_theta / 2.0)) / (2.0 * half_sin) - sigma

    return brentq(residual, gap, 2.0 * math.pi, xtol=1e-12)


def design_oqss_2pi_offres(theta: float, tt: TransitionTable, lam: int, sigma: float,
                           *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    """
    Detuned 2pi pulse on the outer transitions for a requested bandwidth.

    lam picks the target transition; the pulse frequency sits on the target's
    side of the midpoint of the two outer transitions. The root of the angle
    condition is chosen so the gate realizes +theta for either lam.
    """
    family = ProtocolFamily.OQSS_2PI_OFFRES
    _check_theta(theta, family)
    _check_lambda(lam)
    _splitting(tt, family.pair, threshold)
    dw = abs(tt.delta_omega_o)
    orientation = offres_orientation(theta, tt)
    sigma_max = offres_sigma_max(theta, tt, orientation)
    if not 0.0 < sigma < sigma_max:
        raise BandwidthOutOfRange(
            f"sigma = {angular_to_mhz(sigma):.6g} MHz outside (0, {angular_to_mhz(sigma_max):.6g}) MHz")

    omega_t, omega_h, _ = _target(tt, family.pair, lam)
    toward_target = math.copysign(1.0, omega_t - omega_h)
    omega_p = 0.5 * (omega_t + omega_h) + toward_target * _offres_offset(theta, sigma, dw, orientation)

    # Unwrapped gap of the chosen root; equals theta modulo 2 pi.
    gap = theta if orientation > 0 else theta - 2.0 * math.pi
    delta_theta = toward_target * _recover_delta_theta(theta, sigma, dw, orientation)
    return _resolve(
        family, theta, lam, Branch.PLUS, sigma, omega_p, tt, threshold,
        orientation=orientation,
        delta_theta=delta_theta,
        theta1=0.5 * (gap + delta_theta),
        theta2=0.5 * (gap - delta_theta),
    )


# ===========================================
# Dispatch and verification
# ===========================================

def design(family: ProtocolFamily, theta: float, tt: TransitionTable, lam: int = -1,
           branch: Branch = Branch.PLUS, sigma: Optional[float] = None,
           *, threshold: float = DEGENERATE_SPLITTING) -> ProtocolSpec:
    if family is ProtocolFamily.IQSS_2PI_RES:
        return design_iqss_2pi(theta, tt, lam, branch, threshold=threshold)
    if family is ProtocolFamily.IQSS_4PI_RES:
        return design_iqss_4pi(theta, tt, lam, branch, threshold=threshold)
    if family is ProtocolFamily.OQSS_2PI_RES:
        return design_oqss_2pi_res(theta, tt, lam, threshold=threshold)
    if family is ProtocolFamily.OQSS_4PI_RES:
        return design_oqss_4pi_res(theta, tt, lam, branch, threshold=threshold)
    if sigma is None:
        raise ConfigError("OQSS_2PI_OFFRES needs a requested bandwidth")
    return design_oqss_2pi_offres(theta, tt, lam, sigma, threshold=threshold)


def verify_root_equation(spec: ProtocolSpec, tt: TransitionTable) -> float:
    """
    Residual of the protocol's defining angle condition.

    Resonant specs use the single-parameter form in the harmful detuning;
    anything else (the off-resonant family, or a protocol whose pulse frequency
    was moved) uses the two-detuning angle condition of its transition pair.
    The distance between the implied propagator's invariants and the CPHASE
    target is folded in, so the larger of the two is returned.
    """
    a, sigma = spec.area_index, spec.sigma
    omega_t, omega_h, _ = _target(tt, spec.pair, spec.lam)
    cos_theta = math.cos(spec.theta)

    if spec.family.resonant and math.isclose(spec.omega_p, omega_t, rel_tol=0.0, abs_tol=1e-12 * sigma):
        delta_h = spec.omega_p - omega_h
        if spec.pair is TransitionPair.IQSS:
            alpha = gauss_2f1_unit(a, (sigma - 1j * delta_h) / (2.0 * sigma))
            rhs = (alpha ** 2 + np.conj(alpha) ** 2).real / (2.0 * abs(alpha) ** 2)
        else:
            alpha = gauss_2f1_unit(a, (sigma + 1j * delta_h) / (2.0 * sigma))
            rhs = ((-1) ** a * (1.0 + alpha ** 2) / (2.0 * alpha)).real
    else:
        w1, w2 = tt.frequencies(spec.pair)
        gap = phase_phi(spec.omega_p - w1, sigma, a) - phase_phi(spec.omega_p - w2, sigma, a)
        rhs = math.cos(2.0 * gap) if spec.pair is TransitionPair.IQSS else math.cos(gap)

    root_residual = abs(cos_theta - rhs)
    implied = analytic_propagator(spec, tt)
    invariant_residual = invariants_distance(local_invariants(implied), cphase_target_invariants(spec.theta))
    return max(root_residual, invariant_residual)
