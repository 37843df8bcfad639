"""
Analytic-versus-numeric self checks.

Each check returns a status dict ``{"check", "status", "detail"}`` with
status ``"ok"`` or ``"failed"``; ``run_selfcheck`` runs them all.
"""

import logging
import math

import numpy as np
from scipy.stats import unitary_group

from sechgate.device_model import transition_table
from sechgate.errors import SechGateError
from sechgate.invariants import cphase_target_invariants, invariants_distance, local_invariants
from sechgate.models import (
    Branch,
    DeviceParams,
    ProtocolFamily,
    TransitionPair,
    angular_to_mhz,
)
from sechgate.protocol_designer import design, offres_sigma_max, verify_root_equation
from sechgate.sech_engine import integrate_two_level, sech_final_propagator

logger = logging.getLogger(__name__)

REFERENCE_SPLITTINGS_MHZ = {"dwI": 3.23, "dwO": -11.07}
SPLITTING_TOL_MHZ = 0.05
ORACLE_TOL = 1e-6
ROOT_TOL = 1e-10
INVARIANT_TOL = 1e-9
ROOT_ANGLES = 32


def _status(name: str, ok: bool, detail: str) -> dict:
    return {"check": name, "status": "ok" if ok else "failed", "detail": detail}


def check_dressed_splittings() -> dict:
    """Published dressed splittings of the reference device."""
    try:
        _, tt = transition_table(DeviceParams.reference_defaults())
    except SechGateError as e:
        return _status("dressed_splittings", False, str(e))
    measured = {"dwI": angular_to_mhz(tt.delta_omega_i), "dwO": angular_to_mhz(tt.delta_omega_o)}
    ok = all(abs(measured[k] - v) <= SPLITTING_TOL_MHZ for k, v in REFERENCE_SPLITTINGS_MHZ.items())
    return _status("dressed_splittings", ok, f"dwI={measured['dwI']:.4f} MHz, dwO={measured['dwO']:.4f} MHz")


def check_two_level_oracle() -> dict:
    """Integrated sech evolution against the closed-form propagator."""
    worst = 0.0
    for a in (1, 2):
        for ratio in (0.0, 0.5, 1.0, 3.0, 10.0):
            sigma = 1.0
            numeric = integrate_two_level(ratio * sigma, sigma, a)
            exact = sech_final_propagator(ratio * sigma, sigma, a)
            worst = max(worst, float(np.max(np.abs(numeric - exact))))
    return _status("two_level_oracle", worst < ORACLE_TOL, f"max deviation {worst:.2e}")


def root_angles(count: int = ROOT_ANGLES) -> list[float]:
    """Angles strictly inside (0, pi)."""
    return [math.pi * (k + 1) / (count + 1) for k in range(count)]


def check_root_equations() -> dict:
    """Every family and branch over the angle grid, on the reference device."""
    try:
        _, tt_i = transition_table(DeviceParams.reference_defaults(), pair=TransitionPair.IQSS)
    except SechGateError as e:
        return _status("root_equations", False, str(e))
    tt_o = tt_i.for_pair(TransitionPair.OQSS)

    worst, failures = 0.0, []
    for family in ProtocolFamily:
        tt = tt_i if family.pair is TransitionPair.IQSS else tt_o
        branches = (Branch.PLUS,) if family in (ProtocolFamily.OQSS_2PI_RES, ProtocolFamily.OQSS_2PI_OFFRES) \
            else (Branch.PLUS, Branch.MINUS)
        for branch in branches:
            for theta in root_angles():
                sigma = None if family.resonant else 0.5 * offres_sigma_max(theta, tt)
                try:
                    spec = design(family, theta, tt, -1, branch, sigma)
                    worst = max(worst, verify_root_equation(spec, tt))
                except SechGateError as e:
                    failures.append(f"{family.value}/{branch.value} theta={theta:.4g}: {e}")
    ok = not failures and worst < ROOT_TOL
    detail = f"max residual {worst:.2e}" if not failures else failures[0]
    return _status("root_equations", ok, detail)


def check_invariants(samples: int = 200, seed: int = 7) -> dict:
    """Known gates and invariance under random local dressings."""
    identity = local_invariants(np.eye(4))
    cz = local_invariants(np.diag([1, 1, 1, -1]).astype(complex))
    errors = [
        invariants_distance(identity, cphase_target_invariants(0.0)),
        invariants_distance(cz, cphase_target_invariants(math.pi)),
    ]
    gate = np.diag([1, 1, 1, np.exp(1j * math.pi / 3)])
    reference = local_invariants(gate)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        k1, k2, k3, k4 = (unitary_group.rvs(2, random_state=rng) for _ in range(4))
        dressed = np.kron(k1, k2) @ gate @ np.kron(k3, k4)
        errors.append(invariants_distance(local_invariants(dressed), reference))
    worst = max(errors)
    return _status("invariants", worst < INVARIANT_TOL, f"max distance {worst:.2e} over {samples} dressings")


CHECKS = (check_dressed_splittings, check_two_level_oracle, check_root_equations, check_invariants)


def run_selfcheck() -> list[dict]:
    results = []
    for check in CHECKS:
        result = check()
        level = logging.INFO if result["status"] == "ok" else logging.ERROR
        logger.log(level, f"{result['check']}: {result['status']} ({result['detail']})")
        results.append(result)
    return results
