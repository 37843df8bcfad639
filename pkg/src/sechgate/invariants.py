"""
Local invariants of two-qubit gates.

Two 4x4 unitaries are equal up to single-qubit operations iff their
(G1, G2, G3) coincide. Basis order is |00>,|01>,|10>,|11> with qubit 1 the
first tensor factor.
"""

import logging
import math

import numpy as np
import scipy.linalg

from sechgate.errors import NonUnitaryInput, NumericalError
from sechgate.models import LocalInvariants, wrap_angle

logger = logging.getLogger(__name__)

MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
) / math.sqrt(2.0)


def unitarity_deviation(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def unitarize(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Closest unitary (polar factor) and the deviation it removed."""
    u = np.asarray(u, dtype=complex)
    w, _ = scipy.linalg.polar(u)
    return w, unitarity_deviation(u)


def local_invariants(u: np.ndarray, *, tol: float = 1e-8) -> LocalInvariants:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"Expected a 4x4 matrix, got {u.shape}")
    deviation = unitarity_deviation(u)
    if deviation > tol:
        raise NonUnitaryInput(f"Unitarity deviation {deviation:.2e} exceeds {tol:.0e}")
    det = np.linalg.det(u)
    if abs(det) < 1e-12:
        raise NonUnitaryInput("Singular matrix")

    um = MAGIC.conj().T @ u @ MAGIC
    m = um.T @ um
    tr_squared = np.trace(m) ** 2
    g12 = tr_squared / (16.0 * det)
    g3 = (tr_squared - np.trace(m @ m)) / (4.0 * det)
    if abs(g3.imag) > 1e-10 + 10.0 * deviation:
        raise NumericalError(f"G3 has imaginary residue {g3.imag:.2e}")
    return LocalInvariants(float(g12.real), float(g12.imag), float(g3.real))


def cphase_target_invariants(theta: float) -> LocalInvariants:
    return LocalInvariants(math.cos(theta / 2.0) ** 2, 0.0, 2.0 + math.cos(theta))


def invariants_distance(a: LocalInvariants, b: LocalInvariants) -> float:
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def diagonal_cphase_angle(diagonal) -> float:
    """phi00 - phi01 - phi10 + phi11 of four diagonal entries, wrapped to (-pi, pi]."""
    d = np.asarray(diagonal, dtype=complex)
    return wrap_angle(np.angle(d[0] * np.conj(d[1]) * np.conj(d[2]) * d[3]))
