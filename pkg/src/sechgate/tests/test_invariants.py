import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from sechgate.errors import NonUnitaryInput
from sechgate.invariants import (
    cphase_target_invariants,
    diagonal_cphase_angle,
    invariants_distance,
    local_invariants,
    unitarity_deviation,
    unitarize,
)
from sechgate.sech_engine import gauss_2f1_unit

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def cphase(theta):
    return np.diag([1, 1, 1, np.exp(1j * theta)])


def test_identity():
    g = local_invariants(np.eye(4))
    np.testing.assert_allclose(g.as_array(), [1.0, 0.0, 3.0], atol=1e-12)


def test_cz_and_cnot_are_equivalent():
    cz = local_invariants(cphase(math.pi))
    np.testing.assert_allclose(cz.as_array(), [0.0, 0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(local_invariants(CNOT).as_array(), cz.as_array(), atol=1e-12)


def test_swap():
    np.testing.assert_allclose(local_invariants(SWAP).as_array(), [-1.0, 0.0, -3.0], atol=1e-12)


@pytest.mark.parametrize("theta", np.linspace(0.1, math.pi, 7))
def test_cphase_closed_form(theta):
    distance = invariants_distance(local_invariants(cphase(theta)), cphase_target_invariants(theta))
    assert distance < 1e-12


def test_local_dressings_leave_invariants_unchanged():
    gate = cphase(math.pi / 3)
    reference = local_invariants(gate)
    rng = np.random.default_rng(11)
    for _ in range(200):
        k1, k2, k3, k4 = (unitary_group.rvs(2, random_state=rng) for _ in range(4))
        dressed = np.kron(k1, k2) @ gate @ np.kron(k3, k4)
        assert invariants_distance(local_invariants(dressed), reference) < 1e-9


def test_global_phase_is_invisible():
    u = unitary_group.rvs(4, random_state=3)
    a, b = local_invariants(u), local_invariants(np.exp(0.7j) * u)
    assert invariants_distance(a, b) < 1e-12


def test_mirror_angle_is_locally_equivalent():
    a, b = local_invariants(cphase(0.9)), local_invariants(cphase(-0.9))
    assert invariants_distance(a, b) < 1e-12


def test_non_unitary_rejected():
    with pytest.raises(NonUnitaryInput):
        local_invariants(0.9 * np.eye(4))


def test_wrong_shape_rejected():
    with pytest.raises(ValueError):
        local_invariants(np.eye(2))


def test_unitarize_restores_unitarity():
    u = unitary_group.rvs(4, random_state=5)
    leaky = 0.97 * u + 0.01 * np.ones((4, 4))
    w, deviation = unitarize(leaky)
    assert deviation > 1e-3
    assert unitarity_deviation(w) < 1e-12


def test_diagonal_angle():
    assert diagonal_cphase_angle([1, 1, 1, np.exp(0.4j)]) == pytest.approx(0.4)
    phases = np.exp(1j * np.array([0.3, -1.2, 2.0, 0.3 + 1.2 - 2.0 + 1.1]))
    assert diagonal_cphase_angle(phases) == pytest.approx(1.1)
    assert diagonal_cphase_angle([1, 1, 1, -1]) == pytest.approx(math.pi)


@pytest.mark.parametrize("seed", range(20))
def test_outer_phase_ratio_invariants(seed):
    rng = np.random.default_rng(seed)
    delta1, delta2 = rng.uniform(-3.0, 3.0, size=2)
    sigma = rng.uniform(0.05, 1.0)
    f1 = gauss_2f1_unit(1, (1.0 - 1j * delta1 / sigma) / 2.0)
    f2 = gauss_2f1_unit(1, (1.0 - 1j * delta2 / sigma) / 2.0)
    gamma = f1 / f2 + f2 / f1

    expected = [((4.0 + gamma + np.conj(gamma)) / 8.0).real, 0.0, (2.0 + gamma / 2.0).real]
    computed = local_invariants(np.diag([1.0, f1, 1.0, f2])).as_array()
    np.testing.assert_allclose(computed, expected, atol=1e-10)
    assert abs(gamma.imag) < 1e-12
