# Bounded simplex search, protocol refinement and square-pulse X rotations
import math

import numpy as np
import pytest

from sechgate.errors import AngleOutOfDomain, ConfigError, InfeasibleConstraint
from sechgate.models import SimulationResult, SquareSequence
from sechgate.optimize import (
    block_unitary,
    bounded_simplex_search,
    design_x_rotation,
    optimize_block_sequence,
    project_to_constraint,
    refine_protocol,
    x_rotation,
    x_rotation_target,
)
from sechgate.propagator import gate_fidelity
from sechgate.protocol_designer import design_iqss_2pi
from sechgate.tests.conftest import synthetic_table


def quadratic(x):
    return (x[0] - 0.3) ** 2 + (x[1] + 0.2) ** 2


# ── Simplex search ────────────────────────────────────────────────────────────

def test_finds_quadratic_minimum():
    search = bounded_simplex_search(quadratic, [0.8, 0.8], [(-1, 1), (-1, 1)], 1000)
    assert search.value < 1e-8
    np.testing.assert_allclose(search.x, [0.3, -0.2], atol=1e-3)
    assert not search.exhausted


def test_budget_is_hard():
    search = bounded_simplex_search(quadratic, [0.8, 0.8], [(-1, 1), (-1, 1)], 10)
    assert search.evaluations <= 10
    assert search.exhausted


def test_best_so_far_never_increases():
    search = bounded_simplex_search(quadratic, [-0.9, 0.9], [(-1, 1), (-1, 1)], 60)
    assert search.history[0] == pytest.approx(quadratic([-0.9, 0.9]))
    assert all(b <= a for a, b in zip(search.history, search.history[1:]))
    assert search.value == search.history[-1]


def test_start_at_optimum_is_kept():
    search = bounded_simplex_search(lambda x: float(np.sum(x ** 2)), [0.0, 0.0], [(-1, 1), (-1, 1)], 50)
    assert search.value == 0.0
    np.testing.assert_array_equal(search.x, [0.0, 0.0])


def test_search_stays_in_bounds():
    search = bounded_simplex_search(lambda x: -float(np.sum(x)), [0.0, 0.0], [(-1, 0.5), (-1, 0.25)], 200)
    assert search.x[0] <= 0.5 and search.x[1] <= 0.25
    assert search.value == pytest.approx(-0.75, abs=1e-3)


# ── Protocol refinement ───────────────────────────────────────────────────────

def test_refinement_budget_floor(reference_device, synthetic_iqss):
    spec = design_iqss_2pi(math.pi / 2, synthetic_iqss)
    with pytest.raises(ConfigError):
        refine_protocol(spec, reference_device, budget=49)


def _fake_result(score):
    return SimulationResult(np.eye(4), np.eye(4), 0.0, score, score, 1.0, 0.0, 10.0)


def test_refinement_reuses_initial_simulation(monkeypatch, reference_device, synthetic_iqss):
    spec = design_iqss_2pi(math.pi / 2, synthetic_iqss)
    calls = []

    def fake_simulate(spec_, p, *, settings, sigma, omega_p, amplitude_scale):
        calls.append((sigma, omega_p, amplitude_scale))
        return _fake_result(1.0 - (sigma / spec.sigma - 1.02) ** 2)

    monkeypatch.setattr("sechgate.optimize.simulate_spec", fake_simulate)
    report = refine_protocol(spec, reference_device, budget=50, initial_result=_fake_result(0.99))

    assert (spec.sigma, spec.omega_p, 1.0) not in calls
    assert len(calls) == report.evaluations - 1
    assert report.initial_fidelity == pytest.approx(0.99)
    assert report.refined_fidelity > 0.999
    assert report.refined_params[0] == pytest.approx(1.02 * spec.sigma, rel=5e-3)
    assert all(abs(omega_p - spec.omega_p) <= 0.05 * spec.sigma * (1 + 1e-12) for _, omega_p, _ in calls)


def test_refinement_without_initial_result_simulates_start(monkeypatch, reference_device, synthetic_iqss):
    spec = design_iqss_2pi(math.pi / 2, synthetic_iqss)
    calls = []

    def fake_simulate(spec_, p, *, settings, sigma, omega_p, amplitude_scale):
        calls.append((sigma, omega_p, amplitude_scale))
        return _fake_result(0.9)

    monkeypatch.setattr("sechgate.optimize.simulate_spec", fake_simulate)
    report = refine_protocol(spec, reference_device, budget=50)
    assert calls[0] == (spec.sigma, spec.omega_p, 1.0)
    assert report.refined_fidelity == report.initial_fidelity == pytest.approx(0.9)


@pytest.mark.slow
def test_refinement_never_worsens(reference_device, iqss_table):
    spec = design_iqss_2pi(math.pi / 2, iqss_table, lam=-1)
    report = refine_protocol(spec, reference_device, budget=60)
    assert report.refined_fidelity >= report.initial_fidelity
    assert report.refined_fidelity >= 0.9998
    assert report.evaluations <= 60
    assert report.refined_result is not None


# ── Two-block model ───────────────────────────────────────────────────────────

def test_x_rotation_target_layout():
    rx = x_rotation(0.7)
    np.testing.assert_allclose(x_rotation_target(0.7, 2), np.kron(np.eye(2), rx))
    np.testing.assert_allclose(x_rotation_target(0.7, 1), np.kron(rx, np.eye(2)))


@pytest.mark.parametrize("theta", [math.pi / 3, math.pi])
def test_idle_sequence_is_identity(theta):
    tt = synthetic_table(dw_i_mhz=0.0)
    sequence = SquareSequence((10.0,), (0.0,), (tt.omega_i1,))
    u = block_unitary(sequence, tt)
    np.testing.assert_allclose(u, np.eye(4), atol=1e-12)
    expected = (4 + 16 * math.cos(theta / 2) ** 2) / 20
    assert gate_fidelity(x_rotation_target(theta), u) == pytest.approx(expected)


def test_resonant_pulse_rotates_by_twice_the_area():
    tt = synthetic_table(dw_i_mhz=0.0)
    tau, amplitude = 10.0, 0.05
    sequence = SquareSequence((tau,), (amplitude,), (tt.omega_i1,))
    np.testing.assert_allclose(block_unitary(sequence, tt), x_rotation_target(2 * amplitude * tau), atol=1e-12)


def test_block_unitary_is_unitary(synthetic_iqss):
    sequence = SquareSequence((4.0, 7.5), (0.08, -0.05), (synthetic_iqss.omega_i1,) * 2)
    u = block_unitary(sequence, synthetic_iqss)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_projection_meets_area():
    taus = np.array([3.0, 5.0, 2.0])
    amplitudes = project_to_constraint(taus, np.array([0.02, -0.07, 0.01]), math.pi / 2, 0.95)
    assert 0.95 * np.sum(taus * np.abs(amplitudes)) == pytest.approx(math.pi / 4, abs=1e-12)
    assert amplitudes[1] < 0


def test_projection_of_zero_area():
    with pytest.raises(InfeasibleConstraint):
        project_to_constraint(np.array([3.0]), np.array([0.0]), 1.0, 1.0)


# ── Block-sequence optimisation ───────────────────────────────────────────────

def test_single_pi_pulse_sits_at_the_cap(synthetic_iqss):
    block = optimize_block_sequence(math.pi, 1, synthetic_iqss, restarts=8)
    # 20 MHz cap: the shortest pi pulse lasts 12.5 ns.
    assert 12.5 - 1e-9 <= block.sequence.total_time < 13.5
    assert block.sequence.pulse_area(1.0) == pytest.approx(math.pi / 2, abs=1e-10)
    assert block.fidelity > 0.98


def test_block_search_is_deterministic(synthetic_iqss):
    first = optimize_block_sequence(math.pi / 2, 2, synthetic_iqss, restarts=4, local_budget=150, seed=3)
    second = optimize_block_sequence(math.pi / 2, 2, synthetic_iqss, restarts=4, local_budget=150, seed=3)
    assert first.sequence == second.sequence
    assert first.restart == second.restart
    assert first.sequence.pulse_area(1.0) == pytest.approx(math.pi / 4, abs=1e-10)


def test_unreachable_area(synthetic_iqss):
    with pytest.raises(InfeasibleConstraint):
        optimize_block_sequence(math.pi, 1, synthetic_iqss, restarts=2, tau_bounds=(1.0, 10.0))


@pytest.mark.parametrize("theta", [0.0, -1.0, 3.5])
def test_x_rotation_angle_domain(theta, synthetic_iqss):
    with pytest.raises(AngleOutOfDomain):
        optimize_block_sequence(theta, 2, synthetic_iqss)


@pytest.mark.parametrize("n", [0, 7])
def test_pulse_count_limits(n, synthetic_iqss):
    with pytest.raises(ConfigError):
        optimize_block_sequence(math.pi / 2, n, synthetic_iqss)


@pytest.mark.slow
def test_x_rotation_on_reference_device(reference_device, iqss_table):
    report = design_x_rotation(
        math.pi / 2, 2, iqss_table, reference_device, restarts=4, local_budget=200, sim_budget=3)
    assert report.sequence.n == 2
    assert report.sequence.pulse_area(iqss_table.dipoles["I1"]) == pytest.approx(math.pi / 4, abs=1e-10)
    assert report.simulation_fidelity <= 1 + 1e-9
    assert report.purity <= 1 + 1e-9
    assert report.duration == pytest.approx(report.sequence.total_time)


@pytest.mark.slow
@pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, math.pi])
def test_x_rotation_acceptance(theta, reference_device, iqss_table):
    report = design_x_rotation(theta, 4, iqss_table, reference_device, restarts=8, local_budget=300, sim_budget=20)
    assert report.simulation_fidelity >= 0.99
    assert report.purity >= report.simulation_fidelity - 1e-12
    assert report.duration <= 50.0
    area = report.sequence.pulse_area(iqss_table.dipoles["I1"])
    assert area == pytest.approx(theta / 2, abs=1e-10)


@pytest.mark.slow
def test_x_rotation_is_deterministic(reference_device, iqss_table):
    args = (math.pi / 2, 2, iqss_table, reference_device)
    options = dict(restarts=4, local_budget=150, sim_budget=0, seed=11)
    first = design_x_rotation(*args, **options)
    second = design_x_rotation(*args, **options)
    assert first.sequence == second.sequence
    assert first.protocol_fidelity == second.protocol_fidelity
    assert first.simulation_fidelity == second.simulation_fidelity
