# Batch drivers: grids, run configuration and row assembly
import math
from dataclasses import replace

import pytest

from sechgate.config import TestingConfig
from sechgate.errors import BandwidthOutOfRange, ConfigError
from sechgate.models import ProtocolFamily
from sechgate.sweeps import (
    RunConfig,
    coupling_grid,
    derive_protocols,
    map_rows,
    parse_grid,
    sweep_angle,
    sweep_coupling,
    sweep_x_rotation,
)


@pytest.fixture()
def run_config(device_file):
    return RunConfig.from_config(TestingConfig, device_config=device_file)


# ── Grids ─────────────────────────────────────────────────────────────────────

def test_parse_grid():
    assert parse_grid("0.25:1:4") == pytest.approx([0.25, 0.5, 0.75, 1.0])
    assert parse_grid("0.5:1:2", unit=math.pi) == pytest.approx([math.pi / 2, math.pi])
    assert parse_grid("1:1:1") == [1.0]
    assert parse_grid("0.25:0.5:0") == []


@pytest.mark.parametrize("text", ["1:2", "a:b:c", "0:1:2.5", "0:1:-1", ""])
def test_bad_grid(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


def test_coupling_grid_range():
    assert coupling_grid(RunConfig(device_config="", coupling_grid="30:180:2")) == [30.0, 180.0]
    with pytest.raises(ConfigError):
        coupling_grid(RunConfig(device_config="", coupling_grid="20:100:3"))


# ── Run configuration ─────────────────────────────────────────────────────────

def test_run_config_from_testing(run_config):
    assert run_config.workers == 1
    assert run_config.refine is False
    assert run_config.tau_bounds == (1.0, 15.0)
    assert run_config.lambdas == (1, -1)


def test_none_overrides_are_ignored(device_file):
    cfg = RunConfig.from_config(TestingConfig, device_config=device_file, seed=None, workers=3, lam=-1)
    assert cfg.seed == TestingConfig.SEED
    assert cfg.workers == 3
    assert cfg.lambdas == (-1,)


def test_level_overrides(device_file):
    cfg = RunConfig.from_config(TestingConfig, device_config=device_file, transmon_levels=5)
    p = cfg.device()
    assert p.transmon_levels == 5
    assert p.cavity_levels == 3


def test_map_rows_keeps_order():
    values = [-4, 3, -2, 1, 0]
    assert map_rows(abs, values, 1) == [4, 3, 2, 1, 0]
    assert map_rows(abs, values, 2) == [4, 3, 2, 1, 0]


# ── derive ────────────────────────────────────────────────────────────────────

def test_derive_rows(run_config):
    cfg = replace(run_config, theta_grid="0.25:0.75:3")
    rows = derive_protocols(cfg)
    assert len(rows) == 6
    assert [row["lambda"] for row in rows] == [1, 1, 1, -1, -1, -1]
    for row in rows:
        assert row["residual"] < 1e-10
        assert row["gate_time_ns"] == pytest.approx(10.0 / (2 * math.pi * row["sigma_mhz"] * 1e-3))
        assert row["family"] == "IQSS_2PI_RES"


def test_derive_offres_default_fractions(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, family=ProtocolFamily.OQSS_2PI_OFFRES,
        theta_grid="0.5:0.5:1", lam=1)
    rows = derive_protocols(cfg)
    assert len(rows) == 3
    sigmas = [row["sigma_mhz"] for row in rows]
    assert sigmas[1] == pytest.approx(2 * sigmas[0])
    assert sigmas[2] == pytest.approx(3 * sigmas[0])


def test_derive_propagates_domain_errors(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, family=ProtocolFamily.OQSS_2PI_OFFRES,
        theta_grid="0.5:0.5:1", sigma_mhz=1000.0)
    with pytest.raises(BandwidthOutOfRange):
        derive_protocols(cfg)


# ── Sweeps ────────────────────────────────────────────────────────────────────

def test_long_gates_are_skipped(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, theta_grid="0.5:0.5:1", lam=-1, max_gate_time_ns=1.0)
    (row,) = sweep_angle(cfg)
    assert row["error"].startswith("skipped")
    assert "fidelity" not in row
    assert row["gate_time_ns"] > 1.0


def test_row_errors_do_not_abort(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, family=ProtocolFamily.OQSS_4PI_RES,
        theta_grid="1:1:1", lam=1)
    (row,) = sweep_angle(cfg)
    assert row["error"].startswith("AngleOutOfDomain")
    assert row["theta_req"] == pytest.approx(math.pi)


def test_coupling_sweep_shortens_gates(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, theta_grid="0.5:0.5:1", lam=-1,
        coupling_grid="130:180:3", max_gate_time_ns=1.0)
    rows = sweep_coupling(cfg)
    assert [row["coupling_mhz"] for row in rows] == [130.0, 155.0, 180.0]
    assert all(row["error"].startswith("skipped") for row in rows)
    times = [row["gate_time_ns"] for row in rows]
    assert times[0] > times[1] > times[2]


def test_empty_grids(run_config):
    empty = replace(run_config, theta_grid="0.25:0.5:0")
    assert sweep_angle(empty) == []
    assert sweep_x_rotation(empty) == []


def test_x_rotation_row_errors(device_file):
    cfg = RunConfig.from_config(
        TestingConfig, device_config=device_file, theta_grid="1:1:1", pulses=1, tau_bounds=(1.0, 10.0))
    (row,) = sweep_x_rotation(cfg)
    assert row["error"].startswith("InfeasibleConstraint")
    assert row["N"] == 1


@pytest.mark.slow
def test_single_angle_sweep(device_file):
    cfg = RunConfig.from_config(TestingConfig, device_config=device_file, theta_grid="0.5:0.5:1", lam=-1)
    (row,) = sweep_angle(cfg)
    assert row["error"] == ""
    assert row["fidelity_z_corrected"] >= 0.999
    assert row["leakage"] == pytest.approx(1 - row["purity"])
