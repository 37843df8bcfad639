"""
Batch drivers behind the command line: derive, angle sweep, coupling sweep
and single-qubit X-rotation sweep.

Rows run on a bounded process pool; ``Executor.map`` keeps input order, so
the written output is independent of the worker count.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from sechgate.device_model import load_device_params, transition_table
from sechgate.errors import ConfigError, SechGateError
from sechgate.models import (
    Branch,
    DeviceParams,
    ProtocolFamily,
    TransitionPair,
    angular_to_mhz,
    mhz_to_angular,
)
from sechgate.optimize import design_x_rotation, refine_protocol
from sechgate.propagator import IntegratorSettings, simulate_spec
from sechgate.protocol_designer import design, offres_sigma_max, verify_root_equation

logger = logging.getLogger(__name__)

DERIVE_COLUMNS = (
    "family", "theta_rad", "lambda", "branch", "sigma_mhz", "pulse_freq_ghz", "area_index",
    "gate_time_ns", "bandwidth_range", "residual",
)
SWEEP_COLUMNS = (
    "theta_req", "theta_realized", "fidelity", "fidelity_z_corrected", "purity", "leakage",
    "gate_time_ns", "family", "lambda", "sigma_mhz", "pulse_freq_ghz", "error",
)
COUPLING_COLUMNS = ("coupling_mhz",) + SWEEP_COLUMNS
XROT_COLUMNS = ("theta", "N", "duration_ns", "protocol_fidelity", "simulation_fidelity", "purity", "error")

COUPLING_RANGE_MHZ = (30.0, 180.0)


# ===========================================
# Run configuration
# ===========================================

@dataclass(frozen=True)
class RunConfig:
    """Everything one command needs, merged from the config class and CLI flags."""

    device_config: str
    family: ProtocolFamily = ProtocolFamily.IQSS_2PI_RES
    theta_grid: str = "0.125:0.5:4"
    lam: Optional[int] = None  # None runs both transition choices
    branch: Branch = Branch.PLUS
    sigma_mhz: Optional[float] = None
    coupling_grid: str = "60:160:6"
    out: Optional[str] = None
    gnuplot: Optional[str] = None
    seed: int = 7
    max_gate_time_ns: float = 200.0
    workers: int = 1
    refine: bool = True
    refine_budget: int = 60
    refine_window: float = 0.05
    sigma_fractions: tuple[float, ...] = (0.25, 0.5, 0.75)
    degenerate_splitting_mhz: float = 0.01
    pulses: int = 4
    xrot_restarts: int = 32
    xrot_local_budget: int = 400
    xrot_sim_budget: int = 40
    tau_bounds: tuple[float, float] = (1.0, 15.0)
    amplitude_cap_mhz: float = 20.0
    transmon_levels: Optional[int] = None
    cavity_levels: Optional[int] = None
    settings: IntegratorSettings = IntegratorSettings()

    @classmethod
    def from_config(cls, config, **overrides) -> "RunConfig":
        base = cls(
            device_config=config.DEVICE_CONFIG,
            theta_grid=config.THETA_GRID,
            coupling_grid=config.COUPLING_GRID,
            seed=config.SEED,
            max_gate_time_ns=config.MAX_GATE_TIME_NS,
            workers=config.SWEEP_WORKERS,
            refine=config.REFINE,
            refine_budget=config.REFINE_BUDGET,
            refine_window=config.REFINE_WINDOW,
            sigma_fractions=tuple(config.OFFRES_SIGMA_FRACTIONS),
            degenerate_splitting_mhz=config.DEGENERATE_SPLITTING_MHZ,
            pulses=config.XROT_PULSES,
            xrot_restarts=config.XROT_RESTARTS,
            xrot_local_budget=config.XROT_LOCAL_BUDGET,
            xrot_sim_budget=config.XROT_SIM_BUDGET,
            tau_bounds=(config.TAU_MIN_NS, config.TAU_MAX_NS),
            amplitude_cap_mhz=config.AMPLITUDE_CAP_MHZ,
            settings=IntegratorSettings.from_config(config),
        )
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def lambdas(self) -> tuple[int, ...]:
        return (self.lam,) if self.lam is not None else (1, -1)

    @property
    def threshold(self) -> float:
        return mhz_to_angular(self.degenerate_splitting_mhz)

    def device(self) -> DeviceParams:
        p = load_device_params(self.device_config)
        if self.transmon_levels or self.cavity_levels:
            p = p.with_levels(cavity_levels=self.cavity_levels, transmon_levels=self.transmon_levels)
        return p


def parse_grid(text: str, unit: float = 1.0) -> list[float]:
    """``"A:B:N"`` to N evenly spaced values from A to B inclusive, times ``unit``."""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as e:
        raise ConfigError(f"Grid must look like A:B:N, got {text!r}") from e
    if count < 0:
        raise ConfigError(f"Grid count must be non-negative, got {count}")
    return [float(v) * unit for v in np.linspace(start, stop, count)]


def theta_grid(cfg: RunConfig) -> list[float]:
    return parse_grid(cfg.theta_grid, unit=math.pi)


def coupling_grid(cfg: RunConfig) -> list[float]:
    couplings = parse_grid(cfg.coupling_grid)
    lo, hi = COUPLING_RANGE_MHZ
    outside = [g for g in couplings if not lo <= g <= hi]
    if outside:
        raise ConfigError(f"Couplings {outside} MHz outside [{lo:g}, {hi:g}] MHz")
    return couplings


def map_rows(fn: Callable, tasks: Sequence, workers: int) -> list:
    """Apply ``fn`` to ``tasks`` in order, on a process pool when ``workers`` > 1."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _error_text(error: Exception) -> str:
    return f"{type(error).__name__}: {error}"


def _sigmas(cfg: RunConfig, theta: float, tt) -> list[Optional[float]]:
    """Requested bandwidths; only the off-resonant family takes one."""
    if cfg.family.resonant:
        return [None]
    if cfg.sigma_mhz is not None:
        return [mhz_to_angular(cfg.sigma_mhz)]
    sigma_max = offres_sigma_max(theta, tt)
    return [fraction * sigma_max for fraction in cfg.sigma_fractions]


# ===========================================
# derive
# ===========================================

def derive_protocols(cfg: RunConfig) -> list[dict]:
    """Resolved pulse parameters for the family over the angle grid; designer errors propagate."""
    p = cfg.device()
    _, tt = transition_table(
        p, pair=cfg.family.pair, max_dimension=cfg.settings.max_dimension, threshold=cfg.settings.label_threshold)
    rows = []
    for lam in cfg.lambdas:
        for theta in theta_grid(cfg):
            for sigma in _sigmas(cfg, theta, tt):
                spec = design(cfg.family, theta, tt, lam, cfg.branch, sigma, threshold=cfg.threshold)
                record = spec.to_record()
                record.update(
                    gate_time_ns=spec.gate_time,
                    bandwidth_range=str(spec.bandwidth_range),
                    residual=verify_root_equation(spec, tt),
                )
                rows.append(record)
    logger.info(f"Derived {len(rows)} {cfg.family.value} protocols")
    return rows


# ===========================================
# Angle and coupling sweeps
# ===========================================

@dataclass(frozen=True)
class _AngleTask:
    p: DeviceParams
    cfg: RunConfig
    theta: float
    lam: int
    sigma: Optional[float]
    coupling_mhz: Optional[float] = None


def _angle_row(task: _AngleTask) -> dict:
    cfg = task.cfg
    row = {"theta_req": task.theta, "family": cfg.family.value, "lambda": task.lam, "error": ""}
    if task.coupling_mhz is not None:
        row["coupling_mhz"] = task.coupling_mhz
    try:
        _, tt = transition_table(
            task.p, pair=cfg.family.pair,
            max_dimension=cfg.settings.max_dimension, threshold=cfg.settings.label_threshold)
        spec = design(cfg.family, task.theta, tt, task.lam, cfg.branch, task.sigma, threshold=cfg.threshold)
        row.update(
            gate_time_ns=spec.gate_time,
            sigma_mhz=angular_to_mhz(spec.sigma),
            pulse_freq_ghz=spec.to_record()["pulse_freq_ghz"],
        )
        if spec.gate_time > cfg.max_gate_time_ns:
            row["error"] = f"skipped: gate time {spec.gate_time:.4g} ns exceeds {cfg.max_gate_time_ns:g} ns"
            return row

        result = simulate_spec(spec, task.p, settings=cfg.settings)
        if cfg.refine:
            report = refine_protocol(
                spec, task.p, cfg.refine_budget, settings=cfg.settings, window=cfg.refine_window,
                initial_result=result)
            if report.refined_result is not None:
                spec, result = report.refined_spec, report.refined_result
                row.update(sigma_mhz=angular_to_mhz(spec.sigma), pulse_freq_ghz=spec.to_record()["pulse_freq_ghz"])

        row.update(
            theta_realized=result.realized_theta,
            fidelity=result.fidelity,
            fidelity_z_corrected=result.fidelity_z_corrected,
            purity=result.purity,
            leakage=result.leakage,
        )
    except SechGateError as e:
        logger.error("Row theta=%.6g lambda=%+d failed: %s", task.theta, task.lam, e)
        row["error"] = _error_text(e)
    return row


def _angle_tasks(cfg: RunConfig, p: DeviceParams, coupling_mhz: Optional[float] = None) -> list[_AngleTask]:
    thetas = theta_grid(cfg)
    tt = None
    if not cfg.family.resonant and cfg.sigma_mhz is None and thetas:
        _, tt = transition_table(p, pair=TransitionPair.OQSS, max_dimension=cfg.settings.max_dimension,
                                 threshold=cfg.settings.label_threshold)
    return [
        _AngleTask(p, cfg, theta, lam, sigma, coupling_mhz)
        for lam in cfg.lambdas
        for theta in thetas
        for sigma in _sigmas(cfg, theta, tt)
    ]


def sweep_angle(cfg: RunConfig) -> list[dict]:
    """derive, simulate, refine for every angle; failures land in the error column."""
    p = cfg.device()
    tasks = _angle_tasks(cfg, p)
    logger.info(f"Angle sweep: {len(tasks)} rows on {cfg.workers} worker(s)")
    return map_rows(_angle_row, tasks, cfg.workers)


def sweep_coupling(cfg: RunConfig) -> list[dict]:
    """The angle sweep repeated with the dressed table re-derived at each coupling."""
    couplings = coupling_grid(cfg)
    base = cfg.device()
    tasks = []
    for g in couplings:
        tasks.extend(_angle_tasks(cfg, base.with_coupling(g), coupling_mhz=g))
    logger.info(f"Coupling sweep: {len(couplings)} couplings, {len(tasks)} rows")
    return map_rows(_angle_row, tasks, cfg.workers)


# ===========================================
# X rotations
# ===========================================

@dataclass(frozen=True)
class _XRotationTask:
    p: DeviceParams
    cfg: RunConfig
    theta: float


def _xrot_row(task: _XRotationTask) -> dict:
    cfg = task.cfg
    row = {"theta": task.theta, "N": cfg.pulses, "error": ""}
    try:
        _, tt = transition_table(
            task.p, pair=TransitionPair.IQSS,
            max_dimension=cfg.settings.max_dimension, threshold=cfg.settings.label_threshold)
        report = design_x_rotation(
            task.theta, cfg.pulses, tt, task.p,
            settings=cfg.settings,
            restarts=cfg.xrot_restarts,
            seed=cfg.seed,
            tau_bounds=cfg.tau_bounds,
            amplitude_cap_mhz=cfg.amplitude_cap_mhz,
            local_budget=cfg.xrot_local_budget,
            sim_budget=cfg.xrot_sim_budget,
        )
        row.update(
            duration_ns=report.duration,
            protocol_fidelity=report.protocol_fidelity,
            simulation_fidelity=report.simulation_fidelity,
            purity=report.purity,
        )
    except SechGateError as e:
        logger.error("X rotation theta=%.6g failed: %s", task.theta, e)
        row["error"] = _error_text(e)
    return row


def sweep_x_rotation(cfg: RunConfig) -> list[dict]:
    p = cfg.device()
    tasks = [_XRotationTask(p, cfg, theta) for theta in theta_grid(cfg)]
    logger.info(f"X-rotation sweep: {len(tasks)} angles, N={cfg.pulses}")
    return map_rows(_xrot_row, tasks, cfg.workers)
