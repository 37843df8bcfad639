"""
Sechgate configuration

Supports multiple environments:
- Production (full-accuracy sweeps on every core)
- Development (default; full accuracy, modest parallelism)
- Debug (fast, coarse budgets for poking at a single angle)
- Testing (serial, tiny budgets, refinement off)

Environment is determined by the SECHGATE_ENV environment variable. Every
setting can be overridden from the process environment or a ``.env`` file
through python-decouple.
"""

import os

from decouple import Csv, config


class Config:
    """Base configuration with sensible defaults."""

    # ===========================================
    # Paths
    # ===========================================
    basedir = os.path.abspath(os.path.dirname(__file__))

    DEVICE_CONFIG = config(
        "SECHGATE_DEVICE_CONFIG", default=os.path.join(basedir, "data", "reference_device.env"))

    # ===========================================
    # Logging / reproducibility
    # ===========================================
    LOG_LEVEL = config("SECHGATE_LOG_LEVEL", default="")
    SEED = config("SECHGATE_SEED", default=7, cast=int)

    # ===========================================
    # Device model
    # ===========================================
    MAX_DIMENSION = config("SECHGATE_MAX_DIMENSION", default=512, cast=int)
    LABEL_THRESHOLD = config("SECHGATE_LABEL_THRESHOLD", default=0.5, cast=float)

    # ===========================================
    # Integrator
    # ===========================================
    INTEGRATOR_METHOD = config("SECHGATE_INTEGRATOR", default="DOP853")
    RTOL = config("SECHGATE_RTOL", default=1e-10, cast=float)
    ATOL = config("SECHGATE_ATOL", default=1e-12, cast=float)
    STEP_FRACTION = config("SECHGATE_STEP_FRACTION", default=20, cast=int)
    UNITARITY_TOL = config("SECHGATE_UNITARITY_TOL", default=1e-8, cast=float)

    # ===========================================
    # Protocol design and refinement
    # ===========================================
    DEGENERATE_SPLITTING_MHZ = config("SECHGATE_DEGENERATE_SPLITTING_MHZ", default=0.01, cast=float)
    OFFRES_SIGMA_FRACTIONS = config(
        "SECHGATE_OFFRES_SIGMA_FRACTIONS", default="0.25,0.5,0.75", cast=Csv(float))
    REFINE = config("SECHGATE_REFINE", default=True, cast=bool)
    REFINE_BUDGET = config("SECHGATE_REFINE_BUDGET", default=60, cast=int)
    REFINE_WINDOW = config("SECHGATE_REFINE_WINDOW", default=0.05, cast=float)

    # ===========================================
    # Single-qubit X rotations
    # ===========================================
    XROT_PULSES = config("SECHGATE_XROT_PULSES", default=4, cast=int)
    XROT_RESTARTS = config("SECHGATE_XROT_RESTARTS", default=32, cast=int)
    XROT_LOCAL_BUDGET = config("SECHGATE_XROT_LOCAL_BUDGET", default=400, cast=int)
    XROT_SIM_BUDGET = config("SECHGATE_XROT_SIM_BUDGET", default=40, cast=int)
    TAU_MIN_NS = config("SECHGATE_TAU_MIN_NS", default=1.0, cast=float)
    TAU_MAX_NS = config("SECHGATE_TAU_MAX_NS", default=15.0, cast=float)
    AMPLITUDE_CAP_MHZ = config("SECHGATE_AMPLITUDE_CAP_MHZ", default=20.0, cast=float)

    # ===========================================
    # Sweeps
    # ===========================================
    SWEEP_WORKERS = config("SECHGATE_WORKERS", default=2, cast=int)
    MAX_GATE_TIME_NS = config("SECHGATE_MAX_GATE_TIME_NS", default=200.0, cast=float)
    THETA_GRID = config("SECHGATE_THETA_GRID", default="0.125:0.5:4")
    COUPLING_GRID = config("SECHGATE_COUPLING_GRID", default="60:160:6")


class ProductionConfig(Config):
    """
    Production sweeps: every core, full budgets.
    """
    DEBUG = False
    TESTING = False

    SWEEP_WORKERS = config("SECHGATE_WORKERS", default=os.cpu_count() or 1, cast=int)
    THETA_GRID = config("SECHGATE_THETA_GRID", default="0.0625:1.0:16")


class DevelopmentConfig(Config):
    """
    Development configuration.
    Full accuracy, default budgets.
    """
    DEBUG = True
    TESTING = False


class DebugConfig(Config):
    """
    Quick local runs.
    Coarse optimizer budgets, serial execution.
    """
    DEBUG = True
    TESTING = False

    SWEEP_WORKERS = 1
    XROT_RESTARTS = 8
    XROT_LOCAL_BUDGET = 150
    XROT_SIM_BUDGET = 15
    REFINE_BUDGET = 50


class TestingConfig(Config):
    """
    Testing configuration: serial, no refinement, tiny budgets.
    """
    DEBUG = True
    TESTING = True

    SWEEP_WORKERS = 1
    REFINE = False
    XROT_RESTARTS = 4
    XROT_LOCAL_BUDGET = 120
    XROT_SIM_BUDGET = 0


# Configuration dictionary
config_dict = {
    "production": ProductionConfig,
    "development": DevelopmentConfig,
    "debug": DebugConfig,
    "testing": TestingConfig,
}


def get_environment() -> str:
    """
    Determine the run environment.

    Priority:
    1. SECHGATE_ENV environment variable (explicit)
    2. Default to 'development'
    """
    env = config("SECHGATE_ENV", default="development").lower()
    return env if env in config_dict else "development"


def get_config():
    """Configuration class for the current environment."""
    return config_dict[get_environment()]
