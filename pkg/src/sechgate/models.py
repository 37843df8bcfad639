"""
Sechgate value types.

Shared by the device model, pulse design, propagation, optimization and sweep
layers. Frequencies inside these types are angular (rad/ns) unless the field
name carries a unit suffix such as ``_ghz`` or ``_mhz``; durations are ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum as PyEnum
from typing import NamedTuple, Optional, Union

import numpy as np

from sechgate.errors import DeviceConfigError

TWO_PI = 2.0 * math.pi

# Sech pulses are switched on for this many inverse bandwidths.
SECH_WINDOW_SIGMAS = 10.0


# ===========================================
# Unit helpers
# ===========================================

def ghz_to_angular(f_ghz: float) -> float:
    return TWO_PI * f_ghz


def mhz_to_angular(f_mhz: float) -> float:
    return TWO_PI * f_mhz * 1e-3


def angular_to_ghz(omega: float) -> float:
    return omega / TWO_PI


def angular_to_mhz(omega: float) -> float:
    return omega / TWO_PI * 1e3


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(float(angle), TWO_PI)
    if wrapped <= -math.pi:
        wrapped += TWO_PI
    return wrapped


def block_order(driven_qubit: int) -> tuple[int, ...]:
    """
    Permutation from block layout to |00>,|01>,|10>,|11> order.

    The block layout groups states by the undriven (control) qubit, lower
    level of the driven transition first. Driving qubit 2 this is the
    identity; driving qubit 1 the middle states swap.
    """
    return (0, 1, 2, 3) if driven_qubit == 2 else (0, 2, 1, 3)


# ===========================================
# Enums
# ===========================================

class TransitionPair(PyEnum):
    IQSS = "IQSS"  # |0;c0> <-> |0;c1>, inside the qubit subspace
    OQSS = "OQSS"  # |0;c1> <-> |0;c2>, partially outside


class Branch(PyEnum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.PLUS else -1


class ProtocolFamily(PyEnum):
    IQSS_2PI_RES = "IQSS_2PI_RES"
    IQSS_4PI_RES = "IQSS_4PI_RES"
    OQSS_2PI_RES = "OQSS_2PI_RES"
    OQSS_4PI_RES = "OQSS_4PI_RES"
    OQSS_2PI_OFFRES = "OQSS_2PI_OFFRES"

    @property
    def pair(self) -> TransitionPair:
        return TransitionPair.IQSS if self.value.startswith("IQSS") else TransitionPair.OQSS

    @property
    def area_index(self) -> int:
        return 2 if "_4PI_" in self.value else 1

    @property
    def resonant(self) -> bool:
        return self is not ProtocolFamily.OQSS_2PI_OFFRES

    @property
    def allows_pi(self) -> bool:
        """4pi families exclude theta = pi."""
        return self.area_index == 1


# ===========================================
# Device
# ===========================================

@dataclass(frozen=True)
class DeviceParams:
    """Cavity plus two transmons, in the units of the device file."""

    cavity_freq_ghz: float
    qubit_freqs_ghz: tuple[float, float]
    anharmonicities_mhz: tuple[float, float]
    couplings_mhz: tuple[float, float]
    cavity_levels: int = 3
    transmon_levels: int = 4
    driven_qubit: int = 2

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.cavity_freq_ghz <= 0 or min(self.qubit_freqs_ghz) <= 0:
            raise DeviceConfigError("Cavity and qubit frequencies must be positive")
        if min(self.anharmonicities_mhz) <= 0:
            raise DeviceConfigError("Anharmonicities must be positive")
        # g = 0 is the decoupled reference system used by the checks.
        if min(self.couplings_mhz) < 0:
            raise DeviceConfigError("Couplings must be non-negative")
        if self.cavity_levels < 3:
            raise DeviceConfigError(f"cavity_levels={self.cavity_levels} < 3")
        if self.transmon_levels < 4:
            raise DeviceConfigError(f"transmon_levels={self.transmon_levels} < 4")
        if self.driven_qubit not in (1, 2):
            raise DeviceConfigError(f"driven_qubit must be 1 or 2, got {self.driven_qubit}")

    @property
    def dimension(self) -> int:
        return self.cavity_levels * self.transmon_levels ** 2

    def with_coupling(self, coupling_mhz: float) -> DeviceParams:
        return replace(self, couplings_mhz=(coupling_mhz, coupling_mhz))

    def with_levels(self, cavity_levels: Optional[int] = None,
                    transmon_levels: Optional[int] = None) -> DeviceParams:
        return replace(
            self,
            cavity_levels=cavity_levels or self.cavity_levels,
            transmon_levels=transmon_levels or self.transmon_levels,
        )

    @classmethod
    def reference_defaults(cls) -> DeviceParams:
        return cls(
            cavity_freq_ghz=7.15,
            qubit_freqs_ghz=(6.2, 6.8),
            anharmonicities_mhz=(350.0, 350.0),
            couplings_mhz=(130.0, 130.0),
        )


Label = tuple[int, int, int]  # (cavity; transmon 1, transmon 2)


@dataclass(frozen=True, eq=False)
class DressedBasis:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    label_map: dict[Label, int]
    overlap_quality: np.ndarray
    dims: tuple[int, int]

    def index(self, label: Label) -> int:
        return self.label_map[label]

    def energy(self, label: Label) -> float:
        return float(self.eigenvalues[self.label_map[label]])

    def vector(self, label: Label) -> np.ndarray:
        return self.eigenvectors[:, self.label_map[label]]

    def labels_by_index(self) -> dict[int, Label]:
        return {index: label for label, index in self.label_map.items()}


@dataclass(frozen=True, eq=False)
class TransitionTable:
    omega_i1: float
    omega_i2: float
    omega_o1: float
    omega_o2: float
    d1: float
    d2: float
    pair: TransitionPair = TransitionPair.IQSS
    driven_qubit: int = 2
    dipoles: dict[str, float] = field(default_factory=dict)
    projector: Optional[np.ndarray] = None
    qss_indices: tuple[int, ...] = ()

    @property
    def delta_omega_i(self) -> float:
        return self.omega_i2 - self.omega_i1

    @property
    def delta_omega_o(self) -> float:
        return self.omega_o2 - self.omega_o1

    def frequencies(self, pair: TransitionPair) -> tuple[float, float]:
        if pair is TransitionPair.IQSS:
            return self.omega_i1, self.omega_i2
        return self.omega_o1, self.omega_o2

    def splitting(self, pair: TransitionPair) -> float:
        return self.delta_omega_i if pair is TransitionPair.IQSS else self.delta_omega_o

    def dipole_pair(self, pair: TransitionPair) -> tuple[float, float]:
        if pair is self.pair:
            return self.d1, self.d2
        prefix = "I" if pair is TransitionPair.IQSS else "O"
        return self.dipoles[f"{prefix}1"], self.dipoles[f"{prefix}2"]

    def for_pair(self, pair: TransitionPair) -> TransitionTable:
        d1, d2 = self.dipole_pair(pair)
        return replace(self, pair=pair, d1=d1, d2=d2)


# ===========================================
# Pulses and schedules
# ===========================================

@dataclass(frozen=True)
class SechPulse:
    """Envelope E(t) = scale * (a*sigma / dipole) * sech(sigma (t - t_w))."""

    sigma: float
    area_index: int
    omega_p: float
    half_window: Optional[float] = None
    dipole: float = 1.0
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.area_index < 1:
            raise ValueError(f"area_index must be >= 1, got {self.area_index}")
        if self.dipole <= 0:
            raise ValueError("dipole must be positive")
        if self.half_window is not None and self.half_window <= 0:
            raise ValueError("half_window must be positive")

    @property
    def amplitude(self) -> float:
        """Rabi amplitude on the calibrated transition."""
        return self.area_index * self.sigma

    @property
    def window(self) -> float:
        if self.half_window is not None:
            return self.half_window
        return SECH_WINDOW_SIGMAS / (2.0 * self.sigma)

    @property
    def duration(self) -> float:
        return 2.0 * self.window

    @property
    def drive_amplitude(self) -> float:
        return self.amplitude_scale * self.amplitude / self.dipole

    def envelope(self, t_local: float) -> float:
        return self.drive_amplitude / math.cosh(self.sigma * (t_local - self.window))


@dataclass(frozen=True)
class SquarePulse:
    tau: float
    amplitude: float
    omega_p: float

    @property
    def duration(self) -> float:
        return self.tau

    @property
    def drive_amplitude(self) -> float:
        return self.amplitude

    def envelope(self, t_local: float) -> float:
        return self.amplitude


Segment = Union[SechPulse, SquarePulse]


@dataclass(frozen=True)
class SquareSequence:
    taus: tuple[float, ...]
    amplitudes: tuple[float, ...]
    omega_ps: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.taus) == len(self.amplitudes) == len(self.omega_ps)):
            raise ValueError("taus, amplitudes and omega_ps must have equal length")

    @property
    def n(self) -> int:
        return len(self.taus)

    @property
    def total_time(self) -> float:
        return float(sum(self.taus))

    def pulse_area(self, dipole: float) -> float:
        """d1 * sum(tau_i |E_i|), half the rotation angle it implements."""
        return dipole * float(sum(t * abs(e) for t, e in zip(self.taus, self.amplitudes)))

    def pulses(self) -> tuple[SquarePulse, ...]:
        return tuple(SquarePulse(t, e, w) for t, e, w in zip(self.taus, self.amplitudes, self.omega_ps))


@dataclass(frozen=True)
class PulseSchedule:
    """Segments played back to back from t = 0."""

    segments: tuple[Segment, ...]
    driven_qubit: int = 2

    @property
    def total_time(self) -> float:
        return float(sum(segment.duration for segment in self.segments))

    def start_times(self) -> list[float]:
        starts, t = [], 0.0
        for segment in self.segments:
            starts.append(t)
            t += segment.duration
        return starts


# ===========================================
# Protocols
# ===========================================

@dataclass(frozen=True)
class BandwidthRange:
    """Open intervals of allowed sigma / |delta omega|."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.intervals:
            raise ValueError("BandwidthRange needs at least one interval")
        previous_hi = -math.inf
        for lo, hi in self.intervals:
            if lo < 0 or not lo < hi:
                raise ValueError(f"Invalid interval ({lo}, {hi})")
            if lo < previous_hi:
                raise ValueError("Intervals must be sorted and disjoint")
            previous_hi = hi

    def contains(self, ratio: float) -> bool:
        return any(lo < ratio < hi for lo, hi in self.intervals)

    def __str__(self) -> str:
        return "|".join(f"({lo:.6g},{hi:.6g})" for lo, hi in self.intervals)


@dataclass(frozen=True)
class ProtocolSpec:
    family: ProtocolFamily
    theta: float
    lam: int
    branch: Branch
    sigma: float
    omega_p: float
    area_index: int
    bandwidth_range: BandwidthRange
    splitting: float
    target_dipole: float = 1.0
    driven_qubit: int = 2
    analytic_theta: float = 0.0
    delta_theta: Optional[float] = None
    theta1: Optional[float] = None
    theta2: Optional[float] = None

    @property
    def pair(self) -> TransitionPair:
        return self.family.pair

    @property
    def gate_time(self) -> float:
        return SECH_WINDOW_SIGMAS / self.sigma

    @property
    def mirrored(self) -> bool:
        """The analytic gate is CPHASE(-theta), locally equivalent to the request."""
        return abs(wrap_angle(self.analytic_theta - self.theta)) > 1e-9

    def pulse(self, sigma: Optional[float] = None, omega_p: Optional[float] = None,
              amplitude_scale: float = 1.0, half_window: Optional[float] = None) -> SechPulse:
        return SechPulse(
            sigma=self.sigma if sigma is None else sigma,
            area_index=self.area_index,
            omega_p=self.omega_p if omega_p is None else omega_p,
            half_window=half_window,
            dipole=self.target_dipole,
            amplitude_scale=amplitude_scale,
        )

    def to_record(self) -> dict:
        return {
            "family": self.family.value,
            "theta_rad": self.theta,
            "lambda": self.lam,
            "branch": self.branch.value,
            "sigma_mhz": angular_to_mhz(self.sigma),
            "pulse_freq_ghz": angular_to_ghz(self.omega_p),
            "area_index": self.area_index,
        }


# ===========================================
# Results
# ===========================================

class LocalInvariants(NamedTuple):
    G1: float
    G2: float
    G3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.G1, self.G2, self.G3])


class CphaseExtraction(NamedTuple):
    phases: tuple[float, float, float, float]
    realized_theta: float
    fidelity_z_corrected: float
    z_angles: tuple[float, float, float]  # qubit 1, qubit 2, global


@dataclass(frozen=True, eq=False)
class SimulationResult:
    U_full: np.ndarray
    U_proj: np.ndarray
    realized_theta: Optional[float]
    fidelity: float
    fidelity_z_corrected: Optional[float]
    purity: float
    leakage: float
    gate_time: float
    unitarity_error: float = 0.0
    leakage_channels: tuple[tuple[Label, float], ...] = ()


@dataclass(frozen=True)
class RefinementReport:
    initial_params: tuple[float, float, float]  # sigma, omega_p, amplitude scale
    refined_params: tuple[float, float, float]
    initial_fidelity: float
    refined_fidelity: float
    evaluations: int
    budget_exhausted: bool
    refined_spec: ProtocolSpec
    refined_result: Optional[SimulationResult] = None


@dataclass(frozen=True)
class XRotationReport:
    theta: float
    sequence: SquareSequence
    protocol_fidelity: float
    simulation_fidelity: float
    purity: float
    evaluations: int

    @property
    def duration(self) -> float:
        return self.sequence.total_time
