"""
Sechgate exception hierarchy.

Every failure the toolkit raises on purpose derives from ``SechGateError`` and
carries the process exit code the command line reports for it:

- 2: configuration problems (device file, dimension cap, bad grids)
- 3: physics-domain problems (degenerate splitting, bandwidth out of range)
- 4: numerical failures (poles, non-unitary input, integrator accuracy)
"""


class SechGateError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


# ===========================================
# Configuration (exit code 2)
# ===========================================

class ConfigError(SechGateError):
    exit_code = 2


class DeviceConfigError(ConfigError):
    """Device file missing, incomplete or physically invalid."""


class DimensionOverflow(ConfigError):
    """Truncated Hilbert space larger than the configured cap."""


# ===========================================
# Physics domain (exit code 3)
# ===========================================

class PhysicsDomainError(SechGateError):
    exit_code = 3


class AmbiguousLabeling(PhysicsDomainError):
    """Dressed states no longer have a dominant bare component."""


class DegenerateSplitting(PhysicsDomainError):
    """Splitting or bandwidth too small to give a usable gate."""


class BandwidthOutOfRange(PhysicsDomainError):
    """Requested bandwidth outside the family's allowed intervals."""


class AngleOutOfDomain(PhysicsDomainError):
    """Requested CPHASE or rotation angle outside the family's domain."""


class InfeasibleConstraint(PhysicsDomainError):
    """Rotation angle unreachable within the duration/amplitude bounds."""


# ===========================================
# Numerical failures (exit code 4)
# ===========================================

class NumericalError(SechGateError):
    exit_code = 4


class PoleError(NumericalError):
    """Hypergeometric parameter sits on a Gamma-function pole."""


class NonUnitaryInput(NumericalError):
    """Operator fails the unitarity check required by the caller."""


class NotDiagonal(NumericalError):
    """Projected operator is not diagonal-dominant."""


class ToleranceNotMet(NumericalError):
    """Propagator lost unitarity beyond the accuracy gate."""


__all__ = [
    "SechGateError",
    "ConfigError",
    "DeviceConfigError",
    "DimensionOverflow",
    "PhysicsDomainError",
    "AmbiguousLabeling",
    "DegenerateSplitting",
    "BandwidthOutOfRange",
    "AngleOutOfDomain",
    "InfeasibleConstraint",
    "NumericalError",
    "PoleError",
    "NonUnitaryInput",
    "NotDiagonal",
    "ToleranceNotMet",
]
