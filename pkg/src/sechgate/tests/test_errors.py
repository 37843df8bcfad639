import logging

import click
import numpy as np
import pytest
from decouple import UndefinedValueError

from sechgate.decorators import handle_errors
from sechgate.errors import (
    AmbiguousLabeling,
    ConfigError,
    DegenerateSplitting,
    DeviceConfigError,
    DimensionOverflow,
    NonUnitaryInput,
    NumericalError,
    PhysicsDomainError,
    PoleError,
    SechGateError,
    ToleranceNotMet,
)
from sechgate.errors.handlers import handle_exception


@pytest.mark.parametrize("error,code", [
    (DeviceConfigError("bad file"), 2),
    (DimensionOverflow("too big"), 2),
    (UndefinedValueError("q1_freq_ghz not found"), 2),
    (FileNotFoundError("device.env"), 2),
    (AmbiguousLabeling("mixed"), 3),
    (DegenerateSplitting("0 MHz"), 3),
    (PoleError("c = -1"), 4),
    (ToleranceNotMet("rtol"), 4),
    (np.linalg.LinAlgError("eigh"), 4),
    (RuntimeError("boom"), 1),
])
def test_exit_codes(error, code):
    assert handle_exception(error) == code


def test_hierarchy():
    assert issubclass(DeviceConfigError, ConfigError)
    assert issubclass(DegenerateSplitting, PhysicsDomainError)
    assert issubclass(NonUnitaryInput, NumericalError)
    for klass in (ConfigError, PhysicsDomainError, NumericalError):
        assert issubclass(klass, SechGateError)


def test_handler_logs(caplog):
    with caplog.at_level(logging.ERROR, logger="sechgate.errors.handlers"):
        handle_exception(DegenerateSplitting("splitting 0.001 MHz"))
    assert "DegenerateSplitting" in caplog.text
    assert "splitting 0.001 MHz" in caplog.text


# ── Command decorator ─────────────────────────────────────────────────────────

def _command(exc):
    @click.command()
    @handle_errors
    def command():
        raise exc

    return command


def test_decorator_maps_exit_code(runner):
    result = runner.invoke(_command(DegenerateSplitting("no splitting")))
    assert result.exit_code == 3
    assert "❌ DegenerateSplitting: no splitting" in result.stderr


def test_decorator_passes_usage_errors(runner):
    result = runner.invoke(_command(click.UsageError("wrong flag")))
    assert result.exit_code == 2
    assert "wrong flag" in result.output
    assert "❌" not in result.output
