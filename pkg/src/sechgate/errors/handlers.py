import logging
from typing import Callable

import numpy as np
from decouple import UndefinedValueError

from sechgate.errors import ConfigError, NumericalError, PhysicsDomainError

logger = logging.getLogger(__name__)

_handlers: dict[type, Callable[[BaseException], int]] = {}


def errorhandler(exc_type: type):
    """Register ``fn`` as the handler for ``exc_type`` and its subclasses."""

    def decorator(fn):
        _handlers[exc_type] = fn
        return fn

    return decorator


def handle_exception(error: BaseException) -> int:
    """Log ``error`` with the most specific registered handler, return its exit code."""
    for klass in type(error).__mro__:
        handler = _handlers.get(klass)
        if handler is not None:
            return handler(error)
    logger.exception("Unhandled error: %s", error)
    return 1


# ── Configuration handlers ────────────────────────────────────────────────────

@errorhandler(ConfigError)
def config_error(error):
    logger.error("Configuration error: %s", error)
    return error.exit_code


@errorhandler(UndefinedValueError)
def undefined_setting(error):
    logger.error("Missing setting: %s", error)
    return ConfigError.exit_code


@errorhandler(FileNotFoundError)
def missing_file(error):
    logger.error("File not found: %s", error)
    return ConfigError.exit_code


# ── Physics and numerics handlers ─────────────────────────────────────────────
# Domain errors mean the request itself cannot be satisfied on this device;
# numerical errors mean the request was fine but the computation was not.

@errorhandler(PhysicsDomainError)
def physics_domain_error(error):
    logger.error("Physics-domain error (%s): %s", type(error).__name__, error)
    return error.exit_code


@errorhandler(NumericalError)
def numerical_error(error):
    logger.error("Numerical failure (%s): %s", type(error).__name__, error)
    return error.exit_code


@errorhandler(np.linalg.LinAlgError)
def linalg_error(error):
    logger.error("Linear algebra failure: %s", error)
    return NumericalError.exit_code
