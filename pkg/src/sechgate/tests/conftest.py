import math
import os

import pytest
from click.testing import CliRunner

from sechgate import create_cli
from sechgate.config import TestingConfig
from sechgate.device_model import build_static_hamiltonian, diagonalize_dressed, extract_transitions
from sechgate.models import DeviceParams, TransitionPair, TransitionTable, mhz_to_angular

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data")


@pytest.fixture(scope="session")
def device_file():
    return os.path.join(DATA_DIR, "reference_device.env")


@pytest.fixture(scope="session")
def reference_device():
    return DeviceParams.reference_defaults()


@pytest.fixture(scope="session")
def static_hamiltonian(reference_device):
    return build_static_hamiltonian(reference_device)


@pytest.fixture(scope="session")
def dressed(static_hamiltonian, reference_device):
    return diagonalize_dressed(static_hamiltonian, reference_device)


@pytest.fixture(scope="session")
def iqss_table(dressed, reference_device):
    return extract_transitions(dressed, reference_device, 2, TransitionPair.IQSS)


@pytest.fixture(scope="session")
def oqss_table(dressed, reference_device):
    return extract_transitions(dressed, reference_device, 2, TransitionPair.OQSS)


def synthetic_table(dw_i_mhz=3.23, dw_o_mhz=-11.07, d1=1.0, d2=1.0, pair=TransitionPair.IQSS):
    """Table with the published splittings and unit dipoles around round frequencies."""
    omega_i1 = 2 * math.pi * 6.0
    omega_o1 = omega_i1 - mhz_to_angular(350.0)
    return TransitionTable(
        omega_i1=omega_i1,
        omega_i2=omega_i1 + mhz_to_angular(dw_i_mhz),
        omega_o1=omega_o1,
        omega_o2=omega_o1 + mhz_to_angular(dw_o_mhz),
        d1=d1,
        d2=d2,
        pair=pair,
        dipoles={"I1": d1, "I2": d2, "O1": d1, "O2": d2},
    )


@pytest.fixture(scope="session")
def synthetic_iqss():
    return synthetic_table()


@pytest.fixture(scope="session")
def synthetic_oqss():
    return synthetic_table(pair=TransitionPair.OQSS)


@pytest.fixture(scope="session")
def cli(request):
    """Session-wide command group bound to the testing configuration."""
    return create_cli(TestingConfig)


@pytest.fixture()
def runner():
    return CliRunner()
