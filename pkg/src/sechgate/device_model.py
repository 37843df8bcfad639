"""
Cavity-transmon device model.

Builds the static Hamiltonian of one cavity coupled to two transmons,
diagonalizes it, labels the dressed states by their dominant bare component
and extracts the qubit-subspace transition table every protocol works from.

Bare product states are ordered |i; j, k> = cavity i, transmon 1 level j,
transmon 2 level k, with flat index i*N_t**2 + j*N_t + k.
"""

import itertools
import logging
import os

import numpy as np
import scipy.linalg
from decouple import Config, RepositoryEnv, UndefinedValueError

from sechgate.errors import (
    AmbiguousLabeling,
    DeviceConfigError,
    DimensionOverflow,
    NumericalError,
)
from sechgate.models import (
    DeviceParams,
    DressedBasis,
    Label,
    TransitionPair,
    TransitionTable,
    ghz_to_angular,
    mhz_to_angular,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DIMENSION = 512
DEFAULT_LABEL_THRESHOLD = 0.5

# Labels the transition table reads: cavity vacuum, transmon levels 0..2.
COMPUTATIONAL_LEVELS = 3


# ===========================================
# Device file
# ===========================================

REQUIRED_KEYS = (
    "cavity_freq_ghz",
    "q1_freq_ghz",
    "q2_freq_ghz",
    "anharmonicity_mhz",
    "coupling_mhz",
    "cavity_levels",
    "transmon_levels",
)


def load_device_params(path: str) -> DeviceParams:
    """
    Read a key/value device file.

    Required keys are listed in ``REQUIRED_KEYS``; ``q{1,2}_anharmonicity_mhz``,
    ``q{1,2}_coupling_mhz`` and ``driven_qubit`` optionally override the
    shared values.
    """
    if not os.path.isfile(path):
        raise DeviceConfigError(f"Device file not found: {path}")

    settings = Config(RepositoryEnv(path))
    try:
        anharmonicity = settings("anharmonicity_mhz", cast=float)
        coupling = settings("coupling_mhz", cast=float)
        params = DeviceParams(
            cavity_freq_ghz=settings("cavity_freq_ghz", cast=float),
            qubit_freqs_ghz=(settings("q1_freq_ghz", cast=float), settings("q2_freq_ghz", cast=float)),
            anharmonicities_mhz=(
                settings("q1_anharmonicity_mhz", default=anharmonicity, cast=float),
                settings("q2_anharmonicity_mhz", default=anharmonicity, cast=float),
            ),
            couplings_mhz=(
                settings("q1_coupling_mhz", default=coupling, cast=float),
                settings("q2_coupling_mhz", default=coupling, cast=float),
            ),
            cavity_levels=settings("cavity_levels", cast=int),
            transmon_levels=settings("transmon_levels", cast=int),
            driven_qubit=settings("driven_qubit", default=2, cast=int),
        )
    except UndefinedValueError as e:
        raise DeviceConfigError(f"{path}: {e}") from e
    except ValueError as e:
        raise DeviceConfigError(f"{path}: unparsable value ({e})") from e

    logger.debug(f"Loaded device from {path}: {params}")
    return params


# ===========================================
# Bare basis
# ===========================================

def _destroy(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)


def bare_index(label: Label, p: DeviceParams) -> int:
    i, j, k = label
    nt = p.transmon_levels
    return (i * nt + j) * nt + k


def bare_labels(p: DeviceParams) -> list[Label]:
    return list(itertools.product(
        range(p.cavity_levels), range(p.transmon_levels), range(p.transmon_levels)))


def lowering_operators(p: DeviceParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cavity, transmon 1 and transmon 2 lowering operators on the product space."""
    ic = np.eye(p.cavity_levels)
    it = np.eye(p.transmon_levels)
    a_t = _destroy(p.transmon_levels)
    a = np.kron(np.kron(_destroy(p.cavity_levels), it), it)
    a1 = np.kron(np.kron(ic, a_t), it)
    a2 = np.kron(np.kron(ic, it), a_t)
    return a, a1, a2


def driven_operator(p: DeviceParams, driven_qubit: int) -> np.ndarray:
    return lowering_operators(p)[driven_qubit]


# ===========================================
# Hamiltonian
# ===========================================

def build_static_hamiltonian(p: DeviceParams, *, max_dimension: int = DEFAULT_MAX_DIMENSION) -> np.ndarray:
    """Static Hamiltonian H0 in the bare product basis, rad/ns."""
    p.validate()
    if p.dimension > max_dimension:
        raise DimensionOverflow(f"Dimension {p.dimension} exceeds cap {max_dimension}")

    a, a1, a2 = lowering_operators(p)
    identity = np.eye(p.dimension)

    h0 = ghz_to_angular(p.cavity_freq_ghz) * (a.T @ a)
    for aj, eps, eta, g in zip((a1, a2), p.qubit_freqs_ghz, p.anharmonicities_mhz, p.couplings_mhz):
        nj = aj.T @ aj
        h0 += ghz_to_angular(eps) * nj
        h0 -= 0.5 * mhz_to_angular(eta) * (nj @ (nj - identity))
        h0 += mhz_to_angular(g) * (aj.T @ a + a.T @ aj)

    if np.max(np.abs(h0 - h0.conj().T)) > 1e-14:
        raise NumericalError("Static Hamiltonian assembled non-Hermitian")
    return h0


# ===========================================
# Dressed basis
# ===========================================

def _greedy_labels(overlap: np.ndarray) -> np.ndarray:
    """
    Bare index assigned to each dressed index.

    Pairs are taken in descending overlap; a stable sort on the flattened
    (bare, dressed) matrix breaks ties by bare index.
    """
    n = overlap.shape[0]
    assignment = np.full(n, -1, dtype=int)
    bare_taken = np.zeros(n, dtype=bool)
    assigned = 0
    for flat in np.argsort(-overlap, axis=None, kind="stable"):
        bare, dressed = divmod(int(flat), n)
        if bare_taken[bare] or assignment[dressed] >= 0:
            continue
        assignment[dressed] = bare
        bare_taken[bare] = True
        assigned += 1
        if assigned == n:
            break
    return assignment


def _gated(label: Label) -> bool:
    return label[0] == 0 and max(label[1:]) < COMPUTATIONAL_LEVELS


def diagonalize_dressed(h0: np.ndarray, p: DeviceParams, *,
                        threshold: float = DEFAULT_LABEL_THRESHOLD) -> DressedBasis:
    """
    Eigen-decompose H0 and label each dressed state by its bare state.

    Eigenvectors are returned in ascending energy order with the phase fixed
    so the labelled bare component is real and positive. Labels the protocols
    read (cavity vacuum, transmon levels <= 2) must clear ``threshold``;
    weaker labels elsewhere in the truncated space are only logged. Only
    those gated labels follow their states continuously as the couplings
    change; strongly mixed states outside them may trade labels.
    """
    if np.max(np.abs(h0 - h0.conj().T)) > 1e-12:
        raise NumericalError("diagonalize_dressed needs a Hermitian matrix")

    energies, vectors = scipy.linalg.eigh(h0)
    overlap = np.abs(vectors) ** 2
    assignment = _greedy_labels(overlap)

    columns = np.arange(len(energies))
    quality = overlap[assignment, columns]
    phases = vectors[assignment, columns]
    vectors = vectors * (np.conj(phases) / np.abs(phases))

    labels = bare_labels(p)
    label_map = {labels[bare]: int(dressed) for dressed, bare in enumerate(assignment)}

    weak = [(labels[bare], float(quality[d])) for d, bare in enumerate(assignment) if quality[d] <= threshold]
    gated = [entry for entry in weak if _gated(entry[0])]
    if gated:
        raise AmbiguousLabeling(
            f"No dominant bare component for {len(gated)} qubit-relevant state(s), e.g. "
            f"{gated[0][0]} with overlap {gated[0][1]:.3f}"
        )
    if weak:
        logger.warning(f"{len(weak)} dressed state(s) outside the qubit manifold have overlap <= {threshold}")

    return DressedBasis(
        eigenvalues=energies,
        eigenvectors=vectors,
        label_map=label_map,
        overlap_quality=quality,
        dims=(p.cavity_levels, p.transmon_levels),
    )


# ===========================================
# Transition table
# ===========================================

def qubit_label(q1: int, q2: int) -> Label:
    return (0, q1, q2)


def _state(control: int, driven: int, driven_qubit: int) -> Label:
    return qubit_label(control, driven) if driven_qubit == 2 else qubit_label(driven, control)


def extract_transitions(db: DressedBasis, p: DeviceParams, driven_qubit: int = None,
                        pair: TransitionPair = TransitionPair.IQSS) -> TransitionTable:
    """
    Dressed transition frequencies, dipoles and the qubit-subspace projector.

    ``I1/I2`` drive the lower qubit transition of the driven transmon with the
    other transmon in 0/1; ``O1/O2`` drive its 1-2 transition likewise.
    """
    driven_qubit = driven_qubit or p.driven_qubit
    if driven_qubit not in (1, 2):
        raise DeviceConfigError(f"driven_qubit must be 1 or 2, got {driven_qubit}")

    a_driven = driven_operator(p, driven_qubit)
    transitions = {
        "I1": (_state(0, 0, driven_qubit), _state(0, 1, driven_qubit)),
        "I2": (_state(1, 0, driven_qubit), _state(1, 1, driven_qubit)),
        "O1": (_state(0, 1, driven_qubit), _state(0, 2, driven_qubit)),
        "O2": (_state(1, 1, driven_qubit), _state(1, 2, driven_qubit)),
    }

    omegas, dipoles = {}, {}
    for name, (lower, upper) in transitions.items():
        omegas[name] = db.energy(upper) - db.energy(lower)
        dipoles[name] = float(abs(db.vector(lower).conj() @ a_driven @ db.vector(upper)))

    qss_labels = [qubit_label(q1, q2) for q1 in (0, 1) for q2 in (0, 1)]
    qss_indices = tuple(db.index(label) for label in qss_labels)
    basis = db.eigenvectors[:, qss_indices]
    projector = basis @ basis.conj().T

    prefix = "I" if pair is TransitionPair.IQSS else "O"
    table = TransitionTable(
        omega_i1=omegas["I1"],
        omega_i2=omegas["I2"],
        omega_o1=omegas["O1"],
        omega_o2=omegas["O2"],
        d1=dipoles[f"{prefix}1"],
        d2=dipoles[f"{prefix}2"],
        pair=pair,
        driven_qubit=driven_qubit,
        dipoles=dipoles,
        projector=projector,
        qss_indices=qss_indices,
    )
    logger.debug(
        f"Transitions: dwI={table.delta_omega_i:.6e} dwO={table.delta_omega_o:.6e} rad/ns, dipoles={dipoles}")
    return table


def transition_table(p: DeviceParams, *, pair: TransitionPair = TransitionPair.IQSS,
                     max_dimension: int = DEFAULT_MAX_DIMENSION,
                     threshold: float = DEFAULT_LABEL_THRESHOLD) -> tuple[DressedBasis, TransitionTable]:
    """Hamiltonian, dressed basis and transition table in one call."""
    h0 = build_static_hamiltonian(p, max_dimension=max_dimension)
    db = diagonalize_dressed(h0, p, threshold=threshold)
    return db, extract_transitions(db, p, p.driven_qubit, pair)
