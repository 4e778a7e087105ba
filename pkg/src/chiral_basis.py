"""
The two bases of the three-qubit space.

Pauli basis: plain binary order, qubit 1 slowest, bit value 1 = spin down.
Eigenbasis: joint eigenstates |S^z, chi> of the total spin-z and the scalar
spin chirality, ordered

    {uuu, |1/2,0>, |1/2,-1>, |1/2,1>, |-1/2,0>, |-1/2,-1>, |-1/2,1>, ddd}.
"""
from dataclasses import dataclass

import numpy as np

from src.errors import BasisError
from src.qubit_algebra import (
    DIM, EIGEN_BASIS, PAULI_BASIS, SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, adjoint, qubit_operator,
)

# --- Constants ---
ETA = np.exp(2j * np.pi / 3)
CHIRALITIES = (0, 1, -1)
SECTOR_CHIRALITIES = (0, -1, 1)

# Binary indices of the states with one flipped spin, listed by qubit 1..3.
_ONE_DOWN = (4, 2, 1)
_ONE_UP = (3, 5, 6)

# Binary positions of the conventional listing {uuu, duu, udu, uud, udd, dud, ddu, ddd}.
CONVENTIONAL_LISTING = (0, 4, 2, 1, 3, 5, 6, 7)


@dataclass(frozen=True)
class SectorLabel:
    sz: float
    chi: int

    def __post_init__(self):
        if self.sz not in (1.5, 0.5, -0.5, -1.5):
            raise ValueError(f"S^z must be one of +-3/2, +-1/2, got {self.sz}.")
        if abs(self.chi) > 1.5 - abs(self.sz):
            raise ValueError(f"Chirality {self.chi} not allowed in sector S^z={self.sz}.")


EIGEN_LABELS = (
    SectorLabel(1.5, 0),
    SectorLabel(0.5, 0), SectorLabel(0.5, -1), SectorLabel(0.5, 1),
    SectorLabel(-0.5, 0), SectorLabel(-0.5, -1), SectorLabel(-0.5, 1),
    SectorLabel(-1.5, 0),
)

# Short names used by scenario files and CSV columns, in eigenbasis order.
EIGEN_NAMES = ('uuu', 'W0', 'Wm', 'Wp', 'V0', 'Vm', 'Vp', 'ddd')
_NAME_ALIASES = {'up3': 'uuu', 'down3': 'ddd'}


def wrap_chirality(chi):
    """Maps an integer into {-1, 0, 1} modulo 3."""
    return (int(chi) + 1) % 3 - 1


def _sector_state(chi, flipped):
    vector = np.zeros(DIM, dtype=complex)
    for qubit, index in enumerate(flipped):
        vector[index] = ETA ** (chi * qubit)
    return vector / np.sqrt(3)


def eigenbasis_states():
    """The eight eigenstates as rows, written in the Pauli basis."""
    states = np.zeros((DIM, DIM), dtype=complex)
    for row, label in enumerate(EIGEN_LABELS):
        if label.sz == 1.5:
            states[row, 0] = 1
        elif label.sz == -1.5:
            states[row, DIM - 1] = 1
        else:
            flipped = _ONE_DOWN if label.sz == 0.5 else _ONE_UP
            states[row] = _sector_state(label.chi, flipped)
    return states


@dataclass(frozen=True, eq=False)
class BasisMap:
    labels: tuple
    names: tuple
    unitary: np.ndarray
    conventional_listing: tuple

    def index(self, name):
        name = _NAME_ALIASES.get(name, name)
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"Unknown eigenstate label '{name}'. Expected one of {self.names}.")


# Columns are eigenstates: rho_pauli = U rho_eigen U^+.
BASIS_MAP = BasisMap(
    labels=EIGEN_LABELS,
    names=EIGEN_NAMES,
    unitary=eigenbasis_states().T.copy(),
    conventional_listing=CONVENTIONAL_LISTING,
)


def eigenstate(name):
    return BASIS_MAP.unitary[:, BASIS_MAP.index(name)].copy()


def sector_slices():
    return {1.5: slice(0, 1), 0.5: slice(1, 4), -0.5: slice(4, 7), -1.5: slice(7, 8)}


def total_sz_operator():
    return 0.5 * sum(qubit_operator(SIGMA_Z, q) for q in (1, 2, 3))


def chirality_operator():
    """sigma_1 . (sigma_2 x sigma_3) / (2 sqrt 3)."""
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    total = np.zeros((DIM, DIM), dtype=complex)
    for i, j, k, sign in ((0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1), (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)):
        total += sign * qubit_operator(paulis[i], 1) @ qubit_operator(paulis[j], 2) @ qubit_operator(paulis[k], 3)
    return total / (2 * np.sqrt(3))


def _rotate(rho, expected, target):
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(np.asarray(rho), expected)
    if rho.basis != expected:
        raise BasisError(f"Expected a {expected}-basis density matrix, got {rho.basis}.")
    u = BASIS_MAP.unitary
    if target == PAULI_BASIS:
        return DensityMatrix(u @ rho.matrix @ adjoint(u), PAULI_BASIS)
    return DensityMatrix(adjoint(u) @ rho.matrix @ u, EIGEN_BASIS)


def eigen_to_pauli(rho):
    return _rotate(rho, EIGEN_BASIS, PAULI_BASIS)


def pauli_to_eigen(rho):
    return _rotate(rho, PAULI_BASIS, EIGEN_BASIS)


def to_conventional_listing(matrix):
    """Reorders a Pauli-basis matrix into the {uuu, duu, udu, uud, udd, dud, ddu, ddd} listing."""
    order = list(CONVENTIONAL_LISTING)
    return np.asarray(matrix)[np.ix_(order, order)]


def populations(rho_pauli):
    """Eigenbasis populations keyed by eigenstate name."""
    u = BASIS_MAP.unitary
    diagonal = np.real(np.einsum('ji,jk,ki->i', np.conj(u), rho_pauli, u))
    return dict(zip(EIGEN_NAMES, diagonal))
