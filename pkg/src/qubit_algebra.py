from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import linalg

from src.errors import BasisError

# --- Constants ---
QUBIT_COUNT = 3
DIM = 2 ** QUBIT_COUNT
HERMITIAN_TOLERANCE = 1e-10

PAULI_BASIS = 'pauli'
EIGEN_BASIS = 'eigen'

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |up> is index 0, so sigma+ = |up><down| lowers the energy under H_S.
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

KET_UP = np.array([1, 0], dtype=complex)
KET_DOWN = np.array([0, 1], dtype=complex)
_KET_BY_LETTER = {'u': KET_UP, 'd': KET_DOWN}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """An 8x8 density matrix tagged with the basis it is written in."""
    matrix: np.ndarray
    basis: str = PAULI_BASIS

    def __post_init__(self):
        if self.basis not in (PAULI_BASIS, EIGEN_BASIS):
            raise BasisError(f"Unknown basis tag '{self.basis}'.")
        if np.shape(self.matrix) != (DIM, DIM):
            raise ValueError(f"Density matrix must be {DIM}x{DIM}, got {np.shape(self.matrix)}.")

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def normalized(self):
        return DensityMatrix(self.matrix / self.trace, self.basis)


def _require_square(m, dim=None):
    shape = np.shape(m)
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {shape}.")
    if dim is not None and shape[0] != dim:
        raise ValueError(f"Expected a {dim}x{dim} matrix, got shape {shape}.")


def _as_pauli_matrix(rho):
    if isinstance(rho, DensityMatrix):
        if rho.basis != PAULI_BASIS:
            raise BasisError("Operation needs a Pauli-basis density matrix; rotate with eigen_to_pauli first.")
        return rho.matrix
    return np.asarray(rho)


def tensor3(m1, m2, m3):
    """Kronecker product m1 (x) m2 (x) m3 with qubit 1 as the slowest index."""
    for m in (m1, m2, m3):
        _require_square(m, 2)
    return np.kron(np.kron(m1, m2), m3)


def kron_all(*ms):
    return reduce(np.kron, ms)


def adjoint(m):
    return np.conj(m).T


def commutator(a, b):
    return a @ b - b @ a


def is_hermitian(m, tol=HERMITIAN_TOLERANCE):
    return bool(np.max(np.abs(m - adjoint(m))) <= tol)


def qubit_operator(op, qubit):
    """Embeds a single-qubit operator on qubit 1..3."""
    if qubit not in (1, 2, 3):
        raise ValueError(f"Qubit index must be 1, 2 or 3, got {qubit}.")
    factors = [IDENTITY_2] * QUBIT_COUNT
    factors[qubit - 1] = op
    return tensor3(*factors)


def ket_to_dm(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, np.conj(psi))


def pauli_product_state(label):
    """Ket for a product label such as 'duu' (qubit 1 first)."""
    label = label.lower()
    if len(label) != QUBIT_COUNT or any(letter not in _KET_BY_LETTER for letter in label):
        raise ValueError(f"Product state label must be three of 'u'/'d', got '{label}'.")
    return kron_all(*(_KET_BY_LETTER[letter] for letter in label))


def partial_transpose(rho, qubit):
    """Partial transpose of a Pauli-basis density matrix with respect to one qubit."""
    matrix = _as_pauli_matrix(rho)
    _require_square(matrix, DIM)
    if qubit not in (1, 2, 3):
        raise ValueError(f"Qubit index must be 1, 2 or 3, got {qubit}.")
    tensor = matrix.reshape([2] * (2 * QUBIT_COUNT))
    row_axis = qubit - 1
    tensor = np.swapaxes(tensor, row_axis, row_axis + QUBIT_COUNT)
    return tensor.reshape(DIM, DIM)


def hermitian_eigenvalues(m, tol=HERMITIAN_TOLERANCE):
    """Ascending real eigenvalues of a Hermitian matrix."""
    m = np.asarray(m)
    _require_square(m)
    deviation = np.max(np.abs(m - adjoint(m)))
    if deviation > tol:
        raise ValueError(f"Matrix is not Hermitian (max deviation {deviation:.3e}).")
    return linalg.eigvalsh(0.5 * (m + adjoint(m)))


def min_eigenvalue(m):
    return float(hermitian_eigenvalues(m)[0])
