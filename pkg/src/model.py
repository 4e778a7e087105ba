"""
Physical model of three spin qubits in a spatially correlated noisy medium.

Units: hbar = 1, rates and energies in units of the local decay rate a,
time in units of 1/a. The input rates stand for the environment power
spectral density sampled at the qubit splitting.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from src.chiral_basis import CHIRALITIES, ETA, eigenstate
from src.errors import ModelError
from src.qubit_algebra import (
    DIM, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, adjoint, qubit_operator,
)

# --- Constants ---
CP_TOLERANCE = 1e-12

SIGMA_PLUS_OPS = tuple(qubit_operator(SIGMA_PLUS, q) for q in (1, 2, 3))
SIGMA_MINUS_OPS = tuple(qubit_operator(SIGMA_MINUS, q) for q in (1, 2, 3))
SIGMA_Z_OPS = tuple(qubit_operator(SIGMA_Z, q) for q in (1, 2, 3))
DRIVE_LADDER = sum(SIGMA_PLUS_OPS)
DRIVE_COUPLING = DRIVE_LADDER + adjoint(DRIVE_LADDER)


@dataclass(frozen=True)
class NoiseModel:
    a: float = 1.0
    A_abs: float = 0.5
    phi: float = np.pi
    delta_A12: complex = 0j
    beta_delta: float = np.inf

    def __post_init__(self):
        if self.a < 0:
            raise ModelError(f"Local decay rate a must be >= 0, got {self.a}.")
        if self.A_abs < 0:
            raise ModelError(f"|A| must be >= 0, got {self.A_abs}.")
        if not self.beta_delta > 0:
            raise ModelError(f"beta*Delta must be positive (inf for zero temperature), got {self.beta_delta}.")

    @property
    def A(self):
        return self.A_abs * np.exp(1j * self.phi)

    @property
    def is_homogeneous(self):
        return self.delta_A12 == 0

    @property
    def is_zero_temperature(self):
        return np.isinf(self.beta_delta)

    @property
    def boltzmann_factor(self):
        return 0.0 if self.is_zero_temperature else float(np.exp(-self.beta_delta))


@dataclass(frozen=True)
class Drive:
    amplitude: float
    omega: float
    duration: float = np.inf
    t0: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ModelError(f"Drive amplitude |C| must be >= 0, got {self.amplitude}.")


@dataclass(frozen=True)
class CoherentModel:
    Delta: float = 100.0
    J: float = 0.0
    psi: float = 0.0
    delta_J12: float = 0.0
    drive: Drive | None = None

    def __post_init__(self):
        if not self.Delta > 0:
            raise ModelError(f"Qubit splitting Delta must be positive, got {self.Delta}.")
        if self.J < 0:
            raise ModelError(f"Coupling J must be >= 0, got {self.J}.")

    @property
    def w_resonance(self):
        """Splitting between |uuu> and the achiral W state."""
        return self.Delta + 2 * self.J * np.cos(self.psi)


@dataclass(frozen=True, eq=False)
class JumpSet:
    decay_ops: tuple
    excite_ops: tuple
    rates: tuple
    tilde_rates: tuple

    def active_ops(self, include_excitations=True):
        ops = list(self.decay_ops)
        if include_excitations and any(rate > 0 for rate in self.tilde_rates):
            ops.extend(self.excite_ops)
        return np.array(ops)


class CPReport(NamedTuple):
    ok: bool
    min_eigenvalue: float
    message: str


def gamma_matrix(noise):
    A = noise.A
    A12 = A - noise.delta_A12
    a = noise.a
    return np.array([
        [a, A12, np.conj(A)],
        [np.conj(A12), a, A],
        [A, np.conj(A), a],
    ], dtype=complex)


def gamma_tilde_matrix(noise):
    return noise.boltzmann_factor * gamma_matrix(noise).T


def gamma_rates(a, A):
    """(gamma_0, gamma_1, gamma_-1) of the homogeneous rate matrix."""
    A_abs, phi = abs(A), np.angle(A)
    return tuple(a + 2 * A_abs * np.cos(phi + 2 * np.pi * k / 3) for k in CHIRALITIES)


def _chiral_pattern(k, conjugate=False):
    """Normalised eigenvector of the homogeneous rate matrix for chirality k."""
    v = np.array([ETA ** k, ETA ** (-k), 1], dtype=complex) / np.sqrt(3)
    return np.conj(v) if conjugate else v


def _ladder_combination(coefficients, ladders):
    return sum(c * op for c, op in zip(coefficients, ladders))


def _homogeneous_jumps(rates, ladders, conjugate):
    return tuple(
        np.sqrt(rate) * _ladder_combination(_chiral_pattern(k, conjugate), ladders)
        for k, rate in zip(CHIRALITIES, rates)
    )


def _fix_gauge(vector):
    pivot = vector[np.argmax(np.abs(vector))]
    return vector * np.conj(pivot) / abs(pivot)


def _label_eigenvectors(vectors, conjugate):
    """Orders numeric eigenvector columns by best overlap with the chiral patterns."""
    patterns = np.column_stack([_chiral_pattern(k, conjugate) for k in CHIRALITIES])
    overlap = np.abs(adjoint(patterns) @ vectors) ** 2
    best = max(itertools.permutations(range(3)),
               key=lambda perm: sum(overlap[slot, col] for slot, col in enumerate(perm)))
    return list(best)


def _diagonalized_jumps(matrix, ladders, conjugate):
    values, vectors = linalg.eigh(matrix)
    if values[0] < -CP_TOLERANCE:
        raise ModelError(f"Rate matrix is not positive semidefinite (eigenvalue {values[0]:.3e}).")
    order = _label_eigenvectors(vectors, conjugate)
    rates, ops = [], []
    for column in order:
        rate = max(float(values[column]), 0.0)
        vector = _fix_gauge(vectors[:, column])
        rates.append(rate)
        ops.append(np.sqrt(rate) * _ladder_combination(vector, ladders))
    return tuple(rates), tuple(ops)


def jump_operators(noise):
    """Decay (sigma+) and thermal excitation (sigma-) jump operators."""
    if noise.is_homogeneous:
        raw_rates = gamma_rates(noise.a, noise.A)
        if min(raw_rates) < -CP_TOLERANCE:
            raise ModelError(f"Rate matrix is not positive semidefinite (eigenvalue {min(raw_rates):.3e}).")
        rates = tuple(max(rate, 0.0) for rate in raw_rates)
        tilde_rates = tuple(noise.boltzmann_factor * rate for rate in rates)
        decay_ops = _homogeneous_jumps(rates, SIGMA_PLUS_OPS, conjugate=False)
        excite_ops = _homogeneous_jumps(tilde_rates, SIGMA_MINUS_OPS, conjugate=True)
    else:
        rates, decay_ops = _diagonalized_jumps(gamma_matrix(noise), SIGMA_PLUS_OPS, conjugate=False)
        tilde_rates, excite_ops = _diagonalized_jumps(gamma_tilde_matrix(noise), SIGMA_MINUS_OPS, conjugate=True)
    return JumpSet(decay_ops=decay_ops, excite_ops=excite_ops, rates=rates, tilde_rates=tilde_rates)


def dissipator_from_jumps(rho, jumps):
    out = np.zeros_like(rho, dtype=complex)
    for op in jumps:
        op_dag = adjoint(op)
        norm = op_dag @ op
        out += op @ rho @ op_dag - 0.5 * (norm @ rho + rho @ norm)
    return out


def _double_sum(rho, rates, ladders):
    out = np.zeros_like(rho, dtype=complex)
    for i, j in itertools.product(range(3), repeat=2):
        if rates[i, j] == 0:
            continue
        o_i, o_j_dag = ladders[i], adjoint(ladders[j])
        out += rates[i, j] * (o_i @ rho @ o_j_dag - 0.5 * (o_j_dag @ o_i @ rho + rho @ o_j_dag @ o_i))
    return out


def dissipator_double_sum(rho, noise):
    """Dissipator written directly with the rate matrices: sum_ij g_ij (O_i rho O_j^+ - {O_j^+ O_i, rho}/2)."""
    out = _double_sum(rho, gamma_matrix(noise), SIGMA_PLUS_OPS)
    if not noise.is_zero_temperature:
        out += _double_sum(rho, gamma_tilde_matrix(noise), SIGMA_MINUS_OPS)
    return out


def hamiltonian_system(c):
    return -0.5 * c.Delta * sum(SIGMA_Z_OPS)


def _hopping(amplitude, psi, i, j):
    forward = np.exp(1j * psi) * SIGMA_PLUS_OPS[i] @ SIGMA_MINUS_OPS[j]
    return amplitude * (forward + adjoint(forward))


def hamiltonian_effective(c):
    return sum(_hopping(c.J, c.psi, i, (i + 1) % 3) for i in range(3))


def hamiltonian_asymmetry(c):
    return _hopping(c.delta_J12, c.psi, 0, 1)


def drive_term(drive, t):
    """Lab-frame drive, switched on over [t0, t0 + duration]."""
    if t < drive.t0 or t > drive.t0 + drive.duration:
        return np.zeros((DIM, DIM), dtype=complex)
    return drive.amplitude * np.cos(drive.omega * t) * DRIVE_COUPLING


def hamiltonian_drive(c, t):
    if c.drive is None:
        raise ModelError("No drive configured on this coherent model.")
    return drive_term(c.drive, t)


def coherent_overlaps(c):
    """Overlaps of xi = H'|W> with the achiral and the two chiral W states."""
    xi = hamiltonian_asymmetry(c) @ eigenstate('W0')
    return {label: complex(np.vdot(eigenstate(label), xi)) for label in ('W0', 'Wp', 'Wm')}


def validate_cp(noise):
    """Complete-positivity check; never raises."""
    if noise.is_homogeneous:
        lowest = min(gamma_rates(noise.a, noise.A))
        if noise.a - 2 * noise.A_abs < -CP_TOLERANCE:
            return CPReport(False, lowest,
                            f"Complete positivity requires a >= 2|A| (a={noise.a}, |A|={noise.A_abs}).")
        return CPReport(True, lowest, "ok")
    lowest = float(linalg.eigvalsh(gamma_matrix(noise))[0])
    if lowest < -CP_TOLERANCE:
        logging.warning(f"Perturbed rate matrix has a negative eigenvalue {lowest:.3e}.")
        return CPReport(False, lowest, f"Rate matrix has negative eigenvalue {lowest:.3e}.")
    return CPReport(True, lowest, "ok")
