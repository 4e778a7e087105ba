"""
Closed-form zero-temperature evolution in the (S^z, chi) eigenbasis.

Three initial classes are covered: states supported on the S^z = 1/2 sector,
on the S^z = -1/2 sector, and the fully excited state ddd. Any block-diagonal
mixture of those (plus weight already in uuu) is handled by linearity.
Coherences between sectors are not; such states belong to the integrator.

Conventions: eigenbasis coherences rotate as exp(-i (E_i - E_j) t).
|-1/2, chi> decays with rate a + gamma_chi and carries energy f_chi;
|1/2, chi> decays with gamma_{-chi} and carries f_{-chi}.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.chiral_basis import (
    CHIRALITIES, ETA, SECTOR_CHIRALITIES, eigen_to_pauli, pauli_to_eigen, sector_slices, wrap_chirality,
)
from src.errors import ScenarioError
from src.model import gamma_rates
from src.qubit_algebra import DIM, EIGEN_BASIS, DensityMatrix
from src.timeseries import TimeSeries

# --- Constants ---
SINGULARITY_SCALE = 1e-9
BLOCK_LEAK_TOLERANCE = 1e-14

_SLICES = sector_slices()
_HALF = _SLICES[0.5]
_MINUS_HALF = _SLICES[-0.5]
_K_INDEX = {k: i for i, k in enumerate(CHIRALITIES)}


@dataclass(frozen=True, eq=False)
class SectorRates:
    a: float
    gamma: tuple  # (gamma_0, gamma_1, gamma_-1)
    f: tuple      # (f_0, f_1, f_-1)
    upsilon32: np.ndarray
    upsilon21: np.ndarray
    # Exponent gaps of the ddd -> |-1/2,chi> and |-1/2,chi> -> |1/2,chi'> transfers.
    gamma32: np.ndarray
    gamma21: np.ndarray

    def gamma_of(self, chi):
        return self.gamma[_K_INDEX[wrap_chirality(chi)]]

    def f_of(self, chi):
        return self.f[_K_INDEX[wrap_chirality(chi)]]

    @property
    def singular_threshold(self):
        return SINGULARITY_SCALE * (self.a if self.a > 0 else 1.0)


def f_rates(J, psi):
    return tuple(2 * J * np.cos(psi + 2 * np.pi * k / 3) for k in CHIRALITIES)


def transfer_amplitude(gamma, k, chi):
    """<1/2, chi+k| J_k |-1/2, chi> for jump rate gamma."""
    return np.sqrt(gamma / 3) * (ETA ** (-chi - k) + ETA ** chi)


def _build_rates(a, gamma, f):
    by_k = dict(zip(CHIRALITIES, gamma))
    upsilon32 = np.array([by_k[chi] for chi in SECTOR_CHIRALITIES])
    gamma32 = upsilon32 - 2 * a
    upsilon21 = np.zeros((3, 3))
    gamma21 = np.zeros((3, 3))
    for i, chi_plus in enumerate(SECTOR_CHIRALITIES):
        for j, chi_minus in enumerate(SECTOR_CHIRALITIES):
            k = wrap_chirality(chi_plus - chi_minus)
            upsilon21[i, j] = abs(transfer_amplitude(by_k[k], k, chi_minus)) ** 2
            gamma21[i, j] = by_k[wrap_chirality(-chi_plus)] - a - by_k[chi_minus]
    return SectorRates(a=a, gamma=tuple(gamma), f=tuple(f), upsilon32=upsilon32,
                       upsilon21=upsilon21, gamma32=gamma32, gamma21=gamma21)


def sector_rates(noise, coherent):
    """Rate tables for a homogeneous, zero-temperature, undriven model."""
    if not noise.is_zero_temperature:
        raise ScenarioError("The analytic solver covers zero temperature only; use the numeric solver.")
    if not noise.is_homogeneous or coherent.delta_J12 != 0:
        raise ScenarioError("The analytic solver needs delta_A12 = 0 and delta_J12 = 0; use the numeric solver.")
    if coherent.drive is not None:
        raise ScenarioError("The analytic solver does not handle a drive; use the numeric solver.")
    gamma = tuple(max(rate, 0.0) for rate in gamma_rates(noise.a, noise.A))
    return _build_rates(noise.a, gamma, f_rates(coherent.J, coherent.psi))


def _transfer_kernel(source, target, t, threshold):
    """(exp(source t) - exp(target t)) / (source - target), entire in the exponents."""
    gap = source - target
    if abs(gap) < threshold:
        return t * np.exp(target * t)
    return (np.exp(source * t) - np.exp(target * t)) / gap


def _cascade_kernel(exponents, t):
    """Last component of the chain y1' = e1 y1, y_n' = e_n y_n + y_{n-1}, y(0) = (1, 0, ...)."""
    n = len(exponents)
    generator = np.diag(np.asarray(exponents, dtype=complex)) + np.diag(np.ones(n - 1), -1)
    return linalg.expm(generator * t)[-1, 0]


def _half_exponent(rates, chi_i, chi_j):
    return (-(rates.gamma_of(-chi_i) + rates.gamma_of(-chi_j)) / 2
            - 1j * (rates.f_of(-chi_i) - rates.f_of(-chi_j)))


def _minus_half_exponent(rates, chi_i, chi_j):
    return (-(2 * rates.a + rates.gamma_of(chi_i) + rates.gamma_of(chi_j)) / 2
            - 1j * (rates.f_of(chi_i) - rates.f_of(chi_j)))


def _exponent_table(exponent, rates):
    return np.array([[exponent(rates, ci, cj) for cj in SECTOR_CHIRALITIES] for ci in SECTOR_CHIRALITIES])


def _closed(rho, initial_weight):
    rho[0, 0] = initial_weight - np.real(np.trace(rho[1:, 1:]))
    return DensityMatrix(rho, EIGEN_BASIS)


def evolve_from_half(rho0_block, rates, t):
    """Sector S^z = 1/2 block: each entry keeps its own exponential; the rest drains to uuu."""
    rho0_block = np.asarray(rho0_block, dtype=complex)
    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[_HALF, _HALF] = rho0_block * np.exp(_exponent_table(_half_exponent, rates) * t)
    return _closed(rho, np.real(np.trace(rho0_block)))


def evolve_from_minus_half(rho0_block, rates, t):
    rho0_block = np.asarray(rho0_block, dtype=complex)
    minus_exponents = _exponent_table(_minus_half_exponent, rates)
    half_exponents = _exponent_table(_half_exponent, rates)
    threshold = rates.singular_threshold

    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[_MINUS_HALF, _MINUS_HALF] = rho0_block * np.exp(minus_exponents * t)

    half = np.zeros((3, 3), dtype=complex)
    position = {chi: p for p, chi in enumerate(SECTOR_CHIRALITIES)}
    for k in CHIRALITIES:
        gamma_k = rates.gamma_of(k)
        if gamma_k == 0:
            continue
        for p, chi in enumerate(SECTOR_CHIRALITIES):
            for q, chi_prime in enumerate(SECTOR_CHIRALITIES):
                if rho0_block[p, q] == 0:
                    continue
                i = position[wrap_chirality(chi + k)]
                j = position[wrap_chirality(chi_prime + k)]
                weight = (transfer_amplitude(gamma_k, k, chi)
                          * np.conj(transfer_amplitude(gamma_k, k, chi_prime)) * rho0_block[p, q])
                half[i, j] += weight * _transfer_kernel(minus_exponents[p, q], half_exponents[i, j], t, threshold)
    rho[_HALF, _HALF] = half
    return _closed(rho, np.real(np.trace(rho0_block)))


def evolve_from_lowest(rho0_weight, rates, t):
    """Cascade out of ddd: populations only, no coherence is ever created."""
    a = rates.a
    rho = np.zeros((DIM, DIM), dtype=complex)
    rho[DIM - 1, DIM - 1] = rho0_weight * np.exp(-3 * a * t)
    threshold = rates.singular_threshold
    for j, chi in enumerate(SECTOR_CHIRALITIES):
        into_minus = rates.upsilon32[j]
        if into_minus == 0:
            continue
        minus_rate = a + rates.gamma_of(chi)
        rho[_MINUS_HALF.start + j, _MINUS_HALF.start + j] = (
            rho0_weight * into_minus * _transfer_kernel(-3 * a, -minus_rate, t, threshold))
        for i, chi_plus in enumerate(SECTOR_CHIRALITIES):
            into_half = rates.upsilon21[i, j]
            if into_half == 0:
                continue
            chain = (-3 * a, -minus_rate, -rates.gamma_of(-chi_plus))
            rho[_HALF.start + i, _HALF.start + i] += (
                rho0_weight * into_minus * into_half * _cascade_kernel(chain, t))
    rho = np.real(rho).astype(complex)
    return _closed(rho, rho0_weight)


def s_amplitude(k, t, rates):
    """S_k(t) = sum_c exp(-gamma_c t/2) exp(-i f_c t) eta^(-k c), c in (0, 1, -1)."""
    return sum(
        np.exp(-rates.gamma_of(c) * t / 2) * np.exp(-1j * rates.f_of(c) * t) * ETA ** (-k * c)
        for c in CHIRALITIES
    )


def sector_coherence(rho0_eigen):
    """Largest |rho_ij| between two different S^z sectors of an eigenbasis state."""
    matrix = rho0_eigen.matrix if isinstance(rho0_eigen, DensityMatrix) else np.asarray(rho0_eigen)
    mask = np.zeros((DIM, DIM), dtype=bool)
    for block in _SLICES.values():
        mask[block, block] = True
    return float(np.max(np.abs(matrix[~mask])))


def _split_blocks(rho0_eigen):
    matrix = rho0_eigen.matrix if isinstance(rho0_eigen, DensityMatrix) else np.asarray(rho0_eigen)
    leak = sector_coherence(matrix)
    if leak > BLOCK_LEAK_TOLERANCE:
        raise ScenarioError(
            f"Initial state has coherences between S^z sectors (max {leak:.2e}); "
            "the analytic solver does not cover it, use the numeric solver.")
    return matrix


def evolve(rho0_eigen, rates, times):
    """Eigenbasis states at each time for a sector-block-diagonal initial state."""
    matrix = _split_blocks(rho0_eigen)
    top = np.real(matrix[0, 0])
    half = matrix[_HALF, _HALF]
    minus_half = matrix[_MINUS_HALF, _MINUS_HALF]
    bottom = np.real(matrix[DIM - 1, DIM - 1])
    has_half, has_minus, has_bottom = (np.any(half != 0), np.any(minus_half != 0), bottom != 0)
    logging.info(f"Analytic evolution: sectors 1/2={has_half}, -1/2={has_minus}, -3/2={has_bottom}.")

    states = np.zeros((len(times), DIM, DIM), dtype=complex)
    for n, t in enumerate(times):
        rho = np.zeros((DIM, DIM), dtype=complex)
        rho[0, 0] = top
        if has_half:
            rho += evolve_from_half(half, rates, t).matrix
        if has_minus:
            rho += evolve_from_minus_half(minus_half, rates, t).matrix
        if has_bottom:
            rho += evolve_from_lowest(bottom, rates, t).matrix
        states[n] = rho
    return states


def solve(rho0_pauli, rates, times):
    """Pauli-basis TimeSeries from the closed forms."""
    rho0_eigen = pauli_to_eigen(DensityMatrix(np.asarray(rho0_pauli, dtype=complex)))
    eigen_states = evolve(rho0_eigen, rates, times)
    pauli_states = np.array([eigen_to_pauli(DensityMatrix(rho, EIGEN_BASIS)).matrix for rho in eigen_states])
    return TimeSeries(times=np.asarray(times, dtype=float), states=pauli_states)
