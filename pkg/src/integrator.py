import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy import linalg, optimize

from src.chiral_basis import eigenstate
from src.errors import CalibrationError, IntegrationError
from src.model import (
    Drive, drive_term, hamiltonian_asymmetry, hamiltonian_effective, hamiltonian_system, jump_operators,
)
from src.qubit_algebra import DIM, PAULI_BASIS, DensityMatrix, adjoint, ket_to_dm, pauli_product_state
from src.timeseries import TimeSeries

# --- Constants ---
STEP_SCALE_PRODUCT = 0.05
CALIBRATION_SAMPLES = 401
CALIBRATION_SPAN_IN_RWA = 4
MIN_DRIVE_AMPLITUDE = 1e-9
_TARGET_NAMES = {0: 'W0', 1: 'Wp', -1: 'Wm'}


@dataclass(frozen=True, eq=False)
class EvolutionSpec:
    """
    Everything the propagator needs.

    `hamiltonian` is the static lab-frame part (H_S + H_eff + H'); when
    `system_energies` holds the diagonal of H_S and there is no drive the
    propagation runs in the frame rotating with H_S. Samples are taken at
    t0 + i * t_max / (sample_count - 1).
    """
    hamiltonian: np.ndarray
    jumps: np.ndarray
    alpha: float = 0.0
    t_max: float = 20.0
    sample_count: int = 400
    dt: float | None = None
    drive: Drive | None = None
    system_energies: np.ndarray | None = None
    t0: float = 0.0

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"Post-selection level alpha must lie in [0, 1], got {self.alpha}.")
        if self.sample_count < 2:
            raise ValueError(f"Need at least two samples, got {self.sample_count}.")
        if not self.t_max > 0:
            raise ValueError(f"Propagation span must be positive, got {self.t_max}.")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"Step size must be positive, got {self.dt}.")

    @cached_property
    def jumps_dag(self):
        return np.conj(np.swapaxes(self.jumps, 1, 2))

    @cached_property
    def jump_norm(self):
        if len(self.jumps) == 0:
            return np.zeros((DIM, DIM), dtype=complex)
        return np.sum(self.jumps_dag @ self.jumps, axis=0)

    @property
    def rotating(self):
        return self.drive is None and self.system_energies is not None

    @cached_property
    def frame_hamiltonian(self):
        if self.rotating:
            return self.hamiltonian - np.diag(self.system_energies)
        return self.hamiltonian


class PulseCalibration(NamedTuple):
    tau: float
    fidelity: float
    taus: np.ndarray
    fidelities: np.ndarray
    area_rabi: float
    area_bare: float


def build_evolution_spec(noise, coherent, alpha=0.0, t_max=20.0, sample_count=400, dt=None):
    jump_set = jump_operators(noise)
    thermal = not noise.is_zero_temperature
    if alpha > 0 and thermal:
        logging.warning("Thermal excitation jumps are switched off under post-selection (alpha > 0).")
    jumps = jump_set.active_ops(include_excitations=thermal and alpha == 0)
    h_system = hamiltonian_system(coherent)
    hamiltonian = h_system + hamiltonian_effective(coherent) + hamiltonian_asymmetry(coherent)
    return EvolutionSpec(
        hamiltonian=hamiltonian,
        jumps=jumps,
        alpha=alpha,
        t_max=t_max,
        sample_count=sample_count,
        dt=dt,
        drive=coherent.drive,
        system_energies=np.real(np.diag(h_system)).copy(),
    )


def _spectral_spread(h):
    values = linalg.eigvalsh(0.5 * (h + adjoint(h)))
    return float(values[-1] - values[0])


def fastest_scale(spec):
    """Largest rate the fixed-step stepper has to resolve."""
    scale = _spectral_spread(spec.frame_hamiltonian) + float(linalg.eigvalsh(spec.jump_norm)[-1])
    if spec.drive is not None:
        scale = max(scale, spec.drive.omega) + 2 * np.sqrt(3) * spec.drive.amplitude
    return scale


def _generator(spec):
    """Returns t -> H_non in the propagation frame."""
    static = spec.frame_hamiltonian - 0.5j * spec.jump_norm
    if spec.drive is None:
        return lambda t: static
    drive = spec.drive
    return lambda t: static + drive_term(drive, t)


def _rhs(rho, h_non, spec):
    drho = -1j * (h_non @ rho - rho @ adjoint(h_non))
    recycling = 1 - spec.alpha
    if recycling and len(spec.jumps):
        drho += recycling * np.sum(spec.jumps @ rho @ spec.jumps_dag, axis=0)
    return drho


def liouvillian_apply(rho, spec, t):
    """Lab-frame d(rho)/dt of the hybrid Liouvillian (the full Lindblad equation at alpha = 0)."""
    matrix = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    h = spec.hamiltonian
    if spec.drive is not None:
        h = h + drive_term(spec.drive, t)
    return _rhs(matrix, h - 0.5j * spec.jump_norm, spec)


def _rk4_step(rho, t, h, generator, spec):
    k1 = _rhs(rho, generator(t), spec)
    k2 = _rhs(rho + 0.5 * h * k1, generator(t + 0.5 * h), spec)
    k3 = _rhs(rho + 0.5 * h * k2, generator(t + 0.5 * h), spec)
    k4 = _rhs(rho + h * k3, generator(t + h), spec)
    return rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def max_stable_step(spec):
    scale = fastest_scale(spec)
    return STEP_SCALE_PRODUCT / scale if scale > 0 else np.inf


def _step_plan(spec):
    interval = spec.t_max / (spec.sample_count - 1)
    dt_max = max_stable_step(spec)
    if spec.dt is not None and spec.dt > dt_max * (1 + 1e-9):
        raise IntegrationError(
            f"Step size {spec.dt:.3e} exceeds the stability bound {dt_max:.3e} "
            f"(fastest scale {fastest_scale(spec):.3e}); reduce dt.")
    target = min(spec.dt if spec.dt is not None else dt_max, interval)
    substeps = max(1, math.ceil(interval / target - 1e-9))
    return interval, substeps


def _frame_phases(spec):
    energies = spec.system_energies
    return energies[:, None] - energies[None, :]


def propagate(rho0, spec):
    """Fixed-step RK4 trajectory sampled on the grid `spec` describes."""
    if isinstance(rho0, DensityMatrix):
        if rho0.basis != PAULI_BASIS:
            raise ValueError("propagate expects a Pauli-basis initial state.")
        rho0 = rho0.matrix
    rho = np.array(rho0, dtype=complex)
    interval, substeps = _step_plan(spec)
    h = interval / substeps
    times = spec.t0 + interval * np.arange(spec.sample_count)
    generator = _generator(spec)
    phases = _frame_phases(spec) if spec.rotating else None
    logging.info(f"Propagating {spec.sample_count} samples over {spec.t_max:g} with {substeps} RK4 "
                 f"substeps of {h:.3e} ({'rotating' if spec.rotating else 'lab'} frame).")

    if phases is not None:
        rho = rho * np.exp(1j * phases * spec.t0)
    states = np.empty((spec.sample_count, DIM, DIM), dtype=complex)
    states[0] = rho0
    for n in range(1, spec.sample_count):
        start = times[n - 1]
        for s in range(substeps):
            rho = _rk4_step(rho, start + s * h, h, generator, spec)
            rho = 0.5 * (rho + adjoint(rho))
        if not np.all(np.isfinite(rho)):
            raise IntegrationError(f"Non-finite density matrix at t={times[n]:.6g}; the model or step size is unstable.")
        states[n] = rho * np.exp(-1j * phases * times[n]) if phases is not None else rho
    return TimeSeries(times=times, states=states)


def _fidelity(rho, target):
    return float(np.real(np.vdot(target, rho @ target)) / np.real(np.trace(rho)))


def calibrate_pulse(spec, chi_target=0):
    """Drive duration maximising the W fidelity at pulse end, starting from |uuu>."""
    drive = spec.drive
    if drive is None:
        raise CalibrationError("Pulse calibration needs a drive.")
    if drive.amplitude < MIN_DRIVE_AMPLITUDE:
        raise CalibrationError(f"Drive amplitude {drive.amplitude:g} is too small; the pulse duration diverges.")
    tau_rwa = np.pi / (np.sqrt(3) * drive.amplitude)
    span = CALIBRATION_SPAN_IN_RWA * tau_rwa
    logging.info(f"Calibrating pulse: rotating-wave estimate {tau_rwa:.6g}, scanning [0, {span:.6g}].")

    target = eigenstate(_TARGET_NAMES[chi_target])
    scan_spec = replace(spec, drive=replace(drive, duration=np.inf), t0=0.0, t_max=span,
                        sample_count=CALIBRATION_SAMPLES)
    rho0 = ket_to_dm(pauli_product_state('uuu'))
    series = propagate(rho0, scan_spec)
    fidelities = np.array([_fidelity(rho, target) for rho in series.states])
    best = int(np.argmax(fidelities))
    if fidelities[best] <= fidelities[0] + 1e-9:
        raise CalibrationError(f"Drive never raised the W fidelity above its initial value {fidelities[0]:.3e}.")

    left = max(best - 1, 0)
    right = min(best + 1, CALIBRATION_SAMPLES - 1)
    t_left, start_state = series.times[left], series.states[left]

    def infidelity(tau):
        if tau - t_left < 1e-12:
            return -fidelities[left]
        piece = replace(scan_spec, t0=t_left, t_max=tau - t_left, sample_count=2)
        return -_fidelity(propagate(start_state, piece).states[-1], target)

    result = optimize.minimize_scalar(infidelity, bounds=(t_left, series.times[right]),
                                      method='bounded', options={'xatol': 1e-6})
    tau, fidelity = series.times[best], fidelities[best]
    if result.success and -result.fun > fidelity:
        tau, fidelity = float(result.x), float(-result.fun)
    else:
        logging.warning("Pulse refinement did not improve on the grid optimum; keeping the grid value.")
    logging.info(f"Calibrated pulse: tau*={tau:.6g}, fidelity={fidelity:.6f}.")
    return PulseCalibration(
        tau=float(tau),
        fidelity=float(fidelity),
        taus=series.times,
        fidelities=fidelities,
        area_rabi=float(np.sqrt(3) * drive.amplitude * tau / np.pi),
        area_bare=float(drive.amplitude * tau / np.pi),
    )
