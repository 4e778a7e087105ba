import pytest
import numpy as np
from dataclasses import replace

from src.errors import CalibrationError, IntegrationError
from src.integrator import (
    EvolutionSpec, build_evolution_spec, calibrate_pulse, fastest_scale, liouvillian_apply, max_stable_step,
    propagate,
)
from src.model import (
    CoherentModel, Drive, NoiseModel, dissipator_double_sum, hamiltonian_asymmetry, hamiltonian_effective,
    hamiltonian_system,
)
from src.qubit_algebra import DensityMatrix, commutator, is_hermitian
from src.scenario import initial_state


def _full_hamiltonian(c):
    return hamiltonian_system(c) + hamiltonian_effective(c) + hamiltonian_asymmetry(c)


def test_ground_state_is_stationary(dark_noise, coherent):
    spec = build_evolution_spec(dark_noise, coherent)
    drho = liouvillian_apply(initial_state('uuu'), spec, 0.0)
    assert np.allclose(drho, 0, atol=1e-12)


@pytest.mark.parametrize("noise, c", [
    (NoiseModel(a=1.0, A_abs=0.5, phi=np.pi), CoherentModel(J=1.0)),
    (NoiseModel(a=1.0, A_abs=0.3, phi=np.pi / 2, beta_delta=2.0), CoherentModel(J=0.5, psi=0.4)),
    (NoiseModel(a=1.0, A_abs=0.4, phi=1.0, delta_A12=0.02 + 0.01j), CoherentModel(J=1.0, delta_J12=0.2)),
])
def test_full_lindblad_generator(noise, c, random_dm):
    """At alpha = 0 the hybrid generator is -i[H, rho] plus the rate-matrix dissipator."""
    # 1. ARRANGE
    spec = build_evolution_spec(noise, c)

    # 2. ACT
    drho = liouvillian_apply(DensityMatrix(random_dm), spec, 0.0)

    # 3. ASSERT
    expected = -1j * commutator(_full_hamiltonian(c), random_dm) + dissipator_double_sum(random_dm, noise)
    assert np.allclose(drho, expected, atol=1e-12)
    assert abs(np.trace(drho)) < 1e-12
    assert np.max(np.abs(drho - np.conj(drho).T)) < 1e-13


def test_conditional_evolution_drains_the_trace(dark_noise, coherent):
    """With alpha = 1, |ddd> loses norm at the total rate 3a."""
    spec = build_evolution_spec(dark_noise, coherent, alpha=1.0)
    rho = initial_state('ddd')
    drho = liouvillian_apply(rho, spec, 0.0)
    assert np.real(np.trace(drho)) == pytest.approx(-3 * dark_noise.a * np.real(np.trace(rho)))


def test_excitations_are_dropped_under_postselection():
    noise = NoiseModel(beta_delta=2.0)
    assert len(build_evolution_spec(noise, CoherentModel(), alpha=0.0).jumps) == 6
    assert len(build_evolution_spec(noise, CoherentModel(), alpha=0.5).jumps) == 3


def test_spec_validation():
    jumps = np.zeros((0, 8, 8), dtype=complex)
    with pytest.raises(ValueError, match="alpha"):
        EvolutionSpec(hamiltonian=np.zeros((8, 8)), jumps=jumps, alpha=1.5)
    with pytest.raises(ValueError, match="two samples"):
        EvolutionSpec(hamiltonian=np.zeros((8, 8)), jumps=jumps, sample_count=1)
    with pytest.raises(ValueError, match="positive"):
        EvolutionSpec(hamiltonian=np.zeros((8, 8)), jumps=jumps, t_max=0.0)


def test_step_size_above_the_stability_bound_is_refused(dark_noise, coherent):
    spec = build_evolution_spec(dark_noise, coherent, t_max=1.0, sample_count=3, dt=1.0)
    with pytest.raises(IntegrationError, match="stability bound"):
        propagate(initial_state('duu'), spec)


def test_non_finite_states_abort(dark_noise, coherent):
    spec = build_evolution_spec(dark_noise, coherent, t_max=1.0, sample_count=3)
    rho = initial_state('duu').copy()
    rho[1, 1] = np.nan
    with pytest.raises(IntegrationError, match="Non-finite"):
        propagate(rho, spec)


def test_fastest_scale_includes_the_drive(dark_noise):
    undriven = build_evolution_spec(dark_noise, CoherentModel(J=10.0))
    driven = build_evolution_spec(dark_noise, CoherentModel(J=10.0, drive=Drive(1.0, 120.0)))
    assert fastest_scale(driven) >= 120.0
    assert fastest_scale(undriven) < fastest_scale(driven)
    assert max_stable_step(driven) == pytest.approx(0.05 / fastest_scale(driven))


def test_propagation_preserves_trace_and_positivity(dark_noise):
    # 1. ARRANGE
    spec = build_evolution_spec(dark_noise, CoherentModel(J=1.0), t_max=5.0, sample_count=51)

    # 2. ACT
    series = propagate(initial_state('ddd'), spec)

    # 3. ASSERT
    assert np.allclose(series.traces, 1, atol=1e-8)
    assert all(is_hermitian(rho) for rho in series.states)
    assert min(np.linalg.eigvalsh(rho)[0] for rho in series.states) > -1e-7
    assert series.times[-1] == pytest.approx(5.0)


def test_rotating_frame_matches_the_lab_frame(dark_noise):
    """Propagating with H_S removed and rotating back gives the lab-frame trajectory."""
    # 1. ARRANGE
    rotating = build_evolution_spec(dark_noise, CoherentModel(J=1.0), t_max=2.0, sample_count=5)
    lab = replace(rotating, system_energies=None)
    rho0 = 0.5 * initial_state('duu') + 0.5 * initial_state('ghz')

    # 2. ACT
    fast = propagate(rho0, rotating)
    slow = propagate(rho0, lab)

    # 3. ASSERT
    assert rotating.rotating and not lab.rotating
    assert fast.max_deviation(slow) < 1e-4


def test_conditional_state_loses_norm(dark_noise, coherent):
    spec = build_evolution_spec(dark_noise, coherent, alpha=1.0, t_max=5.0, sample_count=11)
    series = propagate(initial_state('duu'), spec)
    assert series.traces[-1] == pytest.approx(1 / 3, abs=1e-3)
    assert np.all(np.diff(series.traces) <= 1e-12)


def test_calibration_needs_a_drive(dark_noise, coherent):
    spec = build_evolution_spec(dark_noise, coherent)
    with pytest.raises(CalibrationError, match="needs a drive"):
        calibrate_pulse(spec)
    weak = build_evolution_spec(dark_noise, CoherentModel(drive=Drive(0.0, 100.0)))
    with pytest.raises(CalibrationError, match="too small"):
        calibrate_pulse(weak)
