import pytest
import numpy as np
from scipy.stats import unitary_group

from src.analytic_solver import sector_rates, solve
from src.chiral_basis import eigenstate
from src.entanglement import (
    CSV_COLUMNS, W_NEGATIVITY, analytic_negativity_product_init, bipartite_negativity, dark_state_lifetime_fit,
    negativity_from_fidelity, negativity_report, postselection_fidelity, series_table, tripartite_negativity,
    w_fidelity,
)
from src.model import CoherentModel, NoiseModel
from src.qubit_algebra import kron_all, ket_to_dm, pauli_product_state
from src.scenario import initial_state


def _w_mixture(F):
    return F * ket_to_dm(eigenstate('W0')) + (1 - F) * ket_to_dm(pauli_product_state('uuu'))


def test_calibration_states():
    assert tripartite_negativity(initial_state('ghz')) == pytest.approx(1, abs=1e-10)
    assert tripartite_negativity(initial_state('W0')) == pytest.approx(2 * np.sqrt(2) / 3, abs=1e-10)
    assert tripartite_negativity(np.eye(8) / 8) == 0
    assert tripartite_negativity(initial_state('uuu')) == 0


def test_bipartite_negativity_of_a_bell_pair():
    ket = np.zeros(8, dtype=complex)
    ket[0] = ket[6] = 1 / np.sqrt(2)
    rho = ket_to_dm(ket)
    assert bipartite_negativity(rho, 3) == pytest.approx(0, abs=1e-12)
    assert bipartite_negativity(rho, 1) == pytest.approx(1)
    assert tripartite_negativity(rho) == pytest.approx(0, abs=1e-12)


def test_w_state_has_equal_cuts(w_dm):
    for j in (1, 2, 3):
        assert bipartite_negativity(w_dm, j) == pytest.approx(W_NEGATIVITY)


def test_negativity_needs_unit_trace(w_dm):
    with pytest.raises(ValueError, match="unit-trace"):
        bipartite_negativity(0.5 * w_dm, 1)


def test_negativity_from_fidelity_values():
    assert negativity_from_fidelity(1.0) == pytest.approx(2 * np.sqrt(2) / 3)
    assert negativity_from_fidelity(0.0) == 0
    assert negativity_from_fidelity(1 / 3) == pytest.approx(0.070361, abs=1e-6)


@pytest.mark.parametrize("F", np.linspace(0, 1, 11))
def test_fidelity_closed_form_matches_the_pipeline(F):
    assert tripartite_negativity(_w_mixture(F)) == pytest.approx(negativity_from_fidelity(F), abs=1e-10)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_negativity_is_invariant_under_local_unitaries(seed, random_dm):
    # 1. ARRANGE
    local = kron_all(*(unitary_group.rvs(2, random_state=seed * 10 + q) for q in range(3)))
    rho = 0.7 * initial_state('W0') + 0.3 * random_dm

    # 2. ACT
    rotated = local @ rho @ np.conj(local).T

    # 3. ASSERT
    for j in (1, 2, 3):
        assert bipartite_negativity(rotated, j) == pytest.approx(bipartite_negativity(rho, j), abs=1e-10)


def test_partial_transpose_in_the_eigenbasis_gives_the_wrong_answer():
    """|W0> is a diagonal projector in the eigenbasis; transposing that matrix finds no entanglement."""
    # 1. ARRANGE
    eigen_matrix = np.zeros((8, 8), dtype=complex)
    eigen_matrix[1, 1] = 1.0

    # 2. ACT
    wrong = tripartite_negativity(eigen_matrix)
    right = tripartite_negativity(initial_state('W0'))

    # 3. ASSERT
    assert wrong == 0
    assert right == pytest.approx(W_NEGATIVITY)


def test_w_fidelity_targets():
    assert w_fidelity(initial_state('W0')) == pytest.approx(1)
    assert w_fidelity(initial_state('uuu')) == pytest.approx(0)
    assert w_fidelity(initial_state('Wp'), chi_target=1) == pytest.approx(1)
    assert w_fidelity(initial_state('Wp'), chi_target=0) == pytest.approx(0, abs=1e-12)
    assert w_fidelity(0.5 * initial_state('W0')) == pytest.approx(1)


def test_report_keeps_the_geometric_mean_identity(random_dm):
    rho = 0.8 * initial_state('W0') + 0.2 * random_dm
    report = negativity_report(rho)
    assert report.n123 == pytest.approx(np.cbrt(report.n1 * report.n2 * report.n3), abs=1e-12)
    assert 0 < report.w_fidelity < 1


def test_postselection_law():
    assert postselection_fidelity(0.0) == pytest.approx(1 / 3)
    assert postselection_fidelity(0.75) == pytest.approx(2 / 3)
    assert postselection_fidelity(1.0) == pytest.approx(1)


def test_lifetime_fit_recovers_the_rate():
    times = np.linspace(0, 20, 101)
    assert dark_state_lifetime_fit(times, np.exp(-0.2 * times) / 3) == pytest.approx(0.2)
    with pytest.raises(ValueError, match="two positive"):
        dark_state_lifetime_fit(times, np.zeros_like(times))


def test_product_init_closed_form_starts_unentangled(dark_noise, coherent):
    report = analytic_negativity_product_init(0.0, sector_rates(dark_noise, coherent))
    assert report.n123 == pytest.approx(0, abs=1e-12)
    assert report.w_fidelity == pytest.approx(1 / 3)


@pytest.mark.parametrize("J, phi", [(0.0, np.pi), (1.0, np.pi), (0.5, np.pi / 2)])
def test_product_init_closed_form_matches_the_pipeline(J, phi):
    """The closed-form negativities agree with evolve -> rotate -> partial transpose."""
    # 1. ARRANGE
    rates = sector_rates(NoiseModel(a=1.0, A_abs=0.5, phi=phi), CoherentModel(J=J))
    times = np.array([0.0, 0.7, 3.0, 12.0])

    # 2. ACT
    series = solve(initial_state('duu'), rates, times)

    # 3. ASSERT
    for t, rho in zip(times, series.states):
        closed = analytic_negativity_product_init(t, rates)
        report = negativity_report(rho)
        assert closed.n1 == pytest.approx(report.n1, abs=1e-9)
        assert closed.n2 == pytest.approx(report.n2, abs=1e-9)
        assert closed.n3 == pytest.approx(report.n3, abs=1e-9)
        assert closed.n123 == pytest.approx(report.n123, abs=1e-9)


def test_uncorrelated_noise_never_entangles():
    rates = sector_rates(NoiseModel(a=1.0, A_abs=0.0), CoherentModel())
    for t in (0.5, 2.0, 10.0):
        assert analytic_negativity_product_init(t, rates).n123 < 1e-9


def test_series_table_columns(dark_noise, coherent):
    series = solve(initial_state('duu'), sector_rates(dark_noise, coherent), np.linspace(0, 2, 5))
    table = series_table(series)
    assert tuple(table) == CSV_COLUMNS
    assert len(table['N123']) == 5
    assert np.allclose(table['trace'], 1)
