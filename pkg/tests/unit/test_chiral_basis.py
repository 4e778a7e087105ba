import pytest
import numpy as np

from src.chiral_basis import (
    BASIS_MAP, EIGEN_LABELS, SectorLabel, chirality_operator, eigen_to_pauli, eigenstate, pauli_to_eigen,
    populations, sector_slices, to_conventional_listing, total_sz_operator, wrap_chirality,
)
from src.errors import BasisError
from src.qubit_algebra import EIGEN_BASIS, PAULI_BASIS, DensityMatrix, adjoint, ket_to_dm, pauli_product_state


def test_basis_unitary_is_unitary():
    u = BASIS_MAP.unitary
    assert np.allclose(adjoint(u) @ u, np.eye(8))


def test_eigenstates_carry_their_total_spin():
    sz = total_sz_operator()
    for column, label in enumerate(EIGEN_LABELS):
        state = BASIS_MAP.unitary[:, column]
        assert np.allclose(sz @ state, label.sz * state), label


def test_eigenstates_diagonalize_the_chirality():
    """Each eigenstate is a chirality eigenvector with eigenvalue equal to its label."""
    chirality = chirality_operator()
    for column, label in enumerate(EIGEN_LABELS):
        state = BASIS_MAP.unitary[:, column]
        assert np.allclose(chirality @ state, label.chi * state, atol=1e-12), (BASIS_MAP.names[column], label)


def test_named_chiral_states():
    assert EIGEN_LABELS[BASIS_MAP.index('Wp')] == SectorLabel(0.5, 1)
    assert EIGEN_LABELS[BASIS_MAP.index('Wm')] == SectorLabel(0.5, -1)
    assert EIGEN_LABELS[BASIS_MAP.index('Vp')] == SectorLabel(-0.5, 1)
    assert np.allclose(eigenstate('Wp')[[4, 2, 1]], np.exp(2j * np.pi / 3 * np.arange(3)) / np.sqrt(3))


def test_named_lookup_and_aliases():
    assert BASIS_MAP.index('down3') == 7
    assert BASIS_MAP.index('up3') == 0
    assert BASIS_MAP.index('Wm') == 2
    with pytest.raises(ValueError, match="Unknown eigenstate label"):
        BASIS_MAP.index('W7')


def test_sector_label_validation():
    with pytest.raises(ValueError):
        SectorLabel(1.5, 1)
    with pytest.raises(ValueError):
        SectorLabel(0.25, 0)
    assert SectorLabel(-0.5, -1).chi == -1


def test_wrap_chirality():
    assert [wrap_chirality(c) for c in (-2, -1, 0, 1, 2, 3, 4)] == [1, -1, 0, 1, -1, 0, 1]


def test_sector_slices_cover_the_space():
    slices = sector_slices()
    covered = sorted(i for s in slices.values() for i in range(8)[s])
    assert covered == list(range(8))


def test_rotation_round_trip(random_dm):
    # 1. ACT
    eigen = pauli_to_eigen(DensityMatrix(random_dm))
    back = eigen_to_pauli(eigen)

    # 2. ASSERT
    assert eigen.basis == EIGEN_BASIS
    assert back.basis == PAULI_BASIS
    assert np.allclose(back.matrix, random_dm)


def test_rotation_refuses_the_wrong_tag(random_dm):
    with pytest.raises(BasisError, match="Expected a eigen-basis"):
        eigen_to_pauli(DensityMatrix(random_dm, PAULI_BASIS))
    with pytest.raises(BasisError):
        pauli_to_eigen(DensityMatrix(random_dm, EIGEN_BASIS))


def test_w_state_is_one_population_in_the_eigenbasis(w_dm):
    rho = pauli_to_eigen(DensityMatrix(w_dm)).matrix
    assert rho[1, 1] == pytest.approx(1)
    assert np.isclose(np.sum(np.abs(rho)), 1)


def test_product_state_populations():
    """|duu> spreads evenly over the three W states."""
    # 1. ACT
    pops = populations(ket_to_dm(pauli_product_state('duu')))

    # 2. ASSERT
    for name in ('W0', 'Wp', 'Wm'):
        assert pops[name] == pytest.approx(1 / 3)
    assert sum(pops.values()) == pytest.approx(1)


def test_conventional_listing_order():
    rho = ket_to_dm(pauli_product_state('duu'))
    listed = to_conventional_listing(rho)
    assert listed[1, 1] == 1
    listed = to_conventional_listing(ket_to_dm(pauli_product_state('udd')))
    assert listed[4, 4] == 1


def test_achiral_w_projector_in_the_pauli_basis():
    """|1/2, 0><1/2, 0| fills the one-down block with 1/3 and nothing else."""
    # 1. ARRANGE
    rho = np.zeros((8, 8), dtype=complex)
    rho[1, 1] = 1.0

    # 2. ACT
    pauli = eigen_to_pauli(DensityMatrix(rho, EIGEN_BASIS)).matrix

    # 3. ASSERT
    one_down = np.ix_([4, 2, 1], [4, 2, 1])
    assert np.allclose(pauli[one_down], 1 / 3)
    assert np.sum(np.abs(pauli)) == pytest.approx(3.0)
