import pytest
import numpy as np

from src.entanglement import W_NEGATIVITY, negativity_from_fidelity, tripartite_negativity
from src.model import CoherentModel, NoiseModel
from src.scenario import initial_state

PLATEAU = negativity_from_fidelity(1 / 3)


@pytest.mark.functional
class TestDarkStateFunctional:
    """
    End-to-end checks of the entanglement generated by correlated decay at the
    dark-state point (a=1, |A|=0.5, phi=pi, Delta=100).
    """

    def test_measure_calibration(self):
        assert tripartite_negativity(initial_state('ghz')) == pytest.approx(1, abs=1e-10)
        assert tripartite_negativity(initial_state('W0')) == pytest.approx(W_NEGATIVITY, abs=1e-10)

    def test_plateau_from_a_product_state(self, dark_noise, analytic_run, numeric_run):
        """
        |duu> keeps a third of its weight in the dark W state, so N123 settles at
        the value of a W mixture with fidelity 1/3 (about 0.07).
        """
        # 1. ACT
        _, analytic = analytic_run(dark_noise, CoherentModel(), 'duu', 20.0)
        _, numeric = numeric_run(dark_noise, CoherentModel(), 'duu', 20.0)

        # 2. ASSERT
        assert PLATEAU == pytest.approx(0.0703, abs=1e-3)
        assert analytic['N123'][-1] == pytest.approx(PLATEAU, abs=1e-3)
        assert numeric['N123'][-1] == pytest.approx(PLATEAU, abs=1e-3)
        assert analytic['N123'][0] == pytest.approx(0, abs=1e-12)

    def test_initialisations_in_the_lower_sectors(self, dark_noise, analytic_run):
        # 1. ACT
        _, minus_half = analytic_run(dark_noise, CoherentModel(), 'udd', 30.0, sample_count=301)
        _, lowest = analytic_run(dark_noise, CoherentModel(), 'ddd', 30.0, sample_count=301)

        # 2. ASSERT
        assert minus_half['N123'][-1] == pytest.approx(0.009, abs=0.002)
        assert lowest['N123'][-1] == pytest.approx(0.02, abs=0.005)

    def test_entanglement_burst_from_the_lowest_state(self, dark_noise, analytic_run):
        """|ddd> starts unentangled; entanglement appears only after the cascade has run."""
        _, table = analytic_run(dark_noise, CoherentModel(), 'ddd', 10.0)
        assert table['N123'][0] == pytest.approx(0, abs=1e-12)
        assert np.max(table['N123']) > 0.01

    @pytest.mark.parametrize("init", ['duu', 'udu', 'udd', 'ddd'])
    def test_uncorrelated_noise_never_entangles(self, init, analytic_run):
        _, table = analytic_run(NoiseModel(a=1.0, A_abs=0.0), CoherentModel(), init, 10.0)
        assert np.max(table['N123']) < 1e-9

    def test_plateau_does_not_depend_on_the_coupling(self, dark_noise, analytic_run):
        # 1. ACT
        finals = [analytic_run(dark_noise, CoherentModel(J=J), 'duu', 30.0)[1]['N123'][-1] for J in (0.0, 1.0, 10.0)]

        # 2. ASSERT
        for value in finals[1:]:
            assert value == pytest.approx(finals[0], abs=1e-6)
