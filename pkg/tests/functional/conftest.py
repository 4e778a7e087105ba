# tests/functional/conftest.py
import pytest
import numpy as np

from src.analytic_solver import sector_rates, solve
from src.entanglement import series_table
from src.integrator import build_evolution_spec, propagate
from src.model import NoiseModel
from src.scenario import initial_state


@pytest.fixture
def dark_noise():
    """The working point of the published plots: a=1, |A|=0.5, phi=pi, zero temperature."""
    return NoiseModel(a=1.0, A_abs=0.5, phi=np.pi)


@pytest.fixture
def output_dir(tmp_path):
    return str(tmp_path / "results")


@pytest.fixture
def analytic_run():
    """Returns (series, table) from the closed-form solver."""
    def _run(noise, coherent, init, t_max, sample_count=201):
        times = np.linspace(0.0, t_max, sample_count)
        series = solve(initial_state(init), sector_rates(noise, coherent), times)
        return series, series_table(series)
    return _run


@pytest.fixture
def numeric_run():
    """Returns (series, table) from the RK4 integrator."""
    def _run(noise, coherent, init, t_max, sample_count=201, alpha=0.0, dt=None):
        spec = build_evolution_spec(noise, coherent, alpha=alpha, t_max=t_max, sample_count=sample_count, dt=dt)
        series = propagate(initial_state(init), spec)
        return series, series_table(series)
    return _run
