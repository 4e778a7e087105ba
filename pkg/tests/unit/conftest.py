# tests/unit/conftest.py
import os
import pytest
import numpy as np

from src.chiral_basis import eigenstate
from src.model import CoherentModel, NoiseModel
from src.qubit_algebra import ket_to_dm


@pytest.fixture
def dark_noise():
    """Working point where the achiral W state is dark: a=1, |A|=0.5, phi=pi."""
    return NoiseModel(a=1.0, A_abs=0.5, phi=np.pi)


@pytest.fixture
def coherent():
    return CoherentModel()


@pytest.fixture
def w_dm():
    return ket_to_dm(eigenstate('W0'))


@pytest.fixture
def random_dm():
    """A full-rank random density matrix (fixed seed)."""
    rng = np.random.default_rng(7)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = m @ np.conj(m).T
    return rho / np.trace(rho)


@pytest.fixture
def output_dir(tmp_path):
    path = tmp_path / "results"
    return str(path)


@pytest.fixture
def write_scenario(tmp_path):
    """Writes scenario text to <tmp>/<name>.ini and returns the path."""
    def _write(text, name='scenario'):
        path = os.path.join(tmp_path, f"{name}.ini")
        with open(path, 'w') as f:
            f.write(text)
        return path
    return _write
