from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sampled trajectory. States are Pauli-basis and unnormalised (trace < 1 under post-selection)."""
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError(f"{len(self.times)} times for {len(self.states)} states.")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Sample times must be strictly increasing.")

    def __len__(self):
        return len(self.times)

    @property
    def traces(self):
        return np.real(np.trace(self.states, axis1=1, axis2=2))

    @property
    def normalized_states(self):
        return self.states / self.traces[:, None, None]

    def max_deviation(self, other):
        """Largest entrywise difference against another series on the same grid."""
        if not np.allclose(self.times, other.times):
            raise ValueError("Series are sampled on different time grids.")
        return float(np.max(np.abs(self.states - other.states)))
