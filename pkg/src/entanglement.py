import logging
from typing import NamedTuple

import numpy as np

from src.analytic_solver import s_amplitude
from src.chiral_basis import eigenstate, populations
from src.qubit_algebra import DensityMatrix, hermitian_eigenvalues, min_eigenvalue, partial_transpose

# --- Constants ---
NOISE_FLOOR = 1e-12
TRACE_TOLERANCE = 1e-6
W_NEGATIVITY = 2 * np.sqrt(2) / 3
CSV_COLUMNS = ('t', 'trace', 'N123', 'N1', 'N2', 'N3', 'F_W0',
               'p_uuu', 'p_W0', 'p_Wp', 'p_Wm', 'p_V0', 'p_Vp', 'p_Vm', 'p_ddd')
_TARGET_NAMES = {0: 'W0', 1: 'Wp', -1: 'Wm'}


class NegativityReport(NamedTuple):
    n1: float
    n2: float
    n3: float
    n123: float
    w_fidelity: float


def _matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def bipartite_negativity(rho, j):
    """2 * sum of |negative eigenvalues| of the partial transpose on qubit j."""
    matrix = _matrix(rho)
    trace = np.real(np.trace(matrix))
    if abs(trace - 1) > TRACE_TOLERANCE:
        raise ValueError(f"Negativity needs a unit-trace state, got trace {trace:.8f}; normalise first.")
    values = hermitian_eigenvalues(partial_transpose(rho, j))
    negative = values[values < -NOISE_FLOOR]
    return float(-2 * np.sum(negative))


def geometric_mean(n1, n2, n3):
    return float(np.cbrt(n1 * n2 * n3))


def tripartite_negativity(rho):
    return geometric_mean(*(bipartite_negativity(rho, j) for j in (1, 2, 3)))


def negativity_from_fidelity(F):
    """Tripartite negativity of F |W><W| + (1 - F) |uuu><uuu|."""
    rest = 1 - F
    return float(np.sqrt((W_NEGATIVITY * F) ** 2 + rest ** 2) - rest)


def w_fidelity(rho, chi_target=0):
    matrix = _matrix(rho)
    target = eigenstate(_TARGET_NAMES[chi_target])
    value = np.real(np.vdot(target, matrix @ target)) / np.real(np.trace(matrix))
    return float(value)


def negativity_report(rho, chi_target=0):
    n1, n2, n3 = (bipartite_negativity(rho, j) for j in (1, 2, 3))
    return NegativityReport(n1, n2, n3, geometric_mean(n1, n2, n3), w_fidelity(rho, chi_target))


def analytic_negativity_product_init(t, rates):
    """Closed-form negativities for the evolution of |duu> in the dark-state sector."""
    weights = [abs(s_amplitude(k, t, rates)) ** 2 for k in range(3)]
    ground = 1 - sum(np.exp(-rates.gamma_of(c) * t) for c in (0, 1, -1)) / 3
    bipartite = []
    for j in range(3):
        others = sum(weights) - weights[j]
        bipartite.append(float(np.sqrt(ground ** 2 + 4 * weights[j] * others / 81) - ground))
    fidelity = float(np.exp(-rates.gamma_of(0) * t) / 3)
    return NegativityReport(*bipartite, geometric_mean(*bipartite), fidelity)


def postselection_fidelity(alpha):
    """Long-time W fidelity of the conditional state at the dark-state point."""
    return 1 / (3 - 2 * alpha)


def dark_state_lifetime_fit(times, pops):
    """Decay rate from a log-linear least-squares fit of an exponential tail."""
    times = np.asarray(times, dtype=float)
    pops = np.asarray(pops, dtype=float)
    usable = pops > NOISE_FLOOR
    if np.count_nonzero(usable) < 2:
        raise ValueError("Need at least two positive populations to fit a lifetime.")
    slope, _ = np.polyfit(times[usable], np.log(pops[usable]), 1)
    return float(-slope)


def series_table(series):
    """Observable columns for every sample; measures use the normalised state."""
    rows = []
    for t, rho, trace in zip(series.times, series.normalized_states, series.traces):
        n1, n2, n3 = (bipartite_negativity(rho, j) for j in (1, 2, 3))
        pops = populations(rho)
        rows.append((t, trace, geometric_mean(n1, n2, n3), n1, n2, n3, w_fidelity(rho, 0),
                     pops['uuu'], pops['W0'], pops['Wp'], pops['Wm'],
                     pops['V0'], pops['Vp'], pops['Vm'], pops['ddd']))
    table = np.array(rows, dtype=float)
    logging.info(f"Measured {len(rows)} samples; final N123={table[-1, 2]:.6f}.")
    return {name: table[:, col] for col, name in enumerate(CSV_COLUMNS)}


def min_eigenvalues(series):
    return np.array([min_eigenvalue(rho) for rho in series.normalized_states])
