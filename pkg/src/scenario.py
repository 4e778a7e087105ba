"""
Declarative scenarios: INI files (or presets) describing one run or a sweep.

A scenario file has the sections [noise], [coherent], [drive], [run] and
[sweep]; every section and key is optional. Numbers may be written as
expressions in pi and inf, e.g. `phi = 2*pi/3`.
"""
import os
import ast
import copy
import logging
import operator
import configparser
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from src.analytic_solver import BLOCK_LEAK_TOLERANCE, sector_coherence, sector_rates, solve
from src.chiral_basis import BASIS_MAP, pauli_to_eigen
from src.entanglement import CSV_COLUMNS, min_eigenvalues, series_table
from src.errors import ModelError, ScenarioError
from src.integrator import build_evolution_spec, calibrate_pulse, max_stable_step, propagate
from src.model import CoherentModel, Drive, NoiseModel, validate_cp
from src.qubit_algebra import DIM, DensityMatrix, is_hermitian, ket_to_dm, pauli_product_state
from src.records import write_timeseries_csv

# --- Constants ---
SOLVERS = ('analytic', 'numeric', 'both')
SCENARIO_KEYS = {
    'noise': ('a', 'A_abs', 'phi', 'deltaA12_re', 'deltaA12_im', 'deltaA12_rel', 'delta_phi12', 'beta_delta'),
    'coherent': ('Delta', 'J', 'psi', 'deltaJ12'),
    'drive': ('C', 'omega', 'duration'),
    'run': ('init', 'solver', 'alpha', 't_max', 'dt', 'sample_count', 'name', 'chi_target'),
    'sweep': ('param', 'values'),
}
SWEEPABLE = tuple(key for section in ('noise', 'coherent', 'drive', 'run') for key in SCENARIO_KEYS[section]
                  if key not in ('solver', 'name'))
CALIBRATE = 'calibrate'
ORACLE_DT = 0.002
ORACLE_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-8
POSITIVITY_TOLERANCE = 1e-7
SLOPE_TIME = 12.0

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}
_NAMES = {'pi': np.pi, 'inf': np.inf}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    noise: NoiseModel
    coherent: CoherentModel
    init: str
    solver: str = 'numeric'
    alpha: float = 0.0
    t_max: float = 20.0
    dt: float | None = None
    sample_count: int = 400
    chi_target: int = 0
    calibrate: bool = False
    sweep: tuple | None = None
    settings: dict = field(default_factory=dict)


def evaluate_number(text):
    """Evaluates a numeric literal or a small arithmetic expression in pi and inf."""
    try:
        tree = ast.parse(str(text).strip(), mode='eval')
    except SyntaxError:
        raise ScenarioError(f"Cannot parse number '{text}'.")

    def _eval(node):
        if isinstance(node, ast.Expression):
            return _eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return float(_NAMES[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](_eval(node.left), _eval(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](_eval(node.operand))
        raise ScenarioError(f"Unsupported expression '{text}'; only numbers, pi, inf and + - * / ** are allowed.")

    try:
        return _eval(tree)
    except ZeroDivisionError:
        raise ScenarioError(f"Division by zero in '{text}'.")


def split_values(text):
    return [item.strip() for item in str(text).split(',') if item.strip()]


def initial_state(init):
    """Pauli-basis density matrix for a product label ('duu'), an eigenstate name ('W0', 'down3') or 'ghz'."""
    label = str(init).strip()
    if len(label) == 3 and set(label.lower()) <= {'u', 'd'}:
        return ket_to_dm(pauli_product_state(label))
    if label.lower() == 'ghz':
        ket = np.zeros(DIM, dtype=complex)
        ket[0], ket[DIM - 1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        return ket_to_dm(ket)
    try:
        column = BASIS_MAP.index(label)
    except ValueError:
        raise ScenarioError(
            f"Invalid init '{init}'. Use a product label like 'duu', an eigenstate name "
            f"{BASIS_MAP.names} or 'ghz'.")
    return ket_to_dm(BASIS_MAP.unitary[:, column])


def _number(settings, section, key, default):
    raw = settings.get(section, {}).get(key)
    return default if raw is None else evaluate_number(raw)


def _delta_a12(settings, A):
    noise = settings.get('noise', {})
    styles = [style for style, keys in (('cartesian', ('deltaA12_re', 'deltaA12_im')),
                                        ('relative', ('deltaA12_rel',)),
                                        ('phase', ('delta_phi12',)))
              if any(k in noise for k in keys)]
    if len(styles) > 1:
        raise ScenarioError(f"Set the (1,2) noise perturbation one way only, got {styles}.")
    if not styles:
        return 0j
    if styles[0] == 'cartesian':
        return complex(_number(settings, 'noise', 'deltaA12_re', 0.0), _number(settings, 'noise', 'deltaA12_im', 0.0))
    if styles[0] == 'relative':
        return complex(_number(settings, 'noise', 'deltaA12_rel', 0.0) * A)
    delta_phi = _number(settings, 'noise', 'delta_phi12', 0.0)
    return complex(A - abs(A) * np.exp(1j * (np.angle(A) + delta_phi)))


def _build_noise(settings):
    a = _number(settings, 'noise', 'a', 1.0)
    A_abs = _number(settings, 'noise', 'A_abs', 0.5)
    phi = _number(settings, 'noise', 'phi', np.pi)
    A = A_abs * np.exp(1j * phi)
    return NoiseModel(
        a=a,
        A_abs=A_abs,
        phi=phi,
        delta_A12=_delta_a12(settings, A),
        beta_delta=_number(settings, 'noise', 'beta_delta', np.inf),
    )


def _build_coherent(settings):
    coherent = CoherentModel(
        Delta=_number(settings, 'coherent', 'Delta', 100.0),
        J=_number(settings, 'coherent', 'J', 0.0),
        psi=_number(settings, 'coherent', 'psi', 0.0),
        delta_J12=_number(settings, 'coherent', 'deltaJ12', 0.0),
    )
    drive_settings = settings.get('drive')
    if not drive_settings:
        return coherent, False
    if 'C' not in drive_settings:
        raise ScenarioError("[drive] needs an amplitude 'C'.")
    raw_duration = str(drive_settings.get('duration', 'inf')).strip()
    calibrate = raw_duration.lower() == CALIBRATE
    drive = Drive(
        amplitude=abs(evaluate_number(drive_settings['C'])),
        omega=_number(settings, 'drive', 'omega', coherent.w_resonance),
        duration=np.inf if calibrate else evaluate_number(raw_duration),
    )
    return replace(coherent, drive=drive), calibrate


def _check_analytic(solver, noise, coherent, alpha, rho0):
    if solver == 'numeric':
        return
    reasons = []
    if not noise.is_zero_temperature:
        reasons.append('finite temperature')
    if alpha != 0:
        reasons.append('alpha > 0')
    if not noise.is_homogeneous:
        reasons.append('delta_A12 != 0')
    if coherent.delta_J12 != 0:
        reasons.append('delta_J12 != 0')
    if coherent.drive is not None:
        reasons.append('a drive')
    if sector_coherence(pauli_to_eigen(DensityMatrix(rho0))) > BLOCK_LEAK_TOLERANCE:
        reasons.append('an initial state with coherences between S^z sectors')
    if reasons:
        raise ScenarioError(f"solver={solver} needs the analytic regime; this scenario has {', '.join(reasons)}.")


def build_scenario(settings, name, check_cp=True):
    """Validated Scenario from a {section: {key: text}} mapping."""
    for section, keys in settings.items():
        if section not in SCENARIO_KEYS:
            raise ScenarioError(f"Unknown section [{section}]. Expected one of {list(SCENARIO_KEYS)}.")
        unknown = [key for key in keys if key not in SCENARIO_KEYS[section]]
        if unknown:
            raise ScenarioError(f"Unknown key(s) {unknown} in [{section}].")

    noise = _build_noise(settings)
    if check_cp:
        report = validate_cp(noise)
        if not report.ok:
            raise ModelError(report.message)
    coherent, calibrate = _build_coherent(settings)

    run = settings.get('run', {})
    init = str(run.get('init', 'duu')).strip()
    rho0 = initial_state(init)
    solver = str(run.get('solver', 'numeric')).strip().lower()
    if solver not in SOLVERS:
        raise ScenarioError(f"Unknown solver '{solver}'. Expected one of {SOLVERS}.")
    alpha = _number(settings, 'run', 'alpha', 0.0)
    if not 0 <= alpha <= 1:
        raise ScenarioError(f"alpha must lie in [0, 1], got {alpha}.")
    t_max = _number(settings, 'run', 't_max', 20.0)
    if not t_max > 0:
        raise ScenarioError(f"t_max must be positive, got {t_max}.")
    dt = _number(settings, 'run', 'dt', None)
    if dt is not None and not dt > 0:
        raise ScenarioError(f"dt must be positive, got {dt}.")
    sample_count = _number(settings, 'run', 'sample_count', 400)
    if sample_count != int(sample_count) or sample_count < 2:
        raise ScenarioError(f"sample_count must be an integer >= 2, got {sample_count}.")
    chi_target = _number(settings, 'run', 'chi_target', 0)
    if chi_target not in (0, 1, -1):
        raise ScenarioError(f"chi_target must be 0, 1 or -1, got {chi_target}.")
    _check_analytic(solver, noise, coherent, alpha, rho0)

    sweep = None
    if 'sweep' in settings:
        param = str(settings['sweep'].get('param', '')).strip()
        values = split_values(settings['sweep'].get('values', ''))
        if param not in SWEEPABLE:
            raise ScenarioError(f"Cannot sweep '{param}'. Sweepable keys: {SWEEPABLE}.")
        if not values:
            raise ScenarioError(f"Sweep over '{param}' has no values.")
        sweep = (param, tuple(values))

    return Scenario(
        name=str(run.get('name', name)).strip(),
        noise=noise,
        coherent=coherent,
        init=init,
        solver=solver,
        alpha=alpha,
        t_max=t_max,
        dt=dt,
        sample_count=int(sample_count),
        chi_target=int(chi_target),
        calibrate=calibrate,
        sweep=sweep,
        settings=copy.deepcopy(settings),
    )


def load_scenario_text(text, name='scenario', check_cp=True):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ScenarioError(f"Malformed scenario file: {e}")
    settings = {section: dict(parser.items(section)) for section in parser.sections()}
    return build_scenario(settings, name, check_cp=check_cp)


def parse_scenario(path, check_cp=True):
    """Reads and validates a scenario file; the file stem names the run."""
    if not os.path.isfile(path):
        raise ScenarioError(f"Scenario file '{path}' does not exist.")
    with open(path, 'r') as f:
        text = f.read()
    name = os.path.splitext(os.path.basename(path))[0]
    logging.info(f"Parsing scenario '{name}' from {path}")
    return load_scenario_text(text, name, check_cp=check_cp)


def _section_of(param):
    for section, keys in SCENARIO_KEYS.items():
        if param in keys:
            return section
    raise ScenarioError(f"Unknown parameter '{param}'.")


def with_sweep(scenario, param, values):
    """Same scenario with its sweep replaced (used by the sweep command)."""
    settings = copy.deepcopy(scenario.settings)
    settings['sweep'] = {'param': param, 'values': ', '.join(str(v) for v in values)}
    settings.setdefault('run', {})['name'] = scenario.name
    return build_scenario(settings, scenario.name)


_PERTURBATION_GROUPS = (('deltaA12_re', 'deltaA12_im'), ('deltaA12_rel',), ('delta_phi12',))


def _competing_perturbations(param):
    """Perturbation keys that conflict with sweeping `param`."""
    if not any(param in group for group in _PERTURBATION_GROUPS):
        return ()
    return tuple(key for group in _PERTURBATION_GROUPS if param not in group for key in group)


def expand_sweep(scenario, check_cp=True):
    """One child Scenario per sweep value, named <name>-<param>-<index>."""
    if scenario.sweep is None:
        return [scenario]
    param, values = scenario.sweep
    section = _section_of(param)
    children = []
    for index, value in enumerate(values):
        settings = copy.deepcopy(scenario.settings)
        settings.pop('sweep', None)
        for other in _competing_perturbations(param):
            settings.get('noise', {}).pop(other, None)
        settings.setdefault(section, {})[param] = value
        child_name = f"{scenario.name}-{param}-{index:03d}"
        settings.setdefault('run', {})['name'] = child_name
        children.append(build_scenario(settings, child_name, check_cp=check_cp))
    logging.info(f"Expanded '{scenario.name}' into {len(children)} points over '{param}'.")
    return children


def _grid(start, stop, count):
    return tuple(repr(float(v)) for v in np.linspace(start, stop, count))


_PRESETS = {
    'fig2a': {'run': {'init': 'duu', 'solver': 'both'},
              'sweep': {'param': 'phi', 'values': 'pi, pi/3, pi/2, 2'}},
    'fig2b': {'run': {'init': 'duu', 'solver': 'analytic'},
              'sweep': {'param': 'A_abs', 'values': _grid(0, 0.5, 50)}},
    'fig2c': {'run': {'init': 'duu', 'solver': 'analytic'},
              'sweep': {'param': 'J', 'values': _grid(0, 10, 50)}},
    'fig2d': {'run': {'init': 'ddd', 'solver': 'analytic'},
              'sweep': {'param': 'init', 'values': 'udd, ddd'}},
    'fig3b': {'run': {'init': 'duu'},
              'sweep': {'param': 'alpha', 'values': '0, 0.25, 0.5, 0.75, 1'}},
    'fig3d': {'coherent': {'J': '10'},
              'drive': {'C': '1', 'duration': CALIBRATE},
              'run': {'init': 'uuu', 't_max': '10'},
              'sweep': {'param': 'A_abs', 'values': _grid(0, 0.5, 11)}},
    's1a': {'run': {'init': 'duu'},
            'sweep': {'param': 'deltaA12_rel', 'values': _grid(0, 0.2, 50)}},
    's1b': {'run': {'init': 'duu'},
            'sweep': {'param': 'delta_phi12', 'values': _grid(0, 0.2 * np.pi, 50)}},
    's2': {'coherent': {'J': '1', 'deltaJ12': '0.2'},
           'run': {'init': 'duu'},
           'sweep': {'param': 'psi', 'values': _grid(0, np.pi, 50)}},
    's3': {'run': {'init': 'W0'},
           'sweep': {'param': 'beta_delta', 'values': _grid(1, 10, 50)}},
}
PRESET_NAMES = tuple(_PRESETS)


def figure_preset(name):
    """Scenario (with its sweep) reproducing one of the published plots."""
    if name not in _PRESETS:
        raise ScenarioError(f"Unknown preset '{name}'. Expected one of {PRESET_NAMES}.")
    settings = copy.deepcopy(_PRESETS[name])
    sweep = settings.get('sweep')
    if sweep and not isinstance(sweep['values'], str):
        sweep['values'] = ', '.join(sweep['values'])
    settings['run']['name'] = name
    return build_scenario(settings, name)


def _slope_at(times, values, t):
    if not times[0] <= t <= times[-1]:
        return None
    return float(np.interp(t, times, np.gradient(values, times)))


def _gates(scenario, series, deviation):
    traces = series.traces
    if scenario.alpha == 0:
        trace_ok = bool(np.max(np.abs(traces - 1)) < TRACE_TOLERANCE)
    else:
        trace_ok = bool(np.max(traces) <= 1 + TRACE_TOLERANCE)
    min_eig = float(np.min(min_eigenvalues(series)))
    gates = {
        'trace': trace_ok,
        'hermitian': all(is_hermitian(rho) for rho in series.states),
        'positivity': bool(min_eig >= -POSITIVITY_TOLERANCE),
        'min_eig': min_eig,
    }
    if deviation is not None:
        gates['oracle'] = bool(deviation < ORACLE_TOLERANCE)
        gates['oracle_dev'] = deviation
    for gate, passed in gates.items():
        if passed is False:
            logging.warning(f"Scenario '{scenario.name}' failed the {gate} gate.")
    return gates


def run_scenario(scenario, output_dir):
    """Runs one scenario, writes <name>.csv and returns the run record."""
    started = datetime.now(timezone.utc).isoformat()
    logging.info(f"Running scenario '{scenario.name}' with solver '{scenario.solver}'.")
    if scenario.sweep is not None:
        raise ScenarioError(f"Scenario '{scenario.name}' is a sweep; expand it first.")
    rho0 = initial_state(scenario.init)
    coherent = scenario.coherent

    calibration = None
    if scenario.calibrate:
        spec = build_evolution_spec(scenario.noise, coherent, scenario.alpha, scenario.t_max,
                                    scenario.sample_count, scenario.dt)
        result = calibrate_pulse(spec, scenario.chi_target)
        coherent = replace(coherent, drive=replace(coherent.drive, duration=result.tau))
        calibration = {'tau': result.tau, 'fidelity': result.fidelity,
                       'area_rabi': result.area_rabi, 'area_bare': result.area_bare}

    series = deviation = None
    if scenario.solver in ('analytic', 'both'):
        times = np.linspace(0.0, scenario.t_max, scenario.sample_count)
        series = solve(rho0, sector_rates(scenario.noise, coherent), times)
    if scenario.solver in ('numeric', 'both'):
        spec = build_evolution_spec(scenario.noise, coherent, scenario.alpha, scenario.t_max,
                                    scenario.sample_count, scenario.dt)
        if scenario.solver == 'both':
            dt = min(scenario.dt or np.inf, ORACLE_DT, max_stable_step(spec))
            spec = replace(spec, dt=dt)
        numeric = propagate(rho0, spec)
        if series is not None:
            deviation = series.max_deviation(numeric)
            logging.info(f"Analytic vs numeric deviation for '{scenario.name}': {deviation:.3e}")
        series = numeric

    table = series_table(series)
    csv_path = write_timeseries_csv(os.path.join(output_dir, f"{scenario.name}.csv"), table, CSV_COLUMNS)
    gates = _gates(scenario, series, deviation)
    record = {
        'scenario': scenario.name,
        'settings': scenario.settings,
        'solver': scenario.solver,
        'started': started,
        'finished': datetime.now(timezone.utc).isoformat(),
        'gates': gates,
        'outputs': {'csv': csv_path},
        'final': {'t': float(table['t'][-1]), 'trace': float(table['trace'][-1]),
                  'N123': float(table['N123'][-1]), 'F_W0': float(table['F_W0'][-1])},
        'slope_at_12': _slope_at(table['t'], table['N123'], SLOPE_TIME),
        'calibration': calibration,
    }
    logging.info(f"Scenario '{scenario.name}' finished: N123(t_max)={record['final']['N123']:.6f}")
    return record


def failed_gates(record):
    return [name for name, passed in record.get('gates', {}).items() if passed is False]
