import logging

from src.model import validate_cp
from src.scenario import expand_sweep, parse_scenario


def execute(job_id, params, output_dir, write_record):
    """
    Checks a scenario file without running it: keys, init, solver regime and
    complete positivity of every (swept) noise model.
    """
    config_path = params.get('config')
    if not config_path:
        raise ValueError("'config' parameter is missing.")

    scenario = parse_scenario(config_path, check_cp=False)
    checks = []
    for point in expand_sweep(scenario, check_cp=False):
        report = validate_cp(point.noise)
        if not report.ok:
            logging.warning(f"Scenario '{point.name}' violates complete positivity: {report.message}")
        checks.append({
            'scenario': point.name,
            'cp': report.ok,
            'min_eigenvalue': report.min_eigenvalue,
            'message': report.message,
        })

    result = {
        'job_id': job_id,
        'status': 'Completed',
        'result': {
            'scenario': scenario.name,
            'gates': {'cp': all(check['cp'] for check in checks)},
            'checks': checks,
        }
    }
    write_record(job_id, result)
