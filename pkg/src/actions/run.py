import logging

from src.scenario import parse_scenario, run_scenario
from src.sweep_pool import run_scenario_sweep


def execute(job_id, params, output_dir, write_record):
    """
    Runs the scenario file named by 'config'. A file with a [sweep] section
    runs every point on the worker pool.
    """
    config_path = params.get('config')
    if not config_path:
        raise ValueError("'config' parameter is missing.")

    scenario = parse_scenario(config_path)
    if scenario.sweep is not None:
        logging.info(f"Scenario '{scenario.name}' carries a sweep over '{scenario.sweep[0]}'.")
        outcome = run_scenario_sweep(scenario, output_dir, workers=params.get('workers'))
    else:
        outcome = run_scenario(scenario, output_dir)

    result = {
        'job_id': job_id,
        'status': 'Completed',
        'result': outcome
    }
    write_record(job_id, result)
