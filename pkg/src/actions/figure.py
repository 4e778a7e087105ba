import logging

from src.scenario import figure_preset, run_scenario
from src.sweep_pool import run_scenario_sweep


def execute(job_id, params, output_dir, write_record):
    """Regenerates the data behind one published plot."""
    preset = params.get('preset')
    if not preset:
        raise ValueError("'preset' parameter is missing.")

    scenario = figure_preset(preset)
    logging.info(f"Generating preset '{preset}'.")
    if scenario.sweep is not None:
        outcome = run_scenario_sweep(scenario, output_dir, workers=params.get('workers'))
    else:
        outcome = run_scenario(scenario, output_dir)

    result = {
        'job_id': job_id,
        'status': 'Completed',
        'result': outcome
    }
    write_record(job_id, result)
