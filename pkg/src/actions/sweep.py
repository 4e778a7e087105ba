from src.scenario import parse_scenario, split_values, with_sweep
from src.sweep_pool import run_scenario_sweep


def execute(job_id, params, output_dir, write_record):
    """Sweeps one parameter of a scenario file over an explicit value list."""
    for key in ('config', 'param', 'values'):
        if not params.get(key):
            raise ValueError(f"'{key}' parameter is missing.")

    values = params['values']
    if isinstance(values, str):
        values = split_values(values)
    scenario = with_sweep(parse_scenario(params['config']), params['param'], values)
    outcome = run_scenario_sweep(scenario, output_dir, workers=params.get('workers'))

    result = {
        'job_id': job_id,
        'status': 'Completed',
        'result': outcome
    }
    write_record(job_id, result)
