import os
import logging
import threading

from apscheduler.executors.pool import ThreadPoolExecutor
from apscheduler.schedulers.background import BackgroundScheduler

from src.runtime_config import get_worker_limit
from src.records import write_timeseries_csv
from src.scenario import expand_sweep, run_scenario

# --- Constants ---
SWEEP_TIMEOUT_IN_SECONDS = None
SUMMARY_COLUMNS = ('index', 'name', 'value', 'status', 'N123_final', 'F_W0_final', 'slope_at_12')


def _run_point(index, scenario, output_dir, runner, results, lock, done, total):
    """Scheduler job for one sweep point; failures are recorded, never raised."""
    logging.info(f"Worker claimed sweep point {index} ('{scenario.name}').")
    try:
        outcome = runner(scenario, output_dir)
        outcome.setdefault('status', 'Completed')
    except Exception as e:
        logging.error(f"Sweep point {index} ('{scenario.name}') failed: {e}", exc_info=True)
        outcome = {'scenario': scenario.name, 'status': 'failed', 'error': str(e)}
    with lock:
        results[index] = outcome
        if len(results) == total:
            done.set()


def run_sweep(scenarios, output_dir, workers=None, runner=run_scenario):
    """
    Runs every scenario as a one-shot job on a background scheduler.

    Returns the records in input order regardless of completion order.
    """
    scenarios = list(scenarios)
    if not scenarios:
        return []
    workers = workers or get_worker_limit()
    results, lock, done = {}, threading.Lock(), threading.Event()

    executors = {'default': ThreadPoolExecutor(workers)}
    job_defaults = {'coalesce': False, 'max_instances': 1, 'misfire_grace_time': None}
    scheduler = BackgroundScheduler(executors=executors, job_defaults=job_defaults)
    for index, scenario in enumerate(scenarios):
        scheduler.add_job(
            func=_run_point,
            args=[index, scenario, output_dir, runner, results, lock, done, len(scenarios)],
            trigger='date',
            id=f"sweep-{index:03d}",
        )
    logging.info(f"Starting sweep of {len(scenarios)} points on {workers} workers.")
    scheduler.start()
    try:
        done.wait(SWEEP_TIMEOUT_IN_SECONDS)
    finally:
        scheduler.shutdown(wait=True)
    logging.info("Sweep finished.")
    return [results.get(index, {'scenario': s.name, 'status': 'failed', 'error': 'Sweep point never ran.'})
            for index, s in enumerate(scenarios)]


def _merge_gates(records):
    merged = {'completed': all(r.get('status') != 'failed' for r in records)}
    for record in records:
        for gate, passed in record.get('gates', {}).items():
            if isinstance(passed, bool):
                merged[gate] = merged.get(gate, True) and passed
    return merged


def run_scenario_sweep(scenario, output_dir, workers=None, runner=run_scenario):
    """Expands a sweep, runs it on the pool and writes <name>-sweep.csv with one row per point."""
    param, values = scenario.sweep
    children = expand_sweep(scenario)
    records = run_sweep(children, output_dir, workers=workers, runner=runner)

    table = {column: [] for column in SUMMARY_COLUMNS}
    for index, (child, value, record) in enumerate(zip(children, values, records)):
        final = record.get('final', {})
        table['index'].append(str(index))
        table['name'].append(child.name)
        table['value'].append(value)
        table['status'].append(record.get('status', 'Completed'))
        table['N123_final'].append(final.get('N123'))
        table['F_W0_final'].append(final.get('F_W0'))
        table['slope_at_12'].append(record.get('slope_at_12'))
    summary_path = write_timeseries_csv(os.path.join(output_dir, f"{scenario.name}-sweep.csv"), table, SUMMARY_COLUMNS)
    return {
        'scenario': scenario.name,
        'param': param,
        'values': list(values),
        'gates': _merge_gates(records),
        'outputs': {'summary': summary_path},
        'points': records,
    }
