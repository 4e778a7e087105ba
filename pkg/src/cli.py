import os
import sys
import argparse
import importlib
import logging

# --- Path Setup ---
SRC_ROOT = os.path.abspath(os.path.dirname(__file__))
PROJECT_ROOT = os.path.abspath(os.path.join(SRC_ROOT, '..'))
sys.path.insert(0, PROJECT_ROOT)

from src.errors import CalibrationError, IntegrationError, ModelError  # noqa: E402
from src.records import write_run_record  # noqa: E402
from src.runtime_config import get_log_level, get_output_dir  # noqa: E402
from src.scenario import PRESET_NAMES, failed_gates  # noqa: E402

# --- Constants ---
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GATE = 2
PHYSICS_ERRORS = (ModelError, IntegrationError, CalibrationError)


def configure_logging(testing=False):
    logging.basicConfig(level=get_log_level(testing), format='%(asctime)s - %(levelname)s - %(message)s', force=True)


def _write_failure(job_id, error, write_record):
    try:
        write_record(job_id, {'job_id': job_id, 'status': 'failed', 'error': str(error)})
    except IOError as e:
        logging.error(f"Could not record the failure of job {job_id}: {e}")


def dispatch(action_name, job_id, params, output_dir):
    """
    Imports src.actions.<action_name>, executes it and maps the outcome to an exit code:
    0 when every recorded gate passed, 2 for a physics failure, 1 for anything else.
    """
    records = []

    def write_record(record_job_id, record):
        records.append(record)
        path = write_run_record(record_job_id, record, output_dir)
        logging.info(f"Record for job {record_job_id} written to {path}")

    try:
        logging.info(f"Processing job {job_id} for action '{action_name}'")
        module_name = f"src.actions.{action_name}"
        try:
            action_module = importlib.import_module(module_name)
        except ModuleNotFoundError as e:
            if e.name != module_name:
                raise
            raise ValueError(f"Action '{action_name}' not found in 'src/actions'.")
        action_module.execute(job_id, params, output_dir, write_record)
        logging.info(f"Action execution completed for job {job_id}")
    except PHYSICS_ERRORS as e:
        logging.error(f"Job {job_id} stopped on a physics check: {e}", exc_info=True)
        _write_failure(job_id, e, write_record)
        return EXIT_GATE
    except Exception as e:
        logging.error(f"An unexpected error occurred while processing job {job_id}: {e}", exc_info=True)
        _write_failure(job_id, e, write_record)
        return EXIT_USAGE

    failed = [gate for record in records for gate in failed_gates(record.get('result', {}))]
    if failed:
        logging.warning(f"Job {job_id} finished with failed gates: {sorted(set(failed))}")
        return EXIT_GATE
    return EXIT_OK


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog='tripartite',
        description='Entanglement dynamics of three spin qubits under spatially correlated noise.')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Run a scenario file.')
    run.add_argument('--config', required=True)

    figure = commands.add_parser('figure', help='Regenerate the data of a published plot.')
    figure.add_argument('preset', choices=PRESET_NAMES)

    validate = commands.add_parser('validate', help='Check a scenario file without running it.')
    validate.add_argument('--config', required=True)

    sweep = commands.add_parser('sweep', help='Sweep one parameter of a scenario file.')
    sweep.add_argument('--config', required=True)
    sweep.add_argument('--param', required=True)
    sweep.add_argument('--values', required=True, help='Comma-separated values, e.g. "0, pi/3, 0.5".')

    for command in (run, figure, validate, sweep):
        command.add_argument('--out', default=None, help='Output directory (default: $TRIPARTITE_OUTPUT_DIR or results).')
    for command in (run, figure, sweep):
        command.add_argument('--workers', type=_positive_int, default=None)
    return parser


def main(argv=None, testing=False):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(testing)
    output_dir = args.out or get_output_dir()
    params = {key: value for key, value in vars(args).items() if key not in ('command', 'out') and value is not None}
    label = args.preset if args.command == 'figure' else os.path.splitext(os.path.basename(args.config))[0]
    job_id = f"{args.command}-{label}"
    logging.info(f"Starting '{args.command}' with output directory '{output_dir}'.")
    return dispatch(args.command, job_id, params, output_dir)


if __name__ == '__main__':
    sys.exit(main())
