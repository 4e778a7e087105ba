import os
import logging

# --- Constants ---
DEFAULT_WORKERS = 4
DEFAULT_OUTPUT_DIR = 'results'


def get_worker_limit():
    """
    Number of threads a sweep may use.

    Respects the 'TRIPARTITE_WORKERS' environment variable.
    Defaults to 4; non-positive or malformed values fall back to the default.
    """
    raw = os.environ.get('TRIPARTITE_WORKERS', str(DEFAULT_WORKERS))
    try:
        workers = int(raw)
    except ValueError:
        logging.warning(f"Ignoring malformed TRIPARTITE_WORKERS='{raw}'; using {DEFAULT_WORKERS}.")
        return DEFAULT_WORKERS
    if workers < 1:
        logging.warning(f"TRIPARTITE_WORKERS must be >= 1, got {workers}; using {DEFAULT_WORKERS}.")
        return DEFAULT_WORKERS
    return workers


def get_output_dir():
    """Returns the directory results go to ('TRIPARTITE_OUTPUT_DIR', default 'results')."""
    return os.environ.get('TRIPARTITE_OUTPUT_DIR', DEFAULT_OUTPUT_DIR)


def get_log_level(testing=False):
    if testing:
        return logging.ERROR
    name = os.environ.get('TRIPARTITE_LOG_LEVEL', 'INFO').upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO
