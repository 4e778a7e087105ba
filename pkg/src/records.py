import os
import csv
import json
import logging


def write_timeseries_csv(path, table, columns=None):
    """Writes column arrays as CSV, one row per sample, header first."""
    columns = list(columns or table.keys())
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in zip(*(table[name] for name in columns)):
            writer.writerow([_format_cell(value) for value in row])
    logging.info(f"Wrote {len(table[columns[0]]) if columns else 0} rows to {path}")
    return path


def _format_cell(value):
    if isinstance(value, str):
        return value
    if value is None:
        return ''
    return f"{float(value):.12g}"


def write_run_record(job_id, record, output_dir):
    """Saves a job's record as <job_id>.json and returns its path."""
    filepath = os.path.join(output_dir, f"{job_id}.json")
    try:
        os.makedirs(output_dir, exist_ok=True)
        with open(filepath, 'w') as f:
            json.dump(record, f, indent=4, default=_json_default)
    except IOError as e:
        logging.error(f"Error writing record for job {job_id}: {e}")
        raise
    return filepath


def _json_default(value):
    if hasattr(value, 'tolist'):
        return value.tolist()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
