"""CSV and JSON emitters shared by bundles and commands."""
import csv
import json
import os

import numpy as np

FLOAT_FORMAT = "%.17g"


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def write_matrix(path, M):
    """Matrix as CSV with a c0,c1,... header; 17 significant digits round-trip exactly."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"c{j}" for j in range(M.shape[1])])
        for row in M:
            writer.writerow([FLOAT_FORMAT % v for v in row])


def read_matrix(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def write_rows(path, columns, rows):
    """Header row then one line per dict, columns in the given order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
