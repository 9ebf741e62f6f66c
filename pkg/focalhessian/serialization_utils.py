#
# serialization_utils.py
# FocalHessian
#
# Reading and writing of run artifacts: traces with a commented header block, matrix text
# files with a dimension header, JSON reports and file checksums.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Leitura e escrita de tracos, matrizes e relatorios das execucoes."""

import json
import hashlib
from pathlib import Path

import numpy as np
import pandas as pd

from focalhessian.focal import RunTrace


FLOAT_FORMAT = "%.17g"


class NumpyJsonEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def convert_to_serializable(d):
    """
    Recursively converts non-JSON-serializable types in a nested dictionary
    to native Python types.

    :param d: The dictionary to traverse
    :return: A new dictionary with all types converted to JSON-serializable types
    """
    if isinstance(d, dict):
        return {k: convert_to_serializable(v) for k, v in d.items()}
    elif isinstance(d, list):
        return [convert_to_serializable(item) for item in d]
    elif isinstance(d, tuple):
        return [convert_to_serializable(item) for item in d]
    elif isinstance(d, np.ndarray):
        return convert_to_serializable(d.tolist())
    elif isinstance(d, (float, np.floating)):
        # json has no NaN/Inf
        return float(d) if np.isfinite(d) else None
    elif isinstance(d, np.integer):
        return int(d)
    elif isinstance(d, np.bool_):
        return bool(d)
    elif isinstance(d, Path):
        return str(d)
    else:
        return d


def write_json(data, path):
    with open(path, "w") as f:
        json.dump(convert_to_serializable(data), f, indent=4, sort_keys=True, cls=NumpyJsonEncoder)
        f.write("\n")


def read_json(path):
    with open(path) as f:
        return json.load(f)


def hash_file(path):
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        buffer = f.read(65536)
        while len(buffer) > 0:
            hasher.update(buffer)
            buffer = f.read(65536)
    return hasher.hexdigest()


def _header_lines(header):
    lines = []
    for key in sorted(header):
        value = json.dumps(convert_to_serializable(header[key]), sort_keys=True)
        lines.append(f"# {key} = {value}\n")
    return lines


def _parse_header_line(line, header):
    body = line[1:].strip()
    if " = " not in body:
        return
    key, value = body.split(" = ", 1)
    header[key.strip()] = json.loads(value)


def write_trace(trace, path):
    """
    Header block of '# key = <json>' lines followed by comma-separated rows,
    floats with 17 significant digits.
    """
    with open(path, "w") as f:
        f.writelines(_header_lines(trace.header))
        trace.to_frame().to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_trace(path):
    header = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            _parse_header_line(line, header)
    df = pd.read_csv(path, comment="#")
    return RunTrace.from_frame(df, header=header)


def write_matrix(M, path):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    np.savetxt(path, M, fmt=FLOAT_FORMAT, header=f"{M.shape[0]} {M.shape[1]}")


def read_matrix(path):
    with open(path) as f:
        first = f.readline()
    if not first.startswith("#"):
        raise ValueError(f"Matrix file {path} lacks the dimension header")
    rows, cols = (int(v) for v in first[1:].split())
    M = np.loadtxt(path, ndmin=2)
    if M.shape != (rows, cols):
        raise ValueError(f"Matrix file {path} declares {rows}x{cols} but holds {M.shape[0]}x{M.shape[1]}")
    return M


def write_spectrum_table(df, summary, path):
    """Spectrum columns with an optional '#'-prefixed summary block."""
    with open(path, "w") as f:
        if summary is not None:
            f.writelines(_header_lines(summary))
        df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_spectrum_table(path):
    summary = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            _parse_header_line(line, summary)
    return pd.read_csv(path, comment="#"), summary
