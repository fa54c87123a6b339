"""Synthetic datasets and CSV input/output."""
import contextlib
import csv
import json
import sys

import numpy as np

from .errors import InputError


def banana(n_per_class, noise_std=0.1, seed=0):
    """Two interleaved unit half-circles ("moons"), centred at the origin.

    Returns ``(X, labels)``; class 0 is the upper crescent.
    """
    if n_per_class < 1:
        raise InputError("n_per_class must be positive")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, n_per_class)
    upper = np.column_stack([np.cos(t) - 0.5, np.sin(t) - 0.25])
    lower = np.column_stack([0.5 - np.cos(t), 0.25 - np.sin(t)])
    X = np.vstack([upper, lower])
    if noise_std > 0:
        X = X + noise_std * rng.standard_normal(X.shape)
    y = np.repeat([0, 1], n_per_class)
    return X, y


def toy_regression_1d(seed=0, noise_std=0.1):
    """Sparse 1-D regression data: two clusters of points on a smooth curve."""
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.uniform(-2.5, -1.0, 8), rng.uniform(0.5, 2.0, 8)])
    x.sort()
    y = np.sin(2.0 * x) + 0.3 * x + noise_std * rng.standard_normal(x.size)
    return x[:, None], y


def write_csv(path, header, rows, config=None):
    """Write rows under a header; the first line records the resolved config.

    ``path`` of ``"-"`` writes to standard output.
    """
    if path == "-":
        ctx = contextlib.nullcontext(sys.stdout)
    else:
        ctx = open(path, "w", newline="")
    with ctx as fh:
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def read_csv(path):
    """Return ``(header, data)`` with data as a float matrix; ``#`` lines skipped."""
    try:
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if not lines:
        raise InputError(f"{path} is empty")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    try:
        data = np.array([[float(v) for v in row] for row in reader], dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric value ({exc})") from None
    if data.size == 0:
        raise InputError(f"{path} has no data rows")
    if data.shape[1] != len(header):
        raise InputError(f"{path}: {data.shape[1]} columns but {len(header)} header names")
    return header, data


def read_config_comment(path):
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# config: "):
        return json.loads(first[len("# config: "):])
    return None
