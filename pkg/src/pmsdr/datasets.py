"""Seeded synthetic regression models used by the tests and the CLI.

All draws come from ``numpy.random.default_rng(seed)`` in a fixed order
(first the n-by-p predictor block, then the n noise values), so a given
(model, n, p, seed) reproduces the same data byte for byte.
"""

import io

import numpy as np

from .errors import InputError

MODELS = ("ratio", "radial", "ratio-binary")


def _signal(model, x):
    if model in ("ratio", "ratio-binary"):
        return x[:, 0] / (0.5 + (x[:, 1] + 1.0) ** 2)
    if model == "radial":
        sq = x[:, 0] ** 2 + x[:, 1] ** 2
        return 0.5 * np.sqrt(sq) * np.log(sq)
    raise InputError(f"unknown model {model!r}; valid models: {', '.join(MODELS)}")


def generate_dataset(model, n, p, seed):
    """Draw one dataset.

    ``ratio``        y = x1 / (0.5 + (x2 + 1)^2) + 0.2 eps
    ``radial``       y = 0.5 sqrt(x1^2 + x2^2) log(x1^2 + x2^2) + 0.2 eps
    ``ratio-binary`` the sign of the ratio model's response

    with x entries and eps independent standard normals.
    """
    if model not in MODELS:
        raise InputError(f"unknown model {model!r}; valid models: {', '.join(MODELS)}")
    if n < 10:
        raise InputError(f"n must be >= 10, got {n}")
    if p < 2:
        raise InputError(f"p must be >= 2, got {p}")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    eps = rng.standard_normal(n)
    y = _signal(model, x) + 0.2 * eps
    if model == "ratio-binary":
        y = np.where(y >= 0, 1.0, -1.0)
    return x, y


def format_value(v):
    """Shortest decimal string that parses back to the exact double."""
    return repr(float(v))


def dataset_csv_text(x, y):
    """Render (x, y) as CSV with header x1..xp,y and exact float round trip."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    buf = io.StringIO()
    p = x.shape[1]
    buf.write(",".join([f"x{j + 1}" for j in range(p)] + ["y"]) + "\n")
    for row, yi in zip(x, y):
        buf.write(",".join(format_value(v) for v in row))
        buf.write(f",{format_value(yi)}\n")
    return buf.getvalue()


def write_dataset_csv(path, x, y):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dataset_csv_text(x, y))
