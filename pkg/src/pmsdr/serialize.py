"""Fit documents and CSV ingestion shared by the service and the CLI.

A fit document is a plain JSON-ready dict with a ``schema_version`` and a
``kind`` of ``linear``, ``kernel`` or ``realtime``.  It carries everything
needed to reuse the fit later: spectrum, predictor means, per-slice
solutions, and for kernel fits the frozen basis (training rows, eigenpairs,
centering vectors).  Floats serialize through Python's shortest-round-trip
representation, so documents reproduce the in-memory doubles exactly.
"""

import json

import numpy as np

from .errors import InputError
from .kernel import KernelBasis, NpmFit, feature_map
from .linear import PmFit
from .realtime import RealtimeFit

FIT_SCHEMA_VERSION = 1


def _solution_entry(cutpoint, sol):
    return {
        "cutpoint": float(cutpoint),
        "alpha": sol.alpha,
        "beta": sol.beta.tolist(),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "final_step": sol.final_step,
        "halvings": sol.halvings,
    }


def _config_entry(cfg):
    return {
        "lambda": cfg.lam,
        "eta": cfg.eta,
        "eps": cfg.eps,
        "max_iter": cfg.max_iter,
        "warm_start": cfg.warm_start,
    }


def linear_fit_document(fit):
    """Document for a linear PmFit."""
    scheme = fit.scheme
    return {
        "schema_version": FIT_SCHEMA_VERSION,
        "kind": "linear",
        "n": fit.n,
        "loss": scheme.family,
        "mtype": scheme.mtype,
        "h": scheme.h,
        "config": _config_entry(fit.config),
        "cutpoints": scheme.cutpoints.tolist(),
        "dropped_slices": scheme.dropped,
        "evalues": fit.evalues.tolist(),
        "evectors": fit.evectors.tolist(),
        "mu": fit.mu.tolist(),
        "slices": [
            _solution_entry(c, sol)
            for c, sol in zip(scheme.cutpoints, fit.slice_solutions)
        ],
    }


def kernel_fit_document(fit):
    """Document for a kernel NpmFit, embedding the frozen basis."""
    doc = linear_fit_document(fit.inner)
    doc["kind"] = "kernel"
    basis = fit.basis
    doc["kernel"] = {
        "gamma": basis.gamma,
        "b": basis.b,
        "train_x": basis.train_x.tolist(),
        "q": basis.q.tolist(),
        "lam": basis.lam.tolist(),
        "col_means": basis.col_means.tolist(),
        "psi_bar": basis.psi_bar.tolist(),
    }
    return doc


def realtime_fit_document(fit):
    """Document for a streamed RealtimeFit snapshot."""
    return {
        "schema_version": FIT_SCHEMA_VERSION,
        "kind": "realtime",
        "n": fit.n,
        "loss": "wlssvm" if fit.binary else "lssvm",
        "h": fit.h,
        "lambda": fit.lam,
        "binary": fit.binary,
        "cutpoints": fit.cutpoints.tolist(),
        "evalues": fit.evalues.tolist(),
        "evectors": fit.evectors.tolist(),
        "mu": fit.mu.tolist(),
        "r": fit.r.tolist(),
        "systems": fit.systems.tolist(),
    }


def fit_document(fit):
    """Dispatch on the fit type."""
    if isinstance(fit, PmFit):
        return linear_fit_document(fit)
    if isinstance(fit, NpmFit):
        return kernel_fit_document(fit)
    if isinstance(fit, RealtimeFit):
        return realtime_fit_document(fit)
    raise InputError(f"cannot serialize object of type {type(fit).__name__}")


def default_projection_dim(doc):
    return 2 if doc.get("kind") == "kernel" else 1


def project_document(doc, newx, d=None):
    """Project new rows through a stored fit document."""
    version = doc.get("schema_version")
    if version != FIT_SCHEMA_VERSION:
        raise InputError(f"unsupported fit schema_version {version!r}")
    kind = doc.get("kind")
    newx = np.atleast_2d(np.asarray(newx, dtype=float))
    evectors = np.asarray(doc["evectors"], dtype=float)
    if d is None:
        d = default_projection_dim(doc)
    if not 1 <= d <= evectors.shape[1]:
        raise InputError(f"d must be in [1, {evectors.shape[1]}], got {d}")
    if kind in ("linear", "realtime"):
        mu = np.asarray(doc["mu"], dtype=float)
        if newx.shape[1] != len(mu):
            raise InputError(f"newx has {newx.shape[1]} columns, fit expects {len(mu)}")
        return (newx - mu) @ evectors[:, :d]
    if kind == "kernel":
        kdoc = doc["kernel"]
        basis = KernelBasis(
            train_x=np.asarray(kdoc["train_x"], dtype=float),
            gamma=float(kdoc["gamma"]),
            q=np.asarray(kdoc["q"], dtype=float),
            lam=np.asarray(kdoc["lam"], dtype=float),
            col_means=np.asarray(kdoc["col_means"], dtype=float),
            psi_bar=np.asarray(kdoc["psi_bar"], dtype=float),
        )
        return feature_map(basis, newx) @ evectors[:, :d]
    raise InputError(f"unknown fit kind {kind!r}")


def predictors_csv_text(coords, y=None):
    """CSV with the sufficient predictors (sp1..spd) and optionally y."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    d = coords.shape[1]
    header = [f"sp{j + 1}" for j in range(d)]
    if y is not None:
        header.append("y")
    lines = [",".join(header)]
    for i, row in enumerate(coords):
        cells = [repr(float(v)) for v in row]
        if y is not None:
            cells.append(repr(float(y[i])))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def parse_csv_dataset(text, ycol=None):
    """Parse CSV text with a header row into (x, y, column_names).

    ``ycol`` selects the response by header name or 1-based index; it
    defaults to a column named ``y``, else the last column.
    """
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise InputError("CSV needs a header row and at least one data row")
    names = [c.strip() for c in lines[0].split(",")]
    ncol = len(names)
    if ncol < 2:
        raise InputError("CSV needs at least two columns (predictors and response)")
    if ycol is None:
        y_idx = names.index("y") if "y" in names else ncol - 1
    else:
        ycol = str(ycol)
        if ycol in names:
            y_idx = names.index(ycol)
        else:
            try:
                y_idx = int(ycol) - 1
            except ValueError:
                raise InputError(f"response column {ycol!r} not found in header {names}")
            if not 0 <= y_idx < ncol:
                raise InputError(f"response index {ycol} out of range 1..{ncol}")
    rows = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != ncol:
            raise InputError(f"line {ln_no}: expected {ncol} cells, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise InputError(f"line {ln_no}: {exc}") from exc
    data = np.asarray(rows, dtype=float)
    y = data[:, y_idx]
    x = np.delete(data, y_idx, axis=1)
    xnames = [nm for i, nm in enumerate(names) if i != y_idx]
    return x, y, xnames


def read_csv_dataset(path, ycol=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_csv_dataset(fh.read(), ycol)
