"""Streamed dimension reduction with squared-loss machines.

The squared loss admits closed-form per-slice solutions from the normal
equations

    A_k r_k = c_k,   A_k = n * Diag{0, Sigma} + lam * sum_i w_i xt_i xt_i',
                     c_k = lam * sum_i w_i ytilde_i xt_i,

with ``xt = (1, x)`` and slice weights ``w_i = 1`` (continuous response,
pseudo-labels by frozen cutpoints) or ``w_i = pi_k(y_i)`` (binary response,
weighted squared loss).  Every term is a running sum, so the state carries
only O(h p^2) numbers and an arriving batch updates the solution exactly —
no stored rows, and the result equals the full-data solve.

Cutpoints are frozen at the first batch: the per-slice objectives must stay
fixed for the streamed solutions to equal the whole-data solutions.

Each update advances ``r_k`` along the rank-correction route
``r = {I - Ao^-1 B (I + Ao^-1 B)^-1}(r_old + Ao^-1 c_new)`` and
cross-checks it against a direct solve of the new system; the largest
disagreement seen is kept in the state diagnostics.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DegenerateSliceError, InputError, NumericError, SingularMatrixError
from .linalg import solve_spd, sym_eigen

STATE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StreamState:
    """Accumulator state of a streamed fit; treat as immutable.

    ``loss_xx[k]`` and ``s[k]`` are the per-slice running sums defined in the
    module docstring, ``systems[k]`` the assembled normal-equation matrix and
    ``r[k]`` its current solution.
    """

    h: int
    lam: float
    binary: bool
    cutpoints: np.ndarray
    n: int
    batches: int
    sum_x: np.ndarray
    sum_xx: np.ndarray = field(repr=False)
    loss_xx: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    systems: np.ndarray = field(repr=False)
    evalues: np.ndarray = field(default=None)
    evectors: np.ndarray = field(default=None, repr=False)
    woodbury_gap: float = 0.0

    @property
    def p(self):
        return len(self.sum_x)

    @property
    def n_slices(self):
        return len(self.cutpoints)

    @property
    def mu(self):
        return self.sum_x / self.n


@dataclass(frozen=True)
class RealtimeFit:
    """Snapshot of the streamed estimator in the shape of a linear fit."""

    evalues: np.ndarray
    evectors: np.ndarray
    r: np.ndarray
    systems: np.ndarray
    mu: np.ndarray
    n: int
    cutpoints: np.ndarray
    h: int
    lam: float
    binary: bool


def _check_batch(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise InputError("x must be a 2-d matrix")
    if y.shape != (x.shape[0],):
        raise InputError(f"y length {y.shape} does not match {x.shape[0]} rows")
    if x.shape[0] < 1:
        raise InputError("batch must contain at least one row")
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise InputError("x and y must be finite")
    return x, y


def _is_binary(y):
    return bool(np.isin(y, (-1.0, 1.0)).all())


def _batch_sums(x, y, cutpoints, binary):
    """Per-slice increments of loss_xx and s for one batch."""
    n, p = x.shape
    xt = np.hstack([np.ones((n, 1)), x])
    k = len(cutpoints)
    d_loss_xx = np.empty((k, p + 1, p + 1))
    d_s = np.empty((k, p + 1))
    if binary:
        for i, c in enumerate(cutpoints):
            w = np.where(y > 0, c, 1.0 - c)
            d_loss_xx[i] = (xt * w[:, None]).T @ xt
            d_s[i] = xt.T @ (w * y)
    else:
        gram = xt.T @ xt
        for i, c in enumerate(cutpoints):
            ytilde = np.where(y >= c, 1.0, -1.0)
            d_loss_xx[i] = gram
            d_s[i] = xt.T @ ytilde
    return d_loss_xx, d_s


def _assemble_system(n, sum_x, sum_xx, loss_xx_k, lam):
    a = lam * loss_xx_k.copy()
    a[1:, 1:] += sum_xx - np.outer(sum_x, sum_x) / n
    return a


def _solve_system(a, rhs):
    try:
        return solve_spd(a, rhs)
    except SingularMatrixError as exc:
        raise NumericError(
            "streamed normal equations are singular; "
            "increase lambda or use a larger batch",
            module="realtime",
        ) from exc


def _rank_update(a_old, r_old, b, c_new):
    # r = {I - P (I + P)^-1}(r_old + Ao^-1 c_new) with P = Ao^-1 B
    p = _solve_system(a_old, b)
    v = r_old + _solve_system(a_old, c_new)
    w = np.linalg.solve(np.eye(len(v)) + p, v)
    return v - p @ w


def _spectrum(r):
    betas = r[:, 1:]
    m = betas.T @ betas
    eig = sym_eigen(m)
    return m, eig


def stream_init(x, y, h=10, lam=1.0):
    """Start a stream from its first batch.

    Chooses the mode (weighted squared loss for exactly {-1, +1}-coded ``y``,
    thresholded pseudo-labels otherwise), freezes the cutpoints computed from
    this batch, and solves every slice in closed form.
    """
    x, y = _check_batch(x, y)
    if h < 1:
        raise InputError(f"h must be >= 1, got {h}")
    if lam <= 0:
        raise InputError(f"lambda must be > 0, got {lam}")
    n, p = x.shape
    if n < 2:
        raise InputError("first batch needs at least 2 rows")
    levels = np.arange(1, h + 1) / (h + 1)
    binary = _is_binary(y)
    if binary:
        if len(np.unique(y)) < 2:
            raise DegenerateSliceError(
                "first batch carries a single class; provide a larger first batch"
            )
        cutpoints = levels
    else:
        if len(np.unique(y)) < 2:
            raise InputError("response must take at least 2 distinct values")
        cutpoints = np.unique(np.quantile(y, levels))
        for c in cutpoints:
            above = y >= c
            if above.all() or not above.any():
                raise DegenerateSliceError(
                    f"cutpoint {c!r} leaves a one-sided slice; "
                    "provide a larger first batch"
                )

    loss_xx, s = _batch_sums(x, y, cutpoints, binary)
    sum_x = x.sum(axis=0)
    sum_xx = x.T @ x

    k = len(cutpoints)
    systems = np.empty((k, p + 1, p + 1))
    r = np.empty((k, p + 1))
    for i in range(k):
        systems[i] = _assemble_system(n, sum_x, sum_xx, loss_xx[i], lam)
        r[i] = _solve_system(systems[i], lam * s[i])

    _, eig = _spectrum(r)
    return StreamState(
        h=h,
        lam=lam,
        binary=binary,
        cutpoints=cutpoints,
        n=n,
        batches=1,
        sum_x=sum_x,
        sum_xx=sum_xx,
        loss_xx=loss_xx,
        s=s,
        r=r,
        systems=systems,
        evalues=eig.values,
        evectors=eig.vectors,
    )


def stream_update(state, x, y):
    """Fold a new batch into the stream; returns a new state.

    The per-slice solutions are advanced by the rank-correction formula and
    verified against a direct solve of the updated system; both see only the
    running sums, never old rows.
    """
    x, y = _check_batch(x, y)
    if x.shape[1] != state.p:
        raise InputError(f"batch has {x.shape[1]} columns, stream expects {state.p}")
    batch_binary = _is_binary(y)
    if state.binary and not batch_binary:
        raise InputError("stream was initialized for a binary response; mode is frozen")
    if not state.binary and batch_binary:
        raise InputError("stream was initialized for a continuous response; mode is frozen")

    d_loss_xx, d_s = _batch_sums(x, y, state.cutpoints, state.binary)
    n_new = state.n + x.shape[0]
    sum_x_new = state.sum_x + x.sum(axis=0)
    sum_xx_new = state.sum_xx + x.T @ x
    loss_xx_new = state.loss_xx + d_loss_xx
    s_new = state.s + d_s

    k = state.n_slices
    systems_new = np.empty_like(state.systems)
    r_new = np.empty_like(state.r)
    gap = state.woodbury_gap
    for i in range(k):
        a_new = _assemble_system(n_new, sum_x_new, sum_xx_new, loss_xx_new[i], state.lam)
        b = a_new - state.systems[i]
        c_new = state.lam * d_s[i]
        r_wood = _rank_update(state.systems[i], state.r[i], b, c_new)
        r_direct = _solve_system(a_new, state.lam * s_new[i])
        gap = max(gap, float(np.abs(r_wood - r_direct).max()))
        systems_new[i] = a_new
        r_new[i] = r_wood

    _, eig = _spectrum(r_new)
    return replace(
        state,
        n=n_new,
        batches=state.batches + 1,
        sum_x=sum_x_new,
        sum_xx=sum_xx_new,
        loss_xx=loss_xx_new,
        s=s_new,
        r=r_new,
        systems=systems_new,
        evalues=eig.values,
        evectors=eig.vectors,
        woodbury_gap=gap,
    )


def stream_result(state):
    """Current estimator: working-matrix spectrum plus per-slice systems."""
    return RealtimeFit(
        evalues=state.evalues,
        evectors=state.evectors,
        r=state.r.copy(),
        systems=state.systems.copy(),
        mu=state.mu,
        n=state.n,
        cutpoints=state.cutpoints.copy(),
        h=state.h,
        lam=state.lam,
        binary=state.binary,
    )


def state_to_json(state):
    """Serialize a StreamState to a versioned JSON string.

    Floats use the shortest exact decimal representation, so a round trip
    reproduces every field bit for bit.
    """
    doc = {
        "schema_version": STATE_SCHEMA_VERSION,
        "h": state.h,
        "lam": state.lam,
        "binary": state.binary,
        "cutpoints": state.cutpoints.tolist(),
        "n": state.n,
        "batches": state.batches,
        "sum_x": state.sum_x.tolist(),
        "sum_xx": state.sum_xx.tolist(),
        "loss_xx": state.loss_xx.tolist(),
        "s": state.s.tolist(),
        "r": state.r.tolist(),
        "systems": state.systems.tolist(),
        "evalues": state.evalues.tolist(),
        "evectors": state.evectors.tolist(),
        "woodbury_gap": state.woodbury_gap,
    }
    return json.dumps(doc)


def state_from_json(text):
    """Rebuild a StreamState from ``state_to_json`` output."""
    doc = json.loads(text)
    version = doc.get("schema_version")
    if version != STATE_SCHEMA_VERSION:
        raise InputError(f"unsupported state schema_version {version!r}")
    return StreamState(
        h=int(doc["h"]),
        lam=float(doc["lam"]),
        binary=bool(doc["binary"]),
        cutpoints=np.asarray(doc["cutpoints"], dtype=float),
        n=int(doc["n"]),
        batches=int(doc["batches"]),
        sum_x=np.asarray(doc["sum_x"], dtype=float),
        sum_xx=np.asarray(doc["sum_xx"], dtype=float),
        loss_xx=np.asarray(doc["loss_xx"], dtype=float),
        s=np.asarray(doc["s"], dtype=float),
        r=np.asarray(doc["r"], dtype=float),
        systems=np.asarray(doc["systems"], dtype=float),
        evalues=np.asarray(doc["evalues"], dtype=float),
        evectors=np.asarray(doc["evectors"], dtype=float),
        woodbury_gap=float(doc["woodbury_gap"]),
    )
