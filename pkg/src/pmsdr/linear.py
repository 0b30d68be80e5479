"""Linear principal-machine fit and dimension selection.

The fit centers the predictors, solves one machine per slice, stacks the
slice slopes into the working matrix ``M = sum_k beta_k beta_k'`` and
eigendecomposes it; the leading eigenvectors estimate a basis of the central
subspace.  A BIC-type criterion over the eigenvalue sequence estimates the
structural dimension.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InputError
from .linalg import center_columns, sample_cov, sym_eigen
from .slicing import SliceScheme, make_slices
from .solver import SliceSolution, SolveConfig, solve_slice


@dataclass(frozen=True)
class PmFit:
    """Fitted linear principal machine.

    ``evalues``/``evectors`` decompose the working matrix; ``evectors[:, :d]``
    spans the estimated d-dimensional central subspace.  ``slice_solutions``
    aligns with ``scheme.cutpoints``.
    """

    evalues: np.ndarray
    evectors: np.ndarray
    slice_solutions: Tuple[SliceSolution, ...]
    mu: np.ndarray
    scheme: SliceScheme
    config: SolveConfig
    n: int

    @property
    def p(self):
        return len(self.mu)

    @property
    def working_matrix(self):
        m = np.zeros((self.p, self.p))
        for sol in self.slice_solutions:
            m += np.outer(sol.beta, sol.beta)
        return m


@dataclass(frozen=True)
class DimensionEstimate:
    """BIC-type criterion trace and its argmax."""

    criterion: np.ndarray
    d_hat: int
    rho: float


def _fit_on_columns(x, y, loss, h, config, mtype, custom_fn, min_cols):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise InputError("x must be a 2-d matrix")
    n, p = x.shape
    if p < min_cols:
        raise InputError(f"x needs at least {min_cols} columns, got {p}")
    if y.shape != (n,):
        raise InputError(f"y length {y.shape} does not match {n} rows of x")
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise InputError("x and y must be finite")
    if config is None:
        config = SolveConfig()

    z, mu = center_columns(x)
    sigma = sample_cov(z)
    # column-major once here; the per-slice solver reads columns contiguously
    z_aug = np.asfortranarray(np.hstack([np.ones((n, 1)), z]))
    scheme = make_slices(y, loss, h, mtype=mtype, custom_fn=custom_fn)

    solutions = []
    init = None
    for k in range(scheme.n_slices):
        ytilde = scheme.labels(y, k)
        sol = solve_slice(z_aug, sigma, ytilde, scheme.loss_for(k), config, init=init)
        solutions.append(sol)
        if config.warm_start:
            init = sol.augmented

    m = np.zeros((p, p))
    for sol in solutions:
        m += np.outer(sol.beta, sol.beta)
    eig = sym_eigen(m)

    return PmFit(
        evalues=eig.values,
        evectors=eig.vectors,
        slice_solutions=tuple(solutions),
        mu=mu,
        scheme=scheme,
        config=config,
        n=n,
    )


def fit_linear(x, y, loss="svm", h=10, config=None, mtype="m", custom_fn=None):
    """Fit a linear principal machine.

    Parameters
    ----------
    x : (n, p) array_like
        Predictor matrix, one row per observation, p >= 2.
    y : (n,) array_like
        Continuous response, or {-1, +1}-coded for the weighted losses.
    loss : str
        One of the built-in loss names, or "custom" with ``custom_fn``.
    h : int
        Requested number of slices.
    config : SolveConfig, optional
    mtype : str
        "m" or "r"; only consulted for custom losses.
    custom_fn : callable, optional
        Vectorized scalar loss for ``loss="custom"``.
    """
    return _fit_on_columns(x, y, loss, h, config, mtype, custom_fn, min_cols=2)


def bic_dimension(fit, n=None, rho=0.01, p_max=None):
    """Estimate the structural dimension from the working-matrix spectrum.

    Maximizes ``G(d) = sum_{j<=d} v_j - rho * d * log(n)/sqrt(n) * v_1`` over
    ``d in {1, ..., p_max}``; ties resolve to the smallest d.  ``fit`` may be
    a PmFit (``n`` defaults to its sample count) or a plain eigenvalue
    sequence (``n`` then required).
    """
    if rho <= 0:
        raise InputError(f"rho must be > 0, got {rho}")
    if isinstance(fit, PmFit):
        evalues = fit.evalues
        n = fit.n if n is None else n
    else:
        evalues = np.asarray(fit, dtype=float)
        if n is None:
            raise InputError("n is required when passing raw eigenvalues")
    if n < 2:
        raise InputError(f"n must be >= 2, got {n}")
    p = len(evalues)
    if p_max is None:
        p_max = p
    if not 1 <= p_max <= p:
        raise InputError(f"p_max must be in [1, {p}], got {p_max}")
    v = evalues[:p_max]
    penalty = rho * np.log(n) / np.sqrt(n) * evalues[0]
    criterion = np.cumsum(v) - penalty * np.arange(1, p_max + 1)
    return DimensionEstimate(
        criterion=criterion,
        d_hat=int(np.argmax(criterion)) + 1,
        rho=rho,
    )


def project(fit, newx, d=1):
    """Map new rows onto the leading-d sufficient predictors."""
    newx = np.atleast_2d(np.asarray(newx, dtype=float))
    if newx.shape[1] != fit.p:
        raise InputError(f"newx has {newx.shape[1]} columns, fit expects {fit.p}")
    if not 1 <= d <= fit.p:
        raise InputError(f"d must be in [1, {fit.p}], got {d}")
    return (newx - fit.mu) @ fit.evectors[:, :d]
