"""Kernel principal machines for nonlinear dimension reduction.

The predictors are mapped into the coordinates of the leading eigenbasis of
the doubly centered Gaussian kernel matrix; the linear machinery then runs
unchanged on those coordinates.  New points are mapped through the stored
basis, so the fitted reduction extends beyond the training sample.

For a training kernel matrix K (with K(u, u) = 1) the j-th basis function is
``psi_j(x) = k(x)' q_j / lam_j`` with ``k(x)`` the vector of kernel
evaluations against the training rows and ``(q_j, lam_j)`` the j-th leading
eigenpair of the centered matrix.  Feature coordinates subtract the training
mean ``psi_bar_j``, which makes the mapped training block coincide exactly
with the eigenvector block ``q``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateBasisError, InputError
from .linalg import sym_eigen
from .linear import PmFit, _fit_on_columns

#: relative eigenvalue threshold below which basis components are dropped
COMPONENT_RTOL = 1e-10


@dataclass(frozen=True)
class KernelBasis:
    """Frozen training-data kernel eigenbasis.

    ``q`` holds the retained eigenvectors (columns), ``lam`` their
    eigenvalues, ``col_means`` the kernel-column means used for centering and
    ``psi_bar`` the training means of the raw basis evaluations.
    """

    train_x: np.ndarray = field(repr=False)
    gamma: float
    q: np.ndarray = field(repr=False)
    lam: np.ndarray
    col_means: np.ndarray = field(repr=False)
    psi_bar: np.ndarray

    @property
    def n(self):
        return self.train_x.shape[0]

    @property
    def b(self):
        return self.q.shape[1]

    @property
    def train_features(self):
        """Mapped training coordinates; identical to the eigenvector block."""
        return self.q


@dataclass(frozen=True)
class NpmFit:
    """Kernel principal machine: basis plus the linear fit on its coordinates."""

    basis: KernelBasis
    inner: PmFit


def median_heuristic_gamma(x):
    """1 / median pairwise squared distance; the usual parameter-free bandwidth."""
    x = np.asarray(x, dtype=float)
    med = np.median(pdist(x, "sqeuclidean"))
    if med <= 0:
        # all points coincide; any bandwidth gives a constant kernel
        return 1.0
    return 1.0 / med


def build_basis(x, b=None, gamma=None):
    """Eigendecompose the centered Gaussian kernel matrix of ``x``.

    ``b`` defaults to ``floor(n/3)``; components with eigenvalues below
    ``COMPONENT_RTOL`` times the leading one are dropped (they would divide
    by a vanishing ``lam_j``), shrinking the basis.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InputError("x must be a 2-d matrix")
    n = x.shape[0]
    if n < 3:
        raise InputError(f"kernel basis needs n >= 3 rows, got {n}")
    if b is None:
        b = n // 3
    if not 1 <= b <= n:
        raise InputError(f"b must be in [1, {n}], got {b}")
    if gamma is None:
        gamma = median_heuristic_gamma(x)
    if gamma <= 0:
        raise InputError(f"gamma must be > 0, got {gamma}")

    k = np.exp(-gamma * cdist(x, x, "sqeuclidean"))
    col_means = k.mean(axis=0)
    grand_mean = k.mean()
    centered = k - col_means[None, :] - col_means[:, None] + grand_mean
    eig = sym_eigen(centered)

    values = eig.values[:b]
    vectors = eig.vectors[:, :b]
    keep = values > max(COMPONENT_RTOL * max(values[0], 0.0), 0.0)
    if not keep.any():
        raise DegenerateBasisError(
            "centered kernel matrix has no usable spectrum; "
            "the data may be constant or gamma degenerate"
        )
    q = vectors[:, keep]
    lam = values[keep]
    psi_bar = (col_means @ q) / lam
    return KernelBasis(
        train_x=x.copy(),
        gamma=float(gamma),
        q=q,
        lam=lam,
        col_means=col_means,
        psi_bar=psi_bar,
    )


def feature_map(basis, newx):
    """Map rows of ``newx`` to centered basis coordinates (m, b)."""
    newx = np.atleast_2d(np.asarray(newx, dtype=float))
    if newx.shape[1] != basis.train_x.shape[1]:
        raise InputError(
            f"newx has {newx.shape[1]} columns, basis expects {basis.train_x.shape[1]}"
        )
    k_new = np.exp(-basis.gamma * cdist(newx, basis.train_x, "sqeuclidean"))
    return (k_new @ basis.q) / basis.lam - basis.psi_bar


def fit_kernel(x, y, loss="svm", h=10, config=None, b=None, gamma=None, mtype="m", custom_fn=None):
    """Fit a kernel principal machine.

    Builds the kernel eigenbasis, then runs the linear fit on the mapped
    coordinates with identical slicing and solver semantics.
    """
    basis = build_basis(x, b=b, gamma=gamma)
    inner = _fit_on_columns(
        basis.train_features, y, loss, h, config, mtype, custom_fn, min_cols=1
    )
    return NpmFit(basis=basis, inner=inner)


def project_nonlinear(fit, newx, d=2):
    """Nonlinear sufficient predictors for new rows: feature map then the
    leading-d eigenvector block of the inner fit."""
    if not 1 <= d <= fit.basis.b:
        raise InputError(f"d must be in [1, {fit.basis.b}], got {d}")
    return feature_map(fit.basis, newx) @ fit.inner.evectors[:, :d]
