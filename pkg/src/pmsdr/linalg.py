"""Dense numeric kernel: centering, covariance, symmetric eigen, SPD solves.

Everything downstream (slice solvers, working-matrix spectra, kernel bases,
streamed normal equations) funnels through these four operations, so the
conventions fixed here — descending eigenvalues, deterministic eigenvector
signs, divisor ``n`` covariance — hold package-wide.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import InputError, SingularMatrixError

#: relative asymmetry tolerated before ``sym_eigen`` rejects its input
SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    ``values`` are sorted non-increasing and ``vectors[:, i]`` is the unit
    eigenvector for ``values[i]``.  Signs are normalized so the largest-
    magnitude entry of each eigenvector is positive (first such entry on
    ties), which keeps golden tests stable across runs and platforms.
    """

    values: np.ndarray
    vectors: np.ndarray


def _fix_signs(vectors):
    # flip each column so its largest-|.| entry is positive; argmax takes
    # the lowest index on ties
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eigen(a):
    """Eigendecompose a symmetric matrix.

    Parameters
    ----------
    a : (m, m) array_like
        Symmetric within ``SYMMETRY_RTOL`` relative to its largest entry.

    Returns
    -------
    EigenDecomposition
        All eigenpairs, descending, sign-normalized.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"sym_eigen expects a square matrix, got shape {a.shape}")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > SYMMETRY_RTOL * scale:
        raise InputError("sym_eigen expects a symmetric matrix")
    values, vectors = np.linalg.eigh(a)
    # stable descending sort keeps eigh's tie order deterministic
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], _fix_signs(vectors[:, order]))


def solve_spd(a, b):
    """Solve ``a @ x = b`` for symmetric positive-definite ``a``.

    Uses a Cholesky factorization; a non-positive pivot raises
    ``SingularMatrixError`` carrying the 0-based pivot index.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"solve_spd expects a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise InputError("solve_spd right-hand side length mismatch")
    c, info = lapack.dpotrf(a, lower=1)
    if info > 0:
        raise SingularMatrixError(
            f"matrix is not positive definite (pivot {info - 1} non-positive)",
            pivot=info - 1,
        )
    if info < 0:
        raise InputError(f"invalid argument {-info} to Cholesky factorization")
    x, info = lapack.dpotrs(c, b, lower=1)
    if info != 0:
        raise InputError("triangular solve failed")
    return x


def center_columns(x):
    """Subtract column means.

    Returns
    -------
    (z, mu)
        ``z`` the centered matrix, ``mu`` the column-mean vector.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InputError("center_columns expects a 2-d matrix")
    if x.shape[0] < 2:
        raise InputError("center_columns needs at least 2 rows")
    mu = x.mean(axis=0)
    return x - mu, mu


def sample_cov(z):
    """Covariance ``z.T @ z / n`` of a column-centered matrix (divisor n)."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    return z.T @ z / n


def projection_distance(a, b):
    """Frobenius distance ``|P_a - P_b|_F`` between column-span projectors.

    ``a`` and ``b`` are (p, d) matrices with orthonormal columns spanning the
    two subspaces being compared.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] != b.shape[0]:
        raise InputError("subspaces live in different ambient dimensions")
    pa = a @ a.T
    pb = b @ b.T
    return float(np.linalg.norm(pa - pb, "fro"))
