"""Coordinatewise gradient descent for the per-slice machine objective.

One slice solves

    L(b) = b' Diag{0, Sigma} b + (lam/n) * sum_i loss(u_i),

over the augmented coefficient vector ``b = (alpha, beta)`` with fitted
values ``f = Z_aug @ b`` and scalar argument ``u_i = y_i * f_i`` (margin
losses) or ``u_i = y_i - f_i`` (residual losses).  The solver sweeps the
coordinates Gauss-Seidel style — each coordinate steps ``-eta`` times the
partial derivative evaluated at the freshest iterate — until the largest
coordinate change in a sweep drops below ``eps``.

The learning rate is fixed, as in plain gradient descent; if a sweep ever
increases the objective the sweep is rolled back and ``eta`` halved (at most
20 times), which keeps the objective non-increasing without changing the
algorithm on its normal path.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, InputError
from .losses import WEIGHTED_FAMILIES, _base_derivative, _weights, loss_derivative, loss_value

MAX_HALVINGS = 20
ASCENT_TOL = 1e-10

_FAST = None


def _fast_module():
    # compiled sweep kernel; loaded on first use so plain imports stay light
    global _FAST
    if _FAST is None:
        try:
            from . import _fast

            _FAST = _fast
        except ImportError:
            _FAST = False
    return _FAST


@dataclass(frozen=True)
class SolveConfig:
    """Solver knobs: cost parameter, learning rate, stopping rule.

    ``warm_start`` lets a multi-slice fit seed each slice with the previous
    slice's solution; it has no effect on a single ``solve_slice`` call.
    """

    lam: float = 1.0
    eta: float = 0.1
    eps: float = 1e-5
    max_iter: int = 100
    warm_start: bool = True

    def __post_init__(self):
        for name in ("lam", "eta", "eps"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.max_iter < 1:
            raise InputError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class SliceSolution:
    """One slice's fitted machine: intercept, slope vector, solver trace."""

    alpha: float
    beta: np.ndarray
    iterations: int
    converged: bool
    final_step: float
    halvings: int = 0

    @property
    def augmented(self):
        return np.concatenate(([self.alpha], self.beta))


def _validate(beta_aug, z_aug, sigma, ytilde):
    if z_aug.ndim != 2:
        raise InputError("z_aug must be 2-d")
    n, p1 = z_aug.shape
    if beta_aug.shape != (p1,):
        raise InputError(f"coefficient length {beta_aug.shape} does not match {p1} columns")
    if sigma.shape != (p1 - 1, p1 - 1):
        raise InputError(f"Sigma shape {sigma.shape} does not match p = {p1 - 1}")
    if ytilde.shape != (n,):
        raise InputError(f"response length {ytilde.shape} does not match {n} rows")
    if not np.all(z_aug[:, 0] == 1.0):
        raise InputError("z_aug must carry an all-ones first column for the intercept")


def _scalar_args(spec, ytilde, f):
    return ytilde * f if spec.is_margin else ytilde - f


def objective(beta_aug, z_aug, sigma, ytilde, spec, cfg):
    """Penalized empirical loss at ``beta_aug``."""
    beta_aug = np.asarray(beta_aug, dtype=float)
    z_aug = np.asarray(z_aug, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    ytilde = np.asarray(ytilde, dtype=float)
    _validate(beta_aug, z_aug, sigma, ytilde)
    n = z_aug.shape[0]
    beta = beta_aug[1:]
    u = _scalar_args(spec, ytilde, z_aug @ beta_aug)
    return float(beta @ sigma @ beta + cfg.lam / n * loss_value(spec, u, ytilde).sum())


def gradient(beta_aug, z_aug, sigma, ytilde, spec, cfg):
    """Full gradient of ``objective`` with respect to ``beta_aug``."""
    beta_aug = np.asarray(beta_aug, dtype=float)
    z_aug = np.asarray(z_aug, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    ytilde = np.asarray(ytilde, dtype=float)
    _validate(beta_aug, z_aug, sigma, ytilde)
    n = z_aug.shape[0]
    u = _scalar_args(spec, ytilde, z_aug @ beta_aug)
    lp = loss_derivative(spec, u, ytilde)
    chain = lp * ytilde if spec.is_margin else -lp
    g = cfg.lam / n * (z_aug.T @ chain)
    g[1:] += 2.0 * (sigma @ beta_aug[1:])
    return g


def _derivative_fn(spec, ytilde):
    # closure evaluating dloss/du on the current scalar arguments; weights
    # and family dispatch are hoisted out of the sweep loop
    if spec.family == "custom":
        return lambda u: loss_derivative(spec, u, ytilde)
    if spec.family in WEIGHTED_FAMILIES:
        w = _weights(spec.theta, ytilde)
        base = spec.family[1:]
        return lambda u: w * _base_derivative(base, u, spec.theta)
    return lambda u: _base_derivative(spec.family, u, spec.theta)


def solve_slice(z_aug, sigma, ytilde, spec, cfg, init=None):
    """Minimize one slice's objective by coordinatewise gradient descent.

    Parameters
    ----------
    z_aug : (n, p+1) ndarray
        Centered predictors with a leading all-ones column.
    sigma : (p, p) ndarray
        Predictor covariance (penalty matrix for the slope block).
    ytilde : (n,) ndarray
        This slice's response (pseudo-labels or the original response).
    spec : LossSpec
    cfg : SolveConfig
    init : (p+1,) ndarray, optional
        Starting point; zeros when omitted.
    """
    # column-major layout keeps the per-coordinate column passes contiguous,
    # which is what makes the sweep cost scale linearly in n
    z_aug = np.asfortranarray(z_aug, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    ytilde = np.asarray(ytilde, dtype=float)
    n, p1 = z_aug.shape
    if init is None:
        init = np.zeros(p1)
    beta = np.asarray(init, dtype=float).copy()
    _validate(beta, z_aug, sigma, ytilde)
    if spec.is_margin and np.all(ytilde == ytilde[0]):
        raise InputError("slice response is constant; degenerate slices must be filtered out")

    lam_n = cfg.lam / n
    margin = spec.is_margin
    eta = cfg.eta

    f = z_aug @ beta
    s = sigma @ beta[1:]

    fast = _fast_module()
    if spec.family != "custom" and fast:
        base = spec.family[1:] if spec.family in WEIGHTED_FAMILIES else spec.family
        code = fast.FAMILY_CODES[base]
        theta = float(spec.theta) if spec.theta is not None else 0.0
        if spec.family in WEIGHTED_FAMILIES:
            weights = _weights(spec.theta, ytilde)
        else:
            weights = np.ones(n)

        def run_sweep(rate):
            return fast.sweep(
                z_aug, sigma, ytilde, weights, beta, f, s, lam_n, rate, code, theta, margin
            )

    else:
        deriv = _derivative_fn(spec, ytilde)

        def run_sweep(rate):
            max_step = 0.0
            with np.errstate(over="ignore", invalid="ignore"):
                for j in range(p1):
                    u = ytilde * f if margin else ytilde - f
                    lp = deriv(u)
                    chain = lp * ytilde if margin else -lp
                    g = lam_n * np.dot(chain, z_aug[:, j])
                    if j >= 1:
                        g += 2.0 * s[j - 1]
                    step = -rate * g
                    beta[j] += step
                    f += step * z_aug[:, j]
                    if j >= 1:
                        s += step * sigma[:, j - 1]
                    if abs(step) > max_step:
                        max_step = abs(step)
            return max_step

    def current_objective():
        u = _scalar_args(spec, ytilde, f)
        return float(beta[1:] @ s + lam_n * loss_value(spec, u, ytilde).sum())

    prev_obj = current_objective()
    halvings = 0
    converged = False
    final_step = np.inf
    iterations = 0

    for _ in range(cfg.max_iter):
        iterations += 1
        beta_snap, f_snap, s_snap = beta.copy(), f.copy(), s.copy()
        obj_snap = prev_obj
        final_step = max_step = run_sweep(eta)

        if not np.isfinite(beta).all():
            raise DivergenceError(
                f"coordinate descent diverged (non-finite iterate) at eta={cfg.eta}",
                eta=cfg.eta,
            )
        obj = current_objective()
        if not np.isfinite(obj):
            raise DivergenceError(
                f"coordinate descent diverged (non-finite objective) at eta={cfg.eta}",
                eta=cfg.eta,
            )
        if obj > prev_obj + ASCENT_TOL:
            # roll the sweep back in place (run_sweep aliases the arrays)
            # and retry with a smaller step
            beta[:] = beta_snap
            f[:] = f_snap
            s[:] = s_snap
            prev_obj = obj_snap
            eta *= 0.5
            halvings += 1
            if halvings > MAX_HALVINGS:
                break
            continue
        prev_obj = obj
        if max_step < cfg.eps:
            converged = True
            break

    return SliceSolution(
        alpha=float(beta[0]),
        beta=beta[1:].copy(),
        iterations=iterations,
        converged=converged,
        final_step=float(final_step),
        halvings=halvings,
    )
