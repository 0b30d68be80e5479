"""Convex loss catalog for principal machines.

Ten built-in families plus a user-supplied hook.  Margin-type losses take
the margin ``m = y*f`` as scalar argument, residual-type losses the residual
``r = y - f``.  The weighted families multiply their unweighted counterpart
by ``pi(y) = theta`` for ``y = +1`` and ``1 - theta`` for ``y = -1``.

All evaluators are vectorized over ``u`` (and ``y``).  Derivatives at the
non-differentiable points use fixed conventions — hinge kinks take the flat
side (0), the check-loss kink at 0 takes the right derivative ``theta`` —
so results are deterministic.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import InputError

MARGIN_FAMILIES = ("svm", "logit", "l2svm", "lssvm", "wsvm", "wlogit", "wl2svm", "wlssvm")
RESIDUAL_FAMILIES = ("qr", "asls")
WEIGHTED_FAMILIES = ("wsvm", "wlogit", "wl2svm", "wlssvm")
PARAMETRIC_FAMILIES = WEIGHTED_FAMILIES + RESIDUAL_FAMILIES
BUILTIN_FAMILIES = MARGIN_FAMILIES + RESIDUAL_FAMILIES


@dataclass(frozen=True)
class LossSpec:
    """A fully determined scalar loss: family, margin/residual type, parameter.

    ``theta`` is the per-slice parameter in (0, 1) (class weight for the
    weighted families, quantile level for ``qr``, asymmetry for ``asls``);
    it is ignored by the unweighted margin families.  ``custom_fn`` holds the
    scalar loss for ``family="custom"`` and must be vectorized over ``u``.
    """

    family: str
    mtype: str = "m"
    theta: Optional[float] = None
    custom_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.family == "custom":
            if self.custom_fn is None:
                raise InputError("custom loss requires custom_fn")
            if self.mtype not in ("m", "r"):
                raise InputError(f"mtype must be 'm' or 'r', got {self.mtype!r}")
            return
        if self.family not in BUILTIN_FAMILIES:
            raise InputError(
                f"unknown loss {self.family!r}; valid losses: {', '.join(BUILTIN_FAMILIES)}"
            )
        expected = "m" if self.family in MARGIN_FAMILIES else "r"
        if self.mtype != expected:
            raise InputError(f"loss {self.family!r} is fixed to mtype {expected!r}")
        if self.family in PARAMETRIC_FAMILIES:
            if self.theta is None or not 0.0 < self.theta < 1.0:
                raise InputError(f"loss {self.family!r} needs theta in (0, 1), got {self.theta}")

    @property
    def is_margin(self):
        return self.mtype == "m"


def loss_spec(family, theta=None, mtype="m", custom_fn=None):
    """Build a LossSpec, filling in the family's fixed margin/residual type."""
    if family == "custom":
        return LossSpec("custom", mtype, theta, custom_fn)
    if family in MARGIN_FAMILIES:
        return LossSpec(family, "m", theta)
    if family in RESIDUAL_FAMILIES:
        return LossSpec(family, "r", theta)
    raise InputError(f"unknown loss {family!r}; valid losses: {', '.join(BUILTIN_FAMILIES)}")


def _weights(theta, y):
    if y is None:
        raise InputError("weighted losses need the binary response y")
    y = np.asarray(y, dtype=float)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise InputError("weighted losses need y in {-1, +1}")
    return np.where(y > 0, theta, 1.0 - theta)


def _hinge(u):
    return np.maximum(0.0, 1.0 - u)


def _base_value(family, u, theta):
    if family == "svm":
        return _hinge(u)
    if family == "logit":
        # log(1 + exp(-u)) without overflow for large negative u
        return np.logaddexp(0.0, -u)
    if family == "l2svm":
        return _hinge(u) ** 2
    if family == "lssvm":
        return (1.0 - u) ** 2
    if family == "qr":
        return u * (theta - (u < 0))
    if family == "asls":
        return u**2 * np.where(u < 0, 1.0 - theta, theta)
    raise InputError(f"unknown loss family {family!r}")


def _base_derivative(family, u, theta):
    if family == "svm":
        return np.where(u < 1.0, -1.0, 0.0)
    if family == "logit":
        return -expit(-u)
    if family == "l2svm":
        return -2.0 * _hinge(u)
    if family == "lssvm":
        return -2.0 * (1.0 - u)
    if family == "qr":
        # right derivative theta at the kink u = 0
        return np.where(u < 0, theta - 1.0, theta)
    if family == "asls":
        return 2.0 * u * np.where(u < 0, 1.0 - theta, theta)
    raise InputError(f"unknown loss family {family!r}")


def _custom_value(fn, u):
    with np.errstate(all="ignore"):
        v = np.asarray(fn(u), dtype=float)
    if not np.isfinite(v).all():
        raise InputError("custom loss returned a non-finite value")
    return v


def loss_value(spec, u, y=None):
    """Evaluate the loss at scalar argument(s) ``u`` (margin or residual)."""
    u = np.asarray(u, dtype=float)
    if spec.family == "custom":
        return _custom_value(spec.custom_fn, u)
    base = spec.family[1:] if spec.family in WEIGHTED_FAMILIES else spec.family
    v = _base_value(base, u, spec.theta)
    if spec.family in WEIGHTED_FAMILIES:
        v = _weights(spec.theta, y) * v
    return v


def loss_derivative(spec, u, y=None):
    """Derivative of the loss with respect to ``u``.

    Built-in families are analytic (with the kink conventions above); custom
    losses use a central difference with step ``1e-6 * max(1, |u|)``.
    """
    u = np.asarray(u, dtype=float)
    if spec.family == "custom":
        delta = 1e-6 * np.maximum(1.0, np.abs(u))
        hi = _custom_value(spec.custom_fn, u + delta)
        lo = _custom_value(spec.custom_fn, u - delta)
        return (hi - lo) / (2.0 * delta)
    base = spec.family[1:] if spec.family in WEIGHTED_FAMILIES else spec.family
    d = _base_derivative(base, u, spec.theta)
    if spec.family in WEIGHTED_FAMILIES:
        d = _weights(spec.theta, y) * d
    return d
