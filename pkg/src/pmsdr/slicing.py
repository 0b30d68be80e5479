"""Per-slice problem construction.

Response-sliced machines (hinge, logistic, squared hinge, squared) threshold
a continuous response at empirical quantile cutpoints into +/-1 pseudo-labels,
one problem per cutpoint.  Loss-sliced machines keep the response fixed and
sweep the loss parameter over ``k/(h+1)``: class weights for the weighted
margin families, quantile/asymmetry levels for the residual families.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateSliceError, InputError
from .losses import (
    LossSpec,
    RESIDUAL_FAMILIES,
    WEIGHTED_FAMILIES,
    loss_spec,
)

KIND_RESPONSE = "response"
KIND_WEIGHTED = "weighted"
KIND_PARAMETRIC = "parametric"


@dataclass(frozen=True)
class SliceScheme:
    """The retained slice sequence for one fit.

    ``cutpoints`` are strictly increasing: response-scale thresholds for
    response-sliced schemes, values in (0, 1) otherwise.  ``dropped`` counts
    requested slices lost to duplicate quantiles or one-sided labelings.
    """

    h: int
    kind: str
    family: str
    mtype: str
    cutpoints: np.ndarray
    dropped: int = 0
    custom_fn: Optional[Callable] = field(default=None, repr=False)

    @property
    def n_slices(self):
        return len(self.cutpoints)

    def loss_for(self, k):
        """LossSpec for slice ``k`` (0-based)."""
        self._check_index(k)
        if self.kind == KIND_RESPONSE:
            if self.family == "custom":
                return loss_spec("custom", mtype=self.mtype, custom_fn=self.custom_fn)
            return loss_spec(self.family)
        return loss_spec(self.family, theta=float(self.cutpoints[k]))

    def labels(self, y, k):
        """Pseudo-response for slice ``k``: +/-1 thresholded labels for
        response-sliced schemes, ``y`` unchanged otherwise."""
        self._check_index(k)
        y = np.asarray(y, dtype=float)
        if self.kind == KIND_RESPONSE:
            return np.where(y >= self.cutpoints[k], 1.0, -1.0)
        return y

    def _check_index(self, k):
        if not 0 <= k < self.n_slices:
            raise InputError(f"slice index {k} out of range [0, {self.n_slices})")


def _is_binary(y):
    return np.isin(y, (-1.0, 1.0)).all()


def make_slices(y, family, h, mtype="m", custom_fn=None):
    """Build the slice scheme for a loss family.

    Response-sliced families place cutpoints at the ``k/(h+1)`` empirical
    quantiles of ``y`` (linear-interpolation quantiles), collapsing duplicate
    cutpoints and dropping slices whose thresholded labels are one-sided.
    Loss-sliced families use cutpoints ``k/(h+1)`` on (0, 1) directly.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise InputError("response must be a 1-d vector")
    if h < 1:
        raise InputError(f"h must be >= 1, got {h}")
    if len(np.unique(y)) < 2:
        raise InputError("response must take at least 2 distinct values")

    levels = np.arange(1, h + 1) / (h + 1)

    if family in WEIGHTED_FAMILIES:
        if not _is_binary(y):
            raise InputError(f"loss {family!r} needs a {{-1, +1}}-coded binary response")
        return SliceScheme(h, KIND_WEIGHTED, family, "m", levels)

    if family in RESIDUAL_FAMILIES:
        return SliceScheme(h, KIND_PARAMETRIC, family, "r", levels)

    if family != "custom" and family not in ("svm", "logit", "l2svm", "lssvm"):
        # surfaces the same catalog message as LossSpec validation
        loss_spec(family)

    if _is_binary(y) and h > 1:
        raise InputError(
            "response-sliced machines need a continuous response for h > 1; "
            "use a weighted loss (wsvm, wlogit, wl2svm, wlssvm) for binary data"
        )

    cuts = np.unique(np.quantile(y, levels))
    retained = []
    for c in cuts:
        labels = y >= c
        if labels.all() or not labels.any():
            continue
        retained.append(c)
    if not retained:
        raise DegenerateSliceError(
            "every requested slice is degenerate (one-sided labels); "
            "the response may be too discrete for this h"
        )
    dropped = h - len(retained)
    eff_mtype = mtype if family == "custom" else "m"
    return SliceScheme(
        h, KIND_RESPONSE, family, eff_mtype, np.asarray(retained), dropped, custom_fn
    )


def pseudo_labels(scheme, y, k):
    """Per-slice response: thresholded +/-1 labels or the original ``y``."""
    return scheme.labels(y, k)
