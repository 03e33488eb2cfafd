"""Prediction from a fitted model.

The linear part is a dot product; the residual surface has no closed form
and is re-estimated at query points by kernel regression over the training
projections the model carries with it.
"""

from __future__ import annotations

import numpy as np

from .core import FittedModel
from .errors import ShapeMismatch
from .kernel import nw_regress

__all__ = ["decompose", "predict"]


def decompose(
    model: FittedModel, x_int_new: np.ndarray, x_uint_new: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Linear and residual-surface parts of the prediction, separately.

    Returns ``(h_part, r_part)`` with ``h_part = x_int_std^T psi`` and

        r_part = E[Y | proj] - E[h | proj]

    where both conditional expectations are kernel regressions over the
    stored training projections at the model's bandwidth.  Their sum is the
    prediction; keeping them apart powers what-does-the-linear-term-explain
    diagnostics.
    """
    x_int_new = np.asarray(x_int_new, dtype=np.float64)
    x_uint_new = np.asarray(x_uint_new, dtype=np.float64)
    if x_int_new.ndim == 1:
        x_int_new = x_int_new[:, None]
    if x_uint_new.ndim == 1:
        x_uint_new = x_uint_new[:, None]
    p, q = model.params.p, model.params.q
    if x_int_new.shape[1] != p or x_uint_new.shape[1] != q:
        raise ShapeMismatch(
            f"model expects ({p}, {q}) feature columns, "
            f"got ({x_int_new.shape[1]}, {x_uint_new.shape[1]})"
        )
    if x_int_new.shape[0] != x_uint_new.shape[0]:
        raise ShapeMismatch("x_int_new and x_uint_new row counts disagree")
    if not (np.all(np.isfinite(x_int_new)) and np.all(np.isfinite(x_uint_new))):
        raise ShapeMismatch("query features must be finite")

    std = model.standardizer
    h_part = std.apply_int(x_int_new) @ model.params.psi
    proj = std.apply_uint(x_uint_new) @ model.params.gamma
    targets = np.column_stack([model.train_y, model.train_h])
    est = nw_regress(model.train_proj, targets, z_eval=proj, bandwidth=model.bandwidth)
    r_part = est[:, 0] - est[:, 1]
    return h_part, r_part


def predict(
    model: FittedModel, x_int_new: np.ndarray, x_uint_new: np.ndarray
) -> np.ndarray:
    """Predicted outcomes at new feature rows (raw units, as trained on)."""
    h_part, r_part = decompose(model, x_int_new, x_uint_new)
    return h_part + r_part
