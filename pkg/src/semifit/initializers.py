"""Starting values for the optimizer.

The linear coefficients come from an ordinary least-squares regression of
the outcome on every feature (this same regression doubles as the
linear-baseline predictor in benchmarks); the projection directions come
from principal Hessian directions, a moment-based sufficient-dimension-
reduction method.  Both only need to land in the right neighborhood: the
estimating-equation minimization does the real work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeMismatch, SingularCovariance

__all__ = ["OLSFit", "ols_fit", "phd_directions"]


@dataclass(frozen=True)
class OLSFit:
    """Least-squares coefficients, with the intercept kept separate."""

    intercept: float
    coef: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.intercept + np.asarray(x, dtype=np.float64) @ self.coef


def ols_fit(x: np.ndarray, y: np.ndarray, intercept: bool = True) -> OLSFit:
    """Ordinary least squares of ``y`` on the columns of ``x``.

    Parameters
    ----------
    x : (n, k) array
    y : (n,) array
    intercept : bool
        Prepend a constant column.  When False, :attr:`OLSFit.intercept`
        is 0.

    Raises
    ------
    RankDeficient
        If the design matrix (including the constant column, when present)
        does not have full column rank.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"incompatible shapes x {x.shape}, y {y.shape}")
    design = np.column_stack([np.ones(x.shape[0]), x]) if intercept else x
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise RankDeficient(
            f"design matrix has rank {rank} < {design.shape[1]} columns"
        )
    if intercept:
        return OLSFit(intercept=float(coef[0]), coef=coef[1:])
    return OLSFit(intercept=0.0, coef=coef)


def phd_directions(x: np.ndarray, y: np.ndarray, d: int) -> np.ndarray:
    """Principal Hessian directions: d orthonormal columns spanning the
    directions along which the regression surface curves most.

    Builds the outcome-weighted second-moment matrix

        M = n^-1 * sum_i (y_i - ybar) (x_i - xbar)(x_i - xbar)^T

    and returns the top-d eigenvectors, by eigenvalue magnitude, of
    cov(x)^-1 M.  The non-symmetric product is solved through the symmetric
    equivalent S^-1/2 M S^-1/2 and back-transformed, which keeps the
    eigenvectors real.

    Raises
    ------
    SingularCovariance
        If the sample covariance of ``x`` is numerically singular.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ShapeMismatch(f"incompatible shapes x {x.shape}, y {y.shape}")
    n, q = x.shape
    if not 1 <= d < q:
        raise ShapeMismatch(f"need 1 <= d < {q}, got d={d}")
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    cov = (xc.T @ xc) / n
    m = (xc.T * yc) @ xc / n

    evals_s, vecs_s = np.linalg.eigh(cov)
    if evals_s[0] <= evals_s[-1] * 1e-12 or evals_s[0] <= 0:
        raise SingularCovariance(
            f"feature covariance is numerically singular (min eigenvalue {evals_s[0]:.3e})"
        )
    # Whiten: eigenvectors of S^-1/2 M S^-1/2 map back through S^-1/2.
    inv_sqrt = vecs_s * (evals_s ** -0.5) @ vecs_s.T
    sym = inv_sqrt @ m @ inv_sqrt
    evals, vecs = np.linalg.eigh(sym)
    order = np.argsort(-np.abs(evals))[:d]
    raw = inv_sqrt @ vecs[:, order]

    from .estimator import reparam_gamma  # deferred: estimator imports this module

    return reparam_gamma(raw)
