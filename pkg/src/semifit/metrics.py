"""Error and subspace-recovery metrics."""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient, ShapeMismatch

__all__ = ["projection_distance", "rmse"]


def rmse(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Root mean squared error between two equal-length vectors."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ShapeMismatch(
            f"rmse needs two equal-length vectors, got {y_true.shape} and {y_pred.shape}"
        )
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def _projector(b: np.ndarray, name: str) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.ndim == 1:
        b = b[:, None]
    if b.ndim != 2:
        raise ShapeMismatch(f"{name} must be a vector or matrix, got shape {b.shape}")
    if np.linalg.matrix_rank(b) < b.shape[1]:
        raise RankDeficient(f"{name} has linearly dependent columns")
    # Orthogonal projector onto the column span: B (B^T B)^{-1} B^T.
    q, _ = np.linalg.qr(b)
    return q @ q.T

def projection_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """Frobenius distance between the orthogonal projectors onto two spans.

    Basis-invariant: any invertible recombination of columns leaves the
    value unchanged, so it compares the subspaces themselves.  Zero iff the
    spans coincide; for two rank-k spans the maximum is sqrt(2 k).

    Raises
    ------
    RankDeficient
        If either matrix has linearly dependent columns.
    ShapeMismatch
        If the row dimensions (ambient spaces) differ.
    """
    p1 = _projector(b1, "b1")
    p2 = _projector(b2, "b2")
    if p1.shape != p2.shape:
        raise ShapeMismatch(
            f"spans live in different ambient dimensions: {p1.shape[0]} vs {p2.shape[0]}"
        )
    return float(np.linalg.norm(p1 - p2, ord="fro"))
