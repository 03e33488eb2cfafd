"""Structural-dimension selection by bootstrap projection stability.

For each candidate dimension k, the projection is fitted on the full data
and on B bootstrap resamples; the trace correlation between the full-data
projection of X_uint and each bootstrap projection of the same rows
measures how reproducible a k-dimensional projection is.  Dimensions
beyond the true one add directions driven by noise, which do not replicate
across resamples and drag the averaged correlation down, so the score
peaks near the true dimension.  The argmax is returned.
"""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from .core import Dataset, FitConfig
from .errors import DimSelFailed, SemifitError, ShapeMismatch, SingularVariance
from .estimator import fit
from .parallel import thread_map

__all__ = ["select_dimension", "trace_correlation"]

log = logging.getLogger(__name__)


def _as_columns(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be (n,) or (n, k), got shape {a.shape}")
    return a


def _inv_sqrt_psd(s: np.ndarray, name: str) -> np.ndarray:
    evals, vecs = np.linalg.eigh(s)
    if evals[0] <= evals[-1] * 1e-12 or evals[0] <= 0:
        raise SingularVariance(f"sample variance of {name} is numerically singular")
    return vecs * (evals**-0.5) @ vecs.T


def trace_correlation(u: np.ndarray, v: np.ndarray) -> float:
    """Mean canonical correlation (squared) between two k-column samples.

    r2 = k^-1 * trace[ var(U)^-1/2 cov(U,V) var(V)^-1 cov(V,U) var(U)^-1/2 ]

    with sample moments throughout.  Invariant to invertible affine maps of
    either argument, 1 when the columns span identical variables, near 0
    when independent.  For k=1 it is the squared Pearson correlation.

    Raises
    ------
    SingularVariance
        If either sample variance matrix is numerically singular.
    """
    u = _as_columns(u, "u")
    v = _as_columns(v, "v")
    if u.shape != v.shape:
        raise ShapeMismatch(f"u and v must have equal shape, got {u.shape}, {v.shape}")
    n, k = u.shape
    if n < k + 1:
        raise ShapeMismatch(f"need more than {k} rows to form sample moments")
    uc = u - u.mean(axis=0)
    vc = v - v.mean(axis=0)
    s_uu = uc.T @ uc / (n - 1)
    s_vv = vc.T @ vc / (n - 1)
    s_uv = uc.T @ vc / (n - 1)
    u_half = _inv_sqrt_psd(s_uu, "u")
    evals_v, vecs_v = np.linalg.eigh(s_vv)
    if evals_v[0] <= evals_v[-1] * 1e-12 or evals_v[0] <= 0:
        raise SingularVariance("sample variance of v is numerically singular")
    v_inv = vecs_v * (1.0 / evals_v) @ vecs_v.T
    m = u_half @ s_uv @ v_inv @ s_uv.T @ u_half
    return float(np.trace(m) / k)


def select_dimension(
    data: Dataset, config: FitConfig, k_max: int, B: int
) -> tuple[int, np.ndarray]:
    """Choose the structural dimension in 1..k_max by bootstrap stability.

    For each k, fits the model at dimension k on the full data and on B
    row resamples (drawn with replacement, seeded from ``config.seed``),
    then averages the trace correlation between the full-data projection of
    X_uint and each bootstrap model's projection of the same rows.  Returns
    the maximizing k (ties toward smaller k) and the k_max score vector.

    A bootstrap replicate whose fit fails is skipped with a log entry;
    :class:`DimSelFailed` is raised if more than half of a candidate's
    replicates fail.

    Scores are deterministic for fixed (data, config, seed) regardless of
    thread count: replicate results are reduced in index order.
    """
    if not 1 <= k_max < data.q:
        raise ShapeMismatch(f"need 1 <= k_max < q = {data.q}, got {k_max}")
    if B < 2:
        raise ValueError("B must be >= 2")
    raw_uint = data.x_uint
    scores = np.zeros(k_max)
    for k in range(1, k_max + 1):
        override = config.bandwidth_override if k == config.d else None
        cfg_k = replace(config, d=k, bandwidth_override=override)
        full = fit(data, cfg_k)
        u = full.standardizer.apply_uint(raw_uint) @ full.params.gamma

        def one_replicate(b: int, cfg_k=cfg_k, u=u, k=k) -> float | None:
            rng = np.random.default_rng([config.seed, k, b])
            idx = rng.integers(0, data.n, size=data.n)
            resample = Dataset(
                y=data.y[idx], x_int=data.x_int[idx], x_uint=data.x_uint[idx]
            )
            try:
                boot = fit(resample, cfg_k)
            except SemifitError as exc:
                log.warning("bootstrap replicate %d at k=%d failed: %s", b, k, exc)
                return None
            v = boot.standardizer.apply_uint(raw_uint) @ boot.params.gamma
            return trace_correlation(u, v)

        values = thread_map(one_replicate, range(1, B + 1))
        kept = [r2 for r2 in values if r2 is not None]
        if len(kept) < B - B // 2:
            raise DimSelFailed(
                f"{B - len(kept)} of {B} bootstrap replicates failed at k={k}"
            )
        scores[k - 1] = float(np.mean(kept))
    d_hat = int(np.argmax(scores)) + 1
    return d_hat, scores
