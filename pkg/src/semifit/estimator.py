"""Estimating-equation construction and constrained fitting.

The model Y = h(X_int; psi) + r(X_uint^T gamma) + eps is fitted by driving
the empirical estimating-equation residual

    e = n^-1 sum_i {A(X_i) - E[A | Z_i^T gamma]} {Y_i - X_i,int^T psi - rhat_i}

to zero in squared norm, where Z = X_uint, the conditional expectations are
kernel regressions onto the current projections, and rhat is the
kernel-implied residual surface E[Y | Z^T gamma] - E[h | Z^T gamma].  The
residual is doubly robust: it vanishes in the limit when either nuisance
estimate is correct, which is what lets noisy kernel fits be good enough.

Constraints are handled by smooth reparameterization rather than penalties:
gamma is always the Gram-Schmidt image of an unconstrained matrix (so it is
exactly orthonormal with entries in [-1, 1]), and psi always lies strictly
inside the box psi_init +/- delta through a tanh chart.  Every point the
optimizer visits is feasible, so a plain derivative-free simplex search can
be used.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .core import (
    AChoice,
    Dataset,
    FitConfig,
    FittedModel,
    Params,
    Standardizer,
    validate_and_standardize,
)
from .errors import DependentColumns, OptimizerStalled, ShapeMismatch
from .initializers import ols_fit, phd_directions
from .kernel import nw_regress, silverman_bandwidth

__all__ = [
    "FreeVector",
    "ObjectiveContext",
    "a_function",
    "dr_probe",
    "estimating_residual",
    "fit",
    "load_model",
    "objective",
    "reparam_gamma",
    "reparam_psi",
    "save_model",
    "standardized_truth",
]

# Gram-Schmidt pivot norms below this mean the columns are numerically
# dependent; see reparam_gamma for the perturb-and-retry policy.
PIVOT_FLOOR = 1e-12

# Initial simplex edge length for the free coordinates.  The charts put
# useful moves at O(0.1)-O(1), so the simplex must start much wider than
# scipy's default 5% (which is 0 for coordinates starting at 0).
SIMPLEX_STEP = 0.25


def a_function(x_int: np.ndarray, x_uint: np.ndarray, d: int) -> np.ndarray:
    """Index functions spanning the estimating equations, for one point.

    Returns the concatenation [x_int, x_uint, x_uint^2, ..., x_uint^d]
    (elementwise powers 1..d), of length p + q*d: one coordinate per model
    parameter, so the estimating system is exactly identified.
    """
    x_int = np.asarray(x_int, dtype=np.float64).ravel()
    x_uint = np.asarray(x_uint, dtype=np.float64).ravel()
    if d < 1:
        raise ValueError("d must be >= 1")
    return np.concatenate([x_int] + [x_uint**k for k in range(1, d + 1)])


def _a_matrix(x_int: np.ndarray, x_uint: np.ndarray, d: int) -> np.ndarray:
    """Row-wise :func:`a_function` for an entire sample: (n, p + q*d)."""
    return np.column_stack([x_int] + [x_uint**k for k in range(1, d + 1)])


def _gram_schmidt(u: np.ndarray) -> tuple[np.ndarray | None, int]:
    """One modified Gram-Schmidt sweep; (result, -1) or (None, bad column)."""
    g = u.copy()
    d = g.shape[1]
    for j in range(d):
        for i in range(j):
            g[:, j] -= (g[:, i] @ g[:, j]) * g[:, i]
        nrm = np.linalg.norm(g[:, j])
        if nrm < PIVOT_FLOOR:
            return None, j
        g[:, j] /= nrm
    return g, -1


def reparam_gamma(u_gamma: np.ndarray, seed: int = 0) -> np.ndarray:
    """Map an unconstrained q x d matrix to an orthonormal one.

    Two Gram-Schmidt sweeps (the second mops up the roundoff the first
    leaves behind on ill-conditioned input), then a sign convention: each
    column is flipped so its largest-magnitude entry (first such index on
    ties) is positive.  The result has gamma^T gamma = I to machine
    precision, which also bounds every entry in [-1, 1].

    If a pivot norm falls below 1e-12 the offending column is perturbed by
    deterministic seed-derived noise at scale 1e-6 and the sweep retried
    once; a second failure raises :class:`DependentColumns`.
    """
    u = np.array(u_gamma, dtype=np.float64)
    if u.ndim != 2:
        raise ShapeMismatch(f"u_gamma must be 2-dimensional, got shape {u.shape}")
    q, d = u.shape
    if d > q:
        raise ShapeMismatch(f"cannot orthonormalize {d} columns in dimension {q}")
    for attempt in (0, 1):
        g, bad = _gram_schmidt(u)
        if g is not None:
            g, bad = _gram_schmidt(g)
        if g is not None:
            for j in range(d):
                if g[np.argmax(np.abs(g[:, j])), j] < 0:
                    g[:, j] = -g[:, j]
            # Normalization rounding can leave an entry 1 ulp outside the
            # unit box; the hard [-1, 1] guarantee wins over that last ulp.
            return np.clip(g, -1.0, 1.0)
        if attempt == 0:
            rng = np.random.default_rng([seed, bad])
            u[:, bad] += 1e-6 * rng.standard_normal(q)
    raise DependentColumns(f"column {bad} is numerically dependent on its predecessors")


def reparam_psi(u_psi: np.ndarray, psi_init: np.ndarray, delta: float) -> np.ndarray:
    """Map an unconstrained p-vector into the open box psi_init +/- delta.

    psi_j = psi_init_j + delta * tanh(u_j), with the tanh clipped just
    inside (-1, 1) so saturation cannot touch the boundary, and a final
    floating-point nudge so that ``|psi - psi_init| < delta`` holds in
    computed arithmetic, not just in exact arithmetic.  delta = 0 returns
    psi_init itself (bitwise).
    """
    psi_init = np.asarray(psi_init, dtype=np.float64)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0.0:
        return psi_init.copy()
    u_psi = np.asarray(u_psi, dtype=np.float64)
    if u_psi.shape != psi_init.shape:
        raise ShapeMismatch(f"u_psi {u_psi.shape} and psi_init {psi_init.shape} disagree")
    t = np.clip(np.tanh(u_psi), -(1.0 - 1e-12), 1.0 - 1e-12)
    psi = psi_init + delta * t
    # Rounding at extreme psi_init/delta ratios can land on the boundary.
    while True:
        over = np.abs(psi - psi_init) >= delta
        if not np.any(over):
            return psi
        psi[over] = np.nextafter(psi[over], psi_init[over])


def _residual_core(
    y: np.ndarray,
    h: np.ndarray,
    a: np.ndarray,
    z: np.ndarray,
    bandwidth: np.ndarray,
) -> np.ndarray:
    """Estimating residual given precomputed pieces; one kernel pass.

    The smoother is linear in its targets, so y, h, and every column of A
    share a single weight matrix.
    """
    t = np.column_stack([y, h, a])
    est = nw_regress(z, t, bandwidth=bandwidth)
    rhat = est[:, 0] - est[:, 1]
    resid = y - h - rhat
    return (a - est[:, 2:]).T @ resid / y.shape[0]


def estimating_residual(
    params: Params,
    data: Dataset,
    bandwidth: np.ndarray | None = None,
) -> np.ndarray:
    """Empirical estimating-equation residual at ``params``.

    ``data`` must already be standardized (see
    :func:`~semifit.core.validate_and_standardize`); the residual is the
    length p + q*d vector whose squared norm the fit minimizes.  When
    ``bandwidth`` is omitted it is recomputed from the current projections.
    """
    if params.p != data.p or params.q != data.q:
        raise ShapeMismatch(
            f"params are ({params.p}, {params.q}), data is ({data.p}, {data.q})"
        )
    z = data.x_uint @ params.gamma
    if bandwidth is None:
        bandwidth = silverman_bandwidth(z)
    a = _a_matrix(data.x_int, data.x_uint, params.d)
    h = data.x_int @ params.psi
    return _residual_core(data.y, h, a, z, bandwidth)


@dataclass(frozen=True)
class FreeVector:
    """Unconstrained optimizer coordinates: (u_psi, u_gamma) charts."""

    u_psi: np.ndarray
    u_gamma: np.ndarray

    def flatten(self) -> np.ndarray:
        return np.concatenate([
            np.asarray(self.u_psi, dtype=np.float64).ravel(),
            np.asarray(self.u_gamma, dtype=np.float64).ravel(order="F"),
        ])

    @classmethod
    def from_flat(cls, flat: np.ndarray, p: int, q: int, d: int) -> "FreeVector":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (p + q * d,):
            raise ShapeMismatch(f"flat vector must have length {p + q * d}")
        return cls(u_psi=flat[:p], u_gamma=flat[p:].reshape((q, d), order="F"))


@dataclass(frozen=True)
class ObjectiveContext:
    """Precomputed per-fit state shared by every objective evaluation.

    A(X) does not depend on the parameters, so it is built once; only the
    projections, their bandwidths, and the linear term move.
    """

    y: np.ndarray
    x_int: np.ndarray
    x_uint: np.ndarray
    a_mat: np.ndarray
    psi_init: np.ndarray
    delta: float
    d: int
    bandwidth_override: np.ndarray | None
    seed: int

    @classmethod
    def from_standardized(
        cls, data: Dataset, psi_init: np.ndarray, config: FitConfig
    ) -> "ObjectiveContext":
        if config.a_choice is not AChoice.POLYNOMIAL:
            raise ValueError(f"unsupported a_choice: {config.a_choice!r}")
        return cls(
            y=data.y,
            x_int=data.x_int,
            x_uint=data.x_uint,
            a_mat=_a_matrix(data.x_int, data.x_uint, config.d),
            psi_init=np.asarray(psi_init, dtype=np.float64),
            delta=config.delta,
            d=config.d,
            bandwidth_override=config.bandwidth_override,
            seed=config.seed,
        )

    def value_at(self, psi: np.ndarray, gamma: np.ndarray) -> float:
        z = self.x_uint @ gamma
        bw = self.bandwidth_override
        if bw is None:
            bw = silverman_bandwidth(z)
        h = self.x_int @ psi
        e = _residual_core(self.y, h, self.a_mat, z, bw)
        return float(e @ e)


def objective(free: FreeVector, ctx: ObjectiveContext) -> float:
    """Squared norm of the estimating residual at chart point ``free``."""
    psi = reparam_psi(free.u_psi, ctx.psi_init, ctx.delta)
    gamma = reparam_gamma(free.u_gamma, seed=ctx.seed)
    return ctx.value_at(psi, gamma)


def _initial_simplex(x0: np.ndarray, step: float) -> np.ndarray:
    k = x0.shape[0]
    simplex = np.tile(x0, (k + 1, 1))
    simplex[1:] += np.eye(k) * step
    return simplex


def fit(data: Dataset, config: FitConfig) -> FittedModel:
    """Fit the model: standardize, initialize, minimize, package.

    psi starts at the interpretable-feature coefficients of an all-feature
    linear regression and is pinned to their delta-box; gamma starts at
    principal Hessian directions.  A Nelder-Mead simplex search (with
    ``config.optimizer.restarts`` perturbed re-initializations, best result
    kept) minimizes the squared estimating residual over the charts.  The
    returned objective never exceeds the initializer's.

    Emits an :class:`OptimizerStalled` warning (and sets
    ``converged=False``) when every simplex run hits its evaluation budget
    while the best objective is still above ``f_tol``; the best-so-far
    model is still returned.
    """
    sdata, std = validate_and_standardize(data)
    n, p, q, d = sdata.n, sdata.p, sdata.q, config.d
    if d >= q:
        raise ShapeMismatch(f"structural dimension d={d} must be < q={q}")
    if n <= p + q + 1:
        raise ShapeMismatch(f"need n > p + q + 1 = {p + q + 1} rows, got {n}")

    base = ols_fit(np.column_stack([sdata.x_int, sdata.x_uint]), sdata.y)
    psi_init = base.coef[:p].copy()
    gamma_init = phd_directions(sdata.x_uint, sdata.y, d)
    ctx = ObjectiveContext.from_standardized(sdata, psi_init, config)

    # With delta = 0 the psi chart is constant; drop those coordinates so
    # the simplex does not wander along flat directions.
    p_free = 0 if config.delta == 0.0 else p

    def unpack(flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u_psi = flat[:p_free] if p_free else np.zeros(p)
        return u_psi, flat[p_free:].reshape((q, d), order="F")

    def f(flat: np.ndarray) -> float:
        u_psi, u_gamma = unpack(flat)
        psi = reparam_psi(u_psi, psi_init, config.delta)
        gamma = reparam_gamma(u_gamma, seed=config.seed)
        return ctx.value_at(psi, gamma)

    x0 = np.concatenate([np.zeros(p_free), gamma_init.ravel(order="F")])
    opt = config.optimizer
    best_x, best_f = x0, f(x0)
    converged = best_f < opt.f_tol
    if not converged:
        any_success = False
        for attempt in range(opt.restarts + 1):
            if attempt == 0:
                start = x0
            else:
                rng = np.random.default_rng([config.seed, attempt])
                start = x0 + SIMPLEX_STEP * rng.standard_normal(x0.shape)
            res = minimize(
                f,
                start,
                method="Nelder-Mead",
                options={
                    "maxfev": opt.max_evals,
                    "maxiter": opt.max_evals,
                    "xatol": opt.x_tol,
                    "fatol": opt.f_tol,
                    "initial_simplex": _initial_simplex(start, SIMPLEX_STEP),
                    "adaptive": True,
                },
            )
            any_success = any_success or bool(res.success)
            if res.fun < best_f:
                best_x, best_f = res.x, float(res.fun)
        converged = any_success or best_f < opt.f_tol
        if not converged:
            warnings.warn(
                OptimizerStalled(
                    f"evaluation budget {opt.max_evals} exhausted with objective "
                    f"{best_f:.3e} >= f_tol {opt.f_tol:.1e}; returning best-so-far"
                )
            )

    u_psi, u_gamma = unpack(best_x)
    psi = reparam_psi(u_psi, psi_init, config.delta)
    gamma = reparam_gamma(u_gamma, seed=config.seed)
    z = sdata.x_uint @ gamma
    bw = config.bandwidth_override
    if bw is None:
        bw = silverman_bandwidth(z)
    return FittedModel(
        params=Params(psi=psi, gamma=gamma),
        psi_init=psi_init,
        standardizer=std,
        train_proj=z,
        train_y=sdata.y,
        train_h=sdata.x_int @ psi,
        bandwidth=bw,
        config=config,
        objective_value=best_f,
        converged=converged,
    )


def dr_probe(
    data: Dataset,
    truth: Params,
    mode: str,
    r_values: np.ndarray | None = None,
) -> float:
    """Norm of the estimating residual at the truth with one nuisance broken.

    Diagnoses double robustness on simulated data where the generating
    parameters are known.  ``truth`` is given in raw-feature units and is
    mapped into the standardized frame internally.

    Modes
    -----
    ``"drop_A_expectation"``
        Sets E[A | .] to zero (a maximally wrong conditional-expectation
        model) while using the true residual surface.  ``r_values`` must
        supply r evaluated at each training row, in raw-feature units; the
        constant the standardization shifts into r is added internally.
    ``"drop_r"``
        Sets rhat to zero (a maximally wrong residual model) while keeping
        the kernel estimate of E[A | .].

    Returns the Euclidean norm of the resulting residual vector.  With the
    remaining nuisance correct, it converges to zero as n grows.
    """
    sdata, std = validate_and_standardize(data)
    truth_s = standardized_truth(truth, std)
    n, d = sdata.n, truth_s.d
    z = sdata.x_uint @ truth_s.gamma
    a = _a_matrix(sdata.x_int, sdata.x_uint, d)
    h = sdata.x_int @ truth_s.psi
    if mode == "drop_A_expectation":
        if r_values is None:
            raise ValueError("drop_A_expectation needs r_values (true r at each row)")
        r_values = np.asarray(r_values, dtype=np.float64)
        if r_values.shape != (n,):
            raise ShapeMismatch(f"r_values must have shape ({n},)")
        # Standardizing x_int moves the constant mean_int @ psi out of the
        # linear term; the unrestricted r absorbs it.
        r_std = r_values + float(std.mean_int @ truth.psi)
        e = a.T @ (sdata.y - h - r_std) / n
    elif mode == "drop_r":
        ea = nw_regress(z, a, bandwidth=silverman_bandwidth(z))
        e = (a - ea).T @ (sdata.y - h) / n
    else:
        raise ValueError(f"unknown dr_probe mode: {mode!r}")
    return float(np.linalg.norm(e))


def standardized_truth(truth: Params, std: Standardizer) -> Params:
    """Raw-frame generating parameters mapped into the standardized frame.

    Fitted parameters live on standardized features, so comparisons against
    a simulation's truth must first rescale: the linear coefficients pick up
    the interpretable-feature scales, and the projection columns are
    rescaled by the uninterpretable-feature scales and re-orthonormalized
    (an invertible remap of the projection, absorbed by the unrestricted
    residual surface; the spanned subspace is what is identified).
    """
    psi_s = std.std_int * truth.psi
    gamma_s = reparam_gamma(std.std_uint[:, None] * truth.gamma)
    return Params(psi=psi_s, gamma=gamma_s)


def _model_doc(model: FittedModel) -> dict:
    std = model.standardizer
    return {
        "psi": model.params.psi.tolist(),
        "psi_init": model.psi_init.tolist(),
        "gamma": [col.tolist() for col in model.params.gamma.T],
        "delta": float(model.config.delta),
        "d": int(model.config.d),
        "bandwidth": model.bandwidth.tolist(),
        "standardizer": {
            "mean_int": std.mean_int.tolist(),
            "std_int": std.std_int.tolist(),
            "mean_uint": std.mean_uint.tolist(),
            "std_uint": std.std_uint.tolist(),
        },
        "train_proj": [row.tolist() for row in model.train_proj],
        "train_y": model.train_y.tolist(),
        "train_h": model.train_h.tolist(),
        "objective_value": float(model.objective_value),
        "seed": int(model.config.seed),
    }


def save_model(model: FittedModel, path) -> None:
    """Serialize a fitted model to a single JSON document.

    Floats are written with shortest round-trip precision, and key order is
    fixed, so identical models produce byte-identical files.
    """
    text = json.dumps(_model_doc(model), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> FittedModel:
    """Rebuild a :class:`FittedModel` saved by :func:`save_model`.

    Optimizer settings are not serialized (they only matter during
    fitting); the loaded model predicts identically to the saved one.
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    std = Standardizer(
        mean_int=doc["standardizer"]["mean_int"],
        std_int=doc["standardizer"]["std_int"],
        mean_uint=doc["standardizer"]["mean_uint"],
        std_uint=doc["standardizer"]["std_uint"],
    )
    gamma = np.array(doc["gamma"], dtype=np.float64).T
    config = FitConfig(d=int(doc["d"]), delta=float(doc["delta"]), seed=int(doc["seed"]))
    return FittedModel(
        params=Params(psi=np.array(doc["psi"]), gamma=gamma),
        psi_init=np.array(doc["psi_init"]),
        standardizer=std,
        train_proj=np.array(doc["train_proj"], dtype=np.float64),
        train_y=np.array(doc["train_y"]),
        train_h=np.array(doc["train_h"]),
        bandwidth=np.array(doc["bandwidth"]),
        config=config,
        objective_value=float(doc["objective_value"]),
        converged=True,
    )
