"""Domain types, dataset validation, and feature standardization.

Everything downstream works on a :class:`Dataset` whose feature blocks have
been centered and scaled by a :class:`Standardizer`.  All types here are
immutable after construction (arrays are marked read-only) and safe to share
across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConstantColumn, NonFinite, ShapeMismatch

__all__ = [
    "AChoice",
    "Dataset",
    "FitConfig",
    "FittedModel",
    "OptimizerSettings",
    "Params",
    "Standardizer",
    "dataset_from_csv",
    "validate_and_standardize",
]


def _readonly(a, dtype=np.float64, ndim=None, name="array") -> np.ndarray:
    """Copy ``a`` into a read-only float array, checking dimensionality."""
    out = np.array(a, dtype=dtype)
    if ndim is not None and out.ndim != ndim:
        raise ShapeMismatch(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    out.setflags(write=False)
    return out


def _check_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(np.atleast_1d(a)))[0]
        loc = ",".join(str(i) for i in bad)
        raise NonFinite(f"{name}[{loc}]")


@dataclass(frozen=True)
class Dataset:
    """An outcome vector with interpretable and uninterpretable feature blocks.

    Parameters
    ----------
    y : (n,) array
        Continuous outcome, in its original units.
    x_int : (n, p) array
        Interpretable features entering the linear term.
    x_uint : (n, q) array
        Remaining features entering only through a learned projection.
    names_int, names_uint : sequence of str, optional
        Column labels, used in error messages and CSV output.

    Raises
    ------
    ShapeMismatch
        If the containers disagree on n, or n < 2, p < 1, q < 2.
    NonFinite
        If any entry is NaN or infinite.
    """

    y: np.ndarray
    x_int: np.ndarray
    x_uint: np.ndarray
    names_int: tuple[str, ...] | None = None
    names_uint: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "y", _readonly(self.y, ndim=1, name="y"))
        object.__setattr__(self, "x_int", _readonly(self.x_int, ndim=2, name="x_int"))
        object.__setattr__(self, "x_uint", _readonly(self.x_uint, ndim=2, name="x_uint"))
        n = self.y.shape[0]
        if self.x_int.shape[0] != n or self.x_uint.shape[0] != n:
            raise ShapeMismatch(
                f"row counts disagree: y has {n}, x_int has {self.x_int.shape[0]}, "
                f"x_uint has {self.x_uint.shape[0]}"
            )
        if n < 2:
            raise ShapeMismatch("need at least 2 rows")
        if self.p < 1:
            raise ShapeMismatch("x_int needs at least 1 column")
        if self.q < 2:
            raise ShapeMismatch("x_uint needs at least 2 columns")
        for arr, name in ((self.y, "y"), (self.x_int, "x_int"), (self.x_uint, "x_uint")):
            _check_finite(arr, name)
        for names, k, block in (
            (self.names_int, self.p, "names_int"),
            (self.names_uint, self.q, "names_uint"),
        ):
            if names is not None:
                object.__setattr__(self, block, tuple(names))
                if len(names) != k:
                    raise ShapeMismatch(f"{block} has {len(names)} labels for {k} columns")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x_int.shape[1]

    @property
    def q(self) -> int:
        return self.x_uint.shape[1]

    def int_name(self, j: int) -> str:
        return self.names_int[j] if self.names_int else f"x_int[{j}]"

    def uint_name(self, j: int) -> str:
        return self.names_uint[j] if self.names_uint else f"x_uint[{j}]"


@dataclass(frozen=True)
class Standardizer:
    """Per-column centering and scaling state for both feature blocks.

    Scaling uses the sample standard deviation with divisor n-1.  Constant
    columns are rejected at construction: silently dropping them would
    desynchronize coefficient indexing.
    """

    mean_int: np.ndarray
    std_int: np.ndarray
    mean_uint: np.ndarray
    std_uint: np.ndarray

    def __post_init__(self):
        for f_ in ("mean_int", "std_int", "mean_uint", "std_uint"):
            object.__setattr__(self, f_, _readonly(getattr(self, f_), ndim=1, name=f_))
        if np.any(self.std_int <= 0) or np.any(self.std_uint <= 0):
            raise ConstantColumn("std entries must be > 0")

    @classmethod
    def from_dataset(cls, data: Dataset) -> "Standardizer":
        mi = data.x_int.mean(axis=0)
        si = data.x_int.std(axis=0, ddof=1)
        mu = data.x_uint.mean(axis=0)
        su = data.x_uint.std(axis=0, ddof=1)
        for j in np.where(si == 0)[0]:
            raise ConstantColumn(data.int_name(int(j)))
        for j in np.where(su == 0)[0]:
            raise ConstantColumn(data.uint_name(int(j)))
        return cls(mi, si, mu, su)

    def apply_int(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean_int) / self.std_int

    def apply_uint(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean_uint) / self.std_uint

    def invert_int(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.std_int + self.mean_int

    def invert_uint(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.std_uint + self.mean_uint

    def apply(self, data: Dataset) -> Dataset:
        """Standardize both feature blocks; y is left in outcome units."""
        return replace(
            data,
            x_int=self.apply_int(data.x_int),
            x_uint=self.apply_uint(data.x_uint),
        )


def validate_and_standardize(data: Dataset) -> tuple[Dataset, Standardizer]:
    """Center and scale the feature blocks of ``data`` to mean 0, sample std 1.

    The outcome is not touched, so downstream error metrics stay in outcome
    units.  Raises :class:`ConstantColumn` (naming the column) if any feature
    has zero variance.
    """
    std = Standardizer.from_dataset(data)
    return std.apply(data), std


@dataclass(frozen=True)
class Params:
    """Target parameters: linear coefficients and projection directions.

    ``psi`` weights the interpretable features; the columns of ``gamma``
    span the projection of the uninterpretable features.  Orthonormality of
    ``gamma`` is a post-fit guarantee, not enforced at construction (ground
    truths printed to few decimals would otherwise be unrepresentable).
    """

    psi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi", _readonly(self.psi, ndim=1, name="psi"))
        object.__setattr__(self, "gamma", _readonly(self.gamma, ndim=2, name="gamma"))
        _check_finite(self.psi, "psi")
        _check_finite(self.gamma, "gamma")

    @property
    def p(self) -> int:
        return self.psi.shape[0]

    @property
    def q(self) -> int:
        return self.gamma.shape[0]

    @property
    def d(self) -> int:
        return self.gamma.shape[1]

    def orthonormality_residual(self) -> float:
        g = self.gamma
        return float(np.max(np.abs(g.T @ g - np.eye(self.d))))


class AChoice(enum.Enum):
    """Index-function family used to span the estimating equations."""

    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class OptimizerSettings:
    """Budget and tolerances for the derivative-free minimizer.

    ``max_evals`` caps objective evaluations per simplex run; ``restarts``
    adds that many perturbed re-initializations on top of the seeded start
    (best result kept).
    """

    max_evals: int = 20000
    restarts: int = 3
    x_tol: float = 1e-8
    f_tol: float = 1e-8

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        if self.x_tol <= 0 or self.f_tol <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True)
class FitConfig:
    """Everything a fit needs besides the data.

    Parameters
    ----------
    d : int
        Structural dimension: number of projection directions (1 <= d < q).
    delta : float
        Box radius around the linear-regression starting coefficients; 0
        freezes them.
    bandwidth_override : (d,) array, optional
        Fixed per-dimension kernel bandwidths.  When absent, bandwidths are
        recomputed from the current projections at every objective
        evaluation.
    optimizer : OptimizerSettings
    a_choice : AChoice
    seed : int
        Seeds restart perturbations and any tie-breaking noise.
    """

    d: int = 1
    delta: float = 0.05
    bandwidth_override: np.ndarray | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    a_choice: AChoice = AChoice.POLYNOMIAL
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.bandwidth_override is not None:
            bw = _readonly(self.bandwidth_override, ndim=1, name="bandwidth_override")
            if bw.shape[0] != self.d:
                raise ShapeMismatch(f"bandwidth_override needs {self.d} entries")
            if np.any(bw <= 0):
                raise ValueError("bandwidth_override entries must be > 0")
            object.__setattr__(self, "bandwidth_override", bw)
        if not isinstance(self.a_choice, AChoice):
            raise ValueError(f"unknown a_choice: {self.a_choice!r}")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class FittedModel:
    """A fitted model plus the cached training state needed to predict.

    The residual surface has no closed form; predictions re-run kernel
    regressions over ``train_proj`` with the stored ``bandwidth``, so the
    training projections, outcomes and linear-term values travel with the
    parameters.
    """

    params: Params
    psi_init: np.ndarray
    standardizer: Standardizer
    train_proj: np.ndarray
    train_y: np.ndarray
    train_h: np.ndarray
    bandwidth: np.ndarray
    config: FitConfig
    objective_value: float
    converged: bool = True

    def __post_init__(self):
        for f_, nd in (("psi_init", 1), ("train_proj", 2), ("train_y", 1),
                       ("train_h", 1), ("bandwidth", 1)):
            object.__setattr__(self, f_, _readonly(getattr(self, f_), ndim=nd, name=f_))
        n = self.train_proj.shape[0]
        if self.train_y.shape[0] != n or self.train_h.shape[0] != n:
            raise ShapeMismatch("train_proj, train_y, train_h row counts disagree")
        if np.any(self.bandwidth <= 0):
            raise ValueError("bandwidth entries must be > 0")


def dataset_from_csv(path, roles: dict) -> Dataset:
    """Load a :class:`Dataset` from a headered CSV using a column role map.

    ``roles`` maps ``"outcome"`` to one column name and ``"int"`` / ``"uint"``
    to lists of column names.  Columns not mentioned are ignored.  A column
    may appear under one role only.
    """
    import pandas as pd

    frame = pd.read_csv(path)
    outcome = roles.get("outcome")
    int_cols = list(roles.get("int", []))
    uint_cols = list(roles.get("uint", []))
    if not isinstance(outcome, str) or not outcome:
        raise ValueError("role map must name exactly one outcome column")
    if not int_cols or not uint_cols:
        raise ValueError("role map must list at least one 'int' and two 'uint' columns")
    claimed = [outcome, *int_cols, *uint_cols]
    dupes = {c for c in claimed if claimed.count(c) > 1}
    if dupes:
        raise ValueError(f"columns assigned to more than one role: {sorted(dupes)}")
    missing = [c for c in claimed if c not in frame.columns]
    if missing:
        raise ValueError(f"columns not found in CSV header: {missing}")
    return Dataset(
        y=frame[outcome].to_numpy(dtype=np.float64),
        x_int=frame[int_cols].to_numpy(dtype=np.float64),
        x_uint=frame[uint_cols].to_numpy(dtype=np.float64),
        names_int=tuple(int_cols),
        names_uint=tuple(uint_cols),
    )
