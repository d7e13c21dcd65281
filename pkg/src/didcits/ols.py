"""Weighted least squares with pivoted-QR rank detection and sandwich covariances."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import linalg, stats

from .panel import SeType

__all__ = [
    "DesignMatrix",
    "OlsFit",
    "EffectEstimate",
    "EmptyDataError",
    "fit_wls",
    "vcov_estimate",
    "linear_combination",
    "critical_value",
    "RANK_TOL",
]

#: Columns whose pivot falls below ``RANK_TOL`` times the largest pivot are dropped.
RANK_TOL = 1e-10


class EmptyDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    values: np.ndarray
    column_names: tuple[str, ...]
    cluster_ids: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("design matrix must be 2-D")
        if values.shape[1] != len(self.column_names):
            raise ValueError(
                f"{values.shape[1]} columns but {len(self.column_names)} names"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("design matrix contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Result of :func:`fit_wls`.

    Dropped (collinear) columns have coefficient 0 and zero rows/columns in
    ``vcov``; their names are listed in ``dropped``.
    """

    coefficients: np.ndarray
    vcov: np.ndarray
    residuals: np.ndarray
    rank: int
    column_names: tuple[str, ...]
    dropped: tuple[str, ...]
    se_type: SeType
    n: int
    weights: np.ndarray
    fitted: np.ndarray
    r_squared: float
    n_clusters: int | None = None
    _bread: np.ndarray = field(default=None, repr=False)

    @property
    def dof(self) -> int:
        return self.n - self.rank

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    def index(self, name: str) -> int:
        return self.column_names.index(name)

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.index(name)])

    def weights_for(self, contrast: dict[str, float]) -> np.ndarray:
        """Dense weight vector from a ``{column name: weight}`` mapping."""
        w = np.zeros(len(self.column_names))
        for name, value in contrast.items():
            w[self.index(name)] += value
        return w


@dataclass(frozen=True)
class EffectEstimate:
    point: float
    se: float
    ci_low: float
    ci_high: float
    time: Any = None
    label: str = ""

    def to_dict(self) -> dict:
        t = self.time.item() if isinstance(self.time, np.generic) else self.time
        return {
            "label": self.label,
            "time": t,
            "point": self.point,
            "se": self.se,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


def critical_value(ci_level: float, dist: str = "normal", dof: int | None = None) -> float:
    alpha = 1.0 - ci_level
    if dist == "t":
        if dof is None or dof <= 0:
            raise ValueError("t intervals need positive degrees of freedom")
        return float(stats.t.ppf(1.0 - alpha / 2.0, dof))
    return float(stats.norm.ppf(1.0 - alpha / 2.0))


def _as_matrix(X: DesignMatrix | np.ndarray) -> DesignMatrix:
    if isinstance(X, DesignMatrix):
        return X
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return DesignMatrix(X, tuple(f"x{j}" for j in range(X.shape[1])))


def fit_wls(
    X: DesignMatrix | np.ndarray,
    y: Sequence[float],
    w: Sequence[float] | None = None,
    se_type: SeType | str = SeType.HC1,
    cluster_ids: Sequence[Any] | None = None,
) -> OlsFit:
    """Minimize ``sum(w * (y - X b)**2)`` by pivoted QR of ``sqrt(w) X``.

    Columns with a pivot below ``RANK_TOL`` times the largest pivot are
    reported as dropped and pinned to zero. The covariance is computed by
    :func:`vcov_estimate`; clustering defaults to ``X.cluster_ids``.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n == 0:
        raise EmptyDataError("cannot fit a model to zero rows")
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if y.shape != (n,) or w.shape != (n,):
        raise ValueError(f"X has {n} rows but y has {y.shape[0]} and w has {w.shape[0]}")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")

    sw = np.sqrt(w)
    Xw = X.values * sw[:, None]
    yw = y * sw
    if p == 0:
        keep = np.zeros(0, dtype=int)
        R = np.zeros((0, 0))
        qty = np.zeros(0)
    else:
        Q, R_full, piv = linalg.qr(Xw, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R_full))
        top = diag[0] if diag.size else 0.0
        rank = int(np.sum(diag > RANK_TOL * top)) if top > 0 else 0
        keep = np.sort(piv[:rank])
        # refactor on the retained columns in their natural order
        if rank:
            Q, R = linalg.qr(Xw[:, keep], mode="economic")
            qty = Q.T @ yw
        else:
            R = np.zeros((0, 0))
            qty = np.zeros(0)
    rank = keep.size
    beta = np.zeros(p)
    if rank:
        beta[keep] = linalg.solve_triangular(R, qty)
    dropped = tuple(X.column_names[j] for j in range(p) if j not in set(keep.tolist()))
    if dropped:
        warnings.warn(
            f"rank-deficient design: dropped {', '.join(dropped)}",
            RuntimeWarning,
            stacklevel=2,
        )
    fitted = X.values @ beta
    resid = y - fitted
    ybar = np.sum(w * y) / np.sum(w)
    tss = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid**2)) / tss if tss > 0 else float("nan")

    bread = np.zeros((p, p))
    if rank:
        Rinv = linalg.solve_triangular(R, np.eye(rank))
        bread[np.ix_(keep, keep)] = Rinv @ Rinv.T

    fit = OlsFit(
        coefficients=beta,
        vcov=np.zeros((p, p)),
        residuals=resid,
        rank=rank,
        column_names=X.column_names,
        dropped=dropped,
        se_type=SeType.parse(se_type),
        n=n,
        weights=w,
        fitted=fitted,
        r_squared=r2,
        _bread=bread,
    )
    if cluster_ids is None:
        cluster_ids = X.cluster_ids
    vcov = vcov_estimate(fit, X, y, w, se_type, cluster_ids)
    n_clusters = None
    if fit.se_type is SeType.CLUSTER:
        n_clusters = len(set(np.asarray(cluster_ids, dtype=object).tolist()))
    object.__setattr__(fit, "vcov", vcov)
    object.__setattr__(fit, "n_clusters", n_clusters)
    return fit


def vcov_estimate(
    fit: OlsFit,
    X: DesignMatrix | np.ndarray,
    y: Sequence[float],
    w: Sequence[float] | None,
    se_type: SeType | str,
    cluster_ids: Sequence[Any] | None = None,
) -> np.ndarray:
    """Coefficient covariance for a fit produced from the same ``(X, y, w)``.

    ``classical`` is ``s^2 (X'WX)^-1`` with ``s^2 = sum(w e^2) / (n - rank)``.
    ``hc1`` is the White sandwich scaled by ``n / (n - rank)``. ``cluster``
    sums weighted scores within clusters and scales by
    ``G/(G-1) * (n-1)/(n-rank)``.
    """
    X = _as_matrix(X)
    se_type = SeType.parse(se_type)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    bread = fit._bread
    if bread is None:
        raise ValueError("fit does not carry a bread matrix")
    resid = y - X.values @ fit.coefficients
    k = fit.rank
    dof = n - k

    if se_type is SeType.CLASSICAL:
        if dof <= 0:
            return np.full_like(bread, np.nan)
        s2 = float(np.sum(w * resid**2)) / dof
        V = s2 * bread
    elif se_type is SeType.HC1:
        scores = X.values * (w * resid)[:, None]
        meat = scores.T @ scores
        scale = n / dof if dof > 0 else np.nan
        V = scale * bread @ meat @ bread
    else:
        if cluster_ids is None:
            raise ValueError("cluster covariance requested without cluster ids")
        ids = np.asarray(cluster_ids, dtype=object)
        if ids.shape[0] != n:
            raise ValueError("cluster ids must have one entry per row")
        _, codes = np.unique(ids.astype(str), return_inverse=True)
        G = int(codes.max()) + 1 if n else 0
        if G < 2:
            raise ValueError(f"cluster covariance needs at least 2 clusters, got {G}")
        scores = X.values * (w * resid)[:, None]
        summed = np.zeros((G, scores.shape[1]))
        np.add.at(summed, codes, scores)
        meat = summed.T @ summed
        scale = G / (G - 1) * (n - 1) / dof if dof > 0 else np.nan
        V = scale * bread @ meat @ bread
    return (V + V.T) / 2.0


def linear_combination(
    fit: OlsFit,
    weights: Sequence[float] | dict[str, float],
    ci_level: float = 0.95,
    *,
    ci_dist: str = "normal",
    time: Any = None,
    label: str = "",
) -> EffectEstimate:
    """Point estimate, SE and interval for ``weights @ coefficients``."""
    if isinstance(weights, dict):
        weights = fit.weights_for(weights)
    c = np.asarray(weights, dtype=float)
    if c.shape != fit.coefficients.shape:
        raise ValueError(f"weight vector has length {c.size}, expected {fit.coefficients.size}")
    touched = [name for name, cj in zip(fit.column_names, c) if cj != 0 and name in fit.dropped]
    if touched:
        warnings.warn(
            f"contrast {label or ''} uses dropped columns {touched}; estimate is not identified",
            RuntimeWarning,
            stacklevel=2,
        )
    point = float(c @ fit.coefficients)
    var = float(c @ fit.vcov @ c)
    se = float(np.sqrt(max(var, 0.0))) if np.isfinite(var) else float("nan")
    z = critical_value(ci_level, ci_dist, fit.dof)
    return EffectEstimate(point, se, point - z * se, point + z * se, time, label)
