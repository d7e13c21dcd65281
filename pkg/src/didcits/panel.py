"""Two-group panel container and design configuration."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Design",
    "SeType",
    "Observation",
    "PanelDataset",
    "DesignSpec",
    "CoefficientMap",
    "ConfigurationError",
    "PanelValidationError",
    "validate_panel",
    "split_periods",
    "format_time",
]


class ConfigurationError(ValueError):
    """Raised for inconsistent estimation settings (bad t0, reference period, ...)."""


class PanelValidationError(ValueError):
    """Raised when a panel violates the two-group invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid panel: " + "; ".join(self.violations))


class Design(str, enum.Enum):
    FE_DID = "fe-did"
    FE_DID_TRENDS = "fe-did-trends"
    GENERAL_CITS = "general-cits"
    LINEAR_CITS = "linear-cits"
    EVENT_STUDY = "event-study"

    @classmethod
    def parse(cls, value: "Design | str") -> "Design":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "fedid": cls.FE_DID,
            "fedidgrouptrends": cls.FE_DID_TRENDS,
            "fe-did-group-trends": cls.FE_DID_TRENDS,
            "generalcits": cls.GENERAL_CITS,
            "linearcits": cls.LINEAR_CITS,
            "eventstudy": cls.EVENT_STUDY,
        }
        try:
            return cls(key)
        except ValueError:
            if key.replace("-", "") in aliases:
                return aliases[key.replace("-", "")]
            raise ConfigurationError(f"unknown design {value!r}") from None


#: The four counterfactual designs, in the order they are usually reported.
ALL_DESIGNS = (Design.FE_DID, Design.FE_DID_TRENDS, Design.GENERAL_CITS, Design.LINEAR_CITS)


class SeType(str, enum.Enum):
    CLASSICAL = "classical"
    HC1 = "hc1"
    CLUSTER = "cluster"

    @classmethod
    def parse(cls, value: "SeType | str") -> "SeType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("cluster_by_unit", "cluster-by-unit"):
            key = "cluster"
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(f"unknown se_type {value!r}") from None


def format_time(t: Any) -> str:
    """Compact label for a time value, used inside coefficient names."""
    t = float(t)
    if t.is_integer():
        return str(int(t))
    return repr(t)


@dataclass(frozen=True)
class Observation:
    unit_id: Any
    group: int
    time: float
    outcome: float
    covariates: tuple[float, ...] = ()
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Long-format two-group panel.

    Columns are stored as parallel numpy arrays. ``group`` holds the
    normalized labels (0 = comparison, 1 = treated); ``group_raw`` keeps the
    labels as supplied and ``group_labels`` records the mapping.

    Construction does not validate; call :func:`validate_panel` or build
    through :meth:`from_records` / :meth:`from_arrays`, which raise on
    violations.
    """

    unit_id: np.ndarray
    group: np.ndarray
    time: np.ndarray
    outcome: np.ndarray
    covariates: np.ndarray
    weight: np.ndarray
    covariate_names: tuple[str, ...] = ()
    group_raw: np.ndarray | None = None
    group_labels: Mapping[int, Any] = field(default_factory=lambda: {0: 0, 1: 1})

    def __post_init__(self):
        for name in ("unit_id", "group", "time", "outcome", "covariates", "weight"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        if self.group_raw is None:
            object.__setattr__(self, "group_raw", self.group)

    @classmethod
    def from_arrays(
        cls,
        unit_id: Sequence[Any],
        group: Sequence[Any],
        time: Sequence[float],
        outcome: Sequence[float],
        covariates: Mapping[str, Sequence[float]] | None = None,
        weight: Sequence[float] | None = None,
        *,
        treated_label: Any = None,
        validate: bool = True,
    ) -> "PanelDataset":
        """Build a panel from column sequences.

        ``treated_label`` picks the treated group; every other label maps to
        the comparison group. When omitted, labels must already be {0, 1}
        (or booleans).
        """
        raw = np.asarray(group, dtype=object)
        n = raw.shape[0]
        if treated_label is None:
            treated_label = 1
        treated = np.array([v == treated_label for v in raw.tolist()], dtype=bool)
        distinct = list(dict.fromkeys(raw.tolist()))
        others = [v for v in distinct if v != treated_label]
        group_labels = {1: treated_label}
        if len(others) == 1:
            group_labels[0] = others[0]
        elif not others:
            group_labels[0] = None
        else:
            group_labels[0] = tuple(others)
        names = tuple(covariates) if covariates else ()
        if names:
            cov = np.column_stack([np.asarray(covariates[c], dtype=float) for c in names])
        else:
            cov = np.empty((n, 0))
        times = np.asarray(time)
        if times.dtype.kind not in "iuf":
            times = times.astype(float)
        panel = cls(
            unit_id=np.asarray(unit_id, dtype=object),
            group=treated.astype(np.int64),
            time=times,
            outcome=np.asarray(outcome, dtype=float),
            covariates=cov,
            weight=np.ones(n) if weight is None else np.asarray(weight, dtype=float),
            covariate_names=names,
            group_raw=raw,
            group_labels=group_labels,
        )
        if validate:
            problems = validate_panel(panel)
            if problems:
                raise PanelValidationError(problems)
        return panel

    @classmethod
    def from_records(
        cls,
        rows: Sequence[Observation],
        covariate_names: Sequence[str] = (),
        *,
        validate: bool = True,
    ) -> "PanelDataset":
        rows = list(rows)
        k = len(covariate_names)
        if rows and k == 0:
            k = len(rows[0].covariates)
            covariate_names = tuple(f"x{j}" for j in range(k))
        ragged = [i for i, r in enumerate(rows) if len(r.covariates) != k]
        cov = np.full((len(rows), k), np.nan)
        for i, r in enumerate(rows):
            if i not in ragged:
                cov[i] = r.covariates
        panel = cls(
            unit_id=np.array([r.unit_id for r in rows], dtype=object),
            group=np.array([int(r.group) for r in rows], dtype=np.int64),
            time=np.array([r.time for r in rows]),
            outcome=np.array([r.outcome for r in rows], dtype=float),
            covariates=cov,
            weight=np.array([r.weight for r in rows], dtype=float),
            covariate_names=tuple(covariate_names),
            group_raw=np.array([r.group for r in rows], dtype=object),
        )
        if validate:
            problems = validate_panel(panel)
            problems += [f"ragged covariates at row {i}" for i in ragged]
            if problems:
                raise PanelValidationError(problems)
        return panel

    def __len__(self) -> int:
        return self.outcome.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.covariates.shape[1]

    @property
    def time_points(self) -> np.ndarray:
        return np.unique(self.time)

    @property
    def rows(self) -> Iterator[Observation]:
        for i in range(len(self)):
            yield Observation(
                unit_id=self.unit_id[i],
                group=int(self.group[i]),
                time=self.time[i].item(),
                outcome=float(self.outcome[i]),
                covariates=tuple(float(v) for v in self.covariates[i]),
                weight=float(self.weight[i]),
            )

    def replace(self, **changes) -> "PanelDataset":
        """Copy with some columns swapped out (no validation)."""
        fields = {
            name: getattr(self, name)
            for name in (
                "unit_id", "group", "time", "outcome", "covariates", "weight",
                "covariate_names", "group_raw", "group_labels",
            )
        }
        fields.update(changes)
        return PanelDataset(**fields)

    def cell_means(self, column: str | np.ndarray = "outcome") -> dict[tuple[int, float], float]:
        """Weighted mean of ``column`` in every non-empty (group, time) cell."""
        values = self.outcome if isinstance(column, str) and column == "outcome" else column
        if isinstance(values, str):
            values = self.covariates[:, self.covariate_names.index(values)]
        out = {}
        for g in (0, 1):
            for t in self.time_points:
                mask = (self.group == g) & (self.time == t)
                if mask.any():
                    w = self.weight[mask]
                    out[(g, t.item())] = float(np.sum(w * values[mask]) / np.sum(w))
        return out


def validate_panel(panel: PanelDataset) -> list[str]:
    """Return a list of invariant violations; empty means the panel is usable."""
    problems: list[str] = []
    n = len(panel)
    if n == 0:
        return ["panel has no observations"]
    lengths = {
        "unit_id": panel.unit_id.shape[0],
        "group": panel.group.shape[0],
        "time": panel.time.shape[0],
        "weight": panel.weight.shape[0],
        "covariates": panel.covariates.shape[0],
    }
    for name, size in lengths.items():
        if size != n:
            problems.append(f"column {name} has {size} rows, expected {n}")
    if problems:
        return problems

    n_groups = len(set(panel.group_raw.tolist()))
    if n_groups != 2:
        problems.append(f"group count = {n_groups}")
    if not set(np.unique(panel.group).tolist()) <= {0, 1}:
        problems.append("normalized group labels must be 0 or 1")

    times = np.asarray(panel.time, dtype=float)
    bad_time = np.flatnonzero(~np.isfinite(times))
    problems += [f"non-finite time at row {k}" for k in bad_time]
    bad_y = np.flatnonzero(~np.isfinite(panel.outcome))
    problems += [f"non-finite outcome at row {k}" for k in bad_y]
    bad_w = np.flatnonzero(~(np.isfinite(panel.weight) & (panel.weight > 0)))
    problems += [f"non-positive weight at row {k}" for k in bad_w]
    if panel.covariates.ndim != 2 or panel.covariates.shape[1] != len(panel.covariate_names):
        problems.append("ragged covariates: width does not match covariate names")
    else:
        bad_rows = np.flatnonzero(~np.all(np.isfinite(panel.covariates), axis=1))
        problems += [f"non-finite covariate at row {k}" for k in bad_rows]
    return problems


def split_periods(panel: PanelDataset | Sequence[float], t0: float) -> tuple[list, list]:
    """Partition the panel's time points into pre (t < t0) and post (t >= t0)."""
    if isinstance(panel, PanelDataset):
        times = panel.time_points.tolist()
    else:
        times = sorted(set(panel))
    if not times:
        raise ConfigurationError("no time points")
    if not (times[0] < t0 <= times[-1]):
        raise ConfigurationError(
            f"t0={t0!r} must lie in ({times[0]!r}, {times[-1]!r}]"
        )
    pre = [t for t in times if t < t0]
    post = [t for t in times if t >= t0]
    return pre, post


@dataclass(frozen=True)
class DesignSpec:
    """Which design to fit and how.

    Parameters
    ----------
    design : Design or str
        One of ``fe-did``, ``fe-did-trends``, ``general-cits``, ``linear-cits``,
        ``event-study``.
    t0 : float
        First post-period time.
    center_time_at_t0 : bool
        Use ``t - t0`` in every time-trend column, so intercept-shift
        parameters are effects at the first post period.
    covariate_names : sequence of str
        Panel covariates entered additively. Empty means none.
    se_type : {"hc1", "classical", "cluster"}
        Covariance estimator; ``cluster`` clusters on unit id.
    ci_level : float
        Confidence level for every interval.
    ci_dist : {"normal", "t"}
        Reference distribution for intervals. ``t`` uses residual dof.
    reference_period : float, optional
        Event-study reference time; defaults to the last pre-period time.
    enforce_paper_minimums : bool
        Apply the conventional minimum period counts per design rather than
        the looser identification minimums.
    pooled_effect : bool
        One treatment parameter for the whole post period instead of one per
        post time. Ignored by ``linear-cits`` and ``event-study``.
    """

    design: Design | str
    t0: float
    center_time_at_t0: bool = True
    covariate_names: tuple[str, ...] = ()
    se_type: SeType | str = SeType.HC1
    ci_level: float = 0.95
    ci_dist: str = "normal"
    reference_period: float | None = None
    enforce_paper_minimums: bool = True
    pooled_effect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "design", Design.parse(self.design))
        object.__setattr__(self, "se_type", SeType.parse(self.se_type))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        if not (0.0 < self.ci_level < 1.0):
            raise ConfigurationError(f"ci_level must be in (0, 1), got {self.ci_level}")
        if self.ci_dist not in ("normal", "t"):
            raise ConfigurationError(f"ci_dist must be 'normal' or 't', got {self.ci_dist!r}")
        if not math.isfinite(float(self.t0)):
            raise ConfigurationError("t0 must be finite")
        if self.reference_period is not None and not self.reference_period < self.t0:
            raise ConfigurationError(
                f"reference period {self.reference_period!r} must precede t0={self.t0!r}"
            )

    def with_design(self, design: Design | str) -> "DesignSpec":
        return dataclasses.replace(self, design=Design.parse(design))

    def to_dict(self) -> dict:
        return {
            "design": self.design.value,
            "t0": _plain(self.t0),
            "center_time_at_t0": self.center_time_at_t0,
            "covariate_names": list(self.covariate_names),
            "se_type": self.se_type.value,
            "ci_level": self.ci_level,
            "ci_dist": self.ci_dist,
            "reference_period": _plain(self.reference_period),
            "enforce_paper_minimums": self.enforce_paper_minimums,
            "pooled_effect": self.pooled_effect,
        }


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


class CoefficientMap(Mapping[str, float]):
    """Named coefficients with standard errors.

    Keys follow the model roles: ``beta0_0`` (comparison intercept),
    ``beta1_0`` (comparison slope), ``beta0_1`` / ``beta1_1`` (treated
    differential intercept / slope), ``betaCheck0_0`` / ``betaCheck1_0``
    (comparison post intercept / slope shift), ``betaCheck_k_0[t]``
    (comparison post deviation at t), ``gamma[t]`` (time effects),
    ``tau[t]``, ``tau``, ``tau0``, ``tau1`` (treatment effects),
    ``delta[t]`` (event-study contrasts) and ``theta[name]`` (covariates).
    """

    def __init__(self, names: Sequence[str], estimates: Sequence[float], se: Sequence[float]):
        self._names = tuple(names)
        self._est = dict(zip(self._names, (float(v) for v in estimates)))
        self._se = dict(zip(self._names, (float(v) for v in se)))

    def __getitem__(self, key: str) -> float:
        return self._est[key]

    def __iter__(self):
        return iter(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def se(self, key: str) -> float:
        return self._se[key]

    def table(self) -> list[tuple[str, float, float]]:
        return [(k, self._est[k], self._se[k]) for k in self._names]

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v:.6g}" for k, v in self._est.items())
        return f"CoefficientMap({inner})"
