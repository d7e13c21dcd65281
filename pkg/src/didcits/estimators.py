"""Fit a design, build its counterfactual series and treatment-effect contrasts."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .designs import (
    build_design,
    design_rows,
    reference_period,
    treatment_columns,
    validate_design_requirements,
)
from .ols import EffectEstimate, OlsFit, fit_wls, linear_combination
from .panel import (
    ConfigurationError,
    CoefficientMap,
    Design,
    DesignSpec,
    PanelDataset,
    PanelValidationError,
    format_time,
    split_periods,
    validate_panel,
)

__all__ = [
    "EstimationResult",
    "ComparisonTable",
    "estimate",
    "counterfactual_series",
    "att_series",
    "summarize_att",
    "compare_designs",
    "EQUIVALENCE_TOL",
]

#: Absolute tolerance on ATT points for flagging general CITS == FE DID with trends.
EQUIVALENCE_TOL = 1e-6


@dataclass(eq=False)
class EstimationResult:
    spec: DesignSpec
    fit: OlsFit
    coefficients: CoefficientMap
    pre_times: list
    post_times: list
    contrasts: dict
    att: list[EffectEstimate]
    counterfactual: dict
    observed_treated: dict
    effects: dict[str, EffectEstimate] = field(default_factory=dict)
    event_study: list[EffectEstimate] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def design(self) -> Design:
        return self.spec.design

    def att_at(self, t) -> EffectEstimate:
        for est in self.att:
            if est.time == t:
                return est
        raise KeyError(t)

    def att_points(self) -> np.ndarray:
        return np.array([e.point for e in self.att])


def _centered_time(t, spec: DesignSpec) -> float:
    return float(t) - float(spec.t0) if spec.center_time_at_t0 else float(t)


def _contrasts(spec: DesignSpec, post: list) -> dict:
    out = {}
    for t in post:
        if spec.design is Design.LINEAR_CITS:
            out[t] = {"tau0": 1.0, "tau1": _centered_time(t, spec)}
        elif spec.design is Design.EVENT_STUDY:
            out[t] = {f"delta[{format_time(t)}]": 1.0}
        elif spec.pooled_effect:
            out[t] = {"tau": 1.0}
        else:
            out[t] = {f"tau[{format_time(t)}]": 1.0}
    return out


def _cell_covariate_mean(panel: PanelDataset, spec: DesignSpec, group: int, t) -> np.ndarray:
    idx = [panel.covariate_names.index(c) for c in spec.covariate_names]
    if not idx:
        return np.zeros(0)
    mask = (panel.group == group) & (panel.time == t)
    if not mask.any():
        mask = panel.group == group
    w = panel.weight[mask]
    return (w @ panel.covariates[mask][:, idx]) / w.sum()


def counterfactual_series(
    fit: OlsFit,
    spec: DesignSpec,
    panel: PanelDataset,
    group: int = 1,
    times: Sequence | None = None,
) -> dict:
    """Model-implied untreated mean of ``group`` at each post-period time.

    The fitted design is evaluated at a synthetic observation with the
    treatment columns switched off and covariates at the group's post-cell
    weighted means. For the comparison group this is simply its fitted
    value. Keys are post-period times.
    """
    pre, post = split_periods(panel, spec.t0)
    if times is None:
        times = post
    times = list(times)
    bad = [t for t in times if t < spec.t0]
    if bad:
        raise ConfigurationError(f"counterfactuals are defined for post-period times only; got {bad}")
    k = len(spec.covariate_names)
    cov = np.array([_cell_covariate_mean(panel, spec, group, t) for t in times]).reshape(len(times), k)
    rows, names = design_rows(panel, spec, np.full(len(times), group), np.asarray(times, float), cov)
    if names != fit.column_names:
        raise ConfigurationError("fit columns do not match the requested design")
    off = set(treatment_columns(spec, names))
    for j, name in enumerate(names):
        if name in off:
            rows[:, j] = 0.0
    values = rows @ fit.coefficients
    return {t: float(v) for t, v in zip(times, values)}


def _observed_means(panel: PanelDataset, group: int, times: list) -> dict:
    out = {}
    for t in times:
        mask = (panel.group == group) & (panel.time == t)
        if mask.any():
            w = panel.weight[mask]
            out[t] = float(w @ panel.outcome[mask] / w.sum())
        else:
            out[t] = float("nan")
    return out


def _empty_cells(panel: PanelDataset) -> list:
    empty = []
    for g in (0, 1):
        present = set(panel.time[panel.group == g].tolist())
        empty += [(g, t) for t in panel.time_points.tolist() if t not in present]
    return empty


def estimate(panel: PanelDataset, spec: DesignSpec) -> EstimationResult:
    """Fit ``spec.design`` to ``panel`` and assemble the full result."""
    problems = validate_panel(panel)
    if problems:
        raise PanelValidationError(problems)
    validate_design_requirements(panel, spec)
    pre, post = split_periods(panel, spec.t0)
    X = build_design(panel, spec)

    empty = _empty_cells(panel)
    if empty:
        warnings.warn(f"empty (group, time) cells: {empty}", RuntimeWarning, stacklevel=2)
    fit = fit_wls(X, panel.outcome, panel.weight, spec.se_type)

    coefs = CoefficientMap(fit.column_names, fit.coefficients, fit.se)
    contrasts = {t: fit.weights_for(c) for t, c in _contrasts(spec, post).items()}
    result = EstimationResult(
        spec=spec,
        fit=fit,
        coefficients=coefs,
        pre_times=pre,
        post_times=post,
        contrasts=contrasts,
        att=[],
        counterfactual=counterfactual_series(fit, spec, panel),
        observed_treated=_observed_means(panel, 1, post),
    )
    result.att = att_series(result)

    if spec.design is Design.LINEAR_CITS:
        for name in ("tau0", "tau1"):
            result.effects[name] = linear_combination(
                fit, {name: 1.0}, spec.ci_level, ci_dist=spec.ci_dist, label=name
            )
    if spec.design is Design.EVENT_STUDY:
        result.event_study = _event_study_series(result, panel, reference_period(panel, spec))

    result.diagnostics = {
        "n": fit.n,
        "p": len(fit.column_names),
        "rank": fit.rank,
        "dof": fit.dof,
        "dropped": list(fit.dropped),
        "r_squared": fit.r_squared,
        "se_type": fit.se_type.value,
        "n_clusters": fit.n_clusters,
        "n_pre": len(pre),
        "n_post": len(post),
        "empty_cells": [[g, t] for g, t in empty],
    }
    return result


def _event_study_series(result: EstimationResult, panel: PanelDataset, ref) -> list[EffectEstimate]:
    spec = result.spec
    out = []
    for t in panel.time_points.tolist():
        if t == ref:
            out.append(EffectEstimate(0.0, 0.0, 0.0, 0.0, t, "reference"))
            continue
        out.append(
            linear_combination(
                result.fit,
                {f"delta[{format_time(t)}]": 1.0},
                spec.ci_level,
                ci_dist=spec.ci_dist,
                time=t,
                label="delta",
            )
        )
    return out


def att_series(result: EstimationResult) -> list[EffectEstimate]:
    """ATT(t) for every post time as linear contrasts of the coefficients."""
    spec = result.spec
    label = "att" if spec.design is not Design.EVENT_STUDY else "delta"
    return [
        linear_combination(
            result.fit, c, spec.ci_level, ci_dist=spec.ci_dist, time=t, label=label
        )
        for t, c in result.contrasts.items()
    ]


def summarize_att(result: EstimationResult, method: str = "mean_over_post") -> EffectEstimate:
    """Collapse ATT(t) to one estimate.

    ``mean_over_post`` averages the post-period contrasts. ``at_midpoint``
    takes ATT at the median post time; with an even number of post times it
    averages the two middle contrasts.
    """
    if not result.contrasts:
        raise ValueError("result has no post-period contrasts")
    times = list(result.contrasts)
    vectors = np.array([result.contrasts[t] for t in times])
    if method == "mean_over_post":
        c = vectors.mean(axis=0)
        at = None
    elif method == "at_midpoint":
        m = len(times)
        if m % 2:
            c = vectors[m // 2]
            at = times[m // 2]
        else:
            c = vectors[m // 2 - 1 : m // 2 + 1].mean(axis=0)
            at = (float(times[m // 2 - 1]) + float(times[m // 2])) / 2.0
    else:
        raise ValueError(f"unknown summary method {method!r}")
    spec = result.spec
    return linear_combination(result.fit, c, spec.ci_level, ci_dist=spec.ci_dist, time=at, label=method)


@dataclass(eq=False)
class ComparisonTable:
    """ATT(t) per design aligned on post times.

    ``estimates[design][t]`` is an :class:`EffectEstimate` (absent for a design
    that failed; the error message is in ``errors``). ``equivalent`` reports
    whether general CITS and FE DID with group trends agree within
    ``EQUIVALENCE_TOL``; it is ``None`` unless both were fitted.
    """

    times: list
    designs: list[str]
    estimates: dict[str, dict]
    results: dict[str, EstimationResult]
    errors: dict[str, str]
    equivalent: bool | None
    max_equivalence_gap: float | None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.times), len(self.designs)

    def rows(self) -> list[dict]:
        out = []
        for t in self.times:
            row = {"time": t}
            for d in self.designs:
                row[d] = self.estimates.get(d, {}).get(t)
            out.append(row)
        return out


def _spec_list(specs, base: DesignSpec | None) -> list[DesignSpec]:
    out = []
    for s in specs:
        if isinstance(s, DesignSpec):
            out.append(s)
        else:
            if base is None:
                raise ConfigurationError("design names need a base DesignSpec")
            out.append(base.with_design(s))
    return out


def compare_designs(
    panel: PanelDataset,
    specs: Sequence[DesignSpec | str | Design],
    *,
    base: DesignSpec | None = None,
    max_workers: int | None = None,
) -> ComparisonTable:
    """Estimate several designs on one panel and line up their ATT(t) series.

    A design that raises is recorded in ``errors`` and the rest still run.
    Designs may be given as names when ``base`` supplies the other settings.
    """
    specs = _spec_list(specs, base)
    keys = []
    for s in specs:
        key = s.design.value
        while key in keys:
            key += "'"
        keys.append(key)

    def run(spec):
        try:
            return estimate(panel, spec), None
        except (ConfigurationError, PanelValidationError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(run, specs))
    else:
        outcomes = [run(s) for s in specs]

    results, errors, estimates = {}, {}, {}
    times: list = []
    for key, (res, err) in zip(keys, outcomes):
        if err is not None:
            errors[key] = err
            continue
        results[key] = res
        estimates[key] = {e.time: e for e in res.att}
        times += [t for t in res.post_times if t not in times]

    equivalent, gap = None, None
    a = results.get(Design.GENERAL_CITS.value)
    b = results.get(Design.FE_DID_TRENDS.value)
    if a is not None and b is not None:
        gap = float(np.max(np.abs(a.att_points() - b.att_points())))
        equivalent = bool(gap <= EQUIVALENCE_TOL)
    return ComparisonTable(
        times=sorted(times),
        designs=keys,
        estimates=estimates,
        results=results,
        errors=errors,
        equivalent=equivalent,
        max_equivalence_gap=gap,
    )
