"""Design matrices for the four two-group pre/post designs and the event study.

Every builder returns a :class:`~didcits.ols.DesignMatrix` whose column
names are the coefficient roles used throughout the package. Column sets
depend only on the design, the panel's time points, t0 and the covariates,
never on outcome values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .ols import DesignMatrix
from .panel import (
    ConfigurationError,
    Design,
    DesignSpec,
    PanelDataset,
    SeType,
    format_time,
    split_periods,
)

__all__ = [
    "DesignRequirements",
    "RequirementError",
    "REQUIREMENTS",
    "validate_design_requirements",
    "build_design",
    "build_fe_did",
    "build_fe_did_trends",
    "build_general_cits",
    "build_linear_cits",
    "build_event_study",
    "design_rows",
    "treatment_columns",
    "reference_period",
]


class RequirementError(ConfigurationError):
    """Too few pre or post periods for the requested design."""


@dataclass(frozen=True)
class DesignRequirements:
    min_pre: int
    min_post: int
    identification_min_pre: int
    identification_min_post: int
    description: str


REQUIREMENTS = {
    Design.FE_DID: DesignRequirements(
        1, 1, 1, 1, "requires only two observation points (one pre and one post)"
    ),
    Design.FE_DID_TRENDS: DesignRequirements(
        4, 1, 2, 1, "requires at least five observation points (four pre and one post)"
    ),
    Design.GENERAL_CITS: DesignRequirements(
        4, 1, 2, 1, "requires at least five observation points (four pre and one post)"
    ),
    Design.LINEAR_CITS: DesignRequirements(
        4, 4, 2, 2, "requires at least eight (four pre and four post) observation points"
    ),
    Design.EVENT_STUDY: DesignRequirements(
        1, 1, 1, 1, "requires at least one pre and one post observation point"
    ),
}


def reference_period(panel: PanelDataset, spec: DesignSpec):
    """Event-study reference time: the configured one, else the last pre time."""
    pre, _ = split_periods(panel, spec.t0)
    ref = spec.reference_period
    if ref is None:
        return pre[-1]
    if ref >= spec.t0:
        raise ConfigurationError(f"reference period {ref!r} is not before t0={spec.t0!r}")
    if ref not in pre:
        raise ConfigurationError(f"reference period {ref!r} is not a pre-period time point")
    return ref


def validate_design_requirements(panel: PanelDataset, spec: DesignSpec) -> DesignRequirements:
    """Check period counts for ``spec.design``; raise :class:`RequirementError` if short.

    With ``enforce_paper_minimums=False`` only the identification minimums
    apply, and a warning is issued when the conventional ones are not met.
    """
    pre, post = split_periods(panel, spec.t0)
    req = REQUIREMENTS[spec.design]
    name = spec.design.value
    if spec.enforce_paper_minimums:
        min_pre, min_post = req.min_pre, req.min_post
    else:
        min_pre, min_post = req.identification_min_pre, req.identification_min_post

    short = []
    if len(pre) < min_pre:
        short.append(f"needs ≥{min_pre} pre, has {len(pre)} (short by {min_pre - len(pre)})")
    if len(post) < min_post:
        short.append(f"needs ≥{min_post} post, has {len(post)} (short by {min_post - len(post)})")
    if short:
        raise RequirementError(f"{name} {req.description}: " + "; ".join(short))

    if not spec.enforce_paper_minimums and (len(pre) < req.min_pre or len(post) < req.min_post):
        warnings.warn(
            f"{name} below conventional minimum ({req.min_pre} pre, {req.min_post} post); "
            f"fitting with {len(pre)} pre and {len(post)} post",
            UserWarning,
            stacklevel=2,
        )
    if spec.design is Design.EVENT_STUDY:
        reference_period(panel, spec)
    missing = [c for c in spec.covariate_names if c not in panel.covariate_names]
    if missing:
        raise ConfigurationError(f"covariates not in panel: {', '.join(missing)}")
    return req


def _centered(time: np.ndarray, spec: DesignSpec) -> np.ndarray:
    t = np.asarray(time, dtype=float)
    return t - float(spec.t0) if spec.center_time_at_t0 else t


def _label(t) -> str:
    return format_time(t)


def design_rows(
    panel: PanelDataset,
    spec: DesignSpec,
    group: np.ndarray,
    time: np.ndarray,
    covariates: np.ndarray,
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Design-matrix rows for arbitrary (group, time, covariates) triples.

    Columns are laid out from ``panel``'s time points, so rows built here
    line up with the fitted model. Used both for the estimation matrix and
    for evaluating the model at synthetic points (counterfactuals).
    """
    design = spec.design
    times = panel.time_points.tolist()
    pre, post = split_periods(times, spec.t0)
    g = np.asarray(group, dtype=float)
    t = np.asarray(time, dtype=float)
    tc = _centered(t, spec)
    is_post = (t >= float(spec.t0)).astype(float)
    n = g.shape[0]
    ones = np.ones(n)
    pooled = spec.pooled_effect

    cols: list[tuple[str, np.ndarray]] = [("beta0_0", ones)]

    def at(s):
        return (t == float(s)).astype(float)

    if design in (Design.FE_DID, Design.FE_DID_TRENDS):
        cols.append(("beta0_1", g))
        if design is Design.FE_DID_TRENDS:
            cols.append(("beta1_1", g * tc))
        cols += [(f"gamma[{_label(s)}]", at(s)) for s in times[1:]]
        if pooled:
            cols.append(("tau", g * is_post))
        else:
            cols += [(f"tau[{_label(s)}]", g * at(s)) for s in post]
    elif design is Design.GENERAL_CITS:
        cols += [("beta1_0", tc), ("beta0_1", g), ("beta1_1", g * tc)]
        cols += [(f"betaCheck_k_0[{_label(s)}]", at(s)) for s in post]
        if pooled:
            cols.append(("tau", g * is_post))
        else:
            cols += [(f"tau[{_label(s)}]", g * at(s)) for s in post]
    elif design is Design.LINEAR_CITS:
        cols += [
            ("beta1_0", tc),
            ("betaCheck0_0", is_post),
            ("betaCheck1_0", is_post * tc),
            ("beta0_1", g),
            ("beta1_1", g * tc),
            ("tau0", g * is_post),
            ("tau1", g * is_post * tc),
        ]
    elif design is Design.EVENT_STUDY:
        ref = reference_period(panel, spec)
        cols.append(("beta0_1", g))
        cols += [(f"gamma[{_label(s)}]", at(s)) for s in times[1:]]
        cols += [(f"delta[{_label(s)}]", g * at(s)) for s in times if s != ref]
    else:  # pragma: no cover
        raise ConfigurationError(f"unsupported design {design!r}")

    if spec.covariate_names:
        cov = np.asarray(covariates, dtype=float).reshape(n, -1)
        for j, name in enumerate(spec.covariate_names):
            cols.append((f"theta[{name}]", cov[:, j]))

    names = tuple(c[0] for c in cols)
    values = np.column_stack([c[1] for c in cols]) if cols else np.empty((n, 0))
    return values, names


def _panel_covariates(panel: PanelDataset, spec: DesignSpec) -> np.ndarray:
    idx = [panel.covariate_names.index(c) for c in spec.covariate_names]
    return panel.covariates[:, idx]


def build_design(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """Estimation design matrix for ``spec.design`` over every panel row."""
    missing = [c for c in spec.covariate_names if c not in panel.covariate_names]
    if missing:
        raise ConfigurationError(f"covariates not in panel: {', '.join(missing)}")
    values, names = design_rows(
        panel, spec, panel.group, panel.time, _panel_covariates(panel, spec)
    )
    clusters = panel.unit_id if spec.se_type is SeType.CLUSTER else None
    return DesignMatrix(values, names, clusters)


def _check(spec: DesignSpec, design: Design) -> DesignSpec:
    return spec if spec.design is design else spec.with_design(design)


def build_fe_did(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """Intercept, group, time effects (first time is the reference), treated x post-time."""
    return build_design(panel, _check(spec, Design.FE_DID))


def build_fe_did_trends(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """FE DID columns plus a treated x centered-time differential trend."""
    return build_design(panel, _check(spec, Design.FE_DID_TRENDS))


def build_general_cits(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """Group-specific pre lines, per-post-time comparison deviations, treated x post-time."""
    return build_design(panel, _check(spec, Design.GENERAL_CITS))


def build_linear_cits(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """Group-specific lines with comparison post shifts and treated (tau0, tau1)."""
    return build_design(panel, _check(spec, Design.LINEAR_CITS))


def build_event_study(panel: PanelDataset, spec: DesignSpec) -> DesignMatrix:
    """Group x time contrasts against a single pre-period reference time."""
    return build_design(panel, _check(spec, Design.EVENT_STUDY))


def treatment_columns(spec: DesignSpec, names: tuple[str, ...]) -> tuple[str, ...]:
    """Columns switched off when evaluating the treated group's untreated outcome."""
    if spec.design is Design.EVENT_STUDY:
        post_delta = []
        for name in names:
            if name.startswith("delta["):
                if float(name[6:-1]) >= float(spec.t0):
                    post_delta.append(name)
        return tuple(post_delta)
    return tuple(n for n in names if n == "tau" or n.startswith("tau"))
