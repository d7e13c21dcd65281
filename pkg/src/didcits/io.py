"""Panel ingestion from delimited text, result documents, and plot data.

Documents are plain JSON. Floats are written with Python's shortest
round-trip ``repr`` and NaN becomes ``null``, so reading a document back
gives the same values bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .estimators import ComparisonTable, EstimationResult
from .ols import EffectEstimate
from .panel import ConfigurationError, Design, PanelDataset, PanelValidationError, validate_panel

__all__ = [
    "PanelSchema",
    "SchemaError",
    "RESULTS_SCHEMA",
    "COMPARISON_SCHEMA",
    "PLOT_SCHEMA",
    "read_panel",
    "results_document",
    "comparison_document",
    "write_results",
    "read_results",
    "emit_plot_data",
    "dumps",
]

RESULTS_SCHEMA = "didcits.results/1"
COMPARISON_SCHEMA = "didcits.comparison/1"
PLOT_SCHEMA = "didcits.plot/1"
SIMULATION_SCHEMA = "didcits.simulation/1"


class SchemaError(ConfigurationError):
    """Input file does not match the declared panel schema."""


@dataclass(frozen=True)
class PanelSchema:
    unit: str
    group: str
    time: str
    outcome: str
    treated_label: str
    weight: str | None = None
    covariates: tuple[str, ...] = ()


def _parse_number(text: str, column: str, row: int) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ValueError(f"row {row}: cannot parse {column}={text!r} as a number") from None
    return value


def read_panel(path: str | os.PathLike, schema: PanelSchema, delimiter: str = ",") -> PanelDataset:
    """Read a long-format panel (one row per unit and time) from delimited text.

    Rows keep file order. Rows whose group equals ``schema.treated_label``
    form the treated group; the file must contain exactly one other label.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        needed = [
            ("unit", schema.unit),
            ("group", schema.group),
            ("time", schema.time),
            ("outcome", schema.outcome),
        ]
        if schema.weight:
            needed.append(("weight", schema.weight))
        needed += [("covariate", c) for c in schema.covariates]
        for role, name in needed:
            if name not in header:
                raise SchemaError(f"{role} column {name!r} not found")
        records = list(reader)

    units, groups, times, ys, ws = [], [], [], [], []
    covs = {c: [] for c in schema.covariates}
    for i, rec in enumerate(records, start=2):  # row 1 is the header
        units.append(rec[schema.unit])
        groups.append(rec[schema.group])
        times.append(_parse_number(rec[schema.time], schema.time, i))
        ys.append(_parse_number(rec[schema.outcome], schema.outcome, i))
        if schema.weight:
            ws.append(_parse_number(rec[schema.weight], schema.weight, i))
        for c in schema.covariates:
            covs[c].append(_parse_number(rec[c], c, i))

    labels = list(dict.fromkeys(groups))
    if schema.treated_label not in labels:
        raise SchemaError(
            f"treated label {schema.treated_label!r} not among group values {labels}"
        )
    time_arr = np.asarray(times, dtype=float)
    if time_arr.size and np.all(np.isfinite(time_arr)) and np.all(time_arr == np.round(time_arr)):
        time_arr = time_arr.astype(np.int64)
    panel = PanelDataset.from_arrays(
        units,
        groups,
        time_arr,
        ys,
        covs or None,
        ws if schema.weight else None,
        treated_label=schema.treated_label,
        validate=False,
    )
    problems = validate_panel(panel)
    if problems:
        raise PanelValidationError(problems)
    return panel


def _clean(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    return value


def _effect(e: EffectEstimate) -> dict:
    return _clean(e.to_dict())


def _series(d: dict) -> list[dict]:
    return [{"time": _clean(t), "value": _clean(v)} for t, v in d.items()]


def _version() -> str:
    from . import __version__

    return __version__


def results_document(result: EstimationResult) -> dict:
    """Full JSON-ready document for one fitted design."""
    doc = {
        "schema": RESULTS_SCHEMA,
        "tool_version": _version(),
        "design": result.spec.to_dict(),
        "coefficients": [
            {"name": name, "estimate": _clean(est), "se": _clean(se)}
            for name, est, se in result.coefficients.table()
        ],
        "att": [_effect(e) for e in result.att],
        "effects": {k: _effect(v) for k, v in result.effects.items()},
        "counterfactual": _series(result.counterfactual),
        "observed_treated": _series(result.observed_treated),
        "diagnostics": _clean(result.diagnostics),
    }
    if result.event_study:
        doc["event_study"] = [_effect(e) for e in result.event_study]
    return doc


def comparison_document(table: ComparisonTable) -> dict:
    return {
        "schema": COMPARISON_SCHEMA,
        "tool_version": _version(),
        "times": _clean(table.times),
        "designs": {k: results_document(r) for k, r in table.results.items()},
        "errors": dict(table.errors),
        "equivalence": {
            "general_cits_equals_fe_did_trends": table.equivalent,
            "max_abs_gap": _clean(table.max_equivalence_gap),
        },
    }


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"


def _csv_text(result: EstimationResult | ComparisonTable, delimiter: str = ",") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    header = ["time", "point", "se", "ci_low", "ci_high", "counterfactual", "observed_treated"]

    def fmt(v):
        v = _clean(v)
        return "" if v is None else repr(v)

    def emit(res, prefix=()):
        for e in res.att:
            writer.writerow(
                list(prefix)
                + [
                    fmt(e.time), fmt(e.point), fmt(e.se), fmt(e.ci_low), fmt(e.ci_high),
                    fmt(res.counterfactual.get(e.time)), fmt(res.observed_treated.get(e.time)),
                ]
            )

    if isinstance(result, ComparisonTable):
        writer.writerow(["design"] + header)
        for key, res in result.results.items():
            emit(res, (key,))
    else:
        writer.writerow(header)
        emit(result)
    return buf.getvalue()


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".didcits-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render(result: EstimationResult | ComparisonTable | dict, fmt: str = "json") -> str:
    if fmt == "csv":
        if isinstance(result, dict):
            raise ValueError("csv output needs an estimation result or comparison")
        return _csv_text(result)
    if fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(result, ComparisonTable):
        return dumps(comparison_document(result))
    if isinstance(result, EstimationResult):
        return dumps(results_document(result))
    return dumps(result)


def write_results(
    result: EstimationResult | ComparisonTable | dict,
    fmt: str = "json",
    path: str | os.PathLike | None = None,
) -> str:
    """Serialize ``result`` as ``json`` (full document) or ``csv`` (ATT table).

    Writes atomically to ``path`` when given and returns the text either way.
    """
    text = render(result, fmt)
    if path is not None:
        _atomic_write(path, text)
    return text


def read_results(path: str | os.PathLike) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def emit_plot_data(
    results: EstimationResult | ComparisonTable | Sequence[EstimationResult],
    event_study: EstimationResult | None = None,
) -> dict:
    """Plot-ready series for an event-study panel (A) and ATT(t) by design (B).

    Panel A is filled from ``event_study`` (or from ``results`` itself when it
    is an event-study fit) and includes the reference period as a point pinned
    at zero. Panel B has one series per design.
    """
    if isinstance(results, ComparisonTable):
        fitted = list(results.results.items())
    elif isinstance(results, EstimationResult):
        fitted = [(results.spec.design.value, results)]
    else:
        fitted = [(r.spec.design.value, r) for r in results]

    if event_study is None:
        for _, r in fitted:
            if r.spec.design is Design.EVENT_STUDY:
                event_study = r
                break

    panel_a = None
    if event_study is not None:
        t0 = float(event_study.spec.t0)
        ref = None
        points = []
        for e in event_study.event_study:
            is_ref = e.label == "reference"
            if is_ref:
                ref = e.time
            points.append(
                {
                    "time": _clean(e.time),
                    "event_time": _clean(float(e.time) - t0),
                    "point": _clean(e.point),
                    "ci_low": _clean(e.ci_low),
                    "ci_high": _clean(e.ci_high),
                    "reference": is_ref,
                }
            )
        panel_a = {"reference_period": _clean(ref), "t0": _clean(event_study.spec.t0), "points": points}

    series = []
    for key, r in fitted:
        if r.spec.design is Design.EVENT_STUDY:
            continue
        series.append(
            {
                "design": key,
                "points": [
                    {
                        "time": _clean(e.time),
                        "point": _clean(e.point),
                        "ci_low": _clean(e.ci_low),
                        "ci_high": _clean(e.ci_high),
                    }
                    for e in r.att
                ],
            }
        )
    return {"schema": PLOT_SCHEMA, "panel_a": panel_a, "panel_b": {"series": series}}
