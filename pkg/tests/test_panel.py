import numpy as np
import pytest
from hypothesis import given, strategies as st

from didcits import (
    ConfigurationError,
    Design,
    DesignSpec,
    Observation,
    PanelDataset,
    PanelValidationError,
    build_design,
    split_periods,
    validate_panel,
)

from .helpers import balanced_panel


def _panel(groups=(0, 0, 1, 1), times=(1, 2, 1, 2), y=(1.0, 2.0, 3.0, 5.0), w=None):
    return PanelDataset.from_arrays(
        ["a", "a", "b", "b"][: len(groups)], groups, times, y, weight=w, validate=False
    )


def test_valid_panel_reports_nothing():
    assert validate_panel(_panel()) == []


def test_three_groups_reported():
    p = PanelDataset.from_arrays(
        ["a", "b", "c", "d"], ["x", "y", "z", "x"], [1, 1, 2, 2], [1.0] * 4,
        treated_label="x", validate=False,
    )
    assert "group count = 3" in validate_panel(p)
    with pytest.raises(PanelValidationError, match="group count = 3"):
        PanelDataset.from_arrays(["a", "b", "c"], [0, 1, 2], [1, 1, 1], [1.0] * 3)


def test_nan_outcome_reported():
    p = _panel(y=(1.0, np.nan, 3.0, 5.0))
    assert validate_panel(p) == ["non-finite outcome at row 1"]


def test_nonpositive_weight_reported():
    p = _panel(w=[1.0, 0.0, 1.0, -2.0])
    assert validate_panel(p) == ["non-positive weight at row 1", "non-positive weight at row 3"]


def test_ragged_covariates_reported():
    rows = [
        Observation("a", 0, 1, 1.0, (0.5,)),
        Observation("a", 0, 2, 1.0, (0.5, 1.0)),
        Observation("b", 1, 1, 1.0, (0.5,)),
        Observation("b", 1, 2, 1.0, (0.5,)),
    ]
    with pytest.raises(PanelValidationError, match="ragged covariates at row 1"):
        PanelDataset.from_records(rows)


def test_group_labels_normalized_and_recorded():
    p = PanelDataset.from_arrays(
        ["a", "a", "b", "b"], ["ctl", "ctl", "trt", "trt"], [1, 2, 1, 2], [1.0, 2, 3, 4],
        treated_label="trt",
    )
    assert p.group.tolist() == [0, 0, 1, 1]
    assert p.group_labels == {1: "trt", 0: "ctl"}


def test_panel_is_immutable():
    p = _panel()
    with pytest.raises(ValueError):
        p.outcome[0] = 10.0


def test_rows_round_trip():
    p = _panel()
    q = PanelDataset.from_records(list(p.rows))
    assert np.array_equal(p.outcome, q.outcome)
    assert q.group.tolist() == p.group.tolist()


@pytest.mark.parametrize(
    "times, t0, pre, post",
    [
        (range(1, 11), 6, [1, 2, 3, 4, 5], [6, 7, 8, 9, 10]),
        ((1, 2), 2, [1], [2]),
        (range(1, 13), 9, list(range(1, 9)), [9, 10, 11, 12]),
    ],
)
def test_split_periods_examples(times, t0, pre, post):
    assert split_periods(list(times), t0) == (pre, post)


@pytest.mark.parametrize("t0", [1, 0, 11])
def test_split_periods_rejects_out_of_range(t0):
    with pytest.raises(ConfigurationError):
        split_periods(list(range(1, 11)), t0)


@given(
    st.lists(st.integers(-50, 50), min_size=2, max_size=30, unique=True),
    st.integers(0, 1000),
)
def test_split_periods_partitions(times, k):
    times = sorted(times)
    t0 = times[1 + k % (len(times) - 1)]
    pre, post = split_periods(times, t0)
    assert sorted(pre + post) == times
    assert not set(pre) & set(post)
    assert all(t < t0 for t in pre) and all(t >= t0 for t in post)


@pytest.mark.parametrize("design", list(Design))
def test_coefficient_keys_do_not_depend_on_outcomes(design, rng):
    p, t0 = balanced_panel(rng, 5, 3, 2)
    q = p.replace(outcome=rng.normal(size=len(p)))
    spec = DesignSpec(design, t0=t0)
    assert build_design(p, spec).column_names == build_design(q, spec).column_names


def test_design_spec_invariants():
    with pytest.raises(ConfigurationError):
        DesignSpec("fe-did", t0=5, reference_period=5)
    with pytest.raises(ConfigurationError):
        DesignSpec("fe-did", t0=5, ci_level=1.0)
    with pytest.raises(ConfigurationError):
        DesignSpec("nonsense", t0=5)
    assert DesignSpec("FeDidGroupTrends", t0=5).design is Design.FE_DID_TRENDS
    assert DesignSpec("linear_cits", t0=5).design is Design.LINEAR_CITS
