"""Two-group pre/post treatment-effect estimation: FE DID, FE DID with group
trends, general CITS, linear CITS, and event studies."""

from .designs import (
    REQUIREMENTS,
    DesignRequirements,
    RequirementError,
    build_design,
    build_event_study,
    build_fe_did,
    build_fe_did_trends,
    build_general_cits,
    build_linear_cits,
    validate_design_requirements,
)
from .estimators import (
    ComparisonTable,
    EstimationResult,
    att_series,
    compare_designs,
    counterfactual_series,
    estimate,
    summarize_att,
)
from .ols import DesignMatrix, EffectEstimate, OlsFit, fit_wls, linear_combination, vcov_estimate
from .panel import (
    ALL_DESIGNS,
    CoefficientMap,
    ConfigurationError,
    Design,
    DesignSpec,
    Observation,
    PanelDataset,
    PanelValidationError,
    SeType,
    split_periods,
    validate_panel,
)
from .simulation import DgpKind, DgpSpec, McSummary, generate_panel, monte_carlo, true_att

__version__ = "0.1.0"
