"""Panel econometrics: transforms, fixed-effect absorption, estimators."""

from ambiguity_lab.econ.estimators import (
    DesignSpec,
    FitResult,
    fit,
    fit_2sls,
    fit_interaction,
    fit_ols_clustered,
    interaction_expansion,
    partial_correlation,
    peak_location,
    wald_joint_test,
)
from ambiguity_lab.econ.fixed_effects import COUNTRY_YEAR, PARTY, absorb_fixed_effects
from ambiguity_lab.econ.transforms import add_centrism, build_lags, centrism_transform, check_panel, extremism

__all__ = [
    "COUNTRY_YEAR", "PARTY", "DesignSpec", "FitResult", "absorb_fixed_effects", "add_centrism",
    "build_lags", "centrism_transform", "check_panel", "extremism", "fit", "fit_2sls",
    "fit_interaction", "fit_ols_clustered", "interaction_expansion", "partial_correlation",
    "peak_location", "wald_joint_test",
]
