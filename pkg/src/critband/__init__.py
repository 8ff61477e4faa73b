"""Critical-bandwidth shape tests for regression and density functions.

The package implements the classical critical-bandwidth (CB) test family
(monotonicity, mode counts, quasi-convexity/concavity) with residual- or
smoothed-bootstrap calibration, plus the flatness-robust variant (FRCB) that
first removes grid points whose derivative confidence band straddles zero.
"""

from .band import (DerivBand, alpha_flat, band_bandwidth,
                   density_derivative_band, filter_grid, simultaneous_band)
from .bootstrap import (BootstrapConfig, RefilterSpec, TestReport, add_one_p_value,
                        cb_test, density_cb_test, identity_resampler,
                        resample_residuals, smoothed_density_resample)
from .cb import CBConfig, check_nesting, critical_bandwidth
from .data import Grid, Sample, default_grid
from .errors import (CritbandError, DataError, DegenerateFit, EmptyDataError,
                     NoSatisfyingBandwidth, NonFiniteValueError, ParseError,
                     UnknownFunction)
from .estimators import (FitCurve, GridSmoother, fit_derivative, fit_kde,
                         fit_local_poly, kde_derivative, silverman_bandwidth)
from .frcb import BandConfig, FRCBReport, frcb_density_test, frcb_statistics, frcb_test
from .shape import (ConstraintSet, ShapeHypothesis, count_modes, full_adjacency,
                    monotone_direction, parse_hypothesis, satisfies)
from .simkit import (SIM_FUNCTIONS, RejectionTable, SimDesign, application_stand_in,
                     eval_sim_function, generate, rejection_table)
from .version import __version__

__all__ = [
    "BandConfig", "BootstrapConfig", "CBConfig", "ConstraintSet", "CritbandError",
    "DataError", "DegenerateFit", "DerivBand", "EmptyDataError", "FRCBReport",
    "FitCurve", "Grid", "GridSmoother", "NoSatisfyingBandwidth",
    "NonFiniteValueError", "ParseError", "RefilterSpec", "RejectionTable",
    "SIM_FUNCTIONS", "Sample", "ShapeHypothesis", "SimDesign", "TestReport",
    "UnknownFunction", "__version__", "add_one_p_value", "alpha_flat",
    "application_stand_in", "band_bandwidth", "cb_test", "check_nesting",
    "count_modes", "critical_bandwidth", "default_grid", "density_cb_test",
    "density_derivative_band", "eval_sim_function", "filter_grid",
    "fit_derivative", "fit_kde", "fit_local_poly", "frcb_density_test",
    "frcb_statistics", "frcb_test", "full_adjacency", "generate",
    "identity_resampler", "kde_derivative", "monotone_direction",
    "parse_hypothesis", "rejection_table", "resample_residuals", "satisfies",
    "silverman_bandwidth", "simultaneous_band", "smoothed_density_resample",
]
