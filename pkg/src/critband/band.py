"""Simultaneous confidence band for the regression (or density) derivative.

The band is calibrated by the bootstrap distribution of the maximal
studentized deviation of the derivative estimate: replications refit the
derivative, the critical value is the level-quantile of
max_g |f'*(g) - f'(g)| / se(g), and the band is estimate +- c * se. The
flatness filter drops every grid point whose band straddles zero; its
miscoverage follows the shrinking alpha_flat(n) = n^(-1/2) schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .bootstrap import BootstrapConfig, smoothed_density_resample
from .data import Grid, Sample
from .errors import DegenerateFit
from .estimators import MASS_FLOOR, GridSmoother, fit_derivative, silverman_bandwidth
from .rng import STREAM_BAND_BOOT, substream


@dataclass(frozen=True)
class DerivBand:
    """Derivative estimate with simultaneous lower/upper envelopes on a grid."""

    grid: Grid
    estimate: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    h_band: float
    critical_value: float
    se: np.ndarray
    half_floor: float


def alpha_flat(n: int) -> float:
    """Shrinking miscoverage schedule n^(-1/2), clamped to [1e-6, 0.5]."""
    if n < 3:
        raise ValueError("need at least 3 observations")
    return float(min(max(n ** -0.5, 1e-6), 0.5))


# Inflation over the rule-of-thumb scale: derivative estimation tolerates (and
# needs) a somewhat larger bandwidth than level estimation.
DERIV_BANDWIDTH_INFLATION = 1.5


def band_bandwidth(sample: Sample) -> float:
    """Plug-in bandwidth for the derivative band, independent of the CB search."""
    return DERIV_BANDWIDTH_INFLATION * silverman_bandwidth(sample.xs)


def _half_width_floor(estimate: np.ndarray) -> float:
    # keeps the band meaningful when residuals sit at machine precision
    scale = float(np.max(np.abs(estimate))) if estimate.size else 0.0
    return 1e-9 + 1e-6 * scale


def simultaneous_band(sample: Sample, grid: Grid, h_band: float | None = None,
                      level: float = 0.95, boot_cfg: BootstrapConfig | None = None) -> DerivBand:
    """Max-t residual-bootstrap band for the regression derivative on a grid."""
    sample.require_response()
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    if h_band is None:
        h_band = band_bandwidth(sample)

    estimate, se = fit_derivative(sample, h_band, grid)

    pilot, mass = _kernels.locpoly_values(sample.xs, sample.ys, sample.xs, h_band, 2)
    if mass < MASS_FLOOR:
        raise DegenerateFit(h_band, mass)
    residuals = sample.ys - pilot

    slope_design = GridSmoother(sample.xs, grid.points, deriv=True)
    D = slope_design.matrix(h_band)

    n = sample.n
    b_total = boot_cfg.replications
    y_star = np.empty((n, b_total))
    for b in range(b_total):
        rng = substream(boot_cfg.seed, STREAM_BAND_BOOT, b)
        idx = rng.integers(0, n, n)
        y_star[:, b] = pilot + residuals[idx]
    deviations = np.abs(D @ y_star - estimate[:, None]) / se[:, None]
    max_t = deviations.max(axis=0)

    c = float(np.quantile(max_t, level, method="higher"))
    floor = _half_width_floor(estimate)
    half = np.maximum(c * se, floor)
    return DerivBand(grid=grid, estimate=estimate, lower=estimate - half,
                     upper=estimate + half, level=level, h_band=float(h_band),
                     critical_value=c, se=se, half_floor=floor)


def density_derivative_band(sample: Sample, grid: Grid, h_band: float | None = None,
                            level: float = 0.95,
                            boot_cfg: BootstrapConfig | None = None) -> DerivBand:
    """Max-t band for the KDE derivative, calibrated by the smoothed bootstrap.

    The pointwise se comes from the bootstrap replications themselves, so the
    construction needs no analytic variance formula for the KDE derivative.
    """
    if sample.has_response:
        raise ValueError("density band expects a sample without responses")
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    if h_band is None:
        h_band = band_bandwidth(sample)

    estimate = _kernels.kde_deriv_values(sample.xs, grid.points, h_band)

    b_total = boot_cfg.replications
    slopes = np.empty((b_total, len(grid)))
    for b in range(b_total):
        rng = substream(boot_cfg.seed, STREAM_BAND_BOOT, b)
        star = smoothed_density_resample(sample, h_band, rng)
        slopes[b] = _kernels.kde_deriv_values(star.xs, grid.points, h_band)

    scale = float(np.max(np.abs(estimate))) if estimate.size else 0.0
    se = np.maximum(np.std(slopes, axis=0, ddof=1), 1e-12 + 1e-9 * scale)
    max_t = (np.abs(slopes - estimate[None, :]) / se[None, :]).max(axis=1)

    c = float(np.quantile(max_t, level, method="higher"))
    floor = _half_width_floor(estimate)
    half = np.maximum(c * se, floor)
    return DerivBand(grid=grid, estimate=estimate, lower=estimate - half,
                     upper=estimate + half, level=level, h_band=float(h_band),
                     critical_value=c, se=se, half_floor=floor)


def filter_grid(band: DerivBand, grid: Grid) -> Grid:
    """Grid points whose derivative band excludes zero (0 < lower or upper < 0).

    An empty result is legal and means no point's derivative is resolvably
    nonzero.
    """
    if band.grid is not grid and not np.array_equal(band.grid.points, grid.points):
        raise ValueError("band was not built on the given grid")
    keep = (band.lower > 0.0) | (band.upper < 0.0)
    return grid.subset(keep)
