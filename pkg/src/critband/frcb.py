"""Flatness-robust critical bandwidth: band, filter, then a standard CB test
on the retained sub-grid, reported side by side with the plain CB test.

The filter step builds a simultaneous derivative band at miscoverage
alpha_flat(n) and keeps only grid points where the band excludes zero. Flat
stretches (derivative indistinguishable from zero) are consistent with every
null class handled here, so excluding them changes neither the null nor the
alternative while removing the source of the over-smoothing bias that breaks
plain CB tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .band import (DerivBand, alpha_flat, band_bandwidth, density_derivative_band,
                   filter_grid, simultaneous_band)
from .bootstrap import (RESIDUAL_REGRESSION, SMOOTHED_DENSITY, BootstrapConfig,
                        RefilterSpec, TestReport, cb_test, density_cb_test)
from .cb import CBConfig
from .data import Grid, Sample
from .estimators import GridSmoother
from .shape import AT_MOST_K_MODES, ConstraintSet, ShapeHypothesis, full_adjacency


@dataclass(frozen=True)
class BandConfig:
    """Overrides for the flatness-filter band; None means the built-in rule."""

    h_band: float | None = None
    replications: int | None = None
    level: float | None = None


@dataclass(frozen=True)
class FRCBReport:
    """Paired CB and FRCB outcomes with the band and filter diagnostics."""

    cb: TestReport | None
    frcb: TestReport
    band: DerivBand
    retained_fraction: float
    segments: list[tuple[int, int]]
    alpha: float
    alpha_flat: float
    hypothesis: ShapeHypothesis

    @property
    def rejected_frcb(self) -> bool:
        return self.frcb.p_value <= self.alpha

    @property
    def rejected_cb(self) -> bool | None:
        return None if self.cb is None else self.cb.p_value <= self.alpha


def _empty_grid_report(grid_nf: Grid, cb_cfg: CBConfig, seed: int) -> TestReport:
    # Nothing in the grid shows a nonzero derivative: the function is flat to
    # statistical resolution, which every null class here contains. Accept.
    return TestReport(
        statistic=cb_cfg.h_min,
        p_value=1.0,
        replications_used=0,
        boot_statistics=np.empty(0),
        grid_used=grid_nf,
        seed=seed,
        direction=None,
        n_bracket_failures=0,
    )


def frcb_test(sample: Sample, grid: Grid, hyp: ShapeHypothesis, alpha: float = 0.05,
              cb_cfg: CBConfig | None = None, boot_cfg: BootstrapConfig | None = None,
              band_cfg: BandConfig | None = None, *, fitter: str = "local_linear",
              workers: int = 1, run_cb: bool = True,
              refilter_per_replication: bool = False) -> FRCBReport:
    """Run the FRCB test (and, for comparison, the plain CB test) on a
    regression sample.

    The comparison CB run shares the bootstrap seed with the FRCB run so the
    statistic ordering is checked on matched randomness. Rejection is
    frcb.p_value <= alpha.
    """
    sample.require_response()
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if cb_cfg is None:
        cb_cfg = CBConfig.from_sample(sample)
    if band_cfg is None:
        band_cfg = BandConfig()

    a_flat = alpha_flat(sample.n)
    level = band_cfg.level if band_cfg.level is not None else 1.0 - a_flat
    band_reps = band_cfg.replications if band_cfg.replications is not None else boot_cfg.replications
    band_boot = BootstrapConfig(band_reps, boot_cfg.seed, mode=RESIDUAL_REGRESSION)
    band = simultaneous_band(sample, grid, h_band=band_cfg.h_band, level=level,
                             boot_cfg=band_boot)

    grid_nf = filter_grid(band, grid)
    retained = len(grid_nf) / len(grid) if len(grid) else 0.0

    refilter = None
    if refilter_per_replication and len(grid_nf):
        slope_design = GridSmoother(sample.xs, grid.points, deriv=True)
        refilter = RefilterSpec(
            slope_matrix=slope_design.matrix(band.h_band),
            se=band.se,
            critical_value=band.critical_value,
            half_floor=band.half_floor,
            parent_grid=grid,
        )

    if len(grid_nf) == 0:
        frcb_report = _empty_grid_report(grid_nf, cb_cfg, boot_cfg.seed)
    else:
        frcb_report = cb_test(sample, grid_nf, hyp, full_adjacency(grid_nf),
                              cb_cfg, boot_cfg, fitter=fitter, workers=workers,
                              refilter=refilter)

    cb_report = None
    if run_cb:
        cb_report = cb_test(sample, grid, hyp, full_adjacency(grid), cb_cfg,
                            boot_cfg, fitter=fitter, workers=workers)

    return FRCBReport(
        cb=cb_report,
        frcb=frcb_report,
        band=band,
        retained_fraction=float(retained),
        segments=grid_nf.segments(),
        alpha=float(alpha),
        alpha_flat=a_flat,
        hypothesis=hyp,
    )


def frcb_density_test(sample: Sample, grid: Grid, k_modes: int = 1, alpha: float = 0.05,
                      cb_cfg: CBConfig | None = None, boot_cfg: BootstrapConfig | None = None,
                      band_cfg: BandConfig | None = None, *, workers: int = 1,
                      run_cb: bool = True) -> FRCBReport:
    """FRCB applied to density multimodality: KDE fits, a KDE-derivative band
    calibrated by the smoothed bootstrap, and smoothed-bootstrap replications."""
    if sample.has_response:
        raise ValueError("density test expects a sample without responses")
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if cb_cfg is None:
        cb_cfg = CBConfig.from_sample(sample)
    if band_cfg is None:
        band_cfg = BandConfig()
    hyp = ShapeHypothesis(AT_MOST_K_MODES, k=k_modes)

    a_flat = alpha_flat(sample.n)
    level = band_cfg.level if band_cfg.level is not None else 1.0 - a_flat
    band_reps = band_cfg.replications if band_cfg.replications is not None else boot_cfg.replications
    band_boot = BootstrapConfig(band_reps, boot_cfg.seed, mode=SMOOTHED_DENSITY)
    band = density_derivative_band(sample, grid, h_band=band_cfg.h_band, level=level,
                                   boot_cfg=band_boot)

    grid_nf = filter_grid(band, grid)
    retained = len(grid_nf) / len(grid) if len(grid) else 0.0

    boot_cfg = BootstrapConfig(boot_cfg.replications, boot_cfg.seed, mode=SMOOTHED_DENSITY)
    if len(grid_nf) == 0:
        frcb_report = _empty_grid_report(grid_nf, cb_cfg, boot_cfg.seed)
    else:
        frcb_report = density_cb_test(sample, grid_nf, hyp, full_adjacency(grid_nf),
                                      cb_cfg, boot_cfg, workers=workers)

    cb_report = None
    if run_cb:
        cb_report = density_cb_test(sample, grid, hyp, full_adjacency(grid), cb_cfg,
                                    boot_cfg, workers=workers)

    return FRCBReport(
        cb=cb_report,
        frcb=frcb_report,
        band=band,
        retained_fraction=float(retained),
        segments=grid_nf.segments(),
        alpha=float(alpha),
        alpha_flat=a_flat,
        hypothesis=hyp,
    )


def frcb_statistics(sample: Sample, grid: Grid, hyp: ShapeHypothesis,
                    cb_cfg: CBConfig | None = None, band_cfg: BandConfig | None = None,
                    band_replications: int = 200, seed: int = 0, *,
                    fitter: str = "local_linear") -> tuple[float, float, DerivBand, Grid]:
    """Just the pair (h_cb, h_frcb) plus the band and filtered grid.

    Skips the p-value bootstraps; used for statistic-level properties and
    large sweeps where calibration is not needed.
    """
    from .cb import critical_bandwidth  # local import avoids a cycle at module load

    sample.require_response()
    if cb_cfg is None:
        cb_cfg = CBConfig.from_sample(sample)
    if band_cfg is None:
        band_cfg = BandConfig()
    a_flat = alpha_flat(sample.n)
    level = band_cfg.level if band_cfg.level is not None else 1.0 - a_flat
    reps = band_cfg.replications if band_cfg.replications is not None else band_replications
    band = simultaneous_band(sample, grid, h_band=band_cfg.h_band, level=level,
                             boot_cfg=BootstrapConfig(reps, seed))
    grid_nf = filter_grid(band, grid)
    h_cb = critical_bandwidth(sample, grid, hyp, full_adjacency(grid), cb_cfg, fitter)
    if len(grid_nf) == 0:
        h_frcb = cb_cfg.h_min
    else:
        h_frcb = critical_bandwidth(sample, grid_nf, hyp, full_adjacency(grid_nf), cb_cfg, fitter)
    return h_cb, h_frcb, band, grid_nf
