"""Bootstrap calibration of critical-bandwidth statistics.

Regression tests use the residual bootstrap: residuals from the fit at the
observed statistic are resampled with replacement and added back to that fit,
and the statistic is recomputed on the same grid and constraints. Density
tests use the smoothed bootstrap (draws from the KDE at the statistic, with
variance rescaling).

Replication b always draws from the substream keyed by (seed, b), and results
are aggregated in replication order, so reports are bit-identical for any
worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from . import _kernels
from ._parallel import index_ranges, parallel_map
from .cb import CBConfig, make_predicate, search_min_satisfying
from .data import Grid, Sample
from .errors import DegenerateFit, NoSatisfyingBandwidth
from .estimators import MASS_FLOOR, GridSmoother
from .rng import STREAM_CB_BOOT, substream
from .shape import (MONOTONE_EITHER, ConstraintSet, ShapeHypothesis, locate_pairs,
                    monotone_direction, satisfies_diffs)

RESIDUAL_REGRESSION = "residual_regression"
SMOOTHED_DENSITY = "smoothed_density"


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int
    seed: int
    mode: str = RESIDUAL_REGRESSION

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("at least one bootstrap replication is required")
        if self.mode not in (RESIDUAL_REGRESSION, SMOOTHED_DENSITY):
            raise ValueError(f"unknown bootstrap mode {self.mode!r}")


@dataclass(frozen=True)
class TestReport:
    """Outcome of one CB-type test."""

    statistic: float
    p_value: float
    replications_used: int
    boot_statistics: np.ndarray
    grid_used: Grid
    seed: int
    direction: str | None = None
    n_bracket_failures: int = 0

    def rejects(self, alpha: float) -> bool:
        return self.p_value <= alpha


@dataclass(frozen=True)
class RefilterSpec:
    """Re-applies the flatness filter inside each replication (sensitivity mode).

    The replication's derivative estimate is slope_matrix @ y*, and the band
    half-width (critical value times se, floored) is reused from the original
    band rather than re-calibrated, which keeps the cost linear.
    """

    slope_matrix: np.ndarray
    se: np.ndarray
    critical_value: float
    half_floor: float
    parent_grid: Grid


def resample_residuals(residuals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. draws with replacement, length preserved."""
    if residuals.size == 0:
        raise ValueError("cannot resample an empty residual vector")
    idx = rng.integers(0, residuals.size, residuals.size)
    return residuals[idx]


def identity_resampler(residuals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Returns the residuals unchanged; a hook for exactness tests."""
    return residuals


def smoothed_density_resample(sample: Sample, h_stat: float, rng: np.random.Generator) -> Sample:
    """Draw from the Gaussian KDE at h_stat, rescaled to the sample variance.

    Each draw is x_J + h * Z, shrunk about the sample mean by
    (1 + h^2/s^2)^(-1/2) so that pooled draws keep variance s^2. h_stat = 0
    degenerates to the plain nonparametric bootstrap.
    """
    xs = sample.xs
    n = xs.size
    idx = rng.integers(0, n, n)
    if h_stat <= 0.0:
        return Sample(xs[idx])
    mean = float(np.mean(xs))
    s2 = float(np.var(xs))
    if s2 == 0.0:
        return Sample(np.full(n, mean))
    z = rng.standard_normal(n)
    scale = 1.0 / np.sqrt(1.0 + h_stat * h_stat / s2)
    return Sample(mean + (xs[idx] + h_stat * z - mean) * scale)


def add_one_p_value(boot_statistics: np.ndarray, statistic: float) -> float:
    """(1 + #{h* >= statistic}) / (1 + B); never exactly zero."""
    b = boot_statistics.size
    return float((1 + int(np.count_nonzero(boot_statistics >= statistic))) / (1 + b))


def _refiltered_pair_positions(keep: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # positions on the full parent grid; pairs survive only where both ends kept
    both = keep[:-1] & keep[1:]
    iloc = np.nonzero(both)[0]
    return iloc, iloc + 1


def _regression_chunk(payload, rep_range: tuple[int, int]) -> tuple[np.ndarray, int]:
    """Recompute the statistic for a contiguous range of replications."""
    (xs, ys, fitted, residuals, grid, hyp, constraints, cfg, seed, degree,
     resampler, refilter) = payload
    targets = refilter.parent_grid if refilter is not None else grid
    design = GridSmoother(xs, targets.points, degree=degree)
    if refilter is None:
        iloc, jloc = locate_pairs(grid, constraints)
    start, stop = rep_range
    out = np.empty(stop - start)
    failures = 0
    for b in range(start, stop):
        rng = substream(seed, STREAM_CB_BOOT, b)
        e_star = resampler(residuals, rng)
        # the identity hook must reproduce the original data bit for bit
        y_star = ys if e_star is residuals else fitted + e_star
        if refilter is not None:
            slopes = refilter.slope_matrix @ y_star
            half = np.maximum(refilter.critical_value * refilter.se, refilter.half_floor)
            keep = (slopes - half > 0.0) | (slopes + half < 0.0)
            iloc, jloc = _refiltered_pair_positions(keep)

        def predicate(h: float) -> bool:
            try:
                v = design.values(y_star, h)
            except DegenerateFit:
                return False
            return satisfies_diffs(v[jloc] - v[iloc], hyp)

        try:
            out[b - start] = search_min_satisfying(predicate, cfg)
        except NoSatisfyingBandwidth:
            out[b - start] = cfg.h_max_expanded  # conservative: counts against rejection
            failures += 1
    return out, failures


def _density_chunk(payload, rep_range: tuple[int, int]) -> tuple[np.ndarray, int]:
    xs, h_stat, grid, hyp, constraints, cfg, seed = payload
    iloc, jloc = locate_pairs(grid, constraints)
    pts = grid.points
    sample = Sample(xs)
    start, stop = rep_range
    out = np.empty(stop - start)
    failures = 0
    for b in range(start, stop):
        rng = substream(seed, STREAM_CB_BOOT, b)
        star = smoothed_density_resample(sample, h_stat, rng).xs

        def predicate(h: float) -> bool:
            v = _kernels.kde_values(star, pts, h)
            return satisfies_diffs(v[jloc] - v[iloc], hyp)

        try:
            out[b - start] = search_min_satisfying(predicate, cfg)
        except NoSatisfyingBandwidth:
            out[b - start] = cfg.h_max_expanded
            failures += 1
    return out, failures


def _run_chunks(chunk_fn, payload, replications: int, workers: int) -> tuple[np.ndarray, int]:
    ranges = index_ranges(replications, max(1, workers) * 4)
    results = parallel_map(partial(chunk_fn, payload), ranges, workers=workers)
    boot = np.concatenate([r[0] for r in results]) if results else np.empty(0)
    failures = sum(r[1] for r in results)
    return boot, failures


def cb_test(sample: Sample, grid: Grid, hyp: ShapeHypothesis, constraints: ConstraintSet,
            cb_cfg: CBConfig | None = None, boot_cfg: BootstrapConfig | None = None, *,
            fitter: str = "local_linear", workers: int = 1,
            resampler=None, refilter: RefilterSpec | None = None) -> TestReport:
    """Residual-bootstrap CB test for a regression sample.

    The statistic is the critical bandwidth on (grid, constraints); each
    replication resamples residuals from the fit at the statistic and
    recomputes the statistic on the same grid and constraints (unless a
    RefilterSpec asks for per-replication refiltering). A replication whose
    search fails to bracket is recorded at the expanded h_max, which can only
    increase the p-value.
    """
    sample.require_response()
    if cb_cfg is None:
        cb_cfg = CBConfig.from_sample(sample)
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if boot_cfg.mode != RESIDUAL_REGRESSION:
        raise ValueError("cb_test runs in residual_regression mode")
    try:
        degree = {"local_constant": 0, "local_linear": 1, "local_quadratic": 2}[fitter]
    except KeyError:
        raise ValueError(f"cb_test requires a named local-polynomial fitter, got {fitter!r}") from None
    if resampler is None:
        resampler = resample_residuals

    design = GridSmoother(sample.xs, grid.points, degree=degree)
    ys = sample.ys
    iloc, jloc = locate_pairs(grid, constraints)

    def predicate(h: float) -> bool:
        try:
            v = design.values(ys, h)
        except DegenerateFit:
            return False
        return satisfies_diffs(v[jloc] - v[iloc], hyp)

    h_stat = search_min_satisfying(predicate, cb_cfg, lambda h: design.values(ys, h))

    fitted, mass = _kernels.locpoly_values(sample.xs, ys, sample.xs, h_stat, degree)
    if mass < MASS_FLOOR:
        raise DegenerateFit(h_stat, mass)
    residuals = ys - fitted

    direction = None
    if hyp.kind == MONOTONE_EITHER and len(constraints):
        v = design.values(ys, h_stat)
        direction = monotone_direction(v[jloc] - v[iloc], hyp.tolerance)

    payload = (sample.xs, ys, fitted, residuals, grid, hyp, constraints, cb_cfg,
               boot_cfg.seed, degree, resampler, refilter)
    boot, failures = _run_chunks(_regression_chunk, payload, boot_cfg.replications, workers)

    return TestReport(
        statistic=float(h_stat),
        p_value=add_one_p_value(boot, h_stat),
        replications_used=boot_cfg.replications,
        boot_statistics=boot,
        grid_used=grid,
        seed=boot_cfg.seed,
        direction=direction,
        n_bracket_failures=failures,
    )


def density_cb_test(sample: Sample, grid: Grid, hyp: ShapeHypothesis,
                    constraints: ConstraintSet, cb_cfg: CBConfig | None = None,
                    boot_cfg: BootstrapConfig | None = None, *,
                    workers: int = 1) -> TestReport:
    """Smoothed-bootstrap CB test for a density sample (Silverman-style)."""
    if sample.has_response:
        raise ValueError("density test expects a sample without responses")
    if cb_cfg is None:
        cb_cfg = CBConfig.from_sample(sample)
    if boot_cfg is None:
        raise ValueError("boot_cfg is required")
    if boot_cfg.mode != SMOOTHED_DENSITY:
        boot_cfg = replace(boot_cfg, mode=SMOOTHED_DENSITY)

    xs = sample.xs
    pts = grid.points
    iloc, jloc = locate_pairs(grid, constraints)

    def predicate(h: float) -> bool:
        v = _kernels.kde_values(xs, pts, h)
        return satisfies_diffs(v[jloc] - v[iloc], hyp)

    h_stat = search_min_satisfying(predicate, cb_cfg,
                                   lambda h: _kernels.kde_values(xs, pts, h))

    payload = (xs, h_stat, grid, hyp, constraints, cb_cfg, boot_cfg.seed)
    boot, failures = _run_chunks(_density_chunk, payload, boot_cfg.replications, workers)

    return TestReport(
        statistic=float(h_stat),
        p_value=add_one_p_value(boot, h_stat),
        replications_used=boot_cfg.replications,
        boot_statistics=boot,
        grid_used=grid,
        seed=boot_cfg.seed,
        direction=None,
        n_bracket_failures=failures,
    )
