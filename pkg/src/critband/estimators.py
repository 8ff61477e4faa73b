"""Nonparametric point estimators on a grid.

Local-polynomial regression (levels and first derivative) and Gaussian kernel
density estimation, all at a caller-chosen bandwidth. The heavy lifting is in
the jitted kernels of :mod:`critband._kernels`; this module owns validation,
the degenerate-bandwidth error contract, and the equivalent-kernel cache used
by bandwidth searches and bootstrap loops.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import Grid, Sample
from .errors import DegenerateFit

MASS_FLOOR = _kernels.MASS_FLOOR


@dataclass(frozen=True)
class FitCurve:
    """Fitted values on a grid at one bandwidth.

    fitted_at_data holds the same estimator evaluated at the observed xs,
    which is what residual construction needs.
    """

    grid: Grid
    values: np.ndarray
    h: float
    fitted_at_data: np.ndarray | None = None


def _check_bandwidth(h: float) -> float:
    h = float(h)
    if not np.isfinite(h) or h <= 0.0:
        raise ValueError(f"bandwidth must be positive and finite, got {h!r}")
    return h


def silverman_bandwidth(xs: np.ndarray) -> float:
    """Silverman's rule-of-thumb scale for a univariate sample."""
    xs = np.asarray(xs, dtype=np.float64)
    sd = float(np.std(xs))
    q75, q25 = np.percentile(xs, [75.0, 25.0])
    iqr = float(q75 - q25)
    a = min(sd, iqr / 1.34) if iqr > 0 else sd
    if a <= 0.0:
        raise ValueError("sample has zero spread; no plug-in bandwidth exists")
    return 0.9 * a * xs.size ** (-0.2)


def fit_local_poly(sample: Sample, h: float, grid: Grid, degree: int = 1) -> FitCurve:
    """Local-polynomial regression with Gaussian weights w_i = K((x_i - x)/h).

    The value at each grid point is the intercept of the local weighted
    least-squares fit of the given degree (0, 1, or 2). Raises DegenerateFit
    when the weight mass at some evaluation point falls below the floor even
    after the ridge guard.
    """
    sample.require_response()
    h = _check_bandwidth(h)
    if degree not in (0, 1, 2):
        raise ValueError("degree must be 0, 1, or 2")
    values, mass = _kernels.locpoly_values(sample.xs, sample.ys, grid.points, h, degree)
    if grid.points.size and mass < MASS_FLOOR:
        raise DegenerateFit(h, mass)
    at_data, mass_d = _kernels.locpoly_values(sample.xs, sample.ys, sample.xs, h, degree)
    if mass_d < MASS_FLOOR:
        raise DegenerateFit(h, mass_d)
    return FitCurve(grid=grid, values=values, h=h, fitted_at_data=at_data)


def _se_floor(ys: np.ndarray) -> float:
    # keeps studentized statistics finite on (near-)noiseless data
    return 1e-12 + 1e-9 * float(np.std(ys))


def fit_derivative(sample: Sample, h: float, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """First-derivative estimate and pointwise standard errors on a grid.

    Local-quadratic fit per grid point; the derivative is the linear
    coefficient. The se is the WLS sandwich for that coefficient with the
    local error variance taken from a pilot fit at the same bandwidth.
    """
    sample.require_response()
    h = _check_bandwidth(h)
    pilot, mass_p = _kernels.locpoly_values(sample.xs, sample.ys, sample.xs, h, 2)
    if mass_p < MASS_FLOOR:
        raise DegenerateFit(h, mass_p)
    e2 = np.square(sample.ys - pilot)
    slopes, se, mass = _kernels.deriv_values_se(sample.xs, sample.ys, e2, grid.points, h, True)
    if grid.points.size and mass < MASS_FLOOR:
        raise DegenerateFit(h, mass)
    se = np.maximum(se, _se_floor(sample.ys))
    return slopes, se


def fit_kde(sample: Sample, h: float, grid: Grid) -> FitCurve:
    """Gaussian kernel density estimate on a grid."""
    h = _check_bandwidth(h)
    values = _kernels.kde_values(sample.xs, grid.points, h)
    at_data = _kernels.kde_values(sample.xs, sample.xs, h)
    return FitCurve(grid=grid, values=values, h=h, fitted_at_data=at_data)


def kde_derivative(sample: Sample, h: float, grid: Grid) -> np.ndarray:
    """First derivative of the Gaussian KDE on a grid."""
    h = _check_bandwidth(h)
    return _kernels.kde_deriv_values(sample.xs, grid.points, h)


class GridSmoother:
    """Repeated linear-smoother fits on a fixed (xs, targets) pair.

    Local-polynomial estimates are linear in the responses, so for fixed
    design and bandwidth the fit is values = L(h) @ ys. Bandwidth searches
    and bootstrap replications revisit the same handful of h values many
    times; caching L(h) turns those refits into matrix-vector products.
    Every fit goes through the same build-then-apply path, so results do not
    depend on cache state or on how work is split across processes.
    """

    def __init__(self, xs: np.ndarray, targets: np.ndarray, degree: int = 1,
                 deriv: bool = False, cache_bytes: int = 1 << 28):
        if deriv:
            degree = 2
        self.xs = np.ascontiguousarray(xs, dtype=np.float64)
        self.targets = np.ascontiguousarray(targets, dtype=np.float64)
        self.degree = int(degree)
        self.deriv = bool(deriv)
        entry = 8 * max(1, self.xs.size * self.targets.size)
        self._maxsize = max(4, int(cache_bytes // entry))
        self._cache: OrderedDict[float, tuple[np.ndarray, float]] = OrderedDict()

    def matrix(self, h: float) -> np.ndarray:
        """Equivalent-kernel matrix at h; raises DegenerateFit below the mass floor."""
        h = float(h)
        hit = self._cache.get(h)
        if hit is None:
            L, mass = _kernels.smoother_matrix(self.xs, self.targets, h, self.degree, self.deriv)
            self._cache[h] = (L, mass)
            if len(self._cache) > self._maxsize:
                self._cache.popitem(last=False)
        else:
            self._cache.move_to_end(h)
            L, mass = hit
        if self.targets.size and mass < MASS_FLOOR:
            raise DegenerateFit(h, mass)
        return L

    def values(self, ys: np.ndarray, h: float) -> np.ndarray:
        """Fitted values (or slopes, if deriv) at the targets."""
        if self.targets.size == 0:
            return np.empty(0)
        return self.matrix(h) @ ys
