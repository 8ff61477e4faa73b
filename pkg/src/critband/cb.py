"""Critical-bandwidth statistic: the smallest bandwidth whose fit satisfies
the shape hypothesis.

The search bisects on log(h), which is valid under the bandwidth-nesting
property (satisfied at h implies satisfied at every larger h). Nesting can
fail with tiny probability for kernel smoothers, so the returned bandwidth is
re-verified and, should that check ever fail, the search falls back to a
coarse downward linear scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .data import Grid, Sample
from .errors import DegenerateFit, NoSatisfyingBandwidth
from .estimators import GridSmoother
from .shape import ConstraintSet, ShapeHypothesis, locate_pairs, satisfies_diffs

# name -> local polynomial degree
_NAMED_FITTERS = {"local_constant": 0, "local_linear": 1, "local_quadratic": 2}

_MAX_BISECT_ITER = 200
_SCAN_POINTS = 256


@dataclass(frozen=True)
class CBConfig:
    """Bandwidth search space and stopping rule.

    bisect_tol is relative: the search stops once the bracket ratio drops
    below 1 + bisect_tol. max_expand bounds the number of doublings of h_max
    tried before giving up on bracketing.
    """

    h_min: float
    h_max: float
    bisect_tol: float = 1e-3
    max_expand: int = 6

    def __post_init__(self):
        if not (0.0 < self.h_min < self.h_max):
            raise ValueError("need 0 < h_min < h_max")
        if not (0.0 < self.bisect_tol < 0.1):
            raise ValueError("bisect_tol must lie in (0, 0.1)")
        if self.max_expand < 0:
            raise ValueError("max_expand must be nonnegative")

    @classmethod
    def from_sample(cls, sample: Sample, **overrides) -> "CBConfig":
        """Defaults bracketing any practically relevant smoother:
        h_min is half the median positive spacing, h_max twice the range."""
        spacings = np.diff(sample.xs)
        positive = spacings[spacings > 0]
        if positive.size == 0:
            raise ValueError("all x values are equal; no bandwidth scale exists")
        defaults = {
            "h_min": 0.5 * float(np.median(positive)),
            "h_max": 2.0 * sample.x_range(),
        }
        defaults.update(overrides)
        return cls(**defaults)

    @property
    def h_max_expanded(self) -> float:
        return self.h_max * (2.0 ** self.max_expand)


def make_grid_values_fn(sample: Sample, grid: Grid, fitter) -> Callable[[float], np.ndarray]:
    """Resolve a fitter spec into h -> fitted values on the grid.

    Accepts a named estimator ('local_constant', 'local_linear',
    'local_quadratic', 'kde') or a callable (sample, h, grid) -> values.
    """
    if callable(fitter):
        return lambda h: np.asarray(fitter(sample, h, grid), dtype=np.float64)
    if fitter == "kde":
        xs = sample.xs
        pts = grid.points
        return lambda h: _kernels.kde_values(xs, pts, h)
    try:
        degree = _NAMED_FITTERS[fitter]
    except KeyError:
        raise ValueError(f"unknown fitter {fitter!r}") from None
    sample.require_response()
    sm = GridSmoother(sample.xs, grid.points, degree=degree)
    ys = sample.ys
    return lambda h: sm.values(ys, h)


def make_predicate(grid: Grid, hyp: ShapeHypothesis, constraints: ConstraintSet,
                   values_fn: Callable[[float], np.ndarray]):
    """Monotone boolean predicate sat(h) plus a diffs accessor for diagnostics.

    A degenerate fit (bandwidth below the resolvable scale) counts as not
    satisfying: it cannot certify the hypothesis and sits at the small-h end
    where the predicate is false anyway.
    """
    iloc, jloc = [np.asarray(a) for a in locate_pairs(grid, constraints)]

    def diffs_at(h: float) -> np.ndarray:
        v = values_fn(h)
        return v[jloc] - v[iloc]

    def predicate(h: float) -> bool:
        try:
            return satisfies_diffs(diffs_at(h), hyp)
        except DegenerateFit:
            return False

    return predicate, diffs_at


def search_min_satisfying(predicate: Callable[[float], bool], cfg: CBConfig,
                          values_fn: Callable[[float], np.ndarray] | None = None) -> float:
    """Smallest h (to bisect_tol) at which a nesting-monotone predicate holds.

    Returns h_min immediately when it already satisfies. Raises
    NoSatisfyingBandwidth when even the expanded h_max fails, attaching the
    final curve when a values accessor is provided.
    """
    if predicate(cfg.h_min):
        return cfg.h_min
    lo = cfg.h_min
    hi = cfg.h_max
    expansions = 0
    while not predicate(hi):
        if expansions >= cfg.max_expand:
            final = None
            if values_fn is not None:
                try:
                    final = values_fn(hi)
                except DegenerateFit:
                    final = None
            raise NoSatisfyingBandwidth(hi, final)
        lo = hi
        hi = hi * 2.0
        expansions += 1
    for _ in range(_MAX_BISECT_ITER):
        if hi <= lo * (1.0 + cfg.bisect_tol):
            break
        mid = math.exp(0.5 * (math.log(lo) + math.log(hi)))
        if mid <= lo or mid >= hi:  # bracket exhausted at float resolution
            break
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    if predicate(hi):
        return hi
    # Nesting anomaly: the bracket invariant broke. Certify by scanning down
    # from the expanded top on a coarse log ladder.
    return _downward_scan(predicate, cfg, lo)


def _downward_scan(predicate: Callable[[float], bool], cfg: CBConfig, floor: float) -> float:
    top = cfg.h_max_expanded
    ladder = np.exp(np.linspace(math.log(top), math.log(max(cfg.h_min, min(floor, top) * 0.5)),
                                _SCAN_POINTS))
    last_ok = None
    for h in ladder:
        if predicate(float(h)):
            last_ok = float(h)
        else:
            break
    if last_ok is None:
        raise NoSatisfyingBandwidth(top)
    return last_ok


def critical_bandwidth(sample: Sample, grid: Grid, hyp: ShapeHypothesis,
                       constraints: ConstraintSet, cfg: CBConfig | None = None,
                       fitter="local_linear") -> float:
    """The critical-bandwidth statistic for the given hypothesis and grid."""
    if cfg is None:
        cfg = CBConfig.from_sample(sample)
    values_fn = make_grid_values_fn(sample, grid, fitter)
    predicate, _ = make_predicate(grid, hyp, constraints, values_fn)
    return search_min_satisfying(predicate, cfg, values_fn)


def check_nesting(sample: Sample, grid: Grid, hyp: ShapeHypothesis,
                  constraints: ConstraintSet, h_ladder: np.ndarray,
                  fitter="local_linear") -> int:
    """Count satisfied-then-unsatisfied flips along an increasing bandwidth ladder.

    A diagnostic for the nesting property; any nonzero count marks ladder
    steps where satisfaction was lost as h grew.
    """
    h_ladder = np.asarray(h_ladder, dtype=np.float64)
    if h_ladder.size < 2 or not np.all(np.diff(h_ladder) > 0):
        raise ValueError("h_ladder must be increasing with at least two entries")
    values_fn = make_grid_values_fn(sample, grid, fitter)
    predicate, _ = make_predicate(grid, hyp, constraints, values_fn)
    sat = np.array([predicate(float(h)) for h in h_ladder], dtype=bool)
    return int(np.count_nonzero(sat[:-1] & ~sat[1:]))
