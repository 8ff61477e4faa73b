"""Shape predicates on gridded curves.

A hypothesis is checked through adjacent-difference constraints: each
constraint pair (i, j) refers to indices in the parent grid that were
adjacent there, so a constraint set on a filtered grid is always a subset of
the full-grid constraints. Mode counting concatenates the per-pair difference
signs across any gaps; a gap never introduces a constraint of its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Grid
from .estimators import FitCurve

MONOTONE_INCREASING = "monotone_increasing"
MONOTONE_DECREASING = "monotone_decreasing"
MONOTONE_EITHER = "monotone_either"
AT_MOST_K_MODES = "at_most_k_modes"
QUASI_CONVEX = "quasi_convex"
QUASI_CONCAVE = "quasi_concave"

_KINDS = (
    MONOTONE_INCREASING,
    MONOTONE_DECREASING,
    MONOTONE_EITHER,
    AT_MOST_K_MODES,
    QUASI_CONVEX,
    QUASI_CONCAVE,
)


@dataclass(frozen=True)
class ShapeHypothesis:
    """Null shape class, evaluated on grid differences with a violation slack.

    tolerance is in response units: differences within +-tolerance are
    treated as ties (inert for mode counting, acceptable slack for
    monotonicity).
    """

    kind: str
    k: int = 1
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown hypothesis kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("mode bound k must be at least 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")

    def label(self) -> str:
        if self.kind == AT_MOST_K_MODES:
            return f"modes<={self.k}"
        return self.kind


def parse_hypothesis(spec: str, tolerance: float = 0.0) -> ShapeHypothesis:
    """Parse a CLI hypothesis spec.

    Accepted forms: monotone-inc, monotone-dec, monotone, modes=K,
    quasi-convex, quasi-concave.
    """
    spec = spec.strip().lower()
    simple = {
        "monotone-inc": MONOTONE_INCREASING,
        "monotone-dec": MONOTONE_DECREASING,
        "monotone": MONOTONE_EITHER,
        "quasi-convex": QUASI_CONVEX,
        "quasi-concave": QUASI_CONCAVE,
    }
    if spec in simple:
        return ShapeHypothesis(simple[spec], tolerance=tolerance)
    if spec.startswith("modes="):
        try:
            k = int(spec.split("=", 1)[1])
        except ValueError:
            raise ValueError(f"bad mode count in hypothesis spec {spec!r}") from None
        return ShapeHypothesis(AT_MOST_K_MODES, k=k, tolerance=tolerance)
    raise ValueError(f"unrecognized hypothesis spec {spec!r}")


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered (i, j) pairs of parent-grid indices with j = i + 1."""

    pairs: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if not np.all(pairs[:, 1] == pairs[:, 0] + 1):
                raise ValueError("constraint pairs must be adjacent parent indices (j = i + 1)")
            if not np.all(np.diff(pairs[:, 0]) > 0):
                raise ValueError("constraint pairs must be sorted and unique")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.pairs.shape[0] == 0


def full_adjacency(grid: Grid) -> ConstraintSet:
    """All parent-adjacent pairs whose endpoints are both in the grid.

    On an unfiltered grid this is every consecutive pair; on a filtered grid
    only originally-adjacent retained pairs survive, so the result is a
    subset of the parent's full adjacency.
    """
    origin = grid.origin_index
    if origin.size < 2:
        return ConstraintSet(np.empty((0, 2), dtype=np.int64))
    keep = np.diff(origin) == 1
    return ConstraintSet(np.column_stack((origin[:-1][keep], origin[1:][keep])))


def locate_pairs(grid: Grid, constraints: ConstraintSet) -> tuple[np.ndarray, np.ndarray]:
    """Local positions in `grid` of each constraint pair's parent indices."""
    if constraints.is_empty:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    return (grid.local_position(constraints.pairs[:, 0]),
            grid.local_position(constraints.pairs[:, 1]))


def _signs(diffs: np.ndarray, tolerance: float) -> np.ndarray:
    s = np.zeros(diffs.shape, dtype=np.int8)
    s[diffs > tolerance] = 1
    s[diffs < -tolerance] = -1
    return s[s != 0]


def count_modes(diffs: np.ndarray, tolerance: float = 0.0) -> int:
    """Number of local maxima implied by a sequence of adjacent differences.

    Ties (|diff| <= tolerance) are inert. Endpoints count: a sequence that
    starts by falling has a maximum at its left end, one that ends rising has
    a maximum at its right end. An all-tied sequence has zero modes, so a
    constant curve satisfies every mode bound.
    """
    s = _signs(np.asarray(diffs, dtype=np.float64), tolerance)
    if s.size == 0:
        return 0
    drops = int(np.count_nonzero((s[:-1] > 0) & (s[1:] < 0)))
    return drops + int(s[0] < 0) + int(s[-1] > 0)


def satisfies_diffs(diffs: np.ndarray, hyp: ShapeHypothesis) -> bool:
    """Hypothesis check given the constraint-pair differences, in order."""
    if diffs.size == 0:
        return True  # vacuous satisfaction on an empty constraint set
    tol = hyp.tolerance
    if hyp.kind == MONOTONE_INCREASING:
        return bool(np.all(diffs >= -tol))
    if hyp.kind == MONOTONE_DECREASING:
        return bool(np.all(diffs <= tol))
    if hyp.kind == MONOTONE_EITHER:
        return bool(np.all(diffs >= -tol)) or bool(np.all(diffs <= tol))
    if hyp.kind == AT_MOST_K_MODES:
        return count_modes(diffs, tol) <= hyp.k
    if hyp.kind == QUASI_CONCAVE:
        return count_modes(diffs, tol) <= 1
    if hyp.kind == QUASI_CONVEX:
        # valley-shaped: at most one local minimum, i.e. unimodal after negation
        return count_modes(-diffs, tol) <= 1
    raise ValueError(f"unknown hypothesis kind {hyp.kind!r}")


def satisfies(curve: FitCurve, hyp: ShapeHypothesis, constraints: ConstraintSet) -> bool:
    """Does the fitted curve lie in the null class over the given constraints?"""
    iloc, jloc = locate_pairs(curve.grid, constraints)
    diffs = curve.values[jloc] - curve.values[iloc]
    return satisfies_diffs(diffs, hyp)


def monotone_direction(diffs: np.ndarray, tolerance: float = 0.0) -> str | None:
    """Which monotone direction the differences satisfy, if any."""
    inc = bool(np.all(diffs >= -tolerance))
    dec = bool(np.all(diffs <= tolerance))
    if inc and dec:
        return "both"
    if inc:
        return "increasing"
    if dec:
        return "decreasing"
    return None
