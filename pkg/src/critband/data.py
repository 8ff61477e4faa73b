"""Core data containers: observed samples and evaluation grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Sample:
    """Paired (x, y) observations for regression, or x alone for density work.

    xs are stored sorted ascending with ys permuted consistently; duplicate
    x values are allowed.
    """

    xs: np.ndarray
    ys: np.ndarray | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        if xs.ndim != 1 or xs.size < 3:
            raise ValueError("xs must be a 1-d vector with at least 3 observations")
        if not np.all(np.isfinite(xs)):
            raise ValueError("xs contains non-finite values")
        ys = self.ys
        if ys is not None:
            ys = np.asarray(ys, dtype=np.float64)
            if ys.shape != xs.shape:
                raise ValueError("xs and ys must have equal length")
            if not np.all(np.isfinite(ys)):
                raise ValueError("ys contains non-finite values")
        order = np.argsort(xs, kind="stable")
        object.__setattr__(self, "xs", xs[order])
        if ys is not None:
            object.__setattr__(self, "ys", ys[order])

    @property
    def n(self) -> int:
        return self.xs.size

    @property
    def has_response(self) -> bool:
        return self.ys is not None

    def require_response(self):
        if self.ys is None:
            raise ValueError("operation requires a regression sample with responses")

    def x_range(self) -> float:
        return float(self.xs[-1] - self.xs[0])


@dataclass(frozen=True)
class Grid:
    """Strictly increasing evaluation points.

    origin_index records, for a filtered grid, each point's index in the
    parent grid; for an unfiltered grid it is simply 0..len-1. Adjacency in
    the parent survives filtering only where both endpoints were retained.
    """

    points: np.ndarray
    origin_index: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1:
            raise ValueError("grid points must be a 1-d vector")
        if pts.size > 1 and not np.all(np.diff(pts) > 0):
            raise ValueError("grid points must be strictly increasing")
        origin = self.origin_index
        if origin is None:
            origin = np.arange(pts.size, dtype=np.int64)
        else:
            origin = np.asarray(origin, dtype=np.int64)
            if origin.shape != pts.shape:
                raise ValueError("origin_index must match points in length")
            if origin.size > 1 and not np.all(np.diff(origin) > 0):
                raise ValueError("origin_index must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "origin_index", origin)

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def is_empty(self) -> bool:
        return self.points.size == 0

    def subset(self, mask: np.ndarray) -> "Grid":
        """Filtered grid keeping points where mask is true, origin preserved."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.points.shape:
            raise ValueError("mask must match grid length")
        return Grid(self.points[mask], self.origin_index[mask])

    def local_position(self, parent_index: np.ndarray) -> np.ndarray:
        """Positions within this grid of the given parent-grid indices."""
        pos = np.searchsorted(self.origin_index, parent_index)
        ok = (pos < len(self)) & (self.origin_index[np.minimum(pos, len(self) - 1)] == parent_index)
        if not np.all(ok):
            raise KeyError("parent index not present in this grid")
        return pos

    def segments(self) -> list[tuple[int, int]]:
        """Contiguous runs of retained parent indices, as inclusive (start, stop)."""
        if self.is_empty:
            return []
        origin = self.origin_index
        breaks = np.nonzero(np.diff(origin) > 1)[0]
        starts = np.concatenate(([0], breaks + 1))
        stops = np.concatenate((breaks, [origin.size - 1]))
        return [(int(origin[a]), int(origin[b])) for a, b in zip(starts, stops)]


def default_grid(sample: Sample, size: int = 100) -> Grid:
    """Equally spaced grid spanning the observed x range."""
    if size < 1:
        raise ValueError("grid size must be positive")
    lo, hi = float(sample.xs[0]), float(sample.xs[-1])
    if hi <= lo:
        raise ValueError("sample x range is degenerate (all x equal)")
    return Grid(np.linspace(lo, hi, size))
