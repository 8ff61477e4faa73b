"""Monte Carlo harness: benchmark regression functions, data generation, and
rejection-rate tables for the CB and FRCB monotonicity tests.

The benchmark functions on [0, 1]:

    m1(x)    = 0                                  (flat everywhere; null true)
    m3(x)    = x + 0.415 exp(-50 (x - 0.5)^2)     (bump; null false, no flat region)
    m4(x)    = 10 (x - 0.5)^3 - exp(-100 (x - 0.25)^2)   for x < 0.5
               0.1 (x - 0.5)  - exp(-100 (x - 0.25)^2)   otherwise
                                                  (dip; null false, small derivative
                                                   over the second half)
    flat1(x) = 4.5 x (1 - x)  for x < 0.5;  1.125 otherwise
                                                  (rises then exactly flat; null true)

Regressors are uniform on (0, 1) and errors Gaussian; dataset draws and the
per-simulation test seeds are substreams of the design seed, so tables are
bit-reproducible for any worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .bootstrap import BootstrapConfig
from .data import Sample, default_grid
from .errors import UnknownFunction
from .frcb import frcb_test
from .rng import STREAM_DATA, STREAM_TEST_SEED, derive_seed, substream
from .shape import MONOTONE_EITHER, ShapeHypothesis


def m1(x):
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def m3(x):
    x = np.asarray(x, dtype=np.float64)
    return x + 0.415 * np.exp(-50.0 * (x - 0.5) ** 2)


def m4(x):
    x = np.asarray(x, dtype=np.float64)
    dip = np.exp(-100.0 * (x - 0.25) ** 2)
    return np.where(x < 0.5, 10.0 * (x - 0.5) ** 3 - dip, 0.1 * (x - 0.5) - dip)


def flat1(x):
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 0.5, 0.5 * x * (1.0 - x) * 9.0, 0.5 ** 3 * 9.0)


SIM_FUNCTIONS = {"m1": m1, "m3": m3, "m4": m4, "flat1": flat1}

#: functions for which monotonicity (the null) is true
NULL_TRUE = ("m1", "flat1")


def eval_sim_function(name: str, x):
    """Evaluate a benchmark function by name; raises UnknownFunction."""
    try:
        f = SIM_FUNCTIONS[name]
    except KeyError:
        raise UnknownFunction(f"no simulation function named {name!r}") from None
    return f(x)


@dataclass(frozen=True)
class SimDesign:
    """One Monte Carlo cell: a function, sample size, and test settings."""

    function: str
    n: int
    noise_sd: float = 0.25
    n_sims: int = 200
    n_boot: int = 200
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.function not in SIM_FUNCTIONS:
            raise UnknownFunction(f"no simulation function named {self.function!r}")
        if self.n < 3 or self.n_sims < 1 or self.n_boot < 1:
            raise ValueError("n, n_sims, and n_boot must be positive (n >= 3)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


def generate(design: SimDesign, sim_index: int) -> Sample:
    """Dataset for one simulation: x ~ U(0,1), y = f(x) + N(0, noise_sd^2)."""
    rng = substream(design.seed, STREAM_DATA, sim_index)
    xs = rng.uniform(0.0, 1.0, design.n)
    ys = eval_sim_function(design.function, xs) + rng.normal(0.0, design.noise_sd, design.n)
    return Sample(xs, ys)


@dataclass
class CellResult:
    """Aggregated outcomes for one (function, n) cell."""

    function: str
    n: int
    n_sims: int
    cb_rejections: int = 0
    frcb_rejections: int = 0
    n_ok: int = 0
    n_failed: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.n_failed == 0

    def rate(self, test: str) -> float:
        if self.n_ok == 0:
            return math.nan
        count = self.cb_rejections if test == "CB" else self.frcb_rejections
        return count / self.n_ok

    def mc_se(self, test: str) -> float:
        p = self.rate(test)
        if math.isnan(p) or self.n_ok == 0:
            return math.nan
        return math.sqrt(p * (1.0 - p) / self.n_ok)


def _run_one_sim(design: SimDesign, grid_size: int, sim_index: int):
    """(cb_rejected, frcb_rejected) for one simulated dataset, or an error string."""
    try:
        sample = generate(design, sim_index)
        grid = default_grid(sample, grid_size)
        boot = BootstrapConfig(design.n_boot, derive_seed(design.seed, STREAM_TEST_SEED, sim_index))
        # the monotone null class is direction-free; a flat truth sits in it
        # regardless of the sign of the noise-driven global trend
        hyp = ShapeHypothesis(MONOTONE_EITHER)
        report = frcb_test(sample, grid, hyp, alpha=design.alpha, boot_cfg=boot)
        return (bool(report.rejected_cb), bool(report.rejected_frcb))
    except Exception as exc:  # a failed cell entry is recorded, not fatal
        return f"sim {sim_index}: {type(exc).__name__}: {exc}"


def run_cell(design: SimDesign, grid_size: int = 100, workers: int = 1) -> CellResult:
    """All simulations for one design, aggregated in simulation order."""
    outcomes = parallel_map(partial(_run_one_sim, design, grid_size),
                            list(range(design.n_sims)), workers=workers)
    cell = CellResult(function=design.function, n=design.n, n_sims=design.n_sims)
    for out in outcomes:
        if isinstance(out, str):
            cell.n_failed += 1
            if len(cell.errors) < 10:
                cell.errors.append(out)
            continue
        cb_rej, frcb_rej = out
        cell.n_ok += 1
        cell.cb_rejections += int(cb_rej)
        cell.frcb_rejections += int(frcb_rej)
    return cell


@dataclass
class RejectionTable:
    """Rejection proportions per (function, n, test) with Monte Carlo errors."""

    cells: list[CellResult]
    tests: tuple[str, ...] = ("CB", "FRCB")

    def rows(self) -> list[dict]:
        out = []
        for cell in self.cells:
            for test in self.tests:
                out.append({
                    "function": cell.function,
                    "n": cell.n,
                    "test": test,
                    "rejection_rate": cell.rate(test),
                    "mc_se": cell.mc_se(test),
                    "n_sims_ok": cell.n_ok,
                    "n_sims_failed": cell.n_failed,
                    "complete": cell.complete,
                })
        return out

    def to_text(self) -> str:
        lines = [f"{'function':<10}{'n':>7}{'test':>7}{'reject':>9}{'mc_se':>8}{'ok':>6}{'fail':>6}"]
        for r in self.rows():
            lines.append(
                f"{r['function']:<10}{r['n']:>7}{r['test']:>7}"
                f"{r['rejection_rate']:>9.3f}{r['mc_se']:>8.3f}"
                f"{r['n_sims_ok']:>6}{r['n_sims_failed']:>6}"
            )
        return "\n".join(lines) + "\n"


def rejection_table(designs: list[SimDesign], grid_size: int = 100,
                    workers: int = 1) -> RejectionTable:
    """Run every design cell; per-sim failures mark the cell incomplete
    rather than aborting the table."""
    return RejectionTable([run_cell(d, grid_size=grid_size, workers=workers) for d in designs])


def application_stand_in(n: int = 120, seed: int = 74023) -> Sample:
    """Synthetic stand-in for a radiocarbon-style calibration dataset.

    Radiocarbon age (y, years) against calendar age (x, years) on a 5000-6000
    year window: an overall upward trend whose first stretch is nearly flat,
    with genuine wiggles (sign-changing derivative) afterwards. The shape
    mirrors the published calibration curves' "wiggles"; the numbers are
    synthetic and carry no measurement provenance.
    """
    rng = substream(seed, STREAM_DATA, 0)
    xs = np.sort(rng.uniform(5000.0, 6000.0, n))
    t = (xs - 5000.0) / 1000.0
    trend = 4400.0 + 620.0 * t
    # nearly flat before t ~ 0.35, wiggly after
    ramp = 1.0 / (1.0 + np.exp(-(t - 0.35) / 0.06))
    flat_part = -170.0 * (1.0 - ramp) * t
    wiggles = 36.0 * ramp * np.sin(2.0 * np.pi * t / 0.21)
    ys = trend + flat_part + wiggles + rng.normal(0.0, 18.0, n)
    return Sample(xs, ys)
