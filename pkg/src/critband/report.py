"""Report serialization: JSON test reports and delimited plot/table data.

JSON files are written with sorted keys, two-space indent, and a trailing
newline; floats go through Python's shortest round-trip repr. Identical
results therefore serialize to identical bytes.

Plot CSVs share one documented header regardless of content:

    x, fit, lower, upper, segment_id, h

Fields that do not apply to a row (e.g. band bounds on a fitted-path row)
are left empty.
"""

from __future__ import annotations

import csv
import json
from typing import Any

import numpy as np

from .band import DerivBand
from .bootstrap import TestReport
from .data import Grid, Sample
from .frcb import FRCBReport
from .shape import ShapeHypothesis
from .simkit import RejectionTable
from .version import __version__

SCHEMA_VERSION = 1

PLOT_COLUMNS = ("x", "fit", "lower", "upper", "segment_id", "h")


def jsonify(obj: Any) -> Any:
    """Recursively convert numpy containers/scalars to plain Python."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def sample_summary(sample: Sample) -> dict:
    out = {"n": sample.n, "x_min": float(sample.xs[0]), "x_max": float(sample.xs[-1])}
    if sample.has_response:
        out["y_min"] = float(np.min(sample.ys))
        out["y_max"] = float(np.max(sample.ys))
    return out


def grid_dict(grid: Grid) -> dict:
    return {
        "size": len(grid),
        "points": grid.points,
        "origin_index": grid.origin_index,
    }


def hypothesis_dict(hyp: ShapeHypothesis) -> dict:
    return {"kind": hyp.kind, "k": hyp.k, "tolerance": hyp.tolerance}


def test_report_dict(report: TestReport) -> dict:
    return {
        "statistic": report.statistic,
        "p_value": report.p_value,
        "replications_used": report.replications_used,
        "boot_statistics": report.boot_statistics,
        "grid_retained_origin": report.grid_used.origin_index,
        "direction": report.direction,
        "n_bracket_failures": report.n_bracket_failures,
        "seed": report.seed,
    }


def band_dict(band: DerivBand) -> dict:
    return {
        "h_band": band.h_band,
        "level": band.level,
        "critical_value": band.critical_value,
        "estimate": band.estimate,
        "lower": band.lower,
        "upper": band.upper,
    }


def frcb_report_dict(report: FRCBReport) -> dict:
    out = {
        "hypothesis": hypothesis_dict(report.hypothesis),
        "alpha": report.alpha,
        "alpha_flat": report.alpha_flat,
        "band": band_dict(report.band),
        "frcb": test_report_dict(report.frcb),
        "cb": None if report.cb is None else test_report_dict(report.cb),
        "retained_fraction": report.retained_fraction,
        "segments": [list(s) for s in report.segments],
        "rejected_frcb": report.rejected_frcb,
        "rejected_cb": report.rejected_cb,
    }
    return out


def build_report(command: str, config: dict, body: dict) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "command": command,
        "config": config,
    }
    payload.update(body)
    return payload


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_plot_csv(path, rows: list[dict]) -> None:
    """Rows are dicts keyed by PLOT_COLUMNS entries; missing keys are blank."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOT_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row.get(col)) for col in PLOT_COLUMNS])


def curve_rows(grid: Grid, values: np.ndarray, h: float) -> list[dict]:
    """Plot rows for a fitted curve, split into contiguous-segment ids so a
    filtered grid draws with gaps."""
    rows = []
    segments = grid.segments()
    bounds = []
    for seg_id, (start, stop) in enumerate(segments):
        bounds.append((start, stop, seg_id))
    for pos in range(len(grid)):
        parent = int(grid.origin_index[pos])
        seg_id = next(s_id for a, b, s_id in bounds if a <= parent <= b)
        rows.append({"x": float(grid.points[pos]), "fit": float(values[pos]),
                     "segment_id": seg_id, "h": float(h)})
    return rows


def band_rows(band: DerivBand) -> list[dict]:
    return [
        {
            "x": float(band.grid.points[i]),
            "fit": float(band.estimate[i]),
            "lower": float(band.lower[i]),
            "upper": float(band.upper[i]),
            "h": band.h_band,
        }
        for i in range(len(band.grid))
    ]


def write_table_csv(path, table: RejectionTable) -> None:
    cols = ("function", "n", "test", "rejection_rate", "mc_se",
            "n_sims_ok", "n_sims_failed", "complete")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in table.rows():
            writer.writerow([_cell(row[c]) for c in cols])
