"""Machine-readable experiment outputs: JSON reports, tables and plot data."""

import csv
import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Union

from reachset import geometry
from reachset.distributions import save_samples
from reachset.kde import write_weighted_grid

if TYPE_CHECKING:
    from reachset.harness import ExperimentReport, RobustnessReport, SweepReport

logger = logging.getLogger(__name__)

TABLE_FIELDS = ["experiment", "method", "status", "ratio", "area_m2", "time_s"]


def _write_json(data: Dict, path: Path) -> Path:
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return path


def _write_rows(rows: List[Dict], fields: List[str], path: Path) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if row.get(k) is None else row[k] for k in fields})
    return path


def table_rows(report: "ExperimentReport") -> List[Dict]:
    """One row per method: ratio, area and time"""
    rows = []
    for method, result in report.results.items():
        rows.append(
            {
                "experiment": report.config.name,
                "method": method,
                "status": result.solution.status,
                "ratio": result.ratio,
                "area_m2": result.solution.area,
                "time_s": result.solution.solve_time,
            }
        )
    return rows


def emit_report(report: "ExperimentReport", out_dir: Union[str, Path]) -> List[Path]:
    """Write report.json, table.csv, polygons.json and plotdata/*.csv"""
    out_dir = Path(out_dir)
    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(parents=True, exist_ok=True)

    written = [
        _write_json(report.to_dict(), out_dir / "report.json"),
        _write_rows(table_rows(report), TABLE_FIELDS, out_dir / "table.csv"),
    ]

    polygons = {}
    for method, result in report.results.items():
        sol = result.solution
        polygons[method] = (
            geometry.polygon_to_dict(sol.polygon, sol.vertices) if sol.feasible else None
        )
    written.append(_write_json(polygons, out_dir / "polygons.json"))

    written.append(write_weighted_grid(report.wg, plot_dir / "heatmap.csv"))
    written.append(save_samples(report.samples, plot_dir / "samples.csv"))
    for method, result in report.results.items():
        if not result.solution.feasible:
            continue
        rows = [
            {"vertex": k, "x": repr(float(x)), "y": repr(float(y))}
            for k, (x, y) in enumerate(result.solution.vertices.vertices)
        ]
        written.append(_write_rows(rows, ["vertex", "x", "y"], plot_dir / f"vertices_{method}.csv"))

    logger.info("wrote %d files to %s", len(written), out_dir)
    return written


def emit_robustness(study: "RobustnessReport", out_dir: Union[str, Path]) -> List[Path]:
    """Write robustness.json and robustness.csv (per n_s Jaccard and time statistics)"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fields = ["n_s", "runs", "infeasible", "mean_jaccard", "var_jaccard", "mean_time", "var_time"]
    rows = []
    for row in study.rows:
        data = row.to_dict()
        data["runs"] = len(row.seeds)
        rows.append(data)
    return [
        _write_json(study.to_dict(), out_dir / "robustness.json"),
        _write_rows(rows, fields, out_dir / "robustness.csv"),
    ]


def emit_sweep(result: "SweepReport", out_dir: Union[str, Path]) -> List[Path]:
    """Write sweep.json and sweep.csv (method x value table)"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fields = ["parameter", "value", "method", "status", "ratio", "area_m2", "time_s"]
    return [
        _write_json(result.to_dict(), out_dir / "sweep.json"),
        _write_rows(result.rows(), fields, out_dir / "sweep.csv"),
    ]
