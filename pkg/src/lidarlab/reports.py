"""Results files: per-run CSV, aggregated CSV, group and trend reports,
and a plain x/y plot-data file.

All numbers are written with repr so a read back reproduces the values bit
for bit, and all rows are emitted in a deterministic order.
"""
from __future__ import annotations

import csv
import math

from .analysis import (AggregatedRecord, ExperimentRecord, GroupStats,
                       IntensityStats, TrendReport)

RECORDS_HEADER = ["panel_code", "angle_deg", "distance_m", "surface", "run",
                  "mean", "variance", "count", "reliable"]
AGGREGATE_HEADER = ["panel_code", "angle_deg", "distance_m", "surface",
                    "runs", "mean", "variance", "count", "reliable"]


def _fmt(value: float) -> str:
    return repr(float(value))


def _bool(value: bool) -> str:
    return "true" if value else "false"


def write_records_csv(records: list[ExperimentRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RECORDS_HEADER)
        for r in records:
            writer.writerow([
                r.panel_code, _fmt(r.elevation_angle), _fmt(r.distance),
                r.surface, r.run_index, _fmt(r.stats.mean),
                _fmt(r.stats.variance), r.stats.count, _bool(r.reliable)])


def read_records_csv(path: str) -> list[ExperimentRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != RECORDS_HEADER:
            raise ValueError(f"{path}: unexpected results header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RECORDS_HEADER):
                raise ValueError(
                    f"{path}:{lineno}: expected {len(RECORDS_HEADER)} "
                    f"fields, got {len(row)}")
            try:
                records.append(ExperimentRecord(
                    panel_code=row[0], elevation_angle=float(row[1]),
                    distance=float(row[2]), surface=row[3],
                    run_index=int(row[4]),
                    stats=IntensityStats(mean=float(row[5]),
                                         variance=float(row[6]),
                                         count=int(row[7])),
                    reliable=row[8] == "true"))
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
    return records


def write_aggregate_csv(aggregated: list[AggregatedRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for r in aggregated:
            writer.writerow([
                r.panel_code, _fmt(r.elevation_angle), _fmt(r.distance),
                r.surface, r.runs, _fmt(r.mean), _fmt(r.variance),
                r.count, _bool(r.reliable)])


def read_aggregate_csv(path: str) -> list[AggregatedRecord]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != AGGREGATE_HEADER:
            raise ValueError(f"{path}: unexpected aggregate header {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(AggregatedRecord(
                    panel_code=row[0], elevation_angle=float(row[1]),
                    distance=float(row[2]), surface=row[3],
                    runs=int(row[4]), mean=float(row[5]),
                    variance=float(row[6]), count=int(row[7]),
                    reliable=row[8] == "true"))
            except (ValueError, IndexError) as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
    return out


def write_groups_csv(groups: list[GroupStats], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["grouping", "group", "mean", "variance", "cells"])
        for g in groups:
            writer.writerow([g.grouping, g.key, _fmt(g.mean),
                             _fmt(g.variance), g.cells])


def write_trends_csv(trends: list[TrendReport], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["panel_code", "angle_monotone", "distance_monotone",
                         "knee_present", "angle_groups", "distance_groups",
                         "knee_groups"])
        for t in trends:
            writer.writerow([t.panel_code, _bool(t.angle_monotone),
                             _bool(t.distance_monotone),
                             _bool(t.knee_present), t.angle_groups,
                             t.distance_groups, t.knee_groups])


def write_plot_data(aggregated: list[AggregatedRecord], path: str) -> None:
    """x/y series for the standard figures, one row per point.

    figure intensity_vs_angle:    x = tilt, one series per paint/distance/surface
    figure intensity_vs_distance: x = distance, one series per paint/angle/surface
    figure variance_vs_angle, variance_vs_distance: same but y = variance
    Only reliable cells are plotted.
    """
    rows = []
    reliable = [r for r in aggregated if r.reliable and not math.isnan(r.mean)]

    def series_rows(figure, key_of, x_of, y_of):
        seen: dict[str, list] = {}
        for r in reliable:
            seen.setdefault(key_of(r), []).append(r)
        for key in sorted(seen):
            for r in sorted(seen[key], key=x_of):
                rows.append([figure, key, _fmt(x_of(r)), _fmt(y_of(r))])

    series_rows("intensity_vs_angle",
                lambda r: f"{r.panel_code} {r.distance:g}m {r.surface}",
                lambda r: r.elevation_angle, lambda r: r.mean)
    series_rows("intensity_vs_distance",
                lambda r: f"{r.panel_code} {r.elevation_angle:g}deg {r.surface}",
                lambda r: r.distance, lambda r: r.mean)
    series_rows("variance_vs_angle",
                lambda r: f"{r.panel_code} {r.distance:g}m {r.surface}",
                lambda r: r.elevation_angle, lambda r: r.variance)
    series_rows("variance_vs_distance",
                lambda r: f"{r.panel_code} {r.elevation_angle:g}deg {r.surface}",
                lambda r: r.distance, lambda r: r.variance)

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["figure", "series", "x", "y"])
        writer.writerows(rows)
