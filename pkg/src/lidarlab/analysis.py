"""Experiment harness: ROI statistics, the sweep grid, and trend reports.

A sweep visits every (paint, angle, distance, surface) cell of the grid
`runs` times. Each cell scans its own scene with its own named stream, so
cells can run on any number of workers without changing a single byte of
output. Wet cells model the spray protocol: the droplet perturbation is
drawn once per (paint, distance, run) and reused across angle cells at that
distance, mirroring a rig that sprays the panel when it is set up at a new
distance and then steps through the angles.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product

import numpy as np

from .geometry import panel_frame
from .reflectance import DEFAULT_PARAMS, ReflectanceParams
from .scanner import scan
from .scenario import SweepGrid
from .streams import RandomStream
from .types import PaintParams, PanelSpec, PointCloud, Scene

MONOTONE_SLACK = 1.0        # intensity units absorbed by quantization noise
KNEE_DISTANCES = (5.0, 10.0, 20.0)


@dataclass(frozen=True)
class IntensityStats:
    """Sample mean and unbiased sample variance of ROI intensities."""

    mean: float
    variance: float
    count: int


@dataclass(frozen=True)
class ExperimentRecord:
    """One run of one sweep cell."""

    panel_code: str
    elevation_angle: float
    distance: float
    surface: str
    run_index: int
    stats: IntensityStats
    reliable: bool


@dataclass(frozen=True)
class AggregatedRecord:
    """A sweep cell summarised across its runs: mean of run means, pooled
    variance, total count."""

    panel_code: str
    elevation_angle: float
    distance: float
    surface: str
    runs: int
    mean: float
    variance: float
    count: int
    reliable: bool


@dataclass(frozen=True)
class GroupStats:
    grouping: str
    key: str
    mean: float
    variance: float
    cells: int


@dataclass(frozen=True)
class TrendReport:
    """Per-paint trend booleans, evaluated over reliable cells only.

    A boolean is vacuously true when too few reliable cells exist to test
    it; the *_groups counters say how many comparisons actually ran.
    """

    panel_code: str
    angle_monotone: bool
    distance_monotone: bool
    knee_present: bool
    angle_groups: int
    distance_groups: int
    knee_groups: int


def intensity_stats(points) -> IntensityStats:
    """Stats over LidarPoints or raw intensity values.

    Raises ValueError on an empty input; a single point has variance 0.
    """
    if isinstance(points, PointCloud):
        values = points.intensities()
    else:
        seq = list(points)
        if seq and hasattr(seq[0], "intensity"):
            values = np.array([p.intensity for p in seq], dtype=float)
        else:
            values = np.asarray(seq, dtype=float)
    if values.size == 0:
        raise ValueError("intensity_stats needs at least one point")
    mean = float(np.mean(values))
    variance = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return IntensityStats(mean=mean, variance=variance, count=int(values.size))


def extract_panel_roi(cloud: PointCloud, panel: PanelSpec,
                      margin: float = 0.05,
                      mount_height: float | None = None) -> PointCloud:
    """Points whose positions project inside the panel rectangle shrunk by
    `margin` (a fraction of the side) on each side.

    Projection drops the normal component, so range noise does not move a
    point out of its own ROI.
    """
    if not 0.0 <= margin < 0.5:
        raise ValueError(f"margin {margin} outside [0, 0.5)")
    center, u, v, _ = panel_frame(panel, mount_height)
    half = panel.side_length / 2.0 * (1.0 - 2.0 * margin)
    kept = []
    for p in cloud.points:
        ox = p.x - center[0]
        oy = p.y - center[1]
        oz = p.z - center[2]
        lu = ox * u[0] + oy * u[1] + oz * u[2]
        lv = ox * v[0] + oy * v[1] + oz * v[2]
        if abs(lu) <= half and abs(lv) <= half:
            kept.append(p)
    return PointCloud(points=kept, revolution_index=cloud.revolution_index,
                      scene_id=cloud.scene_id)


def run_sweep(grid: SweepGrid, template: Scene,
              paints: dict[str, PaintParams],
              params: ReflectanceParams = DEFAULT_PARAMS,
              jobs: int = 1) -> list[ExperimentRecord]:
    """Execute the grid and return one record per (cell, run), in grid order.

    The template supplies the sensor, beam table and panel geometry; each
    cell replaces the panel's paint, distance, tilt and surface.
    """
    for code in grid.panel_codes:
        if code not in paints:
            raise ValueError(f"sweep names unknown paint code '{code}'")
    cells = list(product(grid.panel_codes, grid.angles, grid.distances,
                         grid.surfaces, range(1, grid.runs + 1)))
    context = (grid, template, paints, params)
    if jobs <= 1:
        return [_cell_record(cell, context) for cell in cells]
    tasks = [(cell, context) for cell in cells]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell_task, tasks, chunksize=chunk))


def _cell_task(task):
    cell, context = task
    return _cell_record(cell, context)


def cell_setup(cell, grid: SweepGrid, template: Scene,
               paints: dict[str, PaintParams],
               params: ReflectanceParams) -> tuple[Scene, RandomStream, PanelSpec]:
    """Scene, stream and panel for one (code, angle, distance, surface, run)
    sweep cell. Shared by the intensity sweep and the error model
    calibration pipeline so both observe identical scans."""
    code, angle, distance, surface, run = cell
    paint = paints[code]
    if surface == "wet" and params.spray_sigma > 0.0:
        # One droplet realization per (paint, distance, run): respraying
        # happens when the panel moves, not when it tilts.
        spray = RandomStream(
            grid.seed, f"sweep/{code}/d{distance:g}/wet/run{run}/spray")
        offset = float(spray.generator().standard_normal()) * params.spray_sigma
        paint = replace(paint, wet_mean_shift=paint.wet_mean_shift + offset)

    base = template.panels[0] if template.panels else PanelSpec(paint=paint)
    panel = replace(base, paint=paint, center_distance=float(distance),
                    elevation_angle=float(angle), surface=surface)
    scene = replace(
        template, panels=(panel,),
        scene_id=f"{code}-a{angle:g}-d{distance:g}-{surface}-r{run}")
    stream = RandomStream(
        grid.seed, f"sweep/{code}/a{angle:g}/d{distance:g}/{surface}/run{run}")
    return scene, stream, panel


def _cell_record(cell, context) -> ExperimentRecord:
    grid, template, paints, params = context
    code, angle, distance, surface, run = cell
    scene, stream, panel = cell_setup(cell, grid, template, paints, params)
    cloud = scan(scene, stream, params)
    roi = extract_panel_roi(cloud, panel, grid.roi_margin,
                            template.sensor.mount_height)
    if len(roi) == 0:
        stats = IntensityStats(mean=math.nan, variance=math.nan, count=0)
        reliable = False
    else:
        stats = intensity_stats(roi)
        reliable = stats.count >= grid.min_points
    return ExperimentRecord(
        panel_code=code, elevation_angle=float(angle),
        distance=float(distance), surface=surface, run_index=run,
        stats=stats, reliable=reliable)


def aggregate_runs(records: list[ExperimentRecord]) -> list[AggregatedRecord]:
    """Collapse run records into one record per cell.

    The mean weighs runs equally; the variance pools within-run variances
    with n-1 weights. Aggregating k copies of one run returns that run's
    stats unchanged. A cell is reliable only when every run was.
    """
    groups: dict[tuple, list[ExperimentRecord]] = {}
    order: list[tuple] = []
    for rec in records:
        key = (rec.panel_code, rec.elevation_angle, rec.distance, rec.surface)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)

    out = []
    for key in order:
        runs = groups[key]
        means = [r.stats.mean for r in runs if r.stats.count > 0]
        mean = float(np.mean(means)) if means else math.nan
        weight = sum(r.stats.count - 1 for r in runs if r.stats.count > 1)
        if weight > 0:
            pooled = sum((r.stats.count - 1) * r.stats.variance
                         for r in runs if r.stats.count > 1) / weight
        else:
            pooled = 0.0 if means else math.nan
        count = sum(r.stats.count for r in runs)
        out.append(AggregatedRecord(
            panel_code=key[0], elevation_angle=key[1], distance=key[2],
            surface=key[3], runs=len(runs), mean=mean,
            variance=float(pooled), count=count,
            reliable=all(r.reliable for r in runs)))
    return out


GROUPINGS = ("functionalised", "metallic", "finish", "surface")


def group_compare(aggregated: list[AggregatedRecord], grouping: str,
                  paints: dict[str, PaintParams]) -> list[GroupStats]:
    """Aggregate reliable cells into named groups.

    Paint-property groupings are split by finish as well, because comparing
    a matte paint against a gloss one says nothing about the property under
    study.
    """
    if grouping not in GROUPINGS:
        raise ValueError(f"grouping must be one of {GROUPINGS}, "
                         f"got '{grouping}'")
    buckets: dict[str, list[AggregatedRecord]] = {}
    for rec in aggregated:
        if not rec.reliable:
            continue
        paint = paints.get(rec.panel_code)
        if paint is None:
            raise ValueError(f"record names unknown paint '{rec.panel_code}'")
        if grouping == "functionalised":
            key = f"{paint.finish}-" + (
                "functionalised" if paint.functionalised else "standard")
        elif grouping == "metallic":
            key = f"{paint.finish}-" + (
                "metallic" if paint.metallic else "non-metallic")
        elif grouping == "finish":
            key = paint.finish
        else:
            key = rec.surface
        buckets.setdefault(key, []).append(rec)

    out = []
    for key in sorted(buckets):
        cells = buckets[key]
        out.append(GroupStats(
            grouping=grouping, key=key,
            mean=float(np.mean([c.mean for c in cells])),
            variance=float(np.mean([c.variance for c in cells])),
            cells=len(cells)))
    return out


def trend_check(aggregated: list[AggregatedRecord]) -> list[TrendReport]:
    """Evaluate the headline trends per paint over reliable cells."""
    by_paint: dict[str, list[AggregatedRecord]] = {}
    order: list[str] = []
    for rec in aggregated:
        if rec.panel_code not in by_paint:
            by_paint[rec.panel_code] = []
            order.append(rec.panel_code)
        if rec.reliable:
            by_paint[rec.panel_code].append(rec)

    out = []
    for code in order:
        cells = by_paint[code]
        angle_ok, angle_n = _check_monotone(
            cells, group_by=("distance", "surface"), axis="elevation_angle")
        dist_ok, dist_n = _check_monotone(
            cells, group_by=("elevation_angle", "surface"), axis="distance",
            restrict=KNEE_DISTANCES)
        knee_ok, knee_n = _check_knee(cells)
        out.append(TrendReport(
            panel_code=code, angle_monotone=angle_ok,
            distance_monotone=dist_ok, knee_present=knee_ok,
            angle_groups=angle_n, distance_groups=dist_n,
            knee_groups=knee_n))
    return out


def _check_monotone(cells, group_by, axis, restrict=None):
    groups: dict[tuple, list[AggregatedRecord]] = {}
    for rec in cells:
        if restrict is not None and getattr(rec, axis) not in restrict:
            continue
        key = tuple(getattr(rec, g) for g in group_by)
        groups.setdefault(key, []).append(rec)
    ok = True
    evaluated = 0
    for members in groups.values():
        if len(members) < 2:
            continue
        evaluated += 1
        members = sorted(members, key=lambda r: getattr(r, axis))
        for a, b in zip(members, members[1:]):
            if b.mean > a.mean + MONOTONE_SLACK:
                ok = False
    return ok, evaluated


def _check_knee(cells):
    """The 10 to 20 m drop must be at least as large as the 5 to 10 m drop."""
    groups: dict[tuple, dict[float, float]] = {}
    for rec in cells:
        if rec.distance not in KNEE_DISTANCES:
            continue
        key = (rec.elevation_angle, rec.surface)
        groups.setdefault(key, {})[rec.distance] = rec.mean
    ok = True
    evaluated = 0
    d5, d10, d20 = KNEE_DISTANCES
    for means in groups.values():
        if not all(d in means for d in KNEE_DISTANCES):
            continue
        evaluated += 1
        near_drop = means[d5] - means[d10]
        far_drop = means[d10] - means[d20]
        if far_drop < near_drop - MONOTONE_SLACK:
            ok = False
    return ok, evaluated
