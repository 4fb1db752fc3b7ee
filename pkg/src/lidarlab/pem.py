"""Perception error model.

The pipeline has four stages:

  perceive    point cloud -> object list (clustering detector)
  match       ground truth x perceived -> outcome records (TP / FN / FP)
  calibrate   records -> per-condition-bin error statistics
  apply       error statistics + fresh ground truth -> synthetic object list

A condition bin is one cell of (distance interval x tilt interval x surface).
Detection probability is TP / (TP + FN) per bin; false positives are counted
per scan; matched pairs contribute per-axis center error and extent error
moments. Moment accumulation is pairwise merge safe, so partial calibrations
can be combined without changing the result.
"""
from __future__ import annotations

import math
import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import blockfile
from .streams import RandomStream
from .types import PointCloud, Scene

DEFAULT_GATE_M = 2.0
DEFAULT_MIN_POINTS = 10
LOW_CONFIDENCE_SAMPLES = 30
DEFAULT_DISTANCE_EDGES = (0.0, 7.5, 15.0, 25.0, math.inf)
DEFAULT_TILT_EDGES = (0.0, 22.5, 45.0, 90.0)
FP_OPEN_BIN_SPAN = 10.0   # metres of an unbounded distance bin to sample


@dataclass(frozen=True)
class GroundTruthObject:
    """A real object placed in the scene."""

    object_id: str
    class_label: str
    center: tuple[float, float, float]
    extent: tuple[float, float]       # width, height in metres
    tilt: float                       # degrees
    surface: str
    paint_code: str = ""

    def size(self) -> float:
        return max(self.extent)

    def distance(self) -> float:
        return math.sqrt(sum(c * c for c in self.center))


@dataclass(frozen=True)
class PerceivedObject:
    """Detector output or synthetic equivalent."""

    center: tuple[float, float, float]
    extent: float
    mean_intensity: float
    point_count: int
    matched_gt_id: str | None = None

    def distance(self) -> float:
        return math.sqrt(sum(c * c for c in self.center))


@dataclass(frozen=True)
class ErrorRecord:
    """One matching outcome under a known condition."""

    outcome: str                      # tp | fn | fp
    distance: float
    tilt: float
    surface: str
    scan_id: int = 0
    center_error: tuple[float, float, float] | None = None
    extent_error: float | None = None


@dataclass(frozen=True)
class ConditionBin:
    distance_lo: float
    distance_hi: float
    tilt_lo: float
    tilt_hi: float
    surface: str

    def contains(self, distance: float, tilt: float, surface: str) -> bool:
        return (self.surface == surface
                and self.distance_lo <= distance < self.distance_hi
                and self.tilt_lo <= tilt < self.tilt_hi)

    def key(self) -> str:
        return (f"d{self.distance_lo:g}-{self.distance_hi:g}"
                f"_t{self.tilt_lo:g}-{self.tilt_hi:g}_{self.surface}")


@dataclass(frozen=True)
class BinScheme:
    """A partition of the condition space into bins."""

    distance_edges: tuple[float, ...] = DEFAULT_DISTANCE_EDGES
    tilt_edges: tuple[float, ...] = DEFAULT_TILT_EDGES
    surfaces: tuple[str, ...] = ("dry", "wet")

    def bins(self) -> list[ConditionBin]:
        out = []
        for di in range(len(self.distance_edges) - 1):
            for ti in range(len(self.tilt_edges) - 1):
                for surface in self.surfaces:
                    out.append(ConditionBin(
                        self.distance_edges[di], self.distance_edges[di + 1],
                        self.tilt_edges[ti], self.tilt_edges[ti + 1],
                        surface))
        return out

    def index_of(self, distance: float, tilt: float,
                 surface: str) -> int | None:
        if surface not in self.surfaces:
            return None
        di = _interval_index(self.distance_edges, distance)
        ti = _interval_index(self.tilt_edges, tilt)
        if di is None or ti is None:
            return None
        n_t = len(self.tilt_edges) - 1
        n_s = len(self.surfaces)
        return (di * n_t + ti) * n_s + self.surfaces.index(surface)


def _interval_index(edges: tuple[float, ...], value: float) -> int | None:
    for i in range(len(edges) - 1):
        if edges[i] <= value < edges[i + 1]:
            return i
    return None


@dataclass(frozen=True)
class BinStats:
    """Calibrated error statistics of one condition bin."""

    bin: ConditionBin
    detection_probability: float
    false_positive_rate: float
    center_error_mean: tuple[float, float, float]
    center_error_std: tuple[float, float, float]
    extent_error_mean: float
    extent_error_std: float
    sample_count: int        # matched pairs backing the error moments
    detection_trials: int    # TP + FN
    scan_count: int
    low_confidence: bool


@dataclass(frozen=True)
class ErrorModel:
    scheme: BinScheme
    bins: tuple[BinStats, ...]
    metadata: dict[str, str] = field(default_factory=dict)


def ground_truth_for_scene(scene: Scene) -> list[GroundTruthObject]:
    """The panels of a scene as ground truth objects."""
    out = []
    for i, panel in enumerate(scene.panels):
        dz = panel.center_height - scene.sensor.mount_height
        out.append(GroundTruthObject(
            object_id=f"panel-{i}", class_label="panel",
            center=(panel.center_distance, 0.0, dz),
            extent=(panel.side_length, panel.side_length),
            tilt=panel.elevation_angle, surface=panel.surface,
            paint_code=panel.paint.panel_code))
    return out


# ---------------------------------------------------------------- perceive

def perceive(cloud: PointCloud, min_points: int = DEFAULT_MIN_POINTS,
             cell_size: float = 0.5) -> list[PerceivedObject]:
    """Cluster returns by spatial adjacency on a voxel grid.

    Clusters smaller than min_points are discarded. Output order is by
    descending size, then centroid, so it is deterministic.
    """
    if len(cloud.points) == 0:
        return []
    pos = cloud.positions()
    keys = np.floor(pos / cell_size).astype(np.int64)

    voxels: dict[tuple, list[int]] = {}
    for index, key in enumerate(map(tuple, keys)):
        voxels.setdefault(key, []).append(index)

    parent: dict[tuple, tuple] = {v: v for v in voxels}

    def find(v):
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    ordered = sorted(voxels)
    for voxel in ordered:
        vx, vy, vz = voxel
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    other = (vx + dx, vy + dy, vz + dz)
                    if other in parent and other != voxel:
                        ra, rb = find(voxel), find(other)
                        if ra != rb:
                            parent[max(ra, rb)] = min(ra, rb)

    clusters: dict[tuple, list[int]] = {}
    for voxel in ordered:
        clusters.setdefault(find(voxel), []).extend(voxels[voxel])

    objects = []
    for indices in clusters.values():
        if len(indices) < min_points:
            continue
        pts = pos[indices]
        centroid = pts.mean(axis=0)
        extent = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
        mean_int = float(np.mean([cloud.points[i].intensity
                                  for i in indices]))
        objects.append(PerceivedObject(
            center=tuple(float(c) for c in centroid), extent=extent,
            mean_intensity=mean_int, point_count=len(indices)))
    objects.sort(key=lambda o: (-o.point_count, o.center))
    return objects


# ------------------------------------------------------------------- match

def match_objects(gt: list[GroundTruthObject],
                  perceived: list[PerceivedObject],
                  gate: float = DEFAULT_GATE_M,
                  scan_id: int = 0) -> list[ErrorRecord]:
    """Greedy nearest-center association within a gate.

    Matched pairs become TP records with center and extent errors; leftover
    ground truth becomes FN; leftover perceived objects become FP. An FP
    inherits the condition of the nearest ground truth object (the scan's
    setup), falling back to its own distance when the scene is empty.
    """
    pairs = []
    for gi, g in enumerate(gt):
        for pi, p in enumerate(perceived):
            d = math.dist(g.center, p.center)
            if d <= gate:
                pairs.append((d, gi, pi))
    pairs.sort()

    gt_used = [False] * len(gt)
    per_used = [False] * len(perceived)
    records: list[ErrorRecord] = []
    for d, gi, pi in pairs:
        if gt_used[gi] or per_used[pi]:
            continue
        gt_used[gi] = True
        per_used[pi] = True
        g, p = gt[gi], perceived[pi]
        err = tuple(pc - gc for pc, gc in zip(p.center, g.center))
        records.append(ErrorRecord(
            outcome="tp", distance=g.distance(), tilt=g.tilt,
            surface=g.surface, scan_id=scan_id,
            center_error=err, extent_error=p.extent - g.size()))
    for gi, g in enumerate(gt):
        if not gt_used[gi]:
            records.append(ErrorRecord(
                outcome="fn", distance=g.distance(), tilt=g.tilt,
                surface=g.surface, scan_id=scan_id))
    for pi, p in enumerate(perceived):
        if not per_used[pi]:
            if gt:
                nearest = min(gt, key=lambda g: math.dist(g.center, p.center))
                records.append(ErrorRecord(
                    outcome="fp", distance=nearest.distance(),
                    tilt=nearest.tilt, surface=nearest.surface,
                    scan_id=scan_id))
            else:
                records.append(ErrorRecord(
                    outcome="fp", distance=p.distance(), tilt=0.0,
                    surface="dry", scan_id=scan_id))
    return records


# --------------------------------------------------------------- calibrate

class _Moments:
    """Mean and M2 accumulator, safe to merge pairwise in any order."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "_Moments") -> None:
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return
        total = self.n + other.n
        delta = other.mean - self.mean
        self.mean += delta * other.n / total
        self.m2 += other.m2 + delta * delta * self.n * other.n / total
        self.n = total

    def std(self) -> float:
        if self.n < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.n - 1))


class _BinAccumulator:
    __slots__ = ("tp", "fn", "fp", "scan_ids", "ex", "ey", "ez", "ext")

    def __init__(self):
        self.tp = 0
        self.fn = 0
        self.fp = 0
        self.scan_ids: set[int] = set()
        self.ex = _Moments()
        self.ey = _Moments()
        self.ez = _Moments()
        self.ext = _Moments()


def calibrate(records: list[ErrorRecord],
              scheme: BinScheme = BinScheme(),
              metadata: dict[str, str] | None = None) -> ErrorModel:
    """Fit per-bin error statistics from matching records.

    Raises ValueError when a record's condition falls outside the scheme.
    """
    bins = scheme.bins()
    acc = [_BinAccumulator() for _ in bins]
    for rec in records:
        idx = scheme.index_of(rec.distance, rec.tilt, rec.surface)
        if idx is None:
            raise ValueError(
                f"record condition (distance {rec.distance:g} m, tilt "
                f"{rec.tilt:g} deg, {rec.surface}) falls outside the "
                f"bin scheme")
        a = acc[idx]
        a.scan_ids.add(rec.scan_id)
        if rec.outcome == "tp":
            a.tp += 1
            a.ex.update(rec.center_error[0])
            a.ey.update(rec.center_error[1])
            a.ez.update(rec.center_error[2])
            a.ext.update(rec.extent_error)
        elif rec.outcome == "fn":
            a.fn += 1
        elif rec.outcome == "fp":
            a.fp += 1
        else:
            raise ValueError(f"unknown outcome '{rec.outcome}'")

    stats = []
    for bin_, a in zip(bins, acc):
        trials = a.tp + a.fn
        scans = len(a.scan_ids)
        # Plain floats keep the model file readable even when the error
        # records carried numpy scalars.
        stats.append(BinStats(
            bin=bin_,
            detection_probability=a.tp / trials if trials else math.nan,
            false_positive_rate=a.fp / scans if scans else math.nan,
            center_error_mean=(float(a.ex.mean), float(a.ey.mean),
                               float(a.ez.mean)),
            center_error_std=(a.ex.std(), a.ey.std(), a.ez.std()),
            extent_error_mean=float(a.ext.mean),
            extent_error_std=a.ext.std(),
            sample_count=a.tp,
            detection_trials=trials,
            scan_count=scans,
            low_confidence=a.tp < LOW_CONFIDENCE_SAMPLES))
    return ErrorModel(scheme=scheme, bins=tuple(stats),
                      metadata=dict(metadata or {}))


# ------------------------------------------------------------------- apply

def apply_model(model: ErrorModel, gt: list[GroundTruthObject],
                stream: RandomStream, strict: bool = False,
                ) -> list[PerceivedObject]:
    """Re-simulate perception at the object level.

    Each ground truth object survives with its bin's detection probability
    and, when it survives, gets its center and extent perturbed by the
    bin's error distribution. False positives are injected per distinct
    occupied bin at that bin's per-scan rate, placed on the boresight at a
    distance drawn uniformly from the bin's interval.

    Objects whose bin is missing or uncalibrated use the nearest calibrated
    bin; strict=True raises instead. Fallbacks are reported via a warning.
    """
    rng = stream.generator()
    out: list[PerceivedObject] = []
    fallbacks = 0
    used_bins: list[int] = []
    for g in gt:
        idx = model.scheme.index_of(g.distance(), g.tilt, g.surface)
        if idx is None or model.bins[idx].detection_trials == 0:
            if strict:
                raise ValueError(
                    f"object '{g.object_id}' (distance {g.distance():g} m, "
                    f"tilt {g.tilt:g} deg, {g.surface}) has no calibrated "
                    f"bin")
            idx = _nearest_bin(model, g.distance(), g.tilt, g.surface)
            fallbacks += 1
            if idx is None:
                continue
        if idx not in used_bins:
            used_bins.append(idx)
        stats = model.bins[idx]
        if rng.random() >= stats.detection_probability:
            continue
        center = tuple(
            c + rng.normal(m, s) for c, m, s in
            zip(g.center, stats.center_error_mean, stats.center_error_std))
        extent = g.size() + rng.normal(stats.extent_error_mean,
                                       stats.extent_error_std)
        out.append(PerceivedObject(
            center=center, extent=max(0.0, extent), mean_intensity=0.0,
            point_count=0, matched_gt_id=g.object_id))

    for idx in sorted(used_bins):
        stats = model.bins[idx]
        rate = stats.false_positive_rate
        if not rate or math.isnan(rate):
            continue
        lo = stats.bin.distance_lo
        hi = stats.bin.distance_hi
        if math.isinf(hi):
            hi = lo + FP_OPEN_BIN_SPAN
        for _ in range(rng.poisson(rate)):
            d = rng.uniform(lo, hi)
            out.append(PerceivedObject(
                center=(d, 0.0, 0.0), extent=0.0, mean_intensity=0.0,
                point_count=0, matched_gt_id=None))
    if fallbacks:
        warnings.warn(f"apply_model used nearest-bin fallback for "
                      f"{fallbacks} objects", stacklevel=2)
    return out


def _bin_center(bin_: ConditionBin) -> tuple[float, float]:
    hi = bin_.distance_hi
    if math.isinf(hi):
        hi = bin_.distance_lo + FP_OPEN_BIN_SPAN
    return ((bin_.distance_lo + hi) / 2.0,
            (bin_.tilt_lo + bin_.tilt_hi) / 2.0)


def _nearest_bin(model: ErrorModel, distance: float, tilt: float,
                 surface: str) -> int | None:
    best = None
    best_score = math.inf
    for idx, stats in enumerate(model.bins):
        if stats.detection_trials == 0:
            continue
        mid_d, mid_t = _bin_center(stats.bin)
        score = (abs(mid_d - distance) / 30.0 + abs(mid_t - tilt) / 90.0
                 + (0.0 if stats.bin.surface == surface else 10.0))
        if score < best_score:
            best = idx
            best_score = score
    return best


# --------------------------------------------------- sweep-grid calibration

def calibrate_from_sweep(grid, template: Scene, paints: dict,
                         params=None, gate: float = DEFAULT_GATE_M,
                         scheme: BinScheme | None = None,
                         metadata: dict[str, str] | None = None,
                         jobs: int = 1) -> tuple[ErrorModel, list[ErrorRecord]]:
    """Run the full pipeline over a sweep grid: scan each cell, perceive,
    match against the cell's ground truth, then calibrate.

    Each cell is one scan; the cell's index in grid order is its scan id.
    Returns the model together with the records behind it.
    """
    from itertools import product

    from .reflectance import DEFAULT_PARAMS

    if params is None:
        params = DEFAULT_PARAMS
    if scheme is None:
        scheme = BinScheme()
    cells = list(product(grid.panel_codes, grid.angles, grid.distances,
                         grid.surfaces, range(1, grid.runs + 1)))
    context = (grid, template, paints, params, gate)
    tasks = [((index, cell), context) for index, cell in enumerate(cells)]
    if jobs <= 1:
        per_cell = [_match_cell_task(task) for task in tasks]
    else:
        from concurrent.futures import ProcessPoolExecutor
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_cell = list(pool.map(_match_cell_task, tasks, chunksize=chunk))
    records = [rec for cell_records in per_cell for rec in cell_records]
    model = calibrate(records, scheme, metadata)
    return model, records


def _match_cell_task(task) -> list[ErrorRecord]:
    from .analysis import cell_setup
    from .scanner import scan

    (scan_id, cell), (grid, template, paints, params, gate) = task
    scene, stream, _ = cell_setup(cell, grid, template, paints, params)
    cloud = scan(scene, stream, params)
    gt = ground_truth_for_scene(scene)
    perceived = perceive(cloud, min_points=grid.min_points)
    return match_objects(gt, perceived, gate=gate, scan_id=scan_id)


# ---------------------------------------------------------------- validate

@dataclass(frozen=True)
class BinDivergence:
    """Absolute differences between a model bin and held-out data."""

    bin: ConditionBin
    detection: float
    false_positive_rate: float
    center_mean: float        # max over axes
    center_std: float         # max over axes
    extent_mean: float
    extent_std: float
    heldout_trials: int
    heldout_samples: int


def validate_model(model: ErrorModel,
                   records: list[ErrorRecord]) -> list[BinDivergence]:
    """Compare a model against held-out records, bin by bin.

    Validating a model against its own calibration records yields exact
    zeros because both sides use the same estimators.
    """
    empirical = calibrate(records, model.scheme)
    out = []
    for m, e in zip(model.bins, empirical.bins):
        if e.detection_trials == 0:
            out.append(BinDivergence(
                bin=m.bin, detection=math.nan, false_positive_rate=math.nan,
                center_mean=math.nan, center_std=math.nan,
                extent_mean=math.nan, extent_std=math.nan,
                heldout_trials=0, heldout_samples=0))
            continue
        out.append(BinDivergence(
            bin=m.bin,
            detection=abs(m.detection_probability - e.detection_probability),
            false_positive_rate=abs(m.false_positive_rate
                                    - e.false_positive_rate),
            center_mean=max(abs(a - b) for a, b in
                            zip(m.center_error_mean, e.center_error_mean)),
            center_std=max(abs(a - b) for a, b in
                           zip(m.center_error_std, e.center_error_std)),
            extent_mean=abs(m.extent_error_mean - e.extent_error_mean),
            extent_std=abs(m.extent_error_std - e.extent_error_std),
            heldout_trials=e.detection_trials,
            heldout_samples=e.sample_count))
    return out


# ---------------------------------------------------------------- file io

def model_text(model: ErrorModel) -> str:
    writer = blockfile.Writer()
    writer.comment("Perception error model.")
    if model.metadata:
        writer.block("meta", model.metadata)
    writer.block("binning", {
        "distance_edges": list(model.scheme.distance_edges),
        "tilt_edges": list(model.scheme.tilt_edges),
        "surfaces": list(model.scheme.surfaces),
    })
    for index, stats in enumerate(model.bins):
        writer.block("bin", {
            "distance_lo": stats.bin.distance_lo,
            "distance_hi": stats.bin.distance_hi,
            "tilt_lo": stats.bin.tilt_lo,
            "tilt_hi": stats.bin.tilt_hi,
            "surface": stats.bin.surface,
            "detection_probability": stats.detection_probability,
            "false_positive_rate": stats.false_positive_rate,
            "center_error_mean": list(stats.center_error_mean),
            "center_error_std": list(stats.center_error_std),
            "extent_error_mean": stats.extent_error_mean,
            "extent_error_std": stats.extent_error_std,
            "sample_count": stats.sample_count,
            "detection_trials": stats.detection_trials,
            "scan_count": stats.scan_count,
            "low_confidence": stats.low_confidence,
        }, label=str(index))
    return writer.text()


def write_model(model: ErrorModel, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(model_text(model))


def read_model(path: str) -> ErrorModel:
    doc = blockfile.parse_file(path)
    meta: dict[str, str] = {}
    meta_blocks = doc.blocks_of("meta")
    if meta_blocks:
        meta = {e.key: e.value for e in meta_blocks[0].entries}
    binning_blocks = doc.blocks_of("binning")
    if not binning_blocks:
        raise blockfile.BlockFormatError("missing binning block", doc.path)
    b = binning_blocks[0]
    scheme = BinScheme(
        distance_edges=tuple(b.require("distance_edges").as_float_list()),
        tilt_edges=tuple(b.require("tilt_edges").as_float_list()),
        surfaces=tuple(b.require("surfaces").as_list()))

    expected = scheme.bins()
    blocks = doc.blocks_of("bin")
    if len(blocks) != len(expected):
        raise blockfile.BlockFormatError(
            f"scheme defines {len(expected)} bins, file has {len(blocks)}",
            doc.path)
    return _read_bins(doc, scheme, expected, blocks, meta)


def _read_bins(doc, scheme, expected, blocks, meta) -> ErrorModel:
    by_index: dict[int, blockfile.Block] = {}
    for block in blocks:
        try:
            index = int(block.label)
        except (TypeError, ValueError):
            raise blockfile.BlockFormatError(
                f"bin label '{block.label}' is not an index",
                doc.path, block.line) from None
        by_index[index] = block
    stats = []
    for index, bin_ in enumerate(expected):
        block = by_index.get(index)
        if block is None:
            raise blockfile.BlockFormatError(
                f"missing bin {index}", doc.path)
        mean3 = block.require("center_error_mean").as_float_list()
        std3 = block.require("center_error_std").as_float_list()
        if len(mean3) != 3 or len(std3) != 3:
            raise blockfile.BlockFormatError(
                f"bin {index}: center error vectors must have 3 components",
                doc.path, block.line)
        stats.append(BinStats(
            bin=bin_,
            detection_probability=block.require(
                "detection_probability").as_float(),
            false_positive_rate=block.require(
                "false_positive_rate").as_float(),
            center_error_mean=tuple(mean3),
            center_error_std=tuple(std3),
            extent_error_mean=block.require("extent_error_mean").as_float(),
            extent_error_std=block.require("extent_error_std").as_float(),
            sample_count=block.require("sample_count").as_int(),
            detection_trials=block.require("detection_trials").as_int(),
            scan_count=block.require("scan_count").as_int(),
            low_confidence=block.require("low_confidence").as_bool()))
    return ErrorModel(scheme=scheme, bins=tuple(stats), metadata=meta)


RECORDS_HEADER = ["outcome", "distance_m", "tilt_deg", "surface", "scan_id",
                  "center_err_x", "center_err_y", "center_err_z",
                  "extent_err"]


def write_error_records(records: list[ErrorRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RECORDS_HEADER)
        for r in records:
            if r.outcome == "tp":
                ex, ey, ez = (repr(v) for v in r.center_error)
                ext = repr(r.extent_error)
            else:
                ex = ey = ez = ext = ""
            writer.writerow([r.outcome, repr(r.distance), repr(r.tilt),
                             r.surface, r.scan_id, ex, ey, ez, ext])


def read_error_records(path: str) -> list[ErrorRecord]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != RECORDS_HEADER:
            raise ValueError(f"{path}: unexpected records header {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                outcome = row[0]
                center = None
                extent = None
                if outcome == "tp":
                    center = (float(row[5]), float(row[6]), float(row[7]))
                    extent = float(row[8])
                out.append(ErrorRecord(
                    outcome=outcome, distance=float(row[1]),
                    tilt=float(row[2]), surface=row[3],
                    scan_id=int(row[4]), center_error=center,
                    extent_error=extent))
            except (ValueError, IndexError) as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
    return out


_GT_KEYS = {
    "class": "as_str",
    "center": "as_float_list",
    "extent": "as_float_list",
    "tilt": "as_float",
    "surface": "as_str",
    "paint": "as_str",
}


def write_ground_truth(objects: list[GroundTruthObject], path: str) -> None:
    writer = blockfile.Writer()
    writer.comment("Ground truth object list.")
    for obj in objects:
        writer.block("object", {
            "class": obj.class_label,
            "center": list(obj.center),
            "extent": list(obj.extent),
            "tilt": obj.tilt,
            "surface": obj.surface,
            "paint": obj.paint_code,
        }, label=obj.object_id)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(writer.text())


def read_ground_truth(path: str) -> list[GroundTruthObject]:
    doc = blockfile.parse_file(path)
    out = []
    for block in doc.blocks:
        if block.kind != "object":
            raise blockfile.BlockFormatError(
                f"unexpected block '{block.name()}'", doc.path, block.line)
        if not block.label:
            raise blockfile.BlockFormatError(
                "object block is missing its id label", doc.path, block.line)
        for entry in block.entries:
            if entry.key not in _GT_KEYS:
                raise blockfile.BlockFormatError(
                    f"unknown key '{entry.key}' in object '{block.label}'",
                    doc.path, entry.line)
        center = block.require("center").as_float_list()
        extent = block.require("extent").as_float_list()
        if len(center) != 3:
            raise blockfile.BlockFormatError(
                f"object '{block.label}': center must have 3 components",
                doc.path, block.line)
        if len(extent) != 2:
            raise blockfile.BlockFormatError(
                f"object '{block.label}': extent must have 2 components",
                doc.path, block.line)
        paint = block.find("paint")
        out.append(GroundTruthObject(
            object_id=block.label,
            class_label=block.require("class").as_str(),
            center=tuple(center), extent=tuple(extent),
            tilt=block.require("tilt").as_float(),
            surface=block.require("surface").as_str(),
            paint_code=paint.as_str() if paint else ""))
    return out


PERCEIVED_HEADER = ["matched_gt_id", "x", "y", "z", "extent",
                    "mean_intensity", "point_count"]


def write_perceived(objects: list[PerceivedObject], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(PERCEIVED_HEADER)
        for o in objects:
            writer.writerow([
                o.matched_gt_id or "", repr(o.center[0]), repr(o.center[1]),
                repr(o.center[2]), repr(o.extent), repr(o.mean_intensity),
                o.point_count])


def read_perceived(path: str) -> list[PerceivedObject]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != PERCEIVED_HEADER:
            raise ValueError(f"{path}: unexpected perceived header {header}")
        for row in reader:
            out.append(PerceivedObject(
                center=(float(row[1]), float(row[2]), float(row[3])),
                extent=float(row[4]), mean_intensity=float(row[5]),
                point_count=int(row[6]),
                matched_gt_id=row[0] or None))
    return out
