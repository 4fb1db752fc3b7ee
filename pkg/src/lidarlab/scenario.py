"""Scenario files: the declarative description of a test.

A scenario is a block file naming the sensor, the beam pattern, the panels
and, optionally, reflectance model overrides and an experiment sweep grid::

    scene_id = demo
    ambient_light_level = 400.0

    sensor {
        channels = 128
        azimuth_step = 0.2
    }

    beams {
        pattern = uniform
    }

    panel {
        paint = SB-Gloss
        center_distance = 10.0
        elevation_angle = 0.0
        surface = dry
    }

Unknown keys and unknown blocks are errors: a misspelled key must never be
silently ignored. Paints are resolved against the shipped default table
unless the file names its own with ``paint_table = path`` or defines inline
``paint <code> { ... }`` blocks (inline definitions win).
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from . import blockfile
from .paints import PAINT_KEYS, OPTIONAL_PAINT_KEYS, load_paint_table
from .reflectance import DEFAULT_PARAMS, ReflectanceParams
from .types import BeamTable, PaintParams, PanelSpec, Scene, SensorConfig
from .validation import validate_scene

DEFAULT_ANGLES = (0.0, 15.0, 30.0, 45.0, 60.0)
DEFAULT_DISTANCES = (5.0, 10.0, 20.0, 30.0)
DEFAULT_SURFACES = ("dry", "wet")
DEFAULT_RUNS = 3
# Shipped default seed: the demo configuration. Any seed is equally valid;
# this one shows the textbook trends without leaning on the slack margins.
DEFAULT_SEED = 16


class ScenarioError(ValueError):
    """Malformed or invalid scenario content."""


@dataclass(frozen=True)
class SweepGrid:
    """The full experiment grid: paints x angles x distances x surfaces,
    repeated runs times."""

    panel_codes: tuple[str, ...]
    angles: tuple[float, ...] = DEFAULT_ANGLES
    distances: tuple[float, ...] = DEFAULT_DISTANCES
    surfaces: tuple[str, ...] = DEFAULT_SURFACES
    runs: int = DEFAULT_RUNS
    seed: int = DEFAULT_SEED
    roi_margin: float = 0.05
    min_points: int = 10

    def cell_count(self) -> int:
        return (len(self.panel_codes) * len(self.angles)
                * len(self.distances) * len(self.surfaces) * self.runs)


@dataclass
class Scenario:
    """Everything a scenario file describes."""

    scene: Scene
    params: ReflectanceParams = field(default_factory=ReflectanceParams)
    grid: SweepGrid | None = None
    paints: dict[str, PaintParams] = field(default_factory=dict)
    path: str = "<text>"


_SENSOR_KEYS = {
    "channels": "as_int",
    "vfov_min": "as_float",
    "vfov_max": "as_float",
    "hfov": "as_float",
    "rotation_rpm": "as_float",
    "azimuth_step": "as_float",
    "return_mode": "as_str",
    "range_noise_sigma": "as_float",
    "intensity_noise_sigma": "as_float",
    "min_detectable_intensity": "as_float",
    "max_range": "as_float",
    "mount_height": "as_float",
}

_PANEL_KEYS = {
    "paint": "as_str",
    "side_length": "as_float",
    "center_distance": "as_float",
    "elevation_angle": "as_float",
    "surface": "as_str",
    "center_height": "as_float",
}

_MODEL_KEYS = {
    "diffuse_exponent": "as_float",
    "distance_curve": "as_str",
    "dropout_base": "as_float",
    "dropout_angle": "as_float",
    "dropout_range": "as_float",
    "dropout_range_start": "as_float",
    "wet_dropout_bonus": "as_float",
    "wet_dropout_min_angle": "as_float",
    "base_noise": "as_float",
    "spray_sigma": "as_float",
    "gloss_threshold": "as_float",
}

_SWEEP_KEYS = {
    "paints": "as_list",
    "angles": "as_float_list",
    "distances": "as_float_list",
    "surfaces": "as_list",
    "runs": "as_int",
    "seed": "as_int",
    "roi_margin": "as_float",
    "min_points": "as_int",
}

_TOP_KEYS = ("scene_id", "ambient_light_level", "paint_table")
_BLOCK_KINDS = ("sensor", "beams", "panel", "paint", "model", "sweep")


def read_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file."""
    doc = blockfile.parse_file(path)
    return _build(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def parse_scenario_text(text: str, base_dir: str = ".",
                        path: str = "<text>") -> Scenario:
    doc = blockfile.parse_text(text, path=path)
    return _build(doc, base_dir=base_dir)


def load_scenario(path: str) -> Scene:
    """The scene described by a scenario file.

    Raises ScenarioError on malformed content or invariant violations,
    naming the violated invariant.
    """
    return read_scenario(path).scene


def _build(doc: blockfile.Document, base_dir: str) -> Scenario:
    scene_id = "scene"
    ambient = 400.0
    table_path = None
    for entry in doc.entries:
        if entry.key == "scene_id":
            scene_id = entry.as_str()
        elif entry.key == "ambient_light_level":
            ambient = entry.as_float()
        elif entry.key == "paint_table":
            table_path = entry.as_str()
        else:
            raise ScenarioError(
                f"{doc.path}:{entry.line}: unknown key '{entry.key}'")

    for b in doc.blocks:
        if b.kind not in _BLOCK_KINDS:
            raise ScenarioError(
                f"{doc.path}:{b.line}: unknown block '{b.name()}'")

    try:
        if table_path is not None:
            table_path = os.path.join(base_dir, table_path)
        paints = load_paint_table(table_path)
    except blockfile.BlockFormatError as err:
        raise ScenarioError(str(err)) from err

    try:
        for b in doc.blocks_of("paint"):
            paint = _parse_inline_paint(b)
            paints[paint.panel_code] = paint
        sensor = _parse_sensor(doc)
        beams = _parse_beams(doc, sensor)
        panels = tuple(_parse_panel(b, paints) for b in doc.blocks_of("panel"))
        params = _parse_model(doc)
        grid = _parse_sweep(doc, paints)
    except blockfile.BlockFormatError as err:
        raise ScenarioError(str(err)) from err

    scene = Scene(sensor=sensor, beams=beams, panels=panels,
                  ambient_light_level=ambient, scene_id=scene_id)
    violations = validate_scene(scene)
    if violations:
        detail = "; ".join(str(v) for v in violations)
        raise ScenarioError(f"{doc.path}: invalid scene: {detail}")
    return Scenario(scene=scene, params=params, grid=grid,
                    paints=paints, path=doc.path)


def _one_block(doc: blockfile.Document, kind: str) -> blockfile.Block | None:
    blocks = doc.blocks_of(kind)
    if len(blocks) > 1:
        raise ScenarioError(
            f"{doc.path}:{blocks[1].line}: duplicate '{kind}' block")
    return blocks[0] if blocks else None


def _collect(block: blockfile.Block, schema: dict[str, str]) -> dict:
    values = {}
    for entry in block.entries:
        if entry.key not in schema:
            raise blockfile.BlockFormatError(
                f"unknown key '{entry.key}' in block '{block.name()}'",
                entry.path, entry.line)
        if entry.key in values:
            raise blockfile.BlockFormatError(
                f"duplicate key '{entry.key}' in block '{block.name()}'",
                entry.path, entry.line)
        values[entry.key] = getattr(entry, schema[entry.key])()
    return values


def _parse_sensor(doc: blockfile.Document) -> SensorConfig:
    block = _one_block(doc, "sensor")
    if block is None:
        return SensorConfig()
    return SensorConfig(**_collect(block, _SENSOR_KEYS))


def _parse_beams(doc: blockfile.Document, sensor: SensorConfig) -> BeamTable:
    block = _one_block(doc, "beams")
    if block is None:
        return BeamTable.uniform(sensor)
    pattern = block.find("pattern")
    elevations = block.find("elevations")
    for entry in block.entries:
        if entry.key not in ("pattern", "elevations"):
            raise blockfile.BlockFormatError(
                f"unknown key '{entry.key}' in block 'beams'",
                entry.path, entry.line)
    if pattern is not None and elevations is not None:
        raise blockfile.BlockFormatError(
            "beams block must set either 'pattern' or 'elevations', not both",
            block.path, block.line)
    if elevations is not None:
        return BeamTable(tuple(elevations.as_float_list()))
    name = pattern.as_str() if pattern is not None else "uniform"
    if name == "uniform":
        return BeamTable.uniform(sensor)
    if name == "dense-horizon":
        return BeamTable.dense_horizon(sensor)
    raise blockfile.BlockFormatError(
        f"unknown beam pattern '{name}'", pattern.path, pattern.line)


def _parse_panel(block: blockfile.Block,
                 paints: dict[str, PaintParams]) -> PanelSpec:
    values = _collect(block, _PANEL_KEYS)
    code = values.pop("paint", None)
    if code is None:
        raise blockfile.BlockFormatError(
            "panel block is missing required key 'paint'",
            block.path, block.line)
    if code not in paints:
        raise blockfile.BlockFormatError(
            f"unknown paint code '{code}'", block.path, block.line)
    return PanelSpec(paint=paints[code], **values)


def _parse_inline_paint(block: blockfile.Block) -> PaintParams:
    if not block.label:
        raise blockfile.BlockFormatError(
            "inline paint block is missing its panel code label",
            block.path, block.line)
    fields = _collect(block, PAINT_KEYS)
    for key in PAINT_KEYS:
        if key not in fields and key not in OPTIONAL_PAINT_KEYS:
            raise blockfile.BlockFormatError(
                f"paint '{block.label}' is missing key '{key}'",
                block.path, block.line)
    return PaintParams(panel_code=block.label, **fields)


def _parse_model(doc: blockfile.Document) -> ReflectanceParams:
    block = _one_block(doc, "model")
    if block is None:
        return DEFAULT_PARAMS
    values = _collect(block, _MODEL_KEYS)
    curve = values.pop("distance_curve", None)
    if curve is not None:
        breaks, gains = _parse_curve(curve, block)
        values["distance_breaks"] = breaks
        values["distance_gains"] = gains
    return ReflectanceParams(**values)


def _parse_curve(text: str, block: blockfile.Block):
    """distance_curve = 0:1 10:1 20:0.55 30:0.45"""
    breaks, gains = [], []
    for piece in text.split():
        try:
            r, g = piece.split(":")
            breaks.append(float(r))
            gains.append(float(g))
        except ValueError:
            raise blockfile.BlockFormatError(
                f"bad distance_curve entry '{piece}', expected range:gain",
                block.path, block.line) from None
    if sorted(breaks) != breaks:
        raise blockfile.BlockFormatError(
            "distance_curve breaks must be increasing",
            block.path, block.line)
    return tuple(breaks), tuple(gains)


def _parse_sweep(doc: blockfile.Document,
                 paints: dict[str, PaintParams]) -> SweepGrid | None:
    block = _one_block(doc, "sweep")
    if block is None:
        return None
    values = _collect(block, _SWEEP_KEYS)
    codes = values.pop("paints", None)
    if codes is None:
        codes = list(paints)
    for code in codes:
        if code not in paints:
            raise blockfile.BlockFormatError(
                f"sweep names unknown paint code '{code}'",
                block.path, block.line)
    for key in ("angles", "distances", "surfaces"):
        if key in values:
            values[key] = tuple(values[key])
    for surface in values.get("surfaces", DEFAULT_SURFACES):
        if surface not in ("dry", "wet"):
            raise blockfile.BlockFormatError(
                f"sweep surface '{surface}' must be dry or wet",
                block.path, block.line)
    return SweepGrid(panel_codes=tuple(codes), **values)


def serialize_scene(scene: Scene, include_identity: bool = True) -> str:
    """Canonical scenario text for a scene.

    Reparsing the output reproduces the scene field for field. Paints used
    by the panels are embedded inline so the text is self contained.
    """
    writer = blockfile.Writer()
    if include_identity:
        writer.entry("scene_id", scene.scene_id)
        writer.entry("ambient_light_level", scene.ambient_light_level)
    sensor = scene.sensor
    writer.block("sensor", {key: getattr(sensor, key) for key in _SENSOR_KEYS})
    writer.block("beams", {"elevations": list(scene.beams.elevations)})
    seen: dict[str, PaintParams] = {}
    for panel in scene.panels:
        seen.setdefault(panel.paint.panel_code, panel.paint)
    for code, paint in seen.items():
        writer.block("paint", {key: getattr(paint, key) for key in PAINT_KEYS},
                     label=code)
    for panel in scene.panels:
        writer.block("panel", {
            "paint": panel.paint.panel_code,
            "side_length": panel.side_length,
            "center_distance": panel.center_distance,
            "elevation_angle": panel.elevation_angle,
            "surface": panel.surface,
            "center_height": panel.center_height,
        })
    return writer.text()


def config_hash(scene: Scene) -> str:
    """Stable hash of the physically effective configuration.

    Identity fields (scene_id) and fields with no effect on the measurement
    (ambient light) are excluded, so two runs that cannot differ share a hash.
    """
    text = serialize_scene(scene, include_identity=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
