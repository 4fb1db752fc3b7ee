"""Scene invariant checking.

validate_scene is total: it never raises on any constructible Scene, it
returns every violation it finds as data. Callers that need a hard failure
(the loader, the scanner) wrap the result in InvalidSceneError.
"""
from __future__ import annotations

import math

from .geometry import angular_footprint, azimuth_interval
from .types import RETURN_MODES, SURFACES, PanelSpec, Scene, Violation


class InvalidSceneError(ValueError):
    """A scene failed validation; carries the individual violations."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"invalid scene: {lines}")


def validate_scene(scene: Scene) -> list[Violation]:
    """Check every invariant of a scene, returning all violations."""
    out: list[Violation] = []
    out.extend(_check_sensor(scene))
    out.extend(_check_beams(scene))
    for index, panel in enumerate(scene.panels):
        out.extend(_check_panel(panel, index))
    out.extend(_check_overlaps(scene))
    if scene.ambient_light_level < 0:
        out.append(Violation("Scene", "ambient_light_level",
                             "must be non-negative"))
    return out


def require_valid(scene: Scene) -> None:
    violations = validate_scene(scene)
    if violations:
        raise InvalidSceneError(violations)


def _check_sensor(scene: Scene) -> list[Violation]:
    s = scene.sensor
    out = []

    def bad(field, message):
        out.append(Violation("SensorConfig", field, message))

    if s.channels < 1:
        bad("channels", f"must be at least 1, got {s.channels}")
    if not s.vfov_min < s.vfov_max:
        bad("vfov_min", f"vertical field of view empty: "
            f"[{s.vfov_min}, {s.vfov_max}]")
    if not 0.0 < s.hfov <= 360.0:
        bad("hfov", f"must be in (0, 360], got {s.hfov}")
    if s.azimuth_step <= 0.0:
        bad("azimuth_step", f"must be positive, got {s.azimuth_step}")
    else:
        ratio = s.hfov / s.azimuth_step
        if abs(ratio - round(ratio)) > 1e-6:
            bad("azimuth_step",
                f"{s.azimuth_step} does not divide hfov {s.hfov} into "
                f"whole steps")
    if s.rotation_rpm <= 0.0:
        bad("rotation_rpm", f"must be positive, got {s.rotation_rpm}")
    if s.return_mode not in RETURN_MODES:
        bad("return_mode", f"must be one of {RETURN_MODES}, "
            f"got '{s.return_mode}'")
    if s.range_noise_sigma < 0.0:
        bad("range_noise_sigma", "must be non-negative")
    if s.intensity_noise_sigma < 0.0:
        bad("intensity_noise_sigma", "must be non-negative")
    if not 0.0 <= s.min_detectable_intensity <= 255.0:
        bad("min_detectable_intensity",
            f"must be within [0, 255], got {s.min_detectable_intensity}")
    if s.max_range <= 0.0:
        bad("max_range", f"must be positive, got {s.max_range}")
    return out


def _check_beams(scene: Scene) -> list[Violation]:
    table = scene.beams
    sensor = scene.sensor
    out = []
    if len(table.elevations) != sensor.channels:
        out.append(Violation(
            "BeamTable", "elevations",
            f"has {len(table.elevations)} entries for {sensor.channels} "
            f"channels"))
    prev = None
    for i, elev in enumerate(table.elevations):
        if not sensor.vfov_min <= elev <= sensor.vfov_max:
            out.append(Violation(
                "BeamTable", f"elevations[{i}]",
                f"{elev} outside [{sensor.vfov_min}, {sensor.vfov_max}]"))
        if prev is not None and elev <= prev:
            out.append(Violation(
                "BeamTable", f"elevations[{i}]",
                f"{elev} not strictly above previous {prev}"))
        prev = elev
    return out


def _check_panel(panel: PanelSpec, index: int) -> list[Violation]:
    name = f"panels[{index}]"
    out = []

    def bad(field, message):
        out.append(Violation("PanelSpec", f"{name}.{field}", message))

    if panel.side_length <= 0.0:
        bad("side_length", f"must be positive, got {panel.side_length}")
    if panel.center_distance <= 0.0:
        bad("center_distance", f"must be positive, got {panel.center_distance}")
    if not 0.0 <= panel.elevation_angle < 90.0:
        bad("elevation_angle",
            f"elevation_angle out of range [0, 90), got {panel.elevation_angle}")
    if panel.surface not in SURFACES:
        bad("surface", f"must be one of {SURFACES}, got '{panel.surface}'")
    p = panel.paint
    if not 0.0 <= p.base_reflectivity <= 1.0:
        bad("paint.base_reflectivity",
            f"{p.base_reflectivity} outside [0, 1]")
    if not 0.0 <= p.specular_weight <= 1.0:
        bad("paint.specular_weight", f"{p.specular_weight} outside [0, 1]")
    if p.base_reflectivity + p.specular_weight > 1.0:
        bad("paint", "base_reflectivity + specular_weight exceeds 1")
    return out


def _check_overlaps(scene: Scene) -> list[Violation]:
    """Panels must not overlap in angular extent as seen from the sensor."""
    spans = []
    for panel in scene.panels:
        az = azimuth_interval(panel, pad_deg=0.0)
        if az is None:
            az = (-180.0, 180.0)
        dz = panel.center_height - scene.sensor.mount_height
        center_el = math.degrees(math.atan2(dz, panel.center_distance))
        _, el_extent = angular_footprint(panel)
        spans.append((az, (center_el - el_extent / 2.0,
                           center_el + el_extent / 2.0)))
    out = []
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            (az1, el1), (az2, el2) = spans[i], spans[j]
            if _intersects(az1, az2) and _intersects(el1, el2):
                out.append(Violation(
                    "Scene", f"panels[{i}]",
                    f"overlaps panels[{j}] in angular extent"))
    return out


def _intersects(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] < b[1] and b[0] < a[1]
