"""Core domain types for the panel test rig simulator.

All configuration types are frozen dataclasses: scenes are immutable values,
so they can be shared freely between worker processes. Construction does not
validate cross-field invariants; that is the job of validate_scene, which
reports every violation instead of stopping at the first.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RETURN_MODES = ("strongest",)
SURFACES = ("dry", "wet")
FINISHES = ("gloss", "matte")


@dataclass(frozen=True)
class SensorConfig:
    """Spinning multi-channel sensor description.

    Defaults model a 128 channel unit sweeping 360 degrees at 540 rpm with
    a 40 degree vertical field of view, reporting the strongest return with
    8-bit intensity.
    """

    channels: int = 128
    vfov_min: float = -25.0
    vfov_max: float = 15.0
    hfov: float = 360.0
    rotation_rpm: float = 540.0
    azimuth_step: float = 0.2
    return_mode: str = "strongest"
    range_noise_sigma: float = 0.02
    intensity_noise_sigma: float = 4.0
    min_detectable_intensity: float = 1.0
    max_range: float = 120.0
    mount_height: float = 1.0

    def azimuth_steps(self) -> int:
        return int(round(self.hfov / self.azimuth_step))


@dataclass(frozen=True)
class BeamTable:
    """Per-channel elevation angles, strictly increasing, in degrees."""

    elevations: tuple[float, ...]

    @staticmethod
    def uniform(config: SensorConfig) -> "BeamTable":
        values = np.linspace(config.vfov_min, config.vfov_max, config.channels)
        return BeamTable(tuple(float(v) for v in values))

    @staticmethod
    def dense_horizon(config: SensorConfig,
                      band: tuple[float, float] = (-4.0, 4.0)) -> "BeamTable":
        """Half the channels packed into a band around the horizon, the rest
        spread over the remaining field proportionally to its span."""
        lo = max(config.vfov_min, band[0])
        hi = min(config.vfov_max, band[1])
        if not lo < hi or config.channels < 4:
            return BeamTable.uniform(config)
        dense_n = config.channels // 2
        rest = config.channels - dense_n
        span_below = lo - config.vfov_min
        span_above = config.vfov_max - hi
        total = span_below + span_above
        below_n = int(round(rest * span_below / total)) if total > 0 else 0
        above_n = rest - below_n
        parts = []
        if below_n:
            parts.append(np.linspace(config.vfov_min, lo, below_n, endpoint=False))
        parts.append(np.linspace(lo, hi, dense_n, endpoint=False))
        if above_n:
            parts.append(np.linspace(hi, config.vfov_max, above_n, endpoint=True))
        values = np.concatenate(parts)
        return BeamTable(tuple(float(v) for v in values))


@dataclass(frozen=True)
class PaintParams:
    """Optical parameters of one paint, keyed by its panel code."""

    panel_code: str
    color: str
    finish: str                  # gloss | matte
    metallic: bool
    functionalised: bool
    base_reflectivity: float     # diffuse albedo in [0, 1]
    specular_weight: float       # gloss lobe weight in [0, 1]
    specular_exponent: float     # gloss lobe sharpness, >= 1
    wet_variance_factor: float = 1.5
    wet_mean_shift: float = 0.0


@dataclass(frozen=True)
class PanelSpec:
    """A square test panel facing the sensor, tilted about its horizontal
    centre axis by elevation_angle degrees."""

    paint: PaintParams
    side_length: float = 0.5
    center_distance: float = 10.0
    elevation_angle: float = 0.0
    surface: str = "dry"
    center_height: float = 1.0


@dataclass(frozen=True)
class Scene:
    """One test configuration: a sensor, its beam table and some panels."""

    sensor: SensorConfig
    beams: BeamTable
    panels: tuple[PanelSpec, ...] = ()
    ambient_light_level: float = 400.0   # lux, informational only
    scene_id: str = "scene"


@dataclass(frozen=True)
class LidarPoint:
    """A single strongest-return sample in the sensor frame."""

    x: float
    y: float
    z: float
    intensity: int       # quantized, 0..255
    channel: int
    azimuth: float       # degrees, [0, 360)
    range: float         # metres, noisy


@dataclass
class PointCloud:
    """One revolution worth of returns, ordered by (azimuth, channel)."""

    points: list[LidarPoint] = field(default_factory=list)
    revolution_index: int = 0
    scene_id: str = "scene"

    def __len__(self) -> int:
        return len(self.points)

    def positions(self) -> np.ndarray:
        """(n, 3) array of point coordinates."""
        if not self.points:
            return np.zeros((0, 3))
        return np.array([(p.x, p.y, p.z) for p in self.points])

    def intensities(self) -> np.ndarray:
        return np.array([p.intensity for p in self.points], dtype=float)


@dataclass(frozen=True)
class Violation:
    """One failed invariant, as data."""

    type_name: str
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.type_name}.{self.field}: {self.message}"
