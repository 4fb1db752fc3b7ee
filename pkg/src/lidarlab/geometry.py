"""Beam generation and ray-rectangle intersection.

Everything lives in the sensor frame: the sensor sits at the origin, the
boresight is +x, +y is to the left and +z is up. Azimuth is measured in
degrees from +x toward +y; elevation in degrees above the horizontal plane.
A panel at elevation_angle zero faces the sensor square on; tilting rotates
the panel about the horizontal axis through its centre, top edge moving away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .types import BeamTable, PanelSpec, SensorConfig

PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class Beam:
    """One firing direction."""

    channel: int
    azimuth: float       # degrees
    elevation: float     # degrees
    direction: tuple[float, float, float]


@dataclass(frozen=True)
class Hit:
    """A beam striking a panel."""

    panel_index: int
    range: float                 # metres along the beam, noise free
    incidence_angle: float       # degrees from the panel normal
    point: tuple[float, float, float]


def direction_from(elevation_deg: float, azimuth_deg: float) -> tuple[float, float, float]:
    e = math.radians(elevation_deg)
    a = math.radians(azimuth_deg)
    return (math.cos(e) * math.cos(a), math.cos(e) * math.sin(a), math.sin(e))


def generate_beams(config: SensorConfig, table: BeamTable) -> list[Beam]:
    """The full firing pattern for one revolution, ordered by
    (azimuth step, channel)."""
    if len(table.elevations) != config.channels:
        raise ValueError(
            f"beam table has {len(table.elevations)} elevations for "
            f"{config.channels} channels")
    beams = []
    steps = config.azimuth_steps()
    for i in range(steps):
        azimuth = i * config.azimuth_step
        for channel, elevation in enumerate(table.elevations):
            beams.append(Beam(channel, azimuth, elevation,
                              direction_from(elevation, azimuth)))
    return beams


def panel_frame(panel: PanelSpec, mount_height: float | None = None):
    """Centre, in-plane axes and unit normal of a panel.

    Returns (center, u, v, normal) where u points along the panel's width,
    v up its (tilted) height and the normal faces the sensor. mount_height
    None places the panel centre at sensor height.
    """
    dz = 0.0 if mount_height is None else panel.center_height - mount_height
    t = math.radians(panel.elevation_angle)
    center = np.array([panel.center_distance, 0.0, dz])
    u = np.array([0.0, 1.0, 0.0])
    v = np.array([math.sin(t), 0.0, math.cos(t)])
    normal = np.array([-math.cos(t), 0.0, math.sin(t)])
    return center, u, v, normal


def intersect(beam: Beam, panel: PanelSpec,
              mount_height: float | None = None,
              max_range: float = math.inf,
              panel_index: int = 0) -> Hit | None:
    """Analytic ray-rectangle intersection, None on a miss."""
    center, u, v, normal = panel_frame(panel, mount_height)
    d = np.asarray(beam.direction, dtype=float)
    denom = float(d @ normal)
    if abs(denom) < PARALLEL_EPS:
        return None
    t = float(center @ normal) / denom
    if t <= 0.0 or t > max_range:
        return None
    point = d * t
    offset = point - center
    half = panel.side_length / 2.0
    if abs(float(offset @ u)) > half or abs(float(offset @ v)) > half:
        return None
    incidence = math.degrees(math.acos(min(1.0, abs(denom))))
    return Hit(panel_index, t, incidence, tuple(float(c) for c in point))


def intersect_grid(directions: np.ndarray, panel: PanelSpec,
                   mount_height: float | None = None,
                   max_range: float = math.inf):
    """Vector form of intersect for an (n, 3) array of unit directions.

    Returns (ranges, cos_incidence) with ranges set to +inf on misses.
    """
    center, u, v, normal = panel_frame(panel, mount_height)
    denom = directions @ normal
    safe = np.where(np.abs(denom) < PARALLEL_EPS, PARALLEL_EPS, denom)
    t = (center @ normal) / safe
    lu = t * (directions @ u) - (center @ u)
    lv = t * (directions @ v) - (center @ v)
    half = panel.side_length / 2.0
    ok = ((np.abs(denom) >= PARALLEL_EPS)
          & (t > 0.0) & (t <= max_range)
          & (np.abs(lu) <= half) & (np.abs(lv) <= half))
    ranges = np.where(ok, t, np.inf)
    return ranges, np.abs(denom)


def angular_footprint(panel: PanelSpec) -> tuple[float, float]:
    """Apparent (azimuth, elevation) extent of a panel in degrees.

    The tilt shrinks the projected height by cos(tilt); the width is
    unaffected because the pivot axis is horizontal.
    """
    half = panel.side_length / 2.0
    d = panel.center_distance
    az = 2.0 * math.degrees(math.atan2(half, d))
    el = 2.0 * math.degrees(math.atan2(
        half * math.cos(math.radians(panel.elevation_angle)), d))
    return az, el


def azimuth_interval(panel: PanelSpec, pad_deg: float = 1.0) -> tuple[float, float] | None:
    """Conservative azimuth interval containing every beam that can hit the
    panel, or None when no bound can be established.

    Uses exact corner azimuths: the tilt pulls the bottom corners toward the
    sensor, widening the apparent extent, so the small-angle footprint alone
    would not be safe here.
    """
    half = panel.side_length / 2.0
    sin_t = math.sin(math.radians(panel.elevation_angle))
    x_near = panel.center_distance - half * abs(sin_t)
    if x_near <= 0.0:
        return None
    a = math.degrees(math.atan2(half, x_near)) + pad_deg
    return (-a, a)
