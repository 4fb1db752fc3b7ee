"""One-revolution scan simulation.

The revolution is processed in fixed azimuth blocks of roughly 30 degrees.
Each block draws its randomness from a stream named (seed, "az<block>"), in
a fixed order (dropout uniforms, intensity normals, range normals), so the
result is bit-identical however blocks are scheduled across workers. Blocks
whose azimuth sector provably cannot contain a panel are skipped outright;
their streams are never consumed, which leaves the output unchanged.
"""
from __future__ import annotations

import numpy as np

from .geometry import azimuth_interval, intersect_grid
from .reflectance import DEFAULT_PARAMS, ReflectanceParams, distribution_arrays
from .streams import RandomStream
from .types import LidarPoint, PointCloud, Scene
from .validation import require_valid

BLOCK_TARGET_DEG = 30.0
CULL_PAD_DEG = 1.0

# Direction grids depend only on the firing pattern, so they are cached and
# shared by every scan in the process (workers rebuild their own copy).
_GRID_CACHE: dict = {}


def _direction_grid(elevations: tuple[float, ...], azimuth_step: float,
                    n_steps: int):
    key = (elevations, azimuth_step, n_steps)
    hit = _GRID_CACHE.get(key)
    if hit is not None:
        return hit
    azimuths = np.arange(n_steps) * azimuth_step
    az = np.radians(azimuths)
    el = np.radians(np.asarray(elevations))
    cos_el = np.cos(el)
    # (steps, channels, 3), azimuth-major to match firing order.
    dirs = np.empty((n_steps, len(elevations), 3))
    dirs[:, :, 0] = np.cos(az)[:, None] * cos_el[None, :]
    dirs[:, :, 1] = np.sin(az)[:, None] * cos_el[None, :]
    dirs[:, :, 2] = np.sin(el)[None, :]
    value = (azimuths, dirs)
    _GRID_CACHE[key] = value
    return value


def _cull_bound(scene: Scene) -> float | None:
    """Half-width in degrees of the azimuth band containing every possible
    hit, or None when no bound can be established."""
    bound = 0.0
    for panel in scene.panels:
        interval = azimuth_interval(panel, pad_deg=CULL_PAD_DEG)
        if interval is None:
            return None
        bound = max(bound, interval[1])
    return bound


def scan(scene: Scene, stream: RandomStream,
         params: ReflectanceParams = DEFAULT_PARAMS,
         revolution_index: int = 0) -> PointCloud:
    """Simulate one revolution and return the strongest-return cloud.

    Points come out ordered by (azimuth step, channel). Identical scene and
    stream always produce an identical cloud.
    """
    require_valid(scene)
    sensor = scene.sensor
    cloud = PointCloud(points=[], revolution_index=revolution_index,
                       scene_id=scene.scene_id)
    if not scene.panels:
        return cloud

    n_steps = sensor.azimuth_steps()
    azimuths, dirs = _direction_grid(
        scene.beams.elevations, sensor.azimuth_step, n_steps)
    block_steps = max(1, int(round(BLOCK_TARGET_DEG / sensor.azimuth_step)))
    n_blocks = (n_steps + block_steps - 1) // block_steps

    bound = _cull_bound(scene)
    step_pad = 2.0 * sensor.azimuth_step

    for block in range(n_blocks):
        i0 = block * block_steps
        i1 = min(n_steps, i0 + block_steps)
        if bound is not None:
            lo = azimuths[i0] - step_pad
            hi = azimuths[i1 - 1] + step_pad
            # Panels sit on the boresight, so their band is [-bound, bound]
            # which wraps to [0, bound] + [360 - bound, 360).
            if lo > bound and hi < 360.0 - bound:
                continue
        _scan_block(scene, params, stream, block, i0, i1,
                    azimuths, dirs, cloud)
    return cloud


def _scan_block(scene: Scene, params: ReflectanceParams, stream: RandomStream,
                block: int, i0: int, i1: int,
                azimuths: np.ndarray, dirs: np.ndarray,
                cloud: PointCloud) -> None:
    sensor = scene.sensor
    channels = sensor.channels
    block_dirs = dirs[i0:i1].reshape(-1, 3)
    n = block_dirs.shape[0]

    rng = stream.child(f"az{block:04d}").generator()
    u = rng.random(n)
    z_int = rng.standard_normal(n)
    z_rng = rng.standard_normal(n)

    ranges = np.full((len(scene.panels), n), np.inf)
    cos_inc = np.zeros((len(scene.panels), n))
    for p, panel in enumerate(scene.panels):
        ranges[p], cos_inc[p] = intersect_grid(
            block_dirs, panel, sensor.mount_height, sensor.max_range)
    nearest = np.argmin(ranges, axis=0)
    rng_true = ranges[nearest, np.arange(n)]
    valid = np.isfinite(rng_true)
    if not valid.any():
        return

    mean = np.zeros(n)
    std = np.zeros(n)
    drop = np.ones(n)
    incidence = np.degrees(np.arccos(
        np.clip(cos_inc[nearest, np.arange(n)], 0.0, 1.0)))
    for p, panel in enumerate(scene.panels):
        mask = valid & (nearest == p)
        if not mask.any():
            continue
        m, s, dp = distribution_arrays(
            panel.paint, incidence[mask], rng_true[mask],
            panel.surface == "wet", params,
            base_noise=sensor.intensity_noise_sigma)
        mean[mask] = m
        std[mask] = s
        drop[mask] = dp

    keep = valid & (u >= drop)
    intensity = np.rint(np.clip(
        mean + std * np.clip(z_int, -3.0, 3.0), 0.0, 255.0))
    keep &= intensity >= sensor.min_detectable_intensity

    noisy = rng_true + sensor.range_noise_sigma * np.clip(z_rng, -4.0, 4.0)
    noisy = np.maximum(noisy, 1e-9)

    kept = np.flatnonzero(keep)
    if kept.size == 0:
        return
    pos = block_dirs[kept] * noisy[kept, None]
    az_index = i0 + kept // channels
    chan = kept % channels
    az_vals = azimuths[az_index]
    inten = intensity[kept].astype(int)
    rng_out = noisy[kept]
    points = cloud.points
    for k in range(kept.size):
        points.append(LidarPoint(
            x=float(pos[k, 0]), y=float(pos[k, 1]), z=float(pos[k, 2]),
            intensity=int(inten[k]), channel=int(chan[k]),
            azimuth=float(az_vals[k]), range=float(rng_out[k])))
