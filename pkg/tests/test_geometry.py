import math

import numpy as np
import pytest

from lidarlab.geometry import (Beam, angular_footprint, azimuth_interval,
                               direction_from, generate_beams, intersect,
                               intersect_grid, panel_frame)
from lidarlab.types import BeamTable, PaintParams, PanelSpec, SensorConfig

PAINT = PaintParams(panel_code="T", color="grey", finish="matte",
                    metallic=False, functionalised=False,
                    base_reflectivity=0.5, specular_weight=0.0,
                    specular_exponent=1.0)


def make_beam(elevation, azimuth):
    return Beam(0, azimuth, elevation, direction_from(elevation, azimuth))


def test_beam_count_default_sensor():
    config = SensorConfig()
    beams = generate_beams(config, BeamTable.uniform(config))
    assert len(beams) == 128 * 1800 == 230_400


def test_beam_ordering_and_spacing():
    config = SensorConfig(channels=2, vfov_min=-1.0, vfov_max=1.0, hfov=360.0,
                          azimuth_step=90.0)
    beams = generate_beams(config, BeamTable.uniform(config))
    assert len(beams) == 8
    assert [b.azimuth for b in beams] == [0, 0, 90, 90, 180, 180, 270, 270]
    assert [b.channel for b in beams] == [0, 1] * 4
    # direction of the boresight beam
    assert beams[0].direction[0] == pytest.approx(math.cos(math.radians(1.0)))


def test_beam_table_size_mismatch():
    config = SensorConfig(channels=4)
    with pytest.raises(ValueError):
        generate_beams(config, BeamTable(elevations=(0.0, 1.0)))


def test_boresight_hit_range_and_incidence():
    panel = PanelSpec(paint=PAINT, side_length=0.5, center_distance=10.0)
    hit = intersect(make_beam(0.0, 0.0), panel)
    assert hit is not None
    assert hit.range == pytest.approx(10.0, abs=1e-12)
    assert hit.incidence_angle == pytest.approx(0.0, abs=1e-9)
    assert hit.point == pytest.approx((10.0, 0.0, 0.0))


@pytest.mark.parametrize("tilt", [0.0, 15.0, 30.0, 45.0, 60.0, 75.0])
def test_boresight_incidence_equals_tilt(tilt):
    panel = PanelSpec(paint=PAINT, center_distance=5.0, elevation_angle=tilt)
    hit = intersect(make_beam(0.0, 0.0), panel)
    assert hit is not None
    assert hit.incidence_angle == pytest.approx(tilt, abs=1e-6)


def test_miss_outside_rectangle():
    panel = PanelSpec(paint=PAINT, side_length=0.5, center_distance=10.0)
    # 0.25 m half side at 10 m is ~1.43 degrees
    assert intersect(make_beam(0.0, 2.0), panel) is None
    assert intersect(make_beam(2.0, 0.0), panel) is None
    assert intersect(make_beam(0.0, 1.0), panel) is not None


def test_parallel_and_behind():
    panel = PanelSpec(paint=PAINT, center_distance=10.0, elevation_angle=90.0)
    # panel tilted fully flat: boresight is parallel to the surface
    assert intersect(make_beam(0.0, 0.0), panel) is None
    back = PanelSpec(paint=PAINT, center_distance=10.0)
    assert intersect(make_beam(0.0, 180.0), back) is None


def test_max_range_cut():
    panel = PanelSpec(paint=PAINT, center_distance=10.0)
    assert intersect(make_beam(0.0, 0.0), panel, max_range=9.0) is None
    assert intersect(make_beam(0.0, 0.0), panel, max_range=10.5) is not None


def test_tilted_hit_point_lies_on_plane():
    panel = PanelSpec(paint=PAINT, center_distance=8.0, elevation_angle=40.0)
    hit = intersect(make_beam(1.0, 0.5), panel)
    assert hit is not None
    center, u, v, normal = panel_frame(panel)
    offset = np.array(hit.point) - center
    assert abs(float(offset @ normal)) < 1e-9
    assert abs(float(offset @ u)) <= panel.side_length / 2
    assert abs(float(offset @ v)) <= panel.side_length / 2


def test_footprint_closed_forms():
    panel = PanelSpec(paint=PAINT, side_length=1.0, center_distance=5.0)
    az, el = angular_footprint(panel)
    expect = 2 * math.degrees(math.atan2(0.5, 5.0))
    assert az == pytest.approx(expect)       # ~11.42 degrees
    assert el == pytest.approx(expect)
    tilted = PanelSpec(paint=PAINT, side_length=1.0, center_distance=5.0,
                       elevation_angle=60.0)
    az_t, el_t = angular_footprint(tilted)
    assert az_t == pytest.approx(az)
    assert el_t == pytest.approx(2 * math.degrees(math.atan2(0.25, 5.0)))


def test_footprint_small_panel():
    panel = PanelSpec(paint=PAINT, side_length=0.5, center_distance=15.0)
    az, _ = angular_footprint(panel)
    assert az == pytest.approx(1.90968, abs=1e-4)


def test_azimuth_interval_contains_all_hits():
    rng = np.random.default_rng(5)
    for _ in range(50):
        panel = PanelSpec(
            paint=PAINT,
            side_length=float(rng.uniform(0.2, 2.0)),
            center_distance=float(rng.uniform(1.0, 30.0)),
            elevation_angle=float(rng.uniform(0.0, 80.0)))
        interval = azimuth_interval(panel, pad_deg=0.0)
        if interval is None:
            continue
        lo, hi = interval
        for az in np.linspace(-30, 30, 121):
            for el in np.linspace(-10, 10, 21):
                hit = intersect(make_beam(float(el), float(az)), panel)
                if hit is not None:
                    assert lo <= az <= hi


def test_grid_matches_scalar_intersect():
    panel = PanelSpec(paint=PAINT, center_distance=12.0, elevation_angle=35.0)
    beams = [make_beam(e, a) for e in np.linspace(-4, 4, 17)
             for a in np.linspace(-4, 4, 17)]
    dirs = np.array([b.direction for b in beams])
    ranges, cos_inc = intersect_grid(dirs, panel)
    for i, beam in enumerate(beams):
        hit = intersect(beam, panel)
        if hit is None:
            assert math.isinf(ranges[i])
        else:
            assert ranges[i] == pytest.approx(hit.range, abs=1e-12)
            inc = math.degrees(math.acos(min(1.0, cos_inc[i])))
            assert inc == pytest.approx(hit.incidence_angle, abs=1e-9)


# ---------------------------------------------------------------- oracle

def bisect_range(direction, panel, lo=0.0, hi=100.0, iters=200):
    """Range oracle: bisection on the signed plane distance along the ray."""
    center, _, _, normal = panel_frame(panel)
    d = np.asarray(direction)

    def f(t):
        return float((d * t - center) @ normal)

    if f(lo) == 0.0:
        return lo
    if f(lo) * f(hi) > 0:
        return None
    for _ in range(iters):
        mid = (lo + hi) / 2.0
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2.0


def oracle_incidence(direction, panel):
    _, _, _, normal = panel_frame(panel)
    d = np.asarray(direction)
    cross = np.linalg.norm(np.cross(d, normal))
    dot = abs(float(d @ normal))
    return math.degrees(math.atan2(cross, dot))


def test_thousand_case_bisection_oracle():
    rng = np.random.default_rng(2024)
    checked = 0
    tries = 0
    while checked < 1000:
        tries += 1
        assert tries < 20_000
        panel = PanelSpec(
            paint=PAINT,
            side_length=float(rng.uniform(0.2, 3.0)),
            center_distance=float(rng.uniform(1.0, 40.0)),
            elevation_angle=float(rng.uniform(0.0, 85.0)))
        az, el = angular_footprint(panel)
        beam = make_beam(float(rng.uniform(-el, el)),
                         float(rng.uniform(-az, az)))
        hit = intersect(beam, panel)
        if hit is None:
            continue
        expected = bisect_range(beam.direction, panel)
        assert expected is not None
        assert abs(hit.range - expected) <= 1e-9
        assert abs(hit.incidence_angle
                   - oracle_incidence(beam.direction, panel)) <= 1e-6
        checked += 1
