import math

import numpy as np
import pytest

from lidarlab import blockfile
from lidarlab.paints import (PaintTableWarning, default_table_text,
                             load_paint_table, serialize_paint_table)
from lidarlab.reflectance import (DEFAULT_PARAMS, IntensityDistribution,
                                  ReflectanceParams, ReflectanceQuery,
                                  distance_gain, distribution_arrays,
                                  expected_intensity, quantize,
                                  sample_intensity)
from lidarlab.streams import RandomStream
from lidarlab.types import PaintParams

MATTE = PaintParams(panel_code="M", color="grey", finish="matte",
                    metallic=False, functionalised=False,
                    base_reflectivity=0.8, specular_weight=0.0,
                    specular_exponent=1.0)
GLOSSY = PaintParams(panel_code="G", color="black", finish="gloss",
                     metallic=False, functionalised=False,
                     base_reflectivity=0.3, specular_weight=0.1,
                     specular_exponent=20.0)


def mean_at(paint, angle=0.0, rng=5.0, surface="dry"):
    return expected_intensity(ReflectanceQuery(paint, angle, rng, surface)).mean


def test_matte_normal_incidence_closed_form():
    # 255 * 0.8 at g(r) = 1
    assert mean_at(MATTE) == pytest.approx(204.0)


def test_lambertian_cosine_factor():
    assert mean_at(MATTE, angle=60.0) == pytest.approx(102.0)
    expected = 255 * 0.8 * math.cos(math.radians(30.0))
    assert mean_at(MATTE, angle=30.0) == pytest.approx(expected)


def test_specular_lobe_collapses_off_axis():
    on = mean_at(GLOSSY, angle=0.0)
    off = mean_at(GLOSSY, angle=45.0)
    assert on == pytest.approx(255 * 0.4)
    lobe_at_45 = 0.1 * math.cos(math.radians(45.0)) ** 20
    assert lobe_at_45 < 1e-3
    assert off == pytest.approx(255 * (0.3 * math.cos(math.radians(45.0))
                                       + lobe_at_45))


def test_distance_gain_knots_and_interpolation():
    assert distance_gain(0.0) == 1.0
    assert distance_gain(5.0) == 1.0
    assert distance_gain(10.0) == 1.0
    assert distance_gain(20.0) == pytest.approx(0.55)
    assert distance_gain(30.0) == pytest.approx(0.45)
    assert distance_gain(15.0) == pytest.approx(0.775)
    assert distance_gain(25.0) == pytest.approx(0.5)
    # held flat beyond the last knot
    assert distance_gain(50.0) == pytest.approx(0.45)


def test_mean_angle_monotone_and_knee_shape():
    angles = np.linspace(0, 85, 200)
    means = [mean_at(MATTE, angle=a) for a in angles]
    assert all(b <= a + 1e-12 for a, b in zip(means, means[1:]))
    m5, m10, m20 = (mean_at(MATTE, rng=r) for r in (5.0, 10.0, 20.0))
    assert m5 == m10
    assert m10 - m20 > (m5 - m10)


def test_mean_clamped_to_byte_range():
    bright = PaintParams(panel_code="B", color="white", finish="gloss",
                         metallic=False, functionalised=True,
                         base_reflectivity=0.95, specular_weight=0.05,
                         specular_exponent=1.0)
    params = ReflectanceParams(distance_breaks=(0.0,), distance_gains=(1.2,))
    mean, _, _ = distribution_arrays(bright, 0.0, 1.0, wet=False, params=params)
    assert float(mean) == 255.0


def test_wet_shifts_mean_and_scales_std():
    shifted = PaintParams(panel_code="W", color="grey", finish="matte",
                          metallic=False, functionalised=False,
                          base_reflectivity=0.5, specular_weight=0.0,
                          specular_exponent=1.0, wet_variance_factor=1.5,
                          wet_mean_shift=-2.0)
    dry = expected_intensity(ReflectanceQuery(shifted, 10.0, 5.0, "dry"))
    wet = expected_intensity(ReflectanceQuery(shifted, 10.0, 5.0, "wet"))
    assert wet.mean == pytest.approx(dry.mean - 2.0)
    assert wet.std == pytest.approx(dry.std * 1.5)
    assert abs(wet.mean - dry.mean) <= 5.0


def test_dropout_terms():
    dist = expected_intensity(ReflectanceQuery(MATTE, 0.0, 5.0, "dry"))
    assert dist.dropout_probability == pytest.approx(0.0)
    d60 = expected_intensity(ReflectanceQuery(MATTE, 60.0, 5.0, "dry"))
    assert d60.dropout_probability == pytest.approx(0.3 * 0.5)
    far = expected_intensity(ReflectanceQuery(MATTE, 0.0, 30.0, "dry"))
    assert far.dropout_probability == pytest.approx(0.05 * 10.0)
    wet_steep = expected_intensity(ReflectanceQuery(MATTE, 60.0, 5.0, "wet"))
    assert wet_steep.dropout_probability == pytest.approx(0.15 + 0.05)
    wet_shallow = expected_intensity(ReflectanceQuery(MATTE, 30.0, 5.0, "wet"))
    assert wet_shallow.dropout_probability == pytest.approx(
        0.3 * (1 - math.cos(math.radians(30.0))))


def test_dropout_clamped_to_unit_interval():
    params = ReflectanceParams(dropout_base=0.9, dropout_angle=0.5)
    _, _, drop = distribution_arrays(MATTE, 80.0, 35.0, wet=True, params=params)
    assert float(drop) == 1.0


def test_domain_errors():
    with pytest.raises(ValueError):
        expected_intensity(ReflectanceQuery(MATTE, -1.0, 5.0))
    with pytest.raises(ValueError):
        expected_intensity(ReflectanceQuery(MATTE, 90.0, 5.0))
    with pytest.raises(ValueError):
        expected_intensity(ReflectanceQuery(MATTE, 0.0, 0.0))
    with pytest.raises(ValueError):
        expected_intensity(ReflectanceQuery(MATTE, 0.0, 5.0, "damp"))


def test_quantize_rounds_half_to_even():
    assert quantize(102.5) == 102.0
    assert quantize(103.5) == 104.0
    assert quantize(-3.0) == 0.0
    assert quantize(300.0) == 255.0


def test_sample_mean_converges():
    # law of large numbers at sigma=4: mean of 10k draws within 0.2
    query = ReflectanceQuery(MATTE, 0.0, 5.0, "dry")
    dist = expected_intensity(query)
    rng = RandomStream(11, "lln").generator()
    draws = [sample_intensity(query, rng) for _ in range(10_000)]
    values = [d for d in draws if d is not None]
    assert len(values) == 10_000        # dropout is exactly zero head on
    assert abs(float(np.mean(values)) - dist.mean) < 0.2


def test_sample_dropout_frequency():
    query = ReflectanceQuery(MATTE, 60.0, 25.0, "dry")
    dist = expected_intensity(query)
    assert 0.3 < dist.dropout_probability < 0.5
    rng = RandomStream(12, "dropfreq").generator()
    draws = [sample_intensity(query, rng) for _ in range(10_000)]
    frequency = sum(d is None for d in draws) / len(draws)
    assert abs(frequency - dist.dropout_probability) < 0.02


def test_sample_replay_with_stream():
    query = ReflectanceQuery(GLOSSY, 10.0, 5.0, "dry")
    stream = RandomStream(3, "replay")
    assert sample_intensity(query, stream) == sample_intensity(query, stream)


# -------------------------------------------------------------- paint table

def test_default_table_has_thirteen_paints(paints):
    assert len(paints) == 13
    assert "SB-Gloss" in paints and "FB1-Matt" in paints
    for paint in paints.values():
        assert paint.finish in ("gloss", "matte")
        assert 0.0 <= paint.base_reflectivity <= 1.0


def test_default_table_loads_without_warnings(recwarn):
    load_paint_table()
    assert not [w for w in recwarn.list
                if issubclass(w.category, PaintTableWarning)]


def test_serialize_round_trip(paints, tmp_path):
    path = tmp_path / "paints.txt"
    path.write_text(serialize_paint_table(paints), encoding="utf-8")
    again = load_paint_table(str(path))
    assert again == paints


def test_duplicate_code_rejected(tmp_path):
    text = default_table_text()
    block = text[text.index("paint SB-Gloss"):]
    block = block[:block.index("}") + 1]
    path = tmp_path / "dup.txt"
    path.write_text(text + "\n" + block, encoding="utf-8")
    with pytest.raises(blockfile.BlockFormatError) as err:
        load_paint_table(str(path))
    assert "duplicate panel code" in str(err.value)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("paint X {\n    shinyness = 3\n}\n", encoding="utf-8")
    with pytest.raises(blockfile.BlockFormatError) as err:
        load_paint_table(str(path))
    assert "unknown key 'shinyness'" in str(err.value)


def test_missing_key_rejected(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("paint X {\n    color = red\n}\n", encoding="utf-8")
    with pytest.raises(blockfile.BlockFormatError) as err:
        load_paint_table(str(path))
    assert "missing key" in str(err.value)


def test_matte_with_gloss_lobe_rejected(tmp_path):
    path = tmp_path / "matte.txt"
    path.write_text("""
paint X {
    color = red
    finish = matte
    metallic = false
    functionalised = false
    base_reflectivity = 0.5
    specular_weight = 0.2
    specular_exponent = 5.0
}
""", encoding="utf-8")
    with pytest.raises(blockfile.BlockFormatError) as err:
        load_paint_table(str(path))
    assert "gloss threshold" in str(err.value)


def test_doctored_ordering_warns(paints, tmp_path):
    # swap the functionalised matte down below the standard matte
    doctored = dict(paints)
    fb1 = doctored["FB1-Matt"]
    sb = doctored["SB-Matt"]
    doctored["FB1-Matt"] = PaintParams(
        panel_code="FB1-Matt", color=fb1.color, finish="matte",
        metallic=fb1.metallic, functionalised=True,
        base_reflectivity=sb.base_reflectivity / 2,
        specular_weight=fb1.specular_weight,
        specular_exponent=fb1.specular_exponent)
    path = tmp_path / "doctored.txt"
    path.write_text(serialize_paint_table(doctored), encoding="utf-8")
    with pytest.warns(PaintTableWarning, match="FB1-Matt"):
        load_paint_table(str(path))
