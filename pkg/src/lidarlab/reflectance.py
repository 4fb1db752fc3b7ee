"""Intensity distribution model for painted panels.

Maps (paint, incidence angle, range, surface condition) to the distribution
of the 8-bit intensity a strongest-return channel reports:

    mean    = clamp(255 * (rho * cos(t)^kd + s * cos(t)^ks) * g(r) + wet shift, 0, 255)
    std     = base_noise * (wet_variance_factor when wet)
    dropout = clamp(d0 + d1 * (1 - cos(t)) + d2 * max(0, r - r_knee) [+ wet bonus], 0, 1)

g(r) is a piecewise linear range compensation curve equal to 1 out to 10 m.
The wet dropout bonus applies at steep incidence only. Sampled values are
truncated at three sigma, clipped to [0, 255] and rounded half to even.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import RandomStream
from .types import PaintParams


@dataclass(frozen=True)
class ReflectanceParams:
    """Model constants shared by every paint. Scenario files may override
    them; the defaults are the calibrated values shipped with the package."""

    diffuse_exponent: float = 1.0
    distance_breaks: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    distance_gains: tuple[float, ...] = (1.0, 1.0, 0.55, 0.45)
    dropout_base: float = 0.0
    dropout_angle: float = 0.3
    dropout_range: float = 0.05        # per metre beyond dropout_range_start
    dropout_range_start: float = 20.0
    wet_dropout_bonus: float = 0.05
    wet_dropout_min_angle: float = 45.0
    base_noise: float = 4.0            # intensity units, dry 1 sigma
    spray_sigma: float = 0.25          # droplet pattern mean offset, 1 sigma
    gloss_threshold: float = 0.05      # max specular weight for matte paints


DEFAULT_PARAMS = ReflectanceParams()


@dataclass(frozen=True)
class ReflectanceQuery:
    """One evaluation point of the model."""

    paint: PaintParams
    incidence_angle: float   # degrees, [0, 90)
    range: float             # metres, > 0
    surface: str = "dry"     # dry | wet


@dataclass(frozen=True)
class IntensityDistribution:
    """Gaussian intensity model plus a dropout probability."""

    mean: float
    std: float
    dropout_probability: float


def distance_gain(range_m, params: ReflectanceParams = DEFAULT_PARAMS):
    """Piecewise linear range compensation residual g(r).

    Equal to 1 on the calibrated near field, then interpolated through the
    shipped knots; held constant beyond the last knot.
    """
    return np.interp(range_m, params.distance_breaks, params.distance_gains)


def distribution_arrays(paint: PaintParams, incidence_deg, range_m, wet: bool,
                        params: ReflectanceParams = DEFAULT_PARAMS,
                        base_noise: float | None = None):
    """Vector form of the model: returns (mean, std, dropout) arrays.

    incidence_deg and range_m broadcast together. std is a scalar because it
    does not depend on geometry.
    """
    incidence_deg = np.asarray(incidence_deg, dtype=float)
    range_m = np.asarray(range_m, dtype=float)
    c = np.cos(np.radians(incidence_deg))
    c = np.clip(c, 0.0, 1.0)
    lobe = (paint.base_reflectivity * c ** params.diffuse_exponent
            + paint.specular_weight * c ** paint.specular_exponent)
    mean = 255.0 * lobe * distance_gain(range_m, params)
    if wet:
        mean = mean + paint.wet_mean_shift
    mean = np.clip(mean, 0.0, 255.0)

    noise = params.base_noise if base_noise is None else base_noise
    std = noise * (paint.wet_variance_factor if wet else 1.0)

    dropout = (params.dropout_base
               + params.dropout_angle * (1.0 - c)
               + params.dropout_range
               * np.maximum(0.0, range_m - params.dropout_range_start))
    if wet:
        dropout = dropout + np.where(
            incidence_deg >= params.wet_dropout_min_angle,
            params.wet_dropout_bonus, 0.0)
    dropout = np.clip(dropout, 0.0, 1.0)
    return mean, std, dropout


def expected_intensity(query: ReflectanceQuery,
                       params: ReflectanceParams = DEFAULT_PARAMS,
                       base_noise: float | None = None) -> IntensityDistribution:
    """Intensity distribution for one query.

    Raises ValueError when the query is outside the model domain.
    """
    if not 0.0 <= query.incidence_angle < 90.0:
        raise ValueError(
            f"incidence_angle {query.incidence_angle} out of range [0, 90)")
    if query.range <= 0.0:
        raise ValueError(f"range {query.range} must be positive")
    if query.surface not in ("dry", "wet"):
        raise ValueError(f"unknown surface '{query.surface}'")
    mean, std, dropout = distribution_arrays(
        query.paint, query.incidence_angle, query.range,
        query.surface == "wet", params, base_noise)
    return IntensityDistribution(float(mean), float(std), float(dropout))


def quantize(values):
    """Clip to the 8-bit range and round half to even."""
    return np.rint(np.clip(values, 0.0, 255.0))


def sample_intensity(query: ReflectanceQuery, stream,
                     params: ReflectanceParams = DEFAULT_PARAMS,
                     base_noise: float | None = None) -> int | None:
    """Draw one quantized intensity, or None when the return drops out.

    stream may be a RandomStream (each call then replays the same draw) or a
    numpy Generator for consuming a sequence of draws.
    """
    dist = expected_intensity(query, params, base_noise)
    rng = stream.generator() if isinstance(stream, RandomStream) else stream
    if rng.random() < dist.dropout_probability:
        return None
    z = float(np.clip(rng.standard_normal(), -3.0, 3.0))
    return int(quantize(dist.mean + dist.std * z))
