"""Paint table loading.

A paint table is a block file with one ``paint <code> { ... }`` block per
panel code. The shipped default table covers the thirteen reference paints.
Tables are calibration inputs: loading checks the ordering relationships the
defaults were fitted to and warns, without failing, when a custom table
breaks one.
"""
from __future__ import annotations

import warnings
from importlib import resources

from . import blockfile
from .reflectance import DEFAULT_PARAMS, ReflectanceQuery, expected_intensity
from .types import FINISHES, PaintParams

PAINT_KEYS = {
    "color": "as_str",
    "finish": "as_str",
    "metallic": "as_bool",
    "functionalised": "as_bool",
    "base_reflectivity": "as_float",
    "specular_weight": "as_float",
    "specular_exponent": "as_float",
    "wet_variance_factor": "as_float",
    "wet_mean_shift": "as_float",
}
OPTIONAL_PAINT_KEYS = ("wet_variance_factor", "wet_mean_shift")


class PaintTableWarning(UserWarning):
    """A custom table violates an ordering relationship of the defaults."""


def default_table_text() -> str:
    return resources.files("lidarlab.data").joinpath("default_paints.txt").read_text("utf-8")


def load_paint_table(path: str | None = None,
                     gloss_threshold: float = DEFAULT_PARAMS.gloss_threshold,
                     ) -> dict[str, PaintParams]:
    """Load a paint table, or the shipped default when path is None.

    Returns paints keyed by panel code, preserving file order. Raises
    blockfile.BlockFormatError on malformed files; emits PaintTableWarning
    when an ordering constraint is violated.
    """
    if path is None:
        doc = blockfile.parse_text(default_table_text(), path="<default paint table>")
    else:
        doc = blockfile.parse_file(path)
    if doc.entries:
        entry = doc.entries[0]
        raise blockfile.BlockFormatError(
            f"unexpected top level key '{entry.key}'", doc.path, entry.line)

    table: dict[str, PaintParams] = {}
    for block in doc.blocks:
        if block.kind != "paint":
            raise blockfile.BlockFormatError(
                f"unexpected block '{block.name()}'", doc.path, block.line)
        if not block.label:
            raise blockfile.BlockFormatError(
                "paint block is missing its panel code label", doc.path, block.line)
        if block.label in table:
            raise blockfile.BlockFormatError(
                f"duplicate panel code '{block.label}'", doc.path, block.line)
        fields = {}
        for entry in block.entries:
            if entry.key not in PAINT_KEYS:
                raise blockfile.BlockFormatError(
                    f"unknown key '{entry.key}' in paint '{block.label}'",
                    doc.path, entry.line)
            fields[entry.key] = getattr(entry, PAINT_KEYS[entry.key])()
        for key in PAINT_KEYS:
            if key not in fields and key not in OPTIONAL_PAINT_KEYS:
                raise blockfile.BlockFormatError(
                    f"paint '{block.label}' is missing key '{key}'",
                    doc.path, block.line)
        paint = PaintParams(panel_code=block.label, **fields)
        _check_paint(paint, gloss_threshold, doc.path, block.line)
        table[block.label] = paint

    _check_orderings(table)
    return table


def serialize_paint_table(table: dict[str, PaintParams]) -> str:
    writer = blockfile.Writer()
    writer.comment("Paint table: calibration inputs.")
    for code, paint in table.items():
        writer.blank()
        writer.block("paint", {
            "color": paint.color,
            "finish": paint.finish,
            "metallic": paint.metallic,
            "functionalised": paint.functionalised,
            "base_reflectivity": paint.base_reflectivity,
            "specular_weight": paint.specular_weight,
            "specular_exponent": paint.specular_exponent,
            "wet_variance_factor": paint.wet_variance_factor,
            "wet_mean_shift": paint.wet_mean_shift,
        }, label=code)
    return writer.text()


def _check_paint(paint: PaintParams, gloss_threshold: float,
                 path: str, line: int) -> None:
    def fail(message: str):
        raise blockfile.BlockFormatError(
            f"paint '{paint.panel_code}': {message}", path, line)

    if paint.finish not in FINISHES:
        fail(f"finish must be one of {FINISHES}, got '{paint.finish}'")
    if not 0.0 <= paint.base_reflectivity <= 1.0:
        fail(f"base_reflectivity {paint.base_reflectivity} outside [0, 1]")
    if not 0.0 <= paint.specular_weight <= 1.0:
        fail(f"specular_weight {paint.specular_weight} outside [0, 1]")
    if paint.base_reflectivity + paint.specular_weight > 1.0:
        fail("base_reflectivity + specular_weight exceeds 1")
    if paint.specular_exponent < 1.0:
        fail(f"specular_exponent {paint.specular_exponent} must be >= 1")
    if paint.wet_variance_factor < 1.0:
        fail(f"wet_variance_factor {paint.wet_variance_factor} must be >= 1")
    if paint.finish == "matte" and paint.specular_weight >= gloss_threshold:
        fail(f"matte paint has specular_weight {paint.specular_weight} "
             f"at or above the gloss threshold {gloss_threshold}")


def _mean_at(paint: PaintParams, angle: float = 30.0, rng: float = 5.0) -> float:
    return expected_intensity(
        ReflectanceQuery(paint, angle, rng, "dry")).mean


def _check_orderings(table: dict[str, PaintParams]) -> None:
    """Warn when a table contradicts the orderings the defaults encode."""
    def warn(message: str):
        warnings.warn(message, PaintTableWarning, stacklevel=3)

    sb_matt = table.get("SB-Matt")
    fb1_matt = table.get("FB1-Matt")
    if sb_matt and fb1_matt and _mean_at(fb1_matt) <= _mean_at(sb_matt):
        warn("ordering constraint violated: FB1-Matt should reflect "
             "brighter than SB-Matt")

    sb_gloss = table.get("SB-Gloss")
    fb1_gloss = table.get("FB1-Gloss")
    if sb_gloss and fb1_gloss:
        if abs(_mean_at(fb1_gloss) - _mean_at(sb_gloss)) > 5.0:
            warn("ordering constraint violated: FB1-Gloss and SB-Gloss "
                 "should stay within 5 intensity units of each other")

    plain_gloss = [p for p in table.values()
                   if p.finish == "gloss" and not p.metallic]
    metal_gloss = [p for p in table.values()
                   if p.finish == "gloss" and p.metallic]
    if plain_gloss and metal_gloss:
        plain_mean = sum(_mean_at(p) for p in plain_gloss) / len(plain_gloss)
        metal_mean = sum(_mean_at(p) for p in metal_gloss) / len(metal_gloss)
        if plain_mean <= metal_mean:
            warn("ordering constraint violated: non-metallic gloss paints "
                 "should reflect brighter than metallic gloss paints")
