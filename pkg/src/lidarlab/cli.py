"""Command line interface.

One executable, one subcommand per task. Configuration lives in files;
flags carry only paths, the seed and execution knobs. Diagnostics go to
stderr, data goes to files under --out (and to stdout where noted).
Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import replace

from . import blockfile, pem, reports
from .analysis import aggregate_runs, extract_panel_roi, group_compare, \
    intensity_stats, run_sweep, trend_check, GROUPINGS
from .paints import load_paint_table, serialize_paint_table
from .scanner import scan
from .scenario import Scenario, ScenarioError, SweepGrid, config_hash, \
    read_scenario, serialize_scene
from .streams import RandomStream
from .validation import InvalidSceneError


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0
    try:
        return args.func(args)
    except (ScenarioError, InvalidSceneError, blockfile.BlockFormatError,
            ValueError, OSError) as err:
        print(f"lidarlab: error: {err}", file=sys.stderr)
        return 2


class _Parser(argparse.ArgumentParser):
    """argparse flavoured to exit 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lidarlab",
                     description="Panel test rig simulator and perception "
                                 "error model toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[], help="scan one scenario and "
                       "dump the point cloud plus a stats summary")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "binary"), default="text")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run the experiment grid and write the "
                       "per-run and aggregated results CSVs")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--paints", default=None,
                   help="comma separated panel codes to restrict the grid")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="aggregate a results CSV into group, "
                       "trend and plot-data reports")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scenario", default=None,
                   help="scenario providing the paint table (default table "
                        "when omitted)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("pem-calibrate", help="scan the sweep grid, run the "
                       "detector and calibrate the error model")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--paints", default=None)
    p.set_defaults(func=_cmd_pem_calibrate)

    p = sub.add_parser("pem-apply", help="re-simulate perception on a ground "
                       "truth list using a calibrated model")
    p.add_argument("--model", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bin-fallback", action="store_true",
                   help="allow nearest-bin fallback for conditions outside "
                        "the calibrated bins")
    p.set_defaults(func=_cmd_pem_apply)

    p = sub.add_parser("pem-validate", help="compare a model against "
                       "held-out matching records")
    p.add_argument("--model", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pem_validate)

    p = sub.add_parser("paint-table", help="print or export the resolved "
                       "paint table")
    p.add_argument("--table", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_paint_table)
    return parser


# ------------------------------------------------------------- plumbing

def _ensure_dir(*parts) -> str:
    path = os.path.join(*parts)
    os.makedirs(path, exist_ok=True)
    return path


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _manifest_update(out_dir: str, entries: dict[str, tuple[str, str]]) -> None:
    """Merge artifact rows into out/manifest.txt, kept sorted by path."""
    path = os.path.join(out_dir, "manifest.txt")
    rows: dict[str, tuple[str, str]] = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                parts = line.rstrip("\n").split("\t")
                if len(parts) == 3:
                    rows[parts[0]] = (parts[1], parts[2])
    rows.update(entries)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for artifact in sorted(rows):
            hash_, seed = rows[artifact]
            handle.write(f"{artifact}\t{hash_}\t{seed}\n")


def _grid_text(grid: SweepGrid) -> str:
    return "|".join([
        ",".join(grid.panel_codes),
        blockfile.format_value(list(grid.angles)),
        blockfile.format_value(list(grid.distances)),
        ",".join(grid.surfaces),
        str(grid.runs), str(grid.seed),
        blockfile.format_value(grid.roi_margin), str(grid.min_points),
    ])


def _grid_hash(scenario: Scenario, grid: SweepGrid) -> str:
    text = serialize_scene(scenario.scene, include_identity=False) \
        + _grid_text(grid)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _resolve_grid(scenario: Scenario, args) -> SweepGrid:
    grid = scenario.grid
    if grid is None:
        grid = SweepGrid(panel_codes=tuple(scenario.paints))
    if args.paints:
        codes = tuple(c.strip() for c in args.paints.split(",") if c.strip())
        for code in codes:
            if code not in scenario.paints:
                raise ValueError(f"unknown paint code '{code}'")
        grid = replace(grid, panel_codes=codes)
    if getattr(args, "seed", None) is not None:
        grid = replace(grid, seed=args.seed)
    return grid


# ----------------------------------------------------------- subcommands

def _cmd_simulate(args) -> int:
    scenario = read_scenario(args.scenario)
    scene = scenario.scene
    stream = RandomStream(args.seed, "simulate")
    cloud = scan(scene, stream, scenario.params)
    hash_ = config_hash(scene)

    clouds_dir = _ensure_dir(args.out, "clouds")
    ext = "txt" if args.format == "text" else "bin"
    cloud_path = os.path.join(clouds_dir, f"{scene.scene_id}.{ext}")
    from .cloudio import write_cloud
    write_cloud(cloud, cloud_path, fmt=args.format, config_hash=hash_,
                stream=stream)

    results_dir = _ensure_dir(args.out, "results")
    summary_path = os.path.join(results_dir, f"{scene.scene_id}_summary.csv")
    lines = ["panel,paint,angle_deg,distance_m,surface,mean,variance,count"]
    for index, panel in enumerate(scene.panels):
        roi = extract_panel_roi(cloud, panel,
                                mount_height=scene.sensor.mount_height)
        if len(roi) == 0:
            mean, variance, count = "nan", "nan", 0
        else:
            stats = intensity_stats(roi)
            mean, variance, count = repr(stats.mean), repr(stats.variance), \
                stats.count
        lines.append(f"{index},{panel.paint.panel_code},"
                     f"{panel.elevation_angle!r},{panel.center_distance!r},"
                     f"{panel.surface},{mean},{variance},{count}")
    text = "\n".join(lines) + "\n"
    with open(summary_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    sys.stdout.write(text)

    seed = str(args.seed)
    _manifest_update(args.out, {
        os.path.relpath(cloud_path, args.out): (hash_, seed),
        os.path.relpath(summary_path, args.out): (hash_, seed),
    })
    _note(f"simulate: {len(cloud.points)} points -> {cloud_path}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = read_scenario(args.scenario)
    grid = _resolve_grid(scenario, args)
    records = run_sweep(grid, scenario.scene, scenario.paints,
                        scenario.params, jobs=max(1, args.jobs))
    results_dir = _ensure_dir(args.out, "results")
    records_path = os.path.join(results_dir, "records.csv")
    aggregate_path = os.path.join(results_dir, "aggregate.csv")
    reports.write_records_csv(records, records_path)
    reports.write_aggregate_csv(aggregate_runs(records), aggregate_path)

    hash_ = _grid_hash(scenario, grid)
    seed = str(grid.seed)
    _manifest_update(args.out, {
        os.path.relpath(records_path, args.out): (hash_, seed),
        os.path.relpath(aggregate_path, args.out): (hash_, seed),
    })
    _note(f"sweep: {len(records)} records -> {records_path}")
    return 0


def _cmd_report(args) -> int:
    records = reports.read_records_csv(args.results)
    if args.scenario:
        paints = read_scenario(args.scenario).paints
    else:
        paints = load_paint_table()
    aggregated = aggregate_runs(records)

    reports_dir = _ensure_dir(args.out, "reports")
    written = {}
    path = os.path.join(reports_dir, "aggregate.csv")
    reports.write_aggregate_csv(aggregated, path)
    written[path] = None
    for grouping in GROUPINGS:
        path = os.path.join(reports_dir, f"groups_{grouping}.csv")
        reports.write_groups_csv(
            group_compare(aggregated, grouping, paints), path)
        written[path] = None
    path = os.path.join(reports_dir, "trends.csv")
    reports.write_trends_csv(trend_check(aggregated), path)
    written[path] = None
    path = os.path.join(reports_dir, "plot_data.csv")
    reports.write_plot_data(aggregated, path)
    written[path] = None

    with open(args.results, "rb") as handle:
        hash_ = hashlib.sha256(handle.read()).hexdigest()[:16]
    _manifest_update(args.out, {
        os.path.relpath(p, args.out): (hash_, "-") for p in written})
    _note(f"report: {len(aggregated)} cells -> {reports_dir}")
    return 0


def _cmd_pem_calibrate(args) -> int:
    scenario = read_scenario(args.scenario)
    grid = _resolve_grid(scenario, args)
    metadata = {
        "seed": str(grid.seed),
        "grid_hash": _grid_hash(scenario, grid),
        "gate_m": blockfile.format_value(pem.DEFAULT_GATE_M),
        "scans": str(grid.cell_count()),
        "calibrated_at": "n/a",
    }
    model, records = pem.calibrate_from_sweep(
        grid, scenario.scene, scenario.paints, scenario.params,
        metadata=metadata, jobs=max(1, args.jobs))

    models_dir = _ensure_dir(args.out, "models")
    model_path = os.path.join(models_dir, "error_model.txt")
    records_path = os.path.join(models_dir, "error_records.csv")
    pem.write_model(model, model_path)
    pem.write_error_records(records, records_path)

    hash_ = metadata["grid_hash"]
    seed = str(grid.seed)
    _manifest_update(args.out, {
        os.path.relpath(model_path, args.out): (hash_, seed),
        os.path.relpath(records_path, args.out): (hash_, seed),
    })
    low = sum(1 for b in model.bins if b.low_confidence)
    _note(f"pem-calibrate: {len(records)} records, {len(model.bins)} bins "
          f"({low} low confidence) -> {model_path}")
    return 0


def _cmd_pem_apply(args) -> int:
    model = pem.read_model(args.model)
    gt = pem.read_ground_truth(args.gt)
    stream = RandomStream(args.seed, "pem-apply")
    objects = pem.apply_model(model, gt, stream,
                              strict=not args.bin_fallback)
    reports_dir = _ensure_dir(args.out, "reports")
    path = os.path.join(reports_dir, "perceived.csv")
    pem.write_perceived(objects, path)
    with open(args.model, "rb") as handle:
        hash_ = hashlib.sha256(handle.read()).hexdigest()[:16]
    _manifest_update(args.out, {
        os.path.relpath(path, args.out): (hash_, str(args.seed))})
    _note(f"pem-apply: {len(gt)} objects in, {len(objects)} out -> {path}")
    return 0


def _cmd_pem_validate(args) -> int:
    model = pem.read_model(args.model)
    records = pem.read_error_records(args.records)
    divergences = pem.validate_model(model, records)
    reports_dir = _ensure_dir(args.out, "reports")
    path = os.path.join(reports_dir, "pem_divergence.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("bin,detection,fp_rate,center_mean,center_std,"
                     "extent_mean,extent_std,heldout_trials,heldout_samples\n")
        for d in divergences:
            handle.write(",".join([
                d.bin.key(), repr(d.detection), repr(d.false_positive_rate),
                repr(d.center_mean), repr(d.center_std),
                repr(d.extent_mean), repr(d.extent_std),
                str(d.heldout_trials), str(d.heldout_samples)]) + "\n")
    with open(args.model, "rb") as handle:
        hash_ = hashlib.sha256(handle.read()).hexdigest()[:16]
    _manifest_update(args.out, {
        os.path.relpath(path, args.out): (hash_, "-")})
    _note(f"pem-validate: {len(records)} records -> {path}")
    return 0


def _cmd_paint_table(args) -> int:
    table = load_paint_table(args.table)
    text = serialize_paint_table(table)
    if args.out:
        _ensure_dir(args.out)
        path = os.path.join(args.out, "paints.txt")
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        hash_ = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
        _manifest_update(args.out, {
            os.path.relpath(path, args.out): (hash_, "-")})
        _note(f"paint-table: {len(table)} paints -> {path}")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
