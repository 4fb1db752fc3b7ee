"""Test-rig LiDAR simulator and perception error model toolkit."""

from .analysis import (
    AggregatedRecord,
    ExperimentRecord,
    GroupStats,
    IntensityStats,
    TrendReport,
    aggregate_runs,
    extract_panel_roi,
    group_compare,
    intensity_stats,
    run_sweep,
    trend_check,
)
from .cloudio import read_cloud, write_cloud
from .paints import PaintTableWarning, load_paint_table, serialize_paint_table
from .pem import (
    BinScheme,
    ConditionBin,
    ErrorModel,
    ErrorRecord,
    GroundTruthObject,
    PerceivedObject,
    apply_model,
    calibrate,
    calibrate_from_sweep,
    ground_truth_for_scene,
    match_objects,
    perceive,
    read_model,
    validate_model,
    write_model,
)
from .reflectance import (
    IntensityDistribution,
    ReflectanceParams,
    ReflectanceQuery,
    distance_gain,
    expected_intensity,
    sample_intensity,
)
from .scanner import scan
from .scenario import (
    Scenario,
    ScenarioError,
    SweepGrid,
    config_hash,
    load_scenario,
    read_scenario,
    serialize_scene,
)
from .streams import RandomStream
from .types import (
    BeamTable,
    LidarPoint,
    PaintParams,
    PanelSpec,
    PointCloud,
    Scene,
    SensorConfig,
)
from .validation import InvalidSceneError, require_valid, validate_scene

__version__ = "0.1.0"

__all__ = [
    "AggregatedRecord",
    "BeamTable",
    "BinScheme",
    "ConditionBin",
    "ErrorModel",
    "ErrorRecord",
    "ExperimentRecord",
    "GroundTruthObject",
    "GroupStats",
    "IntensityStats",
    "InvalidSceneError",
    "LidarPoint",
    "PaintParams",
    "PaintTableWarning",
    "PanelSpec",
    "PerceivedObject",
    "PointCloud",
    "RandomStream",
    "Scenario",
    "ScenarioError",
    "Scene",
    "SensorConfig",
    "SweepGrid",
    "TrendReport",
    "aggregate_runs",
    "apply_model",
    "calibrate",
    "calibrate_from_sweep",
    "config_hash",
    "IntensityDistribution",
    "ReflectanceParams",
    "ReflectanceQuery",
    "distance_gain",
    "expected_intensity",
    "sample_intensity",
    "extract_panel_roi",
    "ground_truth_for_scene",
    "group_compare",
    "intensity_stats",
    "load_paint_table",
    "load_scenario",
    "match_objects",
    "perceive",
    "read_cloud",
    "read_model",
    "read_scenario",
    "require_valid",
    "run_sweep",
    "scan",
    "serialize_paint_table",
    "serialize_scene",
    "trend_check",
    "validate_model",
    "validate_scene",
    "write_cloud",
    "write_model",
]
