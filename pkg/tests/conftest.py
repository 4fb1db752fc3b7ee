import time
from types import SimpleNamespace

import pytest

from lidarlab import BeamTable, Scene, SensorConfig, load_paint_table, run_sweep
from lidarlab.scenario import SweepGrid


@pytest.fixture(scope="session")
def paints():
    return load_paint_table()


@pytest.fixture(scope="session")
def default_scene():
    sensor = SensorConfig()
    return Scene(sensor=sensor, beams=BeamTable.uniform(sensor))


@pytest.fixture(scope="session")
def default_grid(paints):
    return SweepGrid(panel_codes=tuple(sorted(paints)))


@pytest.fixture(scope="session")
def sweep_run(default_grid, default_scene, paints):
    """The full default experiment, run and timed once per session."""
    start = time.perf_counter()
    records = run_sweep(default_grid, default_scene, paints)
    return SimpleNamespace(records=records,
                           seconds=time.perf_counter() - start)


@pytest.fixture(scope="session")
def default_sweep(sweep_run):
    return sweep_run.records
