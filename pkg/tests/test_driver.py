import csv
import json
import math

import numpy as np
import pytest

from dtcsim.driver import (
    SweepConfig,
    default_epsilon_grid,
    generate_variance_pool,
    load_variance_curves,
    run_sweep,
    write_trajectory_csv,
)
from dtcsim.floquet import FloquetConfig, run_trajectory, sample_disorder

SMALL_GRID = (0.01, 0.02, 0.04, 0.08, 0.12)


def small_config(tmp_path, **overrides):
    base = dict(
        sites=5,
        periods=50,
        epsilons=SMALL_GRID,
        j0t2_values=(0.012, 0.036),
        instances=3,
        master_seed=606,
        threads=1,
        output_dir=str(tmp_path / "store"),
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_default_epsilon_grid_is_log_spaced():
    grid = default_epsilon_grid()
    assert grid.size == 16
    assert grid[0] == pytest.approx(0.005)
    assert grid[-1] == pytest.approx(0.15)
    ratios = grid[1:] / grid[:-1]
    assert np.abs(ratios - ratios[0]).max() < 1e-12


class TestSweepConfig:
    def test_defaults_match_phase_diagram_protocol(self):
        cfg = SweepConfig()
        assert cfg.j0t2_values == (0.006, 0.012, 0.024, 0.036)
        assert len(cfg.epsilons) == 16
        assert cfg.instances == 10

    def test_rejects_empty_grids(self):
        with pytest.raises(ValueError):
            SweepConfig(epsilons=())
        with pytest.raises(ValueError):
            SweepConfig(j0t2_values=())

    def test_rejects_non_positive_epsilon(self):
        with pytest.raises(ValueError):
            SweepConfig(epsilons=(0.0, 0.01))

    def test_rejects_unknown_json_keys(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"sites": 4, "bogus": 1}))
        with pytest.raises(ValueError, match="bogus"):
            SweepConfig.from_json_file(path)

    def test_json_round_trip(self, tmp_path):
        cfg = SweepConfig(sites=4, instances=2, epsilons=(0.01, 0.03))
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.as_dict()))
        loaded = SweepConfig.from_json_file(path)
        assert loaded == cfg


class TestRunSweep:
    def test_single_cell_counting_contract(self, tmp_path):
        cfg = SweepConfig(
            sites=10,
            periods=100,
            epsilons=(0.03,),
            j0t2_values=(0.036,),
            instances=1,
            master_seed=1,
            output_dir=str(tmp_path / "one"),
        )
        store = run_sweep(cfg)
        assert len(store.peak_stats) == 1
        traj_file = store.output_dir / "trajectories" / "traj_J0_E00_I00.csv"
        with open(traj_file, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["period"] + [f"site_{i}" for i in range(10)]
        assert len(rows) == 101  # header + one sample per period
        # a single instance cannot support an instance-averaged curve
        assert store.errors and not store.curves

    def test_outputs_identical_across_thread_budgets(self, tmp_path):
        serial = run_sweep(small_config(tmp_path / "a", threads=1))
        threaded = run_sweep(small_config(tmp_path / "b", threads=8))
        for name in ("variance_curves.csv", "fits.csv", "boundary.csv", "peak_stats.csv"):
            assert (serial.output_dir / name).read_bytes() == (
                threaded.output_dir / name
            ).read_bytes()
        sample = "trajectories/traj_J1_E02_I01.csv"
        assert (serial.output_dir / sample).read_bytes() == (
            threaded.output_dir / sample
        ).read_bytes()

    def test_disorder_instances_shared_across_cells(self, tmp_path):
        store = run_sweep(small_config(tmp_path))
        manifest = store.manifest
        assert [d["index"] for d in manifest["instances"]] == [0, 1, 2]
        # the recorded seed chain regenerates any trajectory record bit-exactly
        seed = manifest["instances"][1]["seed"]
        cfgd = manifest["config"]
        regenerated = run_trajectory(
            FloquetConfig(
                sites=cfgd["sites"],
                epsilon=cfgd["epsilons"][2],
                periods=cfgd["periods"],
                j0t2=cfgd["j0t2_values"][0],
                alpha=cfgd["alpha"],
                wt3=cfgd["wt3"],
            ),
            sample_disorder(cfgd["sites"], cfgd["wt3"], seed, 1),
        )
        out = store.output_dir / "regen.csv"
        write_trajectory_csv(out, regenerated)
        original = store.output_dir / "trajectories" / "traj_J0_E02_I01.csv"
        assert out.read_bytes() == original.read_bytes()

    def test_curves_and_fits_persisted_and_loadable(self, tmp_path):
        store = run_sweep(small_config(tmp_path))
        assert set(store.curves) == {0.012, 0.036}
        loaded = load_variance_curves(store.output_dir)
        for j0t2, curve in store.curves.items():
            assert np.allclose(loaded[j0t2].mean_variance, curve.mean_variance)
            assert np.allclose(loaded[j0t2].sem, curve.sem)
        manifest = json.loads((store.output_dir / "manifest.json").read_text())
        assert manifest["status"] == "complete"
        assert manifest["config"]["master_seed"] == 606

    def test_series_emission_can_be_disabled(self, tmp_path):
        store = run_sweep(small_config(tmp_path, write_series=False))
        assert not (store.output_dir / "trajectories").exists()
        assert (store.output_dir / "variance_curves.csv").exists()


def test_io_failure_leaves_partial_manifest(tmp_path, monkeypatch):
    import dtcsim.driver as driver_module

    def broken_writer(path, header, rows):
        raise OSError("disk full")

    monkeypatch.setattr(driver_module, "write_csv", broken_writer)
    with pytest.raises(OSError):
        run_sweep(small_config(tmp_path, write_series=False))
    manifest = json.loads((tmp_path / "store" / "manifest.json").read_text())
    assert manifest["status"] == "partial"
    assert "disk full" in manifest["errors"]["fatal"]


def test_threads_env_var_overrides_config(tmp_path, monkeypatch):
    monkeypatch.setenv("DTCSIM_THREADS", "4")
    from dtcsim.driver import thread_budget

    assert thread_budget(1) == 4
    monkeypatch.delenv("DTCSIM_THREADS")
    assert thread_budget(2) == 2


def test_generate_variance_pool_shape_and_determinism():
    grid = (0.02, 0.05, 0.1)
    a = generate_variance_pool(
        sites=4, periods=40, j0t2=0.03, epsilons=grid, pool_size=5, master_seed=3
    )
    b = generate_variance_pool(
        sites=4, periods=40, j0t2=0.03, epsilons=grid, pool_size=5, master_seed=3, threads=4
    )
    assert a.shape == (5, 3)
    assert np.array_equal(a, b)


def test_csv_floats_round_trip(tmp_path):
    cfg = small_config(tmp_path)
    store = run_sweep(cfg)
    with open(store.output_dir / "variance_curves.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    curve = store.curves[0.012]
    recovered = [float(r["mean_site_variance"]) for r in rows if float(r["j0t2"]) == 0.012]
    assert recovered == curve.mean_variance.tolist()
