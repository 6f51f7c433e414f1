import math

import numpy as np
import pytest

from classifiers.nn import nn_classify_batch, nn_train
from classifiers.schemas import NnArchitecture
from harness.dataset import build_dataset
from harness.experiments import (
    run_classification_sweep, run_criteria_sweep, run_detection_sweep, run_experiment, run_pipeline,
    run_roc, run_training_time,
)
from harness.parallel import map_ordered, trial_seeds
from harness.presets import NN_LEARNING_RATE, PRESETS, emit_presets, preset_spec
from harness.run_log import read_runs, write_run
from harness.schemas import DatasetSpec, ExperimentKind, ExperimentSpec, ResultTable
from harness.stats import proportion, roc_auc, wilson_interval
from repos.calibration_cache import CalibrationCache
from repos.results_repo import ResultsRepo
from sensing.errors import ConfigError, DomainError, InsufficientTrialsError
from sensing.schemas import DetectorId

SMALL = dict(M=8, N=40, calibration_trials=100, workers=1, seed=17)


def small_spec(**fields) -> ExperimentSpec:
    return ExperimentSpec.build({**SMALL, **fields})


# ============================================================
# CONFIG
# ============================================================

class TestExperimentSpec:
    def test_comma_lists(self):
        spec = small_spec(kind="acc_vs_snr", grid="-10, -5,0", classifiers="nn3,nbc")
        assert spec.grid == [-10.0, -5.0, 0.0]
        assert spec.classifiers == ["nn3", "nbc"]
        assert spec.axis == "snr_db"

    @pytest.mark.parametrize("fields,where", [
        (dict(kind="roc", grid=[0.1], p_fa=2.0), "p_fa"),
        (dict(kind="roc", grid=[0.1], colour="red"), "colour"),
        (dict(kind="acc_vs_snr", grid=[0.0], classifiers="nn3,knn"), "classifiers"),
        (dict(kind="sweep", grid=[0.0]), "kind"),
    ])
    def test_invalid_fields(self, fields, where):
        with pytest.raises(ConfigError, match=where):
            small_spec(**fields)

    @pytest.mark.parametrize("kind,grid", [
        ("pd_vs_N", [100.5]),
        ("acc_vs_M", [1]),
        ("roc", [0.0]),
        ("pd_vs_snr", [-5.0, -5.0]),
    ])
    def test_invalid_grids(self, kind, grid):
        with pytest.raises(ConfigError):
            small_spec(kind=kind, grid=grid)

    def test_from_file_and_overrides(self, tmp_path):
        path = tmp_path / "sweep.env"
        path.write_text("kind=pd_vs_snr\ngrid=-10,-5\nM=8\nN=40\nseed=3\n")
        spec = ExperimentSpec.from_file(path, seed=9, trials=None)
        assert spec.grid == [-10.0, -5.0] and spec.M == 8
        assert spec.seed == 9 and spec.trials == 2000

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            ExperimentSpec.from_file(tmp_path / "nope.env")

    def test_config_text_reloads(self, tmp_path):
        spec = small_spec(kind="pipeline", grid=[-5.0, 0.0], gate_detector="mme")
        path = tmp_path / "p.env"
        path.write_text(spec.to_config_text())
        assert ExperimentSpec.from_file(path).spec_hash() == spec.spec_hash()

    def test_spec_hash_tracks_content(self):
        a = small_spec(kind="roc", grid=[0.1])
        assert a.spec_hash() == small_spec(kind="roc", grid=[0.1]).spec_hash()
        assert a.spec_hash() != a.at(seed=18).spec_hash()

    def test_dataset_spec(self, tmp_path):
        assert DatasetSpec.from_file(None, per_class=4).per_class == 4
        with pytest.raises(ConfigError):
            DatasetSpec.from_file(None, K_max=1)


class TestPresets:
    def test_emit_and_reload(self, tmp_path):
        paths = emit_presets(tmp_path)
        assert len(paths) == len(PRESETS)
        for path in paths:
            spec = ExperimentSpec.from_file(path)
            assert spec == preset_spec(path.stem)

    def test_detection_setting(self):
        spec = preset_spec("pd_vs_snr")
        assert (spec.M, spec.N, spec.K, spec.p_fa) == (64, 200, 3, 1e-4)
        assert spec.kind is ExperimentKind.PD_VS_SNR

    def test_unknown(self):
        with pytest.raises(KeyError):
            preset_spec("fig99")

    def test_classifier_presets_use_tuned_learning_rate(self):
        for name, fields in PRESETS.items():
            spec = preset_spec(name)
            if "learning_rate" in fields:
                assert spec.learning_rate == NN_LEARNING_RATE and spec.epochs == 400
        assert preset_spec("acc_vs_snr").learning_rate == 0.5

    def test_tuned_learning_rate_trains_the_net(self):
        train = build_dataset(3, 10, 0.0, 32, 200, seed=41)
        test = build_dataset(3, 50, 0.0, 32, 200, seed=42)
        tuned = nn_train(train, NnArchitecture(learning_rate=NN_LEARNING_RATE), seed=3)
        slow = nn_train(train, NnArchitecture(learning_rate=0.01), seed=3)
        assert tuned.loss_trace[-1] < slow.loss_trace[-1]
        assert np.mean(nn_classify_batch(tuned, test.features) == test.labels) >= 0.85


# ============================================================
# DATASET
# ============================================================

class TestBuildDataset:
    def test_layout(self):
        data = build_dataset(3, 4, 0.0, 8, 40, seed=1)
        assert data.features.shape == (12, 5)
        np.testing.assert_array_equal(data.labels, np.repeat([1, 2, 3], 4))

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        a = build_dataset(3, 5, -5.0, 8, 40, seed=2, workers=1).to_csv(tmp_path / "a.csv")
        b = build_dataset(3, 5, -5.0, 8, 40, seed=2, workers=3).to_csv(tmp_path / "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_seed_matters(self):
        a = build_dataset(2, 3, 0.0, 8, 40, seed=1)
        b = build_dataset(2, 3, 0.0, 8, 40, seed=2)
        assert not np.array_equal(a.features, b.features)

    @pytest.mark.parametrize("K_max,per_class", [(1, 5), (3, 0)])
    def test_domain(self, K_max, per_class):
        with pytest.raises(DomainError):
            build_dataset(K_max, per_class, 0.0, 8, 40, seed=1)


# ============================================================
# DETECTION
# ============================================================

class TestDetectionSweep:
    def test_single_trial_cells(self):
        table = run_detection_sweep(small_spec(kind="pd_vs_snr", grid=[-5.0, 0.0], trials=1, p_fa=0.05))
        df = table.to_frame()
        assert list(df["snr_db"]) == [-5.0, 0.0]
        for d in DetectorId:
            assert set(df[d.value]) <= {0.0, 1.0}
            assert np.all(df[f"{d.value}_ci"] > 0)
        counts = table.metadata["counts"]["0.0"]
        assert all(c["detections"] + c["misses"] == 1 for c in counts.values())
        assert table.metadata["threshold_sources"]["0.0"]["sr_mme"] == "analytic"

    def test_false_alarm_columns(self):
        table = run_detection_sweep(small_spec(kind="pd_vs_snr", grid=[-10.0, 0.0], trials=200, p_fa=0.05))
        df = table.to_frame()
        for d in DetectorId:
            assert df[f"{d.value}_pfa"].nunique() == 1
            assert 0.0 <= df[f"{d.value}_pfa"][0] <= 1.0
        # empirically calibrated thresholds hold their target on fresh noise
        assert df["mme_pfa"][0] <= 0.15 and df["m_mme_pfa"][0] <= 0.15
        counts = table.metadata["counts"]["0.0"]
        assert counts["mme"]["false_alarms"] == round(df["mme_pfa"][0] * 200)

    def test_strong_signal_is_detected(self):
        df = run_detection_sweep(small_spec(kind="pd_vs_snr", grid=[5.0], trials=20, p_fa=0.01)).to_frame()
        assert df["sr_mme"][0] == 1.0 and df["mme"][0] == 1.0
        assert 0.0 <= df["sr_mme_pd_theory"][0] <= 1.0

    def test_snapshot_axis(self):
        table = run_detection_sweep(small_spec(kind="pd_vs_N", grid=[20, 60], trials=5, p_fa=0.05,
                                               gm_mode="fixed"))
        assert table.column("N") == [20, 60]
        assert table.metadata["threshold_sources"]["60"]["gm"] == "fixed-calibration"

    def test_deterministic_across_workers(self):
        spec = small_spec(kind="pd_vs_snr", grid=[-10.0, -5.0], trials=15, p_fa=0.05)
        a = run_detection_sweep(spec)
        b = run_detection_sweep(spec.at(workers=3))
        assert a.metadata["determinism_hash"] == b.metadata["determinism_hash"]

    def test_needs_calibration_trials(self):
        with pytest.raises(InsufficientTrialsError):
            run_detection_sweep(small_spec(kind="pd_vs_snr", grid=[0.0], trials=2, calibration_trials=50))

    def test_wrong_kind(self):
        with pytest.raises(ConfigError):
            run_detection_sweep(small_spec(kind="roc", grid=[0.1]))

    def test_cache_gives_same_table(self, tmp_path):
        spec = small_spec(kind="pd_vs_snr", grid=[-5.0], trials=10, p_fa=0.05)
        cache = CalibrationCache(tmp_path)
        a = run_detection_sweep(spec, cache)
        b = run_detection_sweep(spec, cache)
        assert cache.misses == 1 and cache.hits == 1
        assert a.determinism_hash() == b.determinism_hash() == run_detection_sweep(spec).determinism_hash()


class TestRoc:
    @pytest.fixture(scope="class")
    def table(self):
        return run_roc(small_spec(kind="roc", grid=[0.5, 0.01, 0.1], snr_db=-8.0, trials=60,
                                  calibration_trials=200))

    def test_monotone_in_target(self, table):
        df = table.to_frame()
        assert list(df["p_fa"]) == [0.01, 0.1, 0.5]
        for d in DetectorId:
            assert np.all(np.diff(df[f"{d.value}_pfa"]) >= 0)
            assert np.all(np.diff(df[d.value]) >= 0)

    def test_accounting(self, table):
        for point in table.metadata["counts"].values():
            for c in point.values():
                assert c["false_alarms"] + c["correct_rejections"] == 60
                assert c["detections"] + c["misses"] == 60

    def test_auc(self, table):
        assert all(0.0 <= v <= 1.0 for v in table.metadata["auc"].values())

    def test_median_target_false_alarm(self, table):
        df = table.to_frame()
        assert abs(df["mme_pfa"].iloc[-1] - 0.5) <= 0.2
        assert abs(df["m_mme_pfa"].iloc[-1] - 0.5) <= 0.2


# ============================================================
# CLASSIFICATION
# ============================================================

class TestClassificationSweep:
    def test_columns_and_totals(self):
        spec = small_spec(kind="acc_vs_snr", grid=[0.0], K_max=3, train_per_class=5, test_per_class=10,
                          repetitions=2, epochs=5, classifiers="nn3,svm,nbc")
        table = run_classification_sweep(spec)
        df = table.to_frame()
        assert df["trials"][0] == 2 * 3 * 10
        for name in ("nn3", "svm", "nbc"):
            assert 0.0 <= df[name][0] <= 1.0
            assert f"{name}_train_seconds" in table.wall_clock_columns
        assert df["failed"][0] == ""

    def test_failed_fits_are_reported(self):
        spec = small_spec(kind="acc_vs_snr", grid=[0.0], K_max=2, train_per_class=1, test_per_class=5,
                          repetitions=2, classifiers="svm,nbc")
        table = run_classification_sweep(spec)
        df = table.to_frame()
        assert math.isnan(df["nbc"][0]) and math.isnan(df["nbc_ci"][0])
        assert not math.isnan(df["svm"][0])
        assert df["failed"][0] == "nbc(2/2)"
        assert len(table.metadata["failures"]["0.0"]) == 2

    def test_shuffled_labels_lose_accuracy(self):
        spec = small_spec(kind="acc_vs_snr", grid=[0.0], K_max=3, train_per_class=20, test_per_class=50,
                          repetitions=6, classifiers="nbc")
        clean = run_classification_sweep(spec).to_frame()["nbc"][0]
        shuffled = run_classification_sweep(spec.at(shuffle_labels=True)).to_frame()["nbc"][0]
        assert clean >= 0.8
        assert shuffled <= 0.7

    def test_array_size_axis(self):
        spec = small_spec(kind="acc_vs_M", grid=[8, 12], K_max=2, train_per_class=4, test_per_class=4,
                          classifiers="nbc")
        assert run_classification_sweep(spec).column("M") == [8, 12]

    def test_training_time_ignores_clock_in_hash(self):
        spec = small_spec(kind="training_time", grid=[4, 8], K_max=2, test_per_class=4,
                          classifiers="svm,nbc")
        a = run_training_time(spec)
        b = run_training_time(spec)
        assert a.column("train_per_class") == [4, 8]
        assert a.metadata["determinism_hash"] == b.metadata["determinism_hash"]
        assert "svm_train_seconds" not in a.to_csv_text(include_wall_clock=False)


class TestCriteriaSweep:
    def test_fixed_count(self):
        spec = small_spec(kind="criteria_vs_M", grid=[8, 16], K=2, N=100, snr_db=10.0, trials=20)
        df = run_criteria_sweep(spec).to_frame()
        assert list(df["M"]) == [8, 16]
        assert np.all(df["mdl"] >= 0.8)

    def test_cycled_count_with_classifiers(self):
        spec = small_spec(kind="criteria_vs_snr", grid=[10.0], N=100, K_max=3, trials=30,
                          train_per_class=5, classifiers="nbc")
        df = run_criteria_sweep(spec).to_frame()
        assert {"aic", "mdl", "nbc", "nbc_ci"} <= set(df.columns)
        assert df["mdl"][0] >= 0.8


class TestPipeline:
    def test_gate_then_classify(self):
        spec = small_spec(kind="pipeline", grid=[0.0], K_max=3, p_fa=0.05, trials=40,
                          calibration_trials=200, train_per_class=10, epochs=50)
        table = run_pipeline(spec)
        df = table.to_frame()
        assert df["gate_pd"][0] == 1.0
        assert 0.0 <= df["gate_pfa"][0] <= 1.0
        # noise-only inputs are always misclassified without the gate
        assert df["classifier_only"][0] <= 0.5
        assert table.metadata["gate_detector"] == "sr_mme"
        assert "detect_time_seconds" in table.wall_clock_columns

    def test_dispatch(self):
        spec = small_spec(kind="pipeline", grid=[0.0], trials=4, train_per_class=3, epochs=2, p_fa=0.05,
                          gate_detector="m_mme")
        assert run_experiment(spec).metadata["gate_detector"] == "m_mme"


# ============================================================
# STORAGE AND STATS
# ============================================================

class TestStorage:
    def test_results_repo(self, tmp_path):
        table = run_detection_sweep(small_spec(kind="pd_vs_snr", grid=[0.0], trials=3, p_fa=0.05))
        repo = ResultsRepo(tmp_path)
        csv_path, meta_path = repo.save_table(table)
        assert csv_path.name == "pd_vs_snr.csv" and meta_path.exists()
        assert list(repo.load_frame("pd_vs_snr").columns) == table.columns
        meta = repo.load_metadata("pd_vs_snr")
        assert meta["seed"] == 17 and meta["determinism_hash"] == table.determinism_hash()

    def test_result_table_rejects_short_rows(self):
        table = ResultTable("t", "x", ["x", "y"])
        with pytest.raises(KeyError):
            table.add_row({"x": 1})

    def test_calibration_cache_keeps_inf(self, tmp_path):
        cache = CalibrationCache(tmp_path)
        stats = {d: np.array([1.5, math.inf, 2.0]) for d in DetectorId}
        cache.set(16, 12, 3, 4, stats)
        again = CalibrationCache(tmp_path).get(16, 12, 3, 4)
        np.testing.assert_array_equal(again[DetectorId.MME], stats[DetectorId.MME])

    def test_corrupt_cache_entry(self, tmp_path):
        cache = CalibrationCache(tmp_path)
        cache.statistics(8, 40, 100, seed=1)
        next(tmp_path.glob("*.json")).write_text("{not json")
        assert cache.get(8, 40, 100, seed=1) is None
        assert not list(tmp_path.glob("*.json"))

    def test_run_log(self, tmp_path):
        path = tmp_path / "runs.json"
        write_run("roc", "roc", "abc", "ok", 1.23456, ["roc.csv"], seed=1, path=path)
        write_run("roc", "roc", None, "failed", 0.1, [], notes="boom", path=path)
        runs = read_runs(path)
        assert [r["status"] for r in runs] == ["ok", "failed"]
        assert runs[0]["duration_s"] == 1.235 and runs[1]["notes"] == "boom"
        path.write_text("garbage")
        assert read_runs(path) == []


class TestStats:
    def test_wilson(self):
        low, high = wilson_interval(5, 10)
        assert low == pytest.approx(0.2366, abs=1e-4) and high == pytest.approx(0.7634, abs=1e-4)
        assert wilson_interval(0, 10)[0] == pytest.approx(0.0, abs=1e-12)

    def test_proportion(self):
        p = proportion(30, 40)
        assert p.value == 0.75 and p.contains(0.75) and p.half_width > 0

    def test_bad_counts(self):
        with pytest.raises(ValueError):
            wilson_interval(3, 2)

    def test_auc(self):
        assert roc_auc([0.2, 0.6], [0.2, 0.6]) == pytest.approx(0.5)
        assert roc_auc([0.0], [1.0]) == pytest.approx(1.0)

    def test_parallel_helpers(self):
        assert map_ordered(lambda x: x * x, range(6), workers=3) == [0, 1, 4, 9, 16, 25]
        assert trial_seeds(1, 0, 3, stream=1) != trial_seeds(1, 0, 3, stream=2)
        assert len(set(trial_seeds(1, 0, 50))) == 50
