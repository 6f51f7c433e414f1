import orjson
import pytest

from harness.cli import main
from harness.presets import PRESETS

CONFIG = "kind=pd_vs_snr\ngrid=-5,0\nM=8\nN=40\ntrials=3\np_fa=0.05\ncalibration_trials=100\nworkers=1\n"


def write_config(tmp_path, text=CONFIG):
    path = tmp_path / "sweep.env"
    path.write_text(text)
    return path


def runs(out):
    return orjson.loads((out / "runs.json").read_bytes())


class TestCli:
    def test_detect_sweep(self, tmp_path):
        out = tmp_path / "out"
        code = main(["detect-sweep", "--config", str(write_config(tmp_path)), "--out", str(out),
                     "--seed", "5", "--no-cache"])
        assert code == 0
        assert (out / "pd_vs_snr.csv").exists() and (out / "pd_vs_snr.meta.json").exists()
        record = runs(out)[-1]
        assert record["status"] == "ok" and record["seed"] == 5 and record["spec_hash"]

    def test_trials_override(self, tmp_path):
        out = tmp_path / "out"
        main(["detect-sweep", "--config", str(write_config(tmp_path)), "--out", str(out),
              "--trials", "2", "--no-cache"])
        meta = orjson.loads((out / "pd_vs_snr.meta.json").read_bytes())
        assert meta["spec"]["trials"] == 2

    def test_missing_config(self, tmp_path):
        assert main(["roc", "--config", str(tmp_path / "none.env"), "--out", str(tmp_path)]) == 2

    def test_kind_mismatch(self, tmp_path):
        assert main(["roc", "--config", str(write_config(tmp_path)), "--out", str(tmp_path),
                     "--no-cache"]) == 2

    def test_invalid_value(self, tmp_path):
        path = write_config(tmp_path, CONFIG.replace("p_fa=0.05", "p_fa=5"))
        assert main(["detect-sweep", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_runtime_failure_is_logged(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, CONFIG.replace("calibration_trials=100", "calibration_trials=10"))
        assert main(["detect-sweep", "--config", str(path), "--out", str(out), "--no-cache"]) == 1
        record = runs(out)[-1]
        assert record["status"] == "failed" and "calibration" in record["notes"]

    def test_dataset(self, tmp_path):
        out = tmp_path / "out"
        assert main(["dataset", "--out", str(out), "--trials", "2", "--workers", "1"]) == 0
        lines = (out / "dataset.csv").read_text().splitlines()
        assert lines[0] == "f1,f2,f3,f4,f5,label"
        assert len(lines) == 1 + 3 * 2

    @pytest.mark.parametrize("flag", ["--emit-paper-presets", "--emit-presets"])
    def test_emit_presets(self, tmp_path, flag):
        assert main([flag, str(tmp_path)]) == 0
        assert sorted(p.stem for p in tmp_path.glob("*.env")) == sorted(PRESETS)

    def test_no_command(self):
        assert main([]) == 2
