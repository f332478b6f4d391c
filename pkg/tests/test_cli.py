import json
import os

import numpy as np
import pandas as pd
import pytest

from config import settings
from kmsa.core import MultiviewDataset
from kmsa.data_manager import load_dataset, read_matrix, save_dataset
from kmsa.model_manager import MANIFEST_FILE, load_model
from main import main


@pytest.fixture
def workspace(tmp_path):
    data_dir = str(tmp_path / "data")
    assert main(["synth", "--out", data_dir, "--classes", "3", "--per-class", "6",
                 "--informative", "2", "--noise", "1", "--view-dim", "4", "--seed", "5"]) == 0
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"d": 2, "max_iters": 5}), encoding="utf-8")
    return tmp_path, data_dir, str(config)


def fit_into(workspace, name, *extra):
    tmp_path, data_dir, config = workspace
    out = str(tmp_path / name)
    code = main(["fit", "--data", data_dir, "--out", out, "--config", config, *extra])
    return code, out


class TestSynth:

    def test_writes_loadable_dataset(self, tmp_path, capsys):
        out = str(tmp_path / "synth")
        assert main(["synth", "--out", out, "--per-class", "4", "--noise", "0", "--seed", "2"]) == 0
        data = load_dataset(out)
        assert data.n_views == 3 and data.n_samples == 12
        assert "command=synth status=ok views=3 samples=12" in capsys.readouterr().out

    def test_bad_flags(self, tmp_path, capsys):
        assert main(["synth", "--out", str(tmp_path), "--classes", "0"]) == 1
        assert main(["synth", "--out", str(tmp_path), "--classes", "three"]) == 1
        assert "usage" in capsys.readouterr().err


class TestFit:

    def test_outputs(self, workspace, capsys):
        code, out = fit_into(workspace, "run")
        assert code == 0
        summary = capsys.readouterr().out.strip().splitlines()[-1]
        assert summary.startswith("command=fit status=ok views=3 samples=18")

        trace = pd.read_csv(os.path.join(out, "trace.csv"))
        assert list(trace.columns) == ["iteration", "objective"]
        assert trace["iteration"].iloc[0] == 0
        g = trace["objective"].to_numpy()
        assert np.all(g[1:] <= g[:-1] + 1e-8 * np.maximum(1.0, np.abs(g[:-1])))

        weights = pd.read_csv(os.path.join(out, "weights.csv"))
        assert weights["alpha"].sum() == pytest.approx(1.0)

        embeddings = load_dataset(os.path.join(out, "embeddings"))
        assert embeddings.dims == [2, 2, 2]
        model = load_model(os.path.join(out, "model"))
        np.testing.assert_array_equal(embeddings.views[0], model.embeddings[0])
        assert os.path.exists(os.path.join(out, "plot_view_3.csv"))

    def test_deterministic(self, workspace):
        _, a = fit_into(workspace, "a")
        _, b = fit_into(workspace, "b")
        for name in ("trace.csv", "weights.csv", os.path.join("embeddings", "view_1.csv")):
            with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
                assert fa.read() == fb.read()

    def test_missing_data_flag(self, tmp_path, capsys):
        assert main(["fit", "--out", str(tmp_path)]) == 1
        assert "usage" in capsys.readouterr().err

    def test_lda_without_labels(self, tmp_path, small_data, capsys):
        data_dir = str(tmp_path / "unlabelled")
        save_dataset(MultiviewDataset(small_data.views), data_dir)
        assert main(["fit", "--data", data_dir, "--out", str(tmp_path / "out"), "--recipe", "lda"]) == 1
        assert "labels.csv" in capsys.readouterr().err

    def test_missing_data_directory(self, tmp_path):
        assert main(["fit", "--data", str(tmp_path / "nope"), "--out", str(tmp_path / "out")]) == 2

    def test_unknown_config_key(self, workspace, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"gamma": 2}), encoding="utf-8")
        _, data_dir, _ = workspace
        assert main(["fit", "--data", data_dir, "--out", str(tmp_path / "out"), "--config", str(bad)]) == 1

    @pytest.mark.parametrize("raw", [{"r": "3"}, {"kappa": None}])
    def test_mistyped_config_value(self, workspace, tmp_path, capsys, raw):
        bad = tmp_path / "typed.json"
        bad.write_text(json.dumps(raw), encoding="utf-8")
        _, data_dir, _ = workspace
        assert main(["fit", "--data", data_dir, "--out", str(tmp_path / "out"), "--config", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "[CLI] Errore" in err and "must be a number" in err

    def test_weighting_preset(self, workspace):
        tmp_path, data_dir, _ = workspace
        preset = os.path.join(settings.CONFIG_DIR, "weighting.json")
        assert main(["fit", "--data", data_dir, "--out", str(tmp_path / "weighted"), "--config", preset]) == 0
        weights = pd.read_csv(os.path.join(str(tmp_path / "weighted"), "weights.csv"))
        assert weights["alpha"].sum() == pytest.approx(1.0)
        assert weights["alpha"].nunique() > 1

    def test_recipe_flag(self, workspace):
        code, out = fit_into(workspace, "lpp", "--recipe", "lpp")
        assert code == 0
        assert load_model(os.path.join(out, "model")).config.graph[0].kind == "lpp"


class TestTransform:

    def test_training_set_reproduction(self, workspace):
        tmp_path, data_dir, _ = workspace
        _, out = fit_into(workspace, "run")
        emb = str(tmp_path / "emb")
        assert main(["transform", "--model", os.path.join(out, "model"), "--data", data_dir, "--out", emb]) == 0
        for k in (1, 2, 3):
            got = read_matrix(os.path.join(emb, f"view_{k}.csv"))
            want = read_matrix(os.path.join(out, "embeddings", f"view_{k}.csv"))
            np.testing.assert_allclose(got, want, atol=1e-10)

    def test_empty_input(self, workspace):
        tmp_path, _, _ = workspace
        _, out = fit_into(workspace, "run")
        empty = tmp_path / "empty"
        empty.mkdir()
        for k in (1, 2, 3):
            (empty / f"view_{k}.csv").write_text("a,b,c,d\n", encoding="utf-8")
        assert main(["transform", "--model", os.path.join(out, "model"), "--data", str(empty),
                     "--out", str(tmp_path / "emb")]) == 0

    def test_dimension_mismatch(self, workspace, small_data):
        tmp_path, _, _ = workspace
        _, out = fit_into(workspace, "run")
        narrow = str(tmp_path / "narrow")
        save_dataset(MultiviewDataset(tuple(X[:3] for X in small_data.views)), narrow)
        assert main(["transform", "--model", os.path.join(out, "model"), "--data", narrow,
                     "--out", str(tmp_path / "emb")]) == 1

    def test_version_mismatch(self, workspace):
        tmp_path, data_dir, _ = workspace
        _, out = fit_into(workspace, "run")
        path = os.path.join(out, "model", MANIFEST_FILE)
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
        manifest["format_version"] = 99
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f)
        assert main(["transform", "--model", os.path.join(out, "model"), "--data", data_dir,
                     "--out", str(tmp_path / "emb")]) == 2


class TestEval:

    def run_eval(self, workspace, name, *extra):
        tmp_path, data_dir, config = workspace
        out = str(tmp_path / name)
        code = main(["eval", "--data", data_dir, "--out", out, "--config", config,
                     "--repeats", "2", "--seed", "1", *extra])
        return code, out

    def test_classification_is_byte_identical(self, workspace):
        _, a = self.run_eval(workspace, "a", "--task", "classify")
        _, b = self.run_eval(workspace, "b", "--task", "classify")
        for name in ("report.json", "metrics.csv"):
            with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
                assert fa.read() == fb.read()

    @pytest.mark.parametrize("frac", ["0.3", "0.5"])
    def test_train_fractions(self, workspace, frac):
        code, out = self.run_eval(workspace, f"f{frac}", "--task", "classify", "--train-frac", frac)
        assert code == 0
        with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
            assert json.load(f)["train_frac"] == float(frac)

    def test_retrieval_keys(self, workspace, capsys):
        code, out = self.run_eval(workspace, "r", "--task", "retrieve", "--top-n", "2", "5")
        assert code == 0
        with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
            report = json.load(f)
        assert set(report["mean"]) == {"mAP", "P@2", "R@2", "F1@2", "P@5", "R@5", "F1@5"}
        assert "mean_mAP=" in capsys.readouterr().out

    def test_fixed_weights(self, workspace):
        code, out = self.run_eval(workspace, "fixed", "--task", "classify", "--fixed-weights")
        assert code == 0
        with open(os.path.join(out, "report.json"), encoding="utf-8") as f:
            report = json.load(f)
        assert report["learn_weights"] is False
        assert report["runs"][0]["alpha"] == pytest.approx([1 / 3] * 3)

    def test_unknown_task(self, workspace):
        assert self.run_eval(workspace, "x", "--task", "cluster")[0] == 1
