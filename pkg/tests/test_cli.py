import json
from pathlib import Path

import pytest

from src.cli import EXIT_DATA, EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, RunConfig, main
from src.evaluation.metrics import rmse
from src.shdi.parser import parse_edge_files
from src.shdi.synthetic import make_synthetic
from src.solver.model_io import load_model
from src.solver.params import HyperParams, TrainConfig
from src.solver.psnl import predict, train
from tests.helpers import tsv_text

TRAIN_FLAGS = ["--rank", "3", "--max-iters", "30", "--tol", "0"]


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Default manifests land in the working directory."""
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def edges(tmp_path) -> Path:
    mat, _ = make_synthetic(40, rank=3, density=0.4, seed=12)
    path = tmp_path / "edges.tsv"
    path.write_text(tsv_text(mat))
    return path


@pytest.fixture
def rotation(tmp_path, edges) -> Path:
    export = tmp_path / "rot0"
    code = main(["split", "--input", str(edges), "--out", str(tmp_path / "folds.tsv"),
                 "--rotation", "0", "--export-dir", str(export)])
    assert code == EXIT_OK
    return export


def train_model(rotation: Path, model: Path, *extra: str) -> int:
    return main(["train", "--train", str(rotation / "train.tsv"), "--valid",
                 str(rotation / "valid.tsv"), "--model", str(model), *TRAIN_FLAGS, *extra])


class TestSplit:
    def test_balanced_fold_file(self, tmp_path, edges):
        out = tmp_path / "folds.tsv"
        assert main(["split", "--input", str(edges), "--seed", "42", "--out", str(out)]) == EXIT_OK
        folds = [line.split("\t")[0] for line in out.read_text().splitlines()]
        sizes = [folds.count(str(f)) for f in range(10)]
        assert max(sizes) - min(sizes) <= 1
        assert len(folds) == len(edges.read_text().splitlines())

    def test_manifest_echoes_defaults(self, tmp_path, edges):
        out = tmp_path / "folds.tsv"
        main(["split", "--input", str(edges), "--out", str(out)])
        manifest = json.loads(Path(str(out) + ".manifest.json").read_text())
        assert manifest["command"] == "split"
        assert manifest["folds"] == 10
        assert manifest["training"]["rank"] == 20
        assert manifest["hyper"]["lambda"] == 0.02
        assert manifest["hyper"] == HyperParams().model_dump(by_alias=True)
        assert manifest["training"] == TrainConfig().model_dump()
        assert manifest["space"]["eta"]["upper"] == 2.0
        assert manifest["tpe"]["n_trials"] == 60

    def test_export_rotation(self, rotation):
        sizes = {name: len((rotation / f"{name}.tsv").read_text().splitlines())
                 for name in ("train", "valid", "test")}
        assert sizes["train"] > sizes["test"] > sizes["valid"] > 0

    def test_export_writes_the_node_list(self, rotation):
        labels = (rotation / "nodes.tsv").read_text().splitlines()
        assert labels == [str(i) for i in range(40)]

    def test_fold_file_reproduces_the_export(self, tmp_path, rotation):
        again = tmp_path / "again"
        code = main(["split", "--input", str(tmp_path / "edges.tsv"), "--fold-file",
                     str(tmp_path / "folds.tsv"), "--seed", "7", "--rotation", "0",
                     "--export-dir", str(again)])
        assert code == EXIT_OK
        for name in ("train.tsv", "valid.tsv", "test.tsv", "nodes.tsv"):
            assert (again / name).read_text() == (rotation / name).read_text()


class TestTrainEval:
    def test_eval_matches_library(self, tmp_path, rotation, capsys):
        model = tmp_path / "m.psnl"
        assert train_model(rotation, model) == EXIT_OK
        capsys.readouterr()
        assert main(["eval", "--model", str(model), "--test", str(rotation / "test.tsv")]) == EXIT_OK
        printed = capsys.readouterr().out.strip().split("\t")
        assert printed[0] == "RMSE"

        with (rotation / "train.tsv").open() as tr, (rotation / "valid.tsv").open() as va:
            mat_train, mat_valid = parse_edge_files([tr, va])
        state, _ = train(mat_train, mat_valid, HyperParams(), TrainConfig(rank=3, max_iters=30, tol=0.0))
        with (rotation / "test.tsv").open() as te:
            (mat_test,) = parse_edge_files([te], labels=mat_train.labels)
        assert float(printed[1]) == rmse(mat_test, state)
        assert int(printed[2]) == mat_test.edge_count

        with model.open() as f:
            assert rmse(mat_test, load_model(f).state) == rmse(mat_test, state)

    def test_rerun_reproduces_the_model(self, tmp_path, rotation):
        model = tmp_path / "m.psnl"
        assert train_model(rotation, model) == EXIT_OK
        first = model.read_bytes()
        model.unlink()
        assert main(["rerun", "--manifest", str(model) + ".manifest.json"]) == EXIT_OK
        assert model.read_bytes() == first

    def test_checkpoint_and_resume(self, tmp_path, rotation):
        model = tmp_path / "m.psnl"
        assert train_model(rotation, model, "--checkpoint") == EXIT_OK
        assert "#CHECKPOINT\t30" in model.read_text()
        resumed = tmp_path / "resumed.psnl"
        assert train_model(rotation, resumed, "--resume", str(model), "--checkpoint") == EXIT_OK
        assert "#CHECKPOINT\t60" in resumed.read_text()

    def test_resume_needs_a_checkpoint(self, tmp_path, rotation):
        model = tmp_path / "m.psnl"
        train_model(rotation, model)
        assert train_model(rotation, tmp_path / "r.psnl", "--resume", str(model)) == EXIT_DATA

    def test_report(self, tmp_path, rotation):
        report = tmp_path / "report.json"
        assert train_model(rotation, tmp_path / "m.psnl", "--report", str(report)) == EXIT_OK
        data = json.loads(report.read_text())
        assert data["iterations_run"] == 30
        assert data["stop_reason"] == "max_iters"
        assert len(data["rmse_history"]) == 30

    def test_sparse_graph_with_node_list(self, tmp_path):
        mat, _ = make_synthetic(60, rank=2, density=0.05, seed=3)
        edges = tmp_path / "sparse.tsv"
        edges.write_text(tsv_text(mat))
        export = tmp_path / "sparse"
        assert main(["split", "--input", str(edges), "--out", str(tmp_path / "sparse_folds.tsv"),
                     "--rotation", "0", "--export-dir", str(export)]) == EXIT_OK
        model = tmp_path / "sparse.psnl"
        code = train_model(export, model, "--nodes", str(export / "nodes.tsv"))
        assert code == EXIT_OK
        with model.open() as f:
            saved = load_model(f)
        assert list(saved.labels) == (export / "nodes.tsv").read_text().splitlines()
        assert main(["eval", "--model", str(model), "--test", str(export / "test.tsv")]) == EXIT_OK

    def test_node_list_must_cover_the_edges(self, tmp_path, rotation):
        nodes = tmp_path / "few.tsv"
        nodes.write_text("0\n1\n")
        assert train_model(rotation, tmp_path / "m.psnl", "--nodes", str(nodes)) == EXIT_DATA

    def test_scientific_notation(self, tmp_path, rotation):
        code = main(["train", "--train", str(rotation / "train.tsv"), "--valid",
                     str(rotation / "valid.tsv"), "--model", str(tmp_path / "m.psnl"),
                     "--rank", "2", "--max-iters", "1e1", "--tol", "1e-300"])
        assert code == EXIT_OK


class TestPredictStats:
    def test_predict_pairs(self, tmp_path, rotation, capsys):
        model = tmp_path / "m.psnl"
        train_model(rotation, model)
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("0\t1\n# comment\n5\t5\n")
        out = tmp_path / "pred.tsv"
        code = main(["predict", "--model", str(model), "--pairs", str(pairs),
                     "--pair", "1", "0", "--out", str(out)])
        assert code == EXIT_OK
        lines = [line.split("\t") for line in out.read_text().splitlines()]
        assert [line[:2] for line in lines] == [["1", "0"], ["0", "1"], ["5", "5"]]
        assert lines[0][2] == lines[1][2]
        with model.open() as f:
            saved = load_model(f)
        index = saved.id_map
        assert float(lines[2][2]) == predict(saved.state, index["5"], index["5"])

    def test_unknown_label(self, tmp_path, rotation):
        model = tmp_path / "m.psnl"
        train_model(rotation, model)
        assert main(["predict", "--model", str(model), "--pair", "0", "nope"]) == EXIT_DATA

    def test_stats(self, tmp_path, edges, capsys):
        out = tmp_path / "stats.json"
        assert main(["stats", "--input", str(edges), "--out", str(out)]) == EXIT_OK
        stats = json.loads(out.read_text())
        assert stats["nodes"] == 40
        assert stats["pairs"] == len(edges.read_text().splitlines())
        assert 0 < stats["density"] < 1


class TestTuneCv:
    TUNE_FLAGS = ["--trials", "4", "--startup", "3", "--trial-budget", "3", "--rank", "2",
                  "--max-iters", "10"]

    def test_trial_log_is_deterministic_across_threads(self, tmp_path, rotation):
        logs = []
        for threads in ("1", "3"):
            log = tmp_path / f"trials{threads}.tsv"
            code = main(["tune", "--train", str(rotation / "train.tsv"), "--valid",
                         str(rotation / "valid.tsv"), "--trial-log", str(log),
                         "--threads", threads, *self.TUNE_FLAGS])
            assert code == EXIT_OK
            logs.append(log.read_text())
        assert logs[0] == logs[1]
        assert len(logs[0].splitlines()) == 4

    def test_tune_writes_model_and_db(self, tmp_path, rotation, capsys):
        model, db = tmp_path / "tuned.psnl", tmp_path / "results.db"
        code = main(["tune", "--train", str(rotation / "train.tsv"), "--valid",
                     str(rotation / "valid.tsv"), "--model", str(model), "--db", str(db),
                     *self.TUNE_FLAGS])
        assert code == EXIT_OK
        assert model.read_text().startswith("PSNL\tv1\t")
        assert db.exists()
        assert "Stored 4 trials as run 1" in capsys.readouterr().out

    def test_cv_summary_is_byte_identical(self, tmp_path, edges):
        texts = []
        for threads in ("1", "2"):
            csv = tmp_path / f"cv{threads}.csv"
            code = main(["cv", "--input", str(edges), "--no-tune", "--no-timings",
                         "--summary-csv", str(csv), "--threads", threads, "--rank", "2",
                         "--max-iters", "5"])
            assert code == EXIT_OK
            texts.append(csv.read_text())
        assert texts[0] == texts[1]
        assert texts[0].splitlines()[0] == "rotation,rmse,n_pairs,train_seconds,tune_seconds"

    def test_cv_fold_file_matches_the_seeded_split(self, tmp_path, edges):
        folds = tmp_path / "folds5.tsv"
        assert main(["split", "--input", str(edges), "--seed", "5", "--out", str(folds)]) == EXIT_OK
        texts = []
        for extra in ([], ["--fold-file", str(folds)]):
            csv = tmp_path / f"cv{len(extra)}.csv"
            code = main(["cv", "--input", str(edges), "--seed", "5", "--no-tune", "--no-timings",
                         "--summary-csv", str(csv), "--rank", "2", "--max-iters", "5", *extra])
            assert code == EXIT_OK
            texts.append(csv.read_text())
        assert texts[0] == texts[1]


class TestExitCodes:
    def test_help(self):
        assert main(["--help"]) == EXIT_OK

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["fit"],
            ["split", "--input", "x.tsv"],
            ["split", "--input", "x.tsv", "--out", "f.tsv", "--bogus"],
            ["split", "--input", "x.tsv", "--out", "f.tsv", "--folds", "2"],
            ["split", "--input", "x.tsv", "--out", "f.tsv", "--rotation", "1"],
            ["split", "--input", "x.tsv", "--out", "f.tsv", "--seed", "-1"],
            ["cv", "--input", "x.tsv", "--seed", "-3"],
            ["train", "--train", "a", "--valid", "b", "--model", "m", "--lambda", "-1"],
            ["train", "--train", "a", "--valid", "b", "--model", "m", "--rank", "2.5"],
            ["tune", "--train", "a", "--valid", "b", "--threads", "0"],
            ["tune", "--train", "a", "--valid", "b", "--theta", "1.5"],
            ["tune", "--train", "a", "--valid", "b", "--eta-range", "2", "1"],
            ["predict", "--model", "m"],
        ],
    )
    def test_usage_errors(self, argv):
        assert main(argv) == EXIT_USAGE

    def test_missing_file(self, tmp_path):
        code = main(["stats", "--input", str(tmp_path / "absent.tsv")])
        assert code == EXIT_DATA

    def test_missing_fold_file(self, tmp_path, edges):
        code = main(["cv", "--input", str(edges), "--fold-file", str(tmp_path / "absent.tsv"),
                     "--no-tune"])
        assert code == EXIT_DATA

    def test_malformed_data(self, tmp_path, capsys):
        bad = tmp_path / "bad.tsv"
        bad.write_text("0\t1\t0.5\n1\t2\t-3\n")
        assert main(["stats", "--input", str(bad)]) == EXIT_DATA
        assert "line 2" in capsys.readouterr().err

    def test_divergence(self, tmp_path):
        (tmp_path / "tr.tsv").write_text("0\t1\t1.0\n0\t0\t1.0\n")
        (tmp_path / "va.tsv").write_text("1\t1\t1.0\n")
        (tmp_path / "huge.psnl").write_text(
            "PSNL\tv1\t2\t1\n1e200\n1e200\n#LABELS\n0\t0\n1\t1\n"
            "#CHECKPOINT\t0\n1e200\n1e200\n0.0\n0.0\n"
        )
        code = main(["train", "--train", str(tmp_path / "tr.tsv"), "--valid",
                     str(tmp_path / "va.tsv"), "--model", str(tmp_path / "out.psnl"),
                     "--resume", str(tmp_path / "huge.psnl"), "--rank", "1", "--tol", "0",
                     "--max-iters", "3"])
        assert code == EXIT_DIVERGED


def test_manifest_json_round_trip():
    cfg = RunConfig(command="train", train="a", valid="b", model="m",
                    training=TrainConfig(tol=float("inf")))
    again = RunConfig.model_validate_json(cfg.to_json())
    assert again == cfg
