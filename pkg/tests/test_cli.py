import io
import json
import os

import numpy as np
import pytest

from pmsdr import generate_dataset, stream_init, stream_update
from pmsdr.cli import main
from pmsdr.datasets import write_dataset_csv
from pmsdr.serialize import parse_csv_dataset

GOLDEN_EVALUES = [0.7802035134, 0.0450979178, 0.0069745442, 0.0013436194, 0.0002315534]


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PMSDR_OUT_DIR", raising=False)
    return tmp_path


def run(*argv):
    return main(list(argv))


def read_predictor_csv(path):
    with open(path) as fh:
        lines = fh.read().strip().splitlines()
    header = lines[0].split(",")
    data = np.asarray([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return header, data


class TestGenerate:
    def test_deterministic_output(self, workdir):
        assert run("generate", "--model", "ratio", "--n", "60", "--p", "3",
                   "--seed", "4", "--out", "a.csv") == 0
        assert run("generate", "--model", "ratio", "--n", "60", "--p", "3",
                   "--seed", "4", "--out", "b.csv") == 0
        assert open("a.csv").read() == open("b.csv").read()

    def test_binary_model_values(self, workdir):
        run("generate", "--model", "ratio-binary", "--n", "60", "--p", "3",
            "--seed", "4", "--out", "bin.csv")
        _, y, _ = parse_csv_dataset(open("bin.csv").read())
        assert set(np.unique(y)) <= {-1.0, 1.0}


class TestFit:
    def test_fit_writes_documents(self, workdir):
        run("generate", "--model", "ratio", "--n", "120", "--p", "4", "--seed", "0",
            "--out", "d.csv")
        assert run("fit", "--input", "d.csv", "--out", "run") == 0
        doc = json.load(open("run.fit.json"))
        assert doc["kind"] == "linear"
        assert doc["n"] == 120
        header, data = read_predictor_csv("run.predictors.csv")
        assert header == ["sp1", "y"]
        assert data.shape == (120, 2)

    def test_round_trip_fit_project(self, workdir):
        run("generate", "--model", "ratio", "--n", "100", "--p", "4", "--seed", "1",
            "--out", "d.csv")
        run("fit", "--input", "d.csv", "--d", "2", "--out", "run")
        assert run("project", "--fit", "run.fit.json", "--input", "d.csv",
                   "--d", "2", "--out", "proj") == 0
        _, fit_side = read_predictor_csv("run.predictors.csv")
        _, proj_side = read_predictor_csv("proj.projected.csv")
        assert np.abs(fit_side - proj_side).max() <= 1e-10

    def test_unknown_loss_exits_2_listing_names(self, workdir, capsys):
        run("generate", "--model", "ratio", "--n", "60", "--p", "3", "--seed", "2",
            "--out", "d.csv")
        code = run("fit", "--input", "d.csv", "--loss", "nosuch", "--out", "x")
        assert code == 2
        err = capsys.readouterr().err
        for name in ("svm", "logit", "l2svm", "lssvm", "wsvm", "wlogit",
                     "wl2svm", "wlssvm", "qr", "asls"):
            assert name in err

    def test_numeric_failure_exits_3_naming_module(self, workdir, capsys):
        run("generate", "--model", "ratio", "--n", "60", "--p", "3", "--seed", "3",
            "--out", "d.csv")
        code = run("fit", "--input", "d.csv", "--loss", "lssvm", "--eta", "1e300",
                   "--out", "x")
        assert code == 3
        assert "solver" in capsys.readouterr().err

    def test_custom_expression_loss(self, workdir):
        run("generate", "--model", "ratio", "--n", "80", "--p", "3", "--seed", "4",
            "--out", "d.csv")
        assert run("fit", "--input", "d.csv", "--loss", "custom:log(1+exp(-u))",
                   "--out", "c") == 0
        assert json.load(open("c.fit.json"))["loss"] == "custom"

    def test_custom_expression_from_file(self, workdir):
        run("generate", "--model", "ratio", "--n", "80", "--p", "3", "--seed", "5",
            "--out", "d.csv")
        with open("loss.txt", "w") as fh:
            fh.write("max(0, 1-u)**2\n")
        assert run("fit", "--input", "d.csv", "--loss", "custom:loss.txt",
                   "--out", "c2") == 0

    def test_missing_input_exits_2(self, workdir, capsys):
        assert run("fit", "--input", "absent.csv", "--out", "x") == 2
        assert "absent.csv" in capsys.readouterr().err

    def test_bad_csv_exits_2(self, workdir):
        with open("bad.csv", "w") as fh:
            fh.write("a,y\n1.0,zap\n")
        assert run("fit", "--input", "bad.csv", "--out", "x") == 2

    def test_out_dir_env(self, workdir, monkeypatch):
        run("generate", "--model", "ratio", "--n", "60", "--p", "3", "--seed", "6",
            "--out", "d.csv")
        monkeypatch.setenv("PMSDR_OUT_DIR", str(workdir / "outputs"))
        assert run("fit", "--input", "d.csv", "--out", "run") == 0
        assert (workdir / "outputs" / "run.fit.json").exists()

    def test_response_column_by_name(self, workdir):
        x, y = generate_dataset("ratio", 60, 3, seed=7)
        with open("named.csv", "w") as fh:
            fh.write("resp,x1,x2,x3\n")
            for yi, row in zip(y, x):
                fh.write(",".join(repr(float(v)) for v in [yi, *row]) + "\n")
        assert run("fit", "--input", "named.csv", "--y", "resp", "--out", "named") == 0
        assert json.load(open("named.fit.json"))["n"] == 60


class TestBic:
    def test_golden_printout(self, workdir, capsys):
        doc = {
            "schema_version": 1,
            "kind": "linear",
            "n": 200,
            "loss": "svm",
            "h": 10,
            "evalues": GOLDEN_EVALUES,
            "evectors": np.eye(5).tolist(),
            "mu": [0.0] * 5,
            "cutpoints": [],
            "slices": [],
        }
        with open("inject.fit.json", "w") as fh:
            json.dump(doc, fh)
        assert run("bic", "--fit", "inject.fit.json", "--rho", "0.03",
                   "--out", "sel") == 0
        out = capsys.readouterr().out
        assert "0.7714345 0.8077633 0.8059689 0.7985434 0.7900059" in out
        assert "d_hat = 2" in out
        assert json.load(open("sel.bic.json"))["d_hat"] == 2

    def test_bic_on_real_fit(self, workdir):
        run("generate", "--model", "ratio", "--n", "150", "--p", "4", "--seed", "8",
            "--out", "d.csv")
        run("fit", "--input", "d.csv", "--out", "run")
        assert run("bic", "--fit", "run.fit.json") == 0


class TestKernel:
    def test_fit_kernel_and_project(self, workdir):
        run("generate", "--model", "radial", "--n", "90", "--p", "4", "--seed", "9",
            "--out", "d.csv")
        assert run("fit-kernel", "--input", "d.csv", "--out", "k") == 0
        doc = json.load(open("k.fit.json"))
        assert doc["kind"] == "kernel"
        header, data = read_predictor_csv("k.predictors.csv")
        assert header == ["sp1", "sp2", "y"]
        assert run("project", "--fit", "k.fit.json", "--input", "d.csv",
                   "--out", "kp") == 0
        _, proj = read_predictor_csv("kp.projected.csv")
        assert np.abs(proj[:, :2] - data[:, :2]).max() <= 1e-10


class TestStream:
    @pytest.fixture()
    def batches(self, workdir):
        x, y = generate_dataset("ratio", 600, 4, seed=10)
        os.makedirs("batches")
        for i in range(3):
            write_dataset_csv(f"batches/part{i}.csv", x[i * 200 : (i + 1) * 200],
                              y[i * 200 : (i + 1) * 200])
        return x, y

    def test_stream_over_directory_matches_library(self, batches, workdir):
        x, y = batches
        assert run("stream", "--input", "batches", "--out", "s") == 0
        state = stream_init(x[:200], y[:200])
        state = stream_update(state, x[200:400], y[200:400])
        state = stream_update(state, x[400:], y[400:])
        doc = json.load(open("s.fit.json"))
        assert doc["kind"] == "realtime"
        assert np.array_equal(np.asarray(doc["r"]), state.r)
        snap = json.load(open("s.state.json"))
        assert snap["n"] == 600

    def test_stream_equals_single_file_solve_at_frozen_cutpoints(self, batches, workdir):
        x, y = batches
        run("stream", "--input", "batches", "--out", "s")
        doc = json.load(open("s.fit.json"))
        cutpoints = np.asarray(doc["cutpoints"])
        # single-pass squared-loss solve over the concatenated file, slicing
        # at the cutpoints the stream froze from its first batch
        xt = np.hstack([np.ones((len(y), 1)), x])
        z = x - x.mean(axis=0)
        scatter = z.T @ z
        for k, c in enumerate(cutpoints):
            yt = np.where(y >= c, 1.0, -1.0)
            a = xt.T @ xt * doc["lambda"]
            a[1:, 1:] += scatter
            rhs = doc["lambda"] * xt.T @ yt
            direct = np.linalg.solve(a, rhs)
            assert np.abs(np.asarray(doc["r"][k]) - direct).max() <= 1e-6

    def test_stream_resume_from_state(self, batches, workdir):
        x, y = batches
        run("stream", "--input", "batches", "--out", "full")
        os.makedirs("first")
        os.rename("batches/part0.csv", "first/part0.csv")
        run("stream", "--input", "first", "--out", "head")
        assert run("stream", "--input", "batches", "--state", "head.state.json",
                   "--out", "resumed") == 0
        full = json.load(open("full.fit.json"))
        resumed = json.load(open("resumed.fit.json"))
        assert full["r"] == resumed["r"]

    def test_stream_from_stdin(self, workdir, monkeypatch):
        x, y = generate_dataset("ratio", 200, 3, seed=11)
        from pmsdr.datasets import dataset_csv_text

        text = dataset_csv_text(x[:100], y[:100])
        chunk2 = "".join(
            line + "\n" for line in dataset_csv_text(x[100:], y[100:]).splitlines()[1:]
        )
        monkeypatch.setattr("sys.stdin", io.StringIO(text + "\n" + chunk2))
        assert run("stream", "--input", "-", "--out", "sio") == 0
        assert json.load(open("sio.state.json"))["n"] == 200

    def test_empty_directory_exits_2(self, workdir):
        os.makedirs("empty")
        assert run("stream", "--input", "empty", "--out", "x") == 2
