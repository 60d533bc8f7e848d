"""Tests for the command-line front end."""

from __future__ import annotations

import io
import json
import re

import numpy as np
import pytest

from graphbreak import jsonio
from graphbreak.cli import read_config, run


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def payload(text):
    doc = json.loads(text)
    doc.pop("generated_at")
    return doc


@pytest.fixture(scope="module")
def bundle_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "bundle.json"
    code, out, err = invoke("construct", "--lambda", "0.75", "--n", "32", "--eps", "0.1", "--dim", "1",
                            "-o", str(path))
    assert code == 0, err
    return path


class TestConstruct:

    def test_bundle_depth(self, bundle_file):
        doc = jsonio.load(bundle_file)
        b = doc["bundle"]
        assert doc["command"] == "construct"
        assert b["delta"] == pytest.approx(0.583333, abs=1e-6)
        assert -b["extrema"]["min"] == pytest.approx(b["delta"], abs=1e-9)
        assert b["extrema"]["max"] <= 1 / 32

    def test_summary_on_stdout(self, tmp_path):
        code, out, _ = invoke("construct", "--lambda", "0.25", "--n", "8", "-o", str(tmp_path / "b.json"))
        assert code == 0
        assert out.count("\n") == 1 and out.startswith("construct:")

    def test_csv(self, tmp_path):
        csv = tmp_path / "curve.csv"
        code, _, _ = invoke("construct", "--lambda", "0.25", "--n", "8", "--csv", str(csv),
                            "--csv-resolution", "256", "-o", str(tmp_path / "b.json"))
        assert code == 0
        degree = jsonio.load(tmp_path / "b.json")["bundle"]["derivative"]["degree"]
        data = np.loadtxt(csv, delimiter=",", skiprows=1)
        assert data.shape == (max(256, 2 * degree + 1), 3)
        assert csv.read_text().splitlines()[0] == "x1,potential,derivative"

    def test_deterministic(self):
        a = invoke("construct", "--lambda", "0.25", "--n", "8")
        b = invoke("construct", "--lambda", "0.25", "--n", "8")
        assert payload(a[1]) == payload(b[1])
        stamp = re.compile(r'"generated_at":\s*"[^"]*"')
        assert stamp.sub("", a[1]) == stamp.sub("", b[1])


class TestCriterion:

    def test_triple(self):
        code, out, _ = invoke("criterion", "--lambda", "0.5", "--m", "-0.8", "--M", "0.01")
        assert code == 0
        assert payload(out)["report"]["verdict"] == "DestructionCertified"

    def test_from_bundle(self, bundle_file):
        code, out, _ = invoke("criterion", "--input", str(bundle_file))
        rep = payload(out)["report"]
        assert code == 0 and rep["verdict"] == "DestructionCertified"
        assert rep["m"] == pytest.approx(-0.5833333333333334, abs=1e-9)

    def test_from_report(self, tmp_path):
        path = tmp_path / "crit.json"
        assert invoke("criterion", "--lambda", "0.5", "--m", "-1", "--M", "1", "-o", str(path))[0] == 0
        code, out, _ = invoke("criterion", "--input", str(path))
        assert code == 0 and payload(out)["report"]["verdict"] == "NoConclusion"

    def test_dd_modes(self):
        code, out, _ = invoke("criterion", "--lambda", "0.6", "--m", "-0.8", "--M", "0", "--dim", "2",
                              "--mode", "PaperAsymptoticDD")
        rep = payload(out)["report"]
        assert code == 0 and rep["verdict"] == "DestructionCertified" and rep["disagreement"]

    def test_missing_inputs(self):
        code, _, err = invoke("criterion", "--lambda", "0.5")
        assert code == 2 and json.loads(err)["error"] == "BadConfig"


class TestHerman:

    def test_default_graph_standard(self):
        code, out, _ = invoke("herman", "--map", "none", "--lambda", "0.5")
        res = payload(out)["residuals"]
        assert code == 0 and res["formula"] < 1e-10 and res["invariance"] < 1e-10

    def test_accepts_bundle(self, bundle_file):
        code, out, _ = invoke("herman", "--bundle", str(bundle_file))
        assert code == 0
        res = payload(out)["residuals"]
        assert res["invariance"] > 0

    def test_simulated_graph_round_trip(self, tmp_path):
        graph = tmp_path / "graph.json"
        code, _, err = invoke("simulate", "--map", "std", "--lambda", "0.5", "--k", "0.1", "--transient", "50",
                              "--keep", "20", "--graph-out", str(graph), "-o", str(tmp_path / "sim.json"))
        assert code == 0, err
        code, out, _ = invoke("herman", "--map", "std", "--lambda", "0.5", "--k", "0.1", "--graph", str(graph))
        res = payload(out)["residuals"]
        assert code == 0 and res["formula"] < 1e-8 and res["invariance"] < 1e-8


class TestThreshold:

    def test_grid(self):
        code, out, _ = invoke("threshold", "--lambda-grid", "0.1:0.9:0.1")
        rows = payload(out)["rows"]
        assert code == 0 and len(rows) == 9
        row = next(r for r in rows if abs(r["lambda"] - 0.5) < 1e-12)
        assert row["k0"] == pytest.approx(1.2, abs=1e-8)

    def test_single(self):
        code, out, _ = invoke("threshold", "--lambda", "1.0")
        assert code == 0 and payload(out)["rows"][0]["k0"] == pytest.approx(4 / 3, abs=1e-8)

    def test_bad_grid(self):
        assert invoke("threshold", "--lambda-grid", "0.9:0.1:0.1")[0] == 2


class TestSimulate:

    def test_large_k(self, tmp_path):
        csv = tmp_path / "cloud.csv"
        code, out, _ = invoke("simulate", "--map", "std", "--lambda", "0.5", "--k", "2.0", "--transient", "500",
                              "--keep", "200", "--csv", str(csv))
        doc = payload(out)
        assert code == 0
        assert doc["report"]["verdict"] == "NonGraph"
        assert doc["graph_transform"]["status"] == "FoldDetected"
        assert csv.read_text().splitlines()[0] == "x1,y1"

    def test_overflow_is_numerical(self):
        code, _, err = invoke("simulate", "--map", "std", "--lambda", "0.5", "--alpha2", "1e8", "--transient", "5",
                              "--keep", "1")
        assert code == 3 and json.loads(err)["error"] == "Overflow"

    def test_bundle_requires_file(self):
        assert invoke("simulate", "--map", "bundle", "--lambda", "0.5")[0] == 2


class TestApprox:

    def test_expcos(self):
        code, out, _ = invoke("approx", "--N", "32")
        rep = payload(out)["report"]
        assert code == 0 and rep["achieved_error"] < 1e-12

    def test_grid_file(self, tmp_path):
        path = tmp_path / "grid.json"
        x = np.arange(64) / 64
        jsonio.dump(np.cos(2 * np.pi * x).tolist(), path)
        code, out, _ = invoke("approx", "--grid", str(path), "--N", "3", "--norms", "1:6.3,2:40")
        rep = payload(out)["report"]
        assert code == 0 and rep["achieved_error"] < 1e-12 and rep["k"] in (1, 2)

    def test_resolution_too_low(self):
        code, _, err = invoke("approx", "--N", "64", "--resolution", "32")
        assert code == 2 and json.loads(err)["error"] == "ResolutionTooLow"


class TestValidation:

    @pytest.mark.parametrize("lam", ["1.5", "0", "-0.1"])
    def test_lambda(self, lam):
        code, _, err = invoke("construct", "--lambda", lam, "--n", "8")
        assert code == 2 and json.loads(err)["exit_code"] == 2

    def test_eps(self):
        assert invoke("construct", "--lambda", "0.5", "--n", "8", "--eps", "2")[0] == 2

    def test_unknown_command(self):
        code, _, err = invoke("explode")
        assert code == 2 and json.loads(err)["error"] == "UnknownCommand"

    def test_missing_required(self):
        code, _, err = invoke("construct", "--n", "8")
        assert code == 2 and json.loads(err)["error"] == "BadConfig"

    def test_missing_file(self, tmp_path):
        code, _, err = invoke("criterion", "--input", str(tmp_path / "nope.json"))
        assert code == 2

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("GRAPHBREAK_THREADS", "2")
        assert invoke("threshold", "--lambda", "0.5")[0] == 0
        monkeypatch.setenv("GRAPHBREAK_THREADS", "zero")
        assert invoke("threshold", "--lambda", "0.5")[0] == 2


class TestConfig:

    def test_file_supplies_required(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 1\n[construct]\nlambda = 0.25\nn = 8\n")
        code, out, err = invoke("construct", "--config", str(cfg))
        assert code == 0, err
        assert payload(out)["bundle"]["n"] == 8

    def test_flag_wins(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[threshold]\nlambda = 0.5\n")
        code, out, _ = invoke("threshold", "--config", str(cfg), "--lambda", "0.25")
        assert payload(out)["rows"][0]["lambda"] == 0.25

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[threshold]\nbogus = 1\n")
        code, _, err = invoke("threshold", "--config", str(cfg))
        assert code == 2 and json.loads(err)["error"] == "BadConfig"

    def test_sections(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nseed = 3\n[simulate]\nk = 2.0\n[construct]\nn = 4\n")
        assert read_config(str(cfg), "simulate") == {"seed": "3", "k": "2.0"}
        assert read_config(str(cfg), "construct") == {"seed": "3", "n": "4"}
