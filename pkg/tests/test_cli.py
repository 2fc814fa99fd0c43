import json

import pytest

from bilinlab.cli import DEFAULT_SEED, run
from bilinlab.weights import GRAMMAR


def test_certify_writes_json_csv_and_plot(tmp_path):
    out = tmp_path / "cert.json"
    code = run(["certify", "--weight", "sum-power:-0.5", "--radii", "4,8,16,32", "--out", str(out),
                "--plot", str(tmp_path / "cert.svg")])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "bounded" and doc["schema"] == 1
    assert doc["config"]["seed"] == DEFAULT_SEED and doc["seeds"]
    assert (tmp_path / "cert.csv").read_text().startswith("radius,norm")
    assert (tmp_path / "cert.svg").exists()


def test_verdict_mismatch_exits_2():
    assert run(["certify", "--weight", "const:1", "--radii", "4,8,16", "--expect", "bounded"]) == 2


def test_bad_weight_prints_the_grammar(capsys):
    assert run(["certify", "--weight", "nonsense:1"]) == 1
    assert GRAMMAR in capsys.readouterr().err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["certify"], ["certify", "--weight", "const:1", "--radii", "a,b"],
                                  ["certify", "--weight", "const:1", "--radii", "4,8"],
                                  ["norm", "--grid-file", "/nonexistent/file"]])
def test_usage_errors_exit_1(argv):
    assert run(argv) == 1


def test_apply_product_check():
    assert run(["apply", "--symbol", "const:1", "--f1", "gauss", "--f2", "gauss", "--check", "product"]) == 0


def test_apply_saves_a_container_that_norm_reads(tmp_path, capsys):
    path = tmp_path / "T.grid"
    assert run(["apply", "--symbol", "bracket-power:-0.5", "--save", str(path), "--L", "8", "--N", "128"]) == 0
    capsys.readouterr()
    assert run(["norm", "--grid-file", str(path), "--target", "amalgam:1"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] > 0


def test_range_sharpness_run(tmp_path):
    assert run(["sharpness", "--case", "range", "--r", "1", "--K", "5", "--out", str(tmp_path / "r.json")]) == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["slope"] == pytest.approx(-0.5, abs=0.1)


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults for this run\nradii = 2,4,8\nrestarts = 2\nseed = 11\n")
    out = tmp_path / "c.json"
    assert run(["certify", "--weight", "sum-power:-0.5", "--config", str(cfg), "--restarts", "3",
                "--out", str(out)]) in (0, 2)
    doc = json.loads(out.read_text())
    assert doc["config"]["radii"] == [2, 4, 8]
    assert doc["config"]["restarts"] == 3 and doc["config"]["seed"] == 11


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert run(["certify", "--weight", "const:1", "--config", str(cfg)]) == 1


def test_thread_variable_is_honoured(monkeypatch):
    monkeypatch.setenv("BILINLAB_THREADS", "2")
    assert run(["apply", "--symbol", "const:1", "--check", "product"]) == 0


def test_other_commands_complete(tmp_path):
    assert run(["norm", "--weight", "sum-power:-0.5", "--radius", "1", "--oracle"]) == 0
    assert run(["besov", "--symbol", "bracket-power:-0.5", "--L", "8", "--N", "128"]) == 0
    assert run(["randomsign", "--weight", "const:1", "--radii", "2,4,8,16"]) == 0
    assert run(["ghs", "--K", "5"]) == 0
    assert run(["sweep", "--symbol", "weight:step(sum-power:-0.5)", "--bands", "1..4", "--trials", "8",
                "--out", str(tmp_path / "s.json"), "--plot", str(tmp_path / "s.svg")]) == 0
    assert run(["selftest", "--only", "13"]) == 0
