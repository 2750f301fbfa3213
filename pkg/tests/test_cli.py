import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from datesort.cli import main

SMALL = {
    "seed": 5,
    "out_dir": "run",
    "simulator": {"counts": {v: 5 for v in ("IRAQI", "ROTANA", "DEGLET", "BERHI", "AJWA", "MEDJOOL_RUTAB",
                                             "SUKKARY_RUTAB", "SUKKARY_DRIED")}, "image_size": 32},
    "preprocess": {"size": 32},
    "model": {"epochs": 5, "batch_size": 8},
    "ga": {"population_size": 4, "generations": 2, "fitness_epochs": 1, "max_samples": 40},
    "rl": {"steps": 120, "final_window": 60, "episodes": 1},
    "eval": {"test_fraction": 0.25},
}


def write_config(path, doc=SMALL):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture(scope="module")
def project(tmp_path_factory):
    """A config plus gen and train outputs shared by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    cfg = write_config(root / "cfg.json")
    assert main(["gen", "--config", str(cfg)]) == 0
    assert main(["train", "--config", str(cfg)]) == 0
    return root, cfg


def check_manifest(out):
    m = json.loads((out / "run_manifest.json").read_text())
    listed = {a["path"]: a for a in m["artifacts"]}
    on_disk = {p.relative_to(out).as_posix() for p in out.rglob("*") if p.is_file()} - {"run_manifest.json"}
    assert set(listed) == on_disk
    for rel, a in listed.items():
        data = (out / rel).read_bytes()
        assert a["bytes"] == len(data) and a["sha256"] == hashlib.sha256(data).hexdigest()
    assert m["config_hash"] == hashlib.sha256((out / "config.json").read_bytes()).hexdigest()
    return m


# -------------------------------------------------------------- contracts

def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["frobnicate", "--config", "x.json"]) == 1
    assert main(["gen"]) == 1


def test_bad_config_exit_1(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"simulator": {"counts": {"KHUDRI": 4}}})
    assert main(["gen", "--config", str(cfg)]) == 1
    assert "KHUDRI" in capsys.readouterr().err
    assert not (tmp_path / "run").exists()


def test_console_script_entry_point(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"bogus": 1})
    r = subprocess.run([sys.executable, "-m", "datesort.cli", "gen", "--config", str(cfg)],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "unknown key 'bogus'" in r.stderr


def test_gen_outputs_and_manifest(project):
    root, _ = project
    out = root / "run" / "gen"
    m = check_manifest(out)
    assert m["command"] == "gen" and m["seed"] == 5
    data = json.loads((out / "manifest.json").read_text())
    assert data["total"] == 40


def test_existing_output_needs_force(project, capsys):
    root, cfg = project
    out = root / "again"
    assert main(["gen", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["gen", "--config", str(cfg), "--out", str(out)]) == 1
    assert "--force" in capsys.readouterr().err
    assert main(["gen", "--config", str(cfg), "--out", str(out), "--force"]) == 0


def test_force_refuses_foreign_directory(tmp_path, project):
    _, cfg = project
    foreign = tmp_path / "precious"
    foreign.mkdir()
    (foreign / "notes.txt").write_text("keep me")
    assert main(["gen", "--config", str(cfg), "--out", str(foreign), "--force"]) == 1
    assert (foreign / "notes.txt").read_text() == "keep me"


def test_train_report_and_manifest(project):
    root, _ = project
    out = root / "run" / "train"
    check_manifest(out)
    rep = json.loads((out / "train_report.json").read_text())
    assert len(rep["epoch_losses"]["total"]) == 5


def test_seed_override_changes_output(project, tmp_path):
    _, cfg = project
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "6"]) == 0
    m = json.loads((tmp_path / "a" / "run_manifest.json").read_text())
    assert m["seed"] == 6
    base = (project[0] / "run" / "gen" / "img" / "0.ppm").read_bytes()
    assert (tmp_path / "a" / "img" / "0.ppm").read_bytes() != base


def test_missing_dataset_exit_1(tmp_path, project):
    _, cfg = project
    assert main(["train", "--config", str(cfg), "--data", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "t")]) == 1
    assert not (tmp_path / "t").exists()


def test_missing_spectral_file_cites_id(tmp_path, project, capsys):
    root, cfg = project
    ds = tmp_path / "ds"
    shutil.copytree(root / "run" / "gen", ds)
    (ds / "spec" / "7.csv").unlink()
    assert main(["train", "--config", str(cfg), "--data", str(ds), "--out", str(tmp_path / "t")]) == 1
    assert "sample id 7" in capsys.readouterr().err


def test_invalid_model_file_exit_1(tmp_path, project):
    _, cfg = project
    bad = tmp_path / "model.json"
    bad.write_text("{}")
    assert main(["simulate", "--config", str(cfg), "--model", str(bad), "--out", str(tmp_path / "s")]) == 1


def test_runtime_failure_exit_2(tmp_path, project, capsys):
    root, _ = project
    # a model trained at 32 px cannot read 48 px inputs
    doc = json.loads(json.dumps(SMALL))
    doc["preprocess"]["size"] = 48
    doc["out_dir"] = str(root / "run")
    cfg = write_config(tmp_path / "c.json", doc)
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 2
    assert "runtime failure" in capsys.readouterr().err
    assert not (tmp_path / "e").exists()


def test_eval_needs_eight_samples(tmp_path, project, capsys):
    root, _ = project
    doc = json.loads(json.dumps(SMALL))
    doc["eval"]["test_fraction"] = 0.1
    doc["out_dir"] = str(root / "run")
    cfg = write_config(tmp_path / "c.json", doc)
    assert main(["eval", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 1
    assert "at least 8" in capsys.readouterr().err


def test_eval_outputs(project, tmp_path):
    root, cfg = project
    out = tmp_path / "eval"
    assert main(["eval", "--config", str(cfg), "--out", str(out)]) == 0
    check_manifest(out)
    assert len(list(out.glob("roc_*.csv"))) == 8
    rows = [line.split()[0] for line in (out / "summary.txt").read_text().splitlines()[1:]]
    assert rows == ["Accuracy", "Precision", "Recall", "F1-Score", "Specificity", "AUC-ROC", "Shelf-life"]
    report = json.loads((out / "report.json").read_text())
    assert report["variety"]["total"] == report["n_samples"] == 8   # one per variety


def test_evolve_outputs(project, tmp_path):
    _, cfg = project
    out = tmp_path / "evolve"
    assert main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
    check_manifest(out)
    lines = (out / "ga_history.csv").read_text().strip().splitlines()
    assert len(lines) == 3
    best = [float(line.split(",")[1]) for line in lines[1:]]
    assert best == sorted(best)
    rep = json.loads((out / "ga_report.json").read_text())
    assert sum(rep["best_genome"]["mask"]) >= 1
    assert (out / "model.json").is_file()


def test_simulate_outputs(project, tmp_path):
    _, cfg = project
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    check_manifest(out)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["gap"] == pytest.approx(summary["adaptive_accuracy"] - summary["baseline_accuracy"])
    header = (out / "adaptation_log.csv").read_text().splitlines()[0]
    assert header == "step,state,action,reward,gain,threshold,running_accuracy"
    assert len((out / "adaptation_log.csv").read_text().splitlines()) == 121
    q = json.loads((out / "qtable.json").read_text())
    assert len(q["values"]) == 20 and all(len(r) == 7 for r in q["values"])
