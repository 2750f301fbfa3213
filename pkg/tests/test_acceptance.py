"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

The end-to-end criteria run the real command line on the default
benchmark, so this module takes a few minutes.
"""

import hashlib
import json
import math
import time

import numpy as np
import pytest

from conftest import disk_mask, ellipse_mask
from oracles import gradient_check, mann_whitney_auc, record
from datesort.cli import main
from datesort.evalmetrics import roc_curve
from datesort.evolver import GAConfig, run_ga
from datesort.features import geometric_features, subband_energies, wavedec2
from datesort.preprocess import SpectralReading, calibrate_spectral
from datesort.synthcrop import SimulatorConfig

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    """gen, train and eval on the default config (seed 42), timed."""
    root = tmp_path_factory.mktemp("default")
    cfg = root / "cfg.json"
    cfg.write_text("{}")
    t0 = time.perf_counter()
    codes = [main([c, "--config", str(cfg)]) for c in ("gen", "train", "eval")]
    elapsed = time.perf_counter() - t0
    return root, cfg, codes, elapsed


def test_criterion_1_end_to_end_benchmark(default_run):
    root, _, codes, elapsed = default_run
    report = json.loads((root / "run" / "eval" / "report.json").read_text())
    gen = json.loads((root / "run" / "gen" / "manifest.json").read_text())
    acc = report["variety"]["accuracy"]
    auc = report["spoilage"]["macro_auc"]
    counts = sorted(gen["counts"].values())
    ok = (codes == [0, 0, 0] and acc >= 0.90 and auc >= 0.95 and elapsed <= 600
          and len(counts) == 8 and counts[0] == 50 and counts[-1] == 276 and gen["total"] > 900)
    record(1, "default benchmark train+eval", ok,
           f"variety accuracy {acc:.4f} >= 0.90, spoilage macro AUC {auc:.4f} >= 0.95, "
           f"{gen['total']} samples, runtime {elapsed:.0f}s <= 600s")
    assert ok


def test_criterion_2_geometry_oracles():
    rng = np.random.default_rng(2024)
    worst = {"area": 0.0, "ecc": 0.0, "solidity": 1.0, "disk_ecc": 0.0, "ellipse_ecc": 0.0}
    for i in range(20):
        if i % 2 == 0:
            r = float(rng.uniform(32, 44))
            a = b = r
            mask = disk_mask(r, size=int(2 * r) + 12, cy=r + 6 + rng.uniform(), cx=r + 6 + rng.uniform())
        else:
            b = float(rng.uniform(32, 40))
            a = float(rng.uniform(b, 2.2 * b))
            size = int(2 * a) + 12
            mask = ellipse_mask(a, b, size=size, cy=size / 2 + rng.uniform(), cx=size / 2 + rng.uniform(),
                                theta=float(rng.uniform(0, math.pi)))
        g = geometric_features(mask)
        worst["area"] = max(worst["area"], abs(g.area - math.pi * a * b) / (math.pi * a * b))
        err = abs(g.eccentricity - math.sqrt(1 - (b / a) ** 2))
        worst["ecc"] = max(worst["ecc"], err)
        kind = "disk_ecc" if a == b else "ellipse_ecc"
        worst[kind] = max(worst[kind], err)
        worst["solidity"] = min(worst["solidity"], g.solidity)
    ok = worst["area"] < 0.02 and worst["ecc"] <= 0.03 and worst["solidity"] >= 0.98
    record(2, "geometric features of 20 seeded disks/ellipses", ok,
           f"max area error {worst['area']:.4%} < 2%, max eccentricity error {worst['ecc']:.4f} <= 0.03 "
           f"(ellipses {worst['ellipse_ecc']:.4f}, disks {worst['disk_ecc']:.4f}), "
           f"min solidity {worst['solidity']:.4f} >= 0.98")
    assert ok


def test_criterion_3_wavelet_energy():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        x = rng.random((32, 32))
        total = sum(float((c ** 2).sum()) for c in wavedec2(x, 2))
        worst = max(worst, abs(total - float((x ** 2).sum())) / float((x ** 2).sum()))
    consts = [subband_energies(np.full((32, 32), c)) for c in rng.random(20)]
    zero_details = all(np.all(e[1:] == 0.0) for e in consts)
    ok = worst < 1e-9 and zero_details
    record(3, "Daub4 energy conservation", ok,
           f"max relative energy error {worst:.2e} < 1e-9 on 100 inputs, constant inputs give exact zero "
           f"details: {zero_details}")
    assert ok


def test_criterion_4_gradient_check():
    errors = gradient_check(100, seed=4)
    ok = max(errors) < 1e-4
    record(4, "analytic vs central-difference gradients", ok,
           f"max relative error {max(errors):.2e} < 1e-4 over 100 parameters")
    assert ok


def test_criterion_5_metrics_oracle():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        labels = rng.integers(0, 2, n)
        labels[:2] = (0, 1)
        scores = np.round(rng.random(n), int(rng.integers(1, 4)))
        worst = max(worst, abs(roc_curve(scores, labels).auc - mann_whitney_auc(scores, labels)))
    hand = roc_curve([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]).auc
    ok = worst <= 1e-12 and abs(hand - 0.75) <= 1e-12
    record(5, "trapezoidal AUC vs Mann-Whitney", ok,
           f"max difference {worst:.1e} <= 1e-12 over 1000 sets, hand case AUC {hand}")
    assert ok


def test_criterion_6_ga_behaviour():
    def surrogate(g):
        return -((g.log_lr + 2.0) ** 2)

    t0 = time.perf_counter()
    rep = run_ga(None, GAConfig(population_size=20, generations=30, seed=6), fitness_fn=surrogate)
    elapsed = time.perf_counter() - t0
    monotone = True
    for seed in range(10):
        curve = run_ga(None, GAConfig(population_size=6, generations=10, mutation_rate=0.3, seed=seed),
                       fitness_fn=lambda g: math.sin(5 * g.log_lr) + 0.02 * sum(g.mask)).best_curve
        monotone &= all(b >= a for a, b in zip(curve, curve[1:]))
    monotone &= all(b >= a for a, b in zip(rep.best_curve, rep.best_curve[1:]))
    dist = abs(rep.best_genome.log_lr + 2.0)
    ok = monotone and dist <= 0.1 and elapsed <= 60
    record(6, "GA elitism and surrogate convergence", ok,
           f"best-fitness curves non-decreasing: {monotone}, |best lr gene + 2| = {dist:.4f} <= 0.1, "
           f"runtime {elapsed:.2f}s <= 60s")
    assert ok


def _simulate(root, cfg_doc, name):
    cfg = root / f"{name}.json"
    cfg.write_text(json.dumps(cfg_doc))
    out = root / name
    code = main(["simulate", "--config", str(cfg), "--out", str(out),
                 "--data", str(root / "run" / "gen"), "--model", str(root / "run" / "train" / "model.json")])
    return code, json.loads((out / "summary.json").read_text())


def test_criterion_7_rl_ab(default_run):
    root = default_run[0]
    code_on, on = _simulate(root, {}, "sim_drift")
    code_off, off = _simulate(root, {"drift": {"enabled": False}}, "sim_nodrift")
    gap_on, gap_off = on["gap"], off["gap"]
    required = code_on == code_off == 0 and gap_on >= 0.0 and abs(gap_off) <= 0.01
    target = gap_on >= 0.03
    record(7, "RL adaptive vs frozen baseline", required,
           f"drift: adaptive {on['adaptive_accuracy']:.4f} vs frozen {on['baseline_accuracy']:.4f}, "
           f"gap {100 * gap_on:+.2f} points (required >= 0, target >= 3: {'met' if target else 'not met'}); "
           f"no drift: gap {100 * gap_off:+.2f} points (|gap| <= 1)")
    assert required


SMALL = {
    "seed": 11,
    "simulator": {"counts": {v: 6 for v in ("IRAQI", "ROTANA", "DEGLET", "BERHI", "AJWA", "MEDJOOL_RUTAB",
                                             "SUKKARY_RUTAB", "SUKKARY_DRIED")}, "image_size": 32},
    "preprocess": {"size": 32},
    "model": {"epochs": 2, "batch_size": 8},
    "ga": {"population_size": 4, "generations": 2, "fitness_epochs": 1, "max_samples": 40},
    "rl": {"steps": 200, "final_window": 100, "episodes": 1},
    "eval": {"test_fraction": 0.25},
}


def _tree(d):
    return {p.relative_to(d).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(d.rglob("*")) if p.is_file() and p.name != "run_manifest.json"}


def _manifest_sans_timing(d):
    m = json.loads((d / "run_manifest.json").read_text())
    m.pop("wall_clock_s")
    return m


def test_criterion_8_determinism(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SMALL))
    trees = []
    for run in ("a", "b"):
        base = tmp_path / run
        args = {"gen": [], "train": ["--data", str(base / "gen")], "evolve": ["--data", str(base / "gen")],
                "simulate": ["--data", str(base / "gen"), "--model", str(base / "train" / "model.json")],
                "eval": ["--data", str(base / "gen"), "--model", str(base / "train" / "model.json")]}
        codes = {c: main([c, "--config", str(cfg), "--out", str(base / c), *extra]) for c, extra in args.items()}
        assert all(v == 0 for v in codes.values()), codes
        trees.append({c: (_tree(base / c), _manifest_sans_timing(base / c)) for c in args})
    same = {c: trees[0][c] == trees[1][c] for c in trees[0]}
    ok = all(same.values())
    record(8, "byte-identical reruns", ok,
           ", ".join(f"{c} {'identical' if v else 'DIFFERS'}" for c, v in same.items()))
    assert ok


def test_criterion_9_calibration_endpoints():
    ref = SimulatorConfig().reference
    white = calibrate_spectral(SpectralReading(ref.white), ref).values
    dark = calibrate_spectral(SpectralReading(ref.dark), ref).values
    ok = bool(np.all(white == 1.0) and np.all(dark == 0.0))
    record(9, "calibration endpoints", ok, f"white -> {sorted(set(white.tolist()))}, dark -> {sorted(set(dark.tolist()))}")
    assert ok
