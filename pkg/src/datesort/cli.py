"""``datesort`` command line: gen, train, evolve, simulate, eval.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import shutil
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .neuralmodel.serialize import ModelFileError
from .synthcrop.storage import DatasetError

log = logging.getLogger("datesort")

MANIFEST = "run_manifest.json"
COMMANDS = ("gen", "train", "evolve", "simulate", "eval")


class UsageError(ValueError):
    pass


VALIDATION_ERRORS = (ConfigError, DatasetError, ModelFileError, UsageError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="datesort", description="Synthetic date-fruit sorting pipeline.")
    p.add_argument("--version", action="version", version=f"datesort {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--config", required=True, help="run configuration (JSON)")
        c.add_argument("--out", help="output directory (default: <out_dir>/<command>)")
        c.add_argument("--force", action="store_true", help="replace a previous run in the output directory")
        c.add_argument("--seed", type=int, help="override the root seed")
        c.add_argument("-v", "--verbose", action="store_true")
        if name in ("train", "evolve", "simulate", "eval"):
            c.add_argument("--data", help="dataset directory (default: <out_dir>/gen)")
        if name in ("simulate", "eval"):
            c.add_argument("--model", help="model file (default: <out_dir>/train/model.json)")
    return p


# ---------------------------------------------------------------- run context

class Run:
    """Output directory, stage timings and the manifest for one command."""

    def __init__(self, command: str, config: RunConfig, out: Path, force: bool):
        self.command = command
        self.config = config
        self.out = out
        self.files: list[Path] = []
        self.timings: dict[str, float] = {}
        self._prepare(force)
        cfg_path = out / "config.json"
        cfg_path.write_bytes(config.canonical_bytes())
        self.files.append(cfg_path)

    def _prepare(self, force: bool) -> None:
        if self.out.exists() and not self.out.is_dir():
            raise UsageError(f"output path {self.out} is not a directory")
        if self.out.is_dir() and any(self.out.iterdir()):
            if not force:
                raise UsageError(f"output directory {self.out} is not empty (use --force to replace it)")
            if not (self.out / MANIFEST).is_file():
                raise UsageError(f"refusing to clear {self.out}: it does not hold a datesort run")
            shutil.rmtree(self.out)
        self.fresh = not self.out.exists()
        self.out.mkdir(parents=True, exist_ok=True)

    def abandon(self) -> None:
        """Remove a directory this run created, so a failed run leaves nothing behind."""
        if self.fresh:
            shutil.rmtree(self.out, ignore_errors=True)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        yield
        self.timings[name] = round(time.perf_counter() - t0, 3)

    def add(self, paths) -> None:
        self.files.extend(Path(p) for p in paths)

    def write_json(self, name: str, obj) -> Path:
        p = self.out / name
        p.write_text(json.dumps(obj, indent=1) + "\n")
        self.files.append(p)
        return p

    def finish(self) -> Path:
        artifacts = []
        for p in sorted(set(self.files), key=lambda q: q.relative_to(self.out).as_posix()):
            data = p.read_bytes()
            artifacts.append({"path": p.relative_to(self.out).as_posix(), "bytes": len(data),
                              "sha256": hashlib.sha256(data).hexdigest()})
        manifest = {
            "tool": "datesort",
            "version": __version__,
            "command": self.command,
            "seed": self.config.seed,
            "config_file": "config.json",
            "config_hash": self.config.config_hash(),
            "artifacts": artifacts,
            "wall_clock_s": self.timings,
        }
        p = self.out / MANIFEST
        p.write_text(json.dumps(manifest, indent=1) + "\n")
        return p


# ------------------------------------------------------------------- helpers

def _root(args, config: RunConfig) -> Path:
    base = Path(config.out_dir)
    if not base.is_absolute():
        base = Path(args.config).resolve().parent / base
    return base


def _dataset(args, config):
    from .synthcrop import load_dataset
    path = Path(args.data) if args.data else _root(args, config) / "gen"
    if not path.is_dir():
        raise DatasetError(f"dataset directory {path} does not exist")
    return load_dataset(path)


def _model(args, config):
    from .neuralmodel import load_model
    path = Path(args.model) if args.model else _root(args, config) / "train" / "model.json"
    if not path.is_file():
        raise ModelFileError(f"model file {path} does not exist")
    return load_model(path)


def _split(samples, config: RunConfig):
    from .pipeline import stratified_split
    varieties = np.array([int(s.variety) for s in samples])
    return stratified_split(varieties, config.eval.test_fraction, config.seed_for("split"))


def _prepared(samples, sim, config: RunConfig):
    from .pipeline import prepare
    return prepare(samples, sim.reference, config.feature_params())


# ------------------------------------------------------------------ commands

def cmd_gen(args, config: RunConfig, run: Run) -> str:
    from .synthcrop import generate_dataset, save_dataset
    sim = config.simulator_config()
    seed = config.seed_for("synthcrop")
    with run.stage("generate"):
        samples = generate_dataset(config.variety_counts(), seed, sim)
    with run.stage("write"):
        run.add(save_dataset(samples, run.out, seed, sim))
    return f"wrote {len(samples)} samples to {run.out}"


def cmd_train(args, config: RunConfig, run: Run) -> str:
    from .neuralmodel import init, save_model, train
    samples, sim, _ = _dataset(args, config)
    with run.stage("preprocess"):
        data = _prepared(samples, sim, config)
    train_idx, _ = _split(samples, config)
    mc = config.model_config()
    model = init(mc)
    with run.stage("train"):
        report = train(model, data.subset(train_idx), mc)
    run.add([save_model(model, run.out / "model.json")])
    run.write_json("train_report.json", {**report.to_dict(), "n_train": len(train_idx)})
    return f"trained on {len(train_idx)} samples, final loss {report.epoch_losses['total'][-1]:.4f}"


def _ga_slice(labels, n_max: int, seed: int):
    from .pipeline import stratified_split
    if len(labels) <= n_max:
        return np.arange(len(labels))
    _, idx = stratified_split(labels, n_max / len(labels), seed)
    return idx


def cmd_evolve(args, config: RunConfig, run: Run) -> str:
    from dataclasses import replace

    from .evolver import run_ga, write_ga_files
    from .neuralmodel import init, save_model, train
    samples, sim, _ = _dataset(args, config)
    with run.stage("preprocess"):
        data = _prepared(samples, sim, config)
    train_idx, _ = _split(samples, config)
    train_data = data.subset(train_idx)
    gc = config.ga_config()
    fit_idx = _ga_slice(train_data.labels.variety, config.ga.max_samples, gc.seed)
    base = replace(config.model_config(), epochs=config.ga.fitness_epochs)
    with run.stage("ga"):
        report = run_ga(train_data.subset(fit_idx), gc, base)
    run.add(write_ga_files(report, run.out))
    best_cfg = report.best_genome.model_config(config.model_config())
    best_cfg = replace(best_cfg, batch_size=min(best_cfg.batch_size, len(train_data)))
    model = init(best_cfg)
    with run.stage("retrain"):
        treport = train(model, train_data, best_cfg)
    run.add([save_model(model, run.out / "model.json")])
    run.write_json("train_report.json", {**treport.to_dict(), "n_train": len(train_idx)})
    return f"best fitness {report.best_fitness:.4f} after {report.evaluations} evaluations"


def cmd_simulate(args, config: RunConfig, run: Run) -> str:
    from .adaptor import ab_experiment, write_log_csv, write_qtable_json
    model = _model(args, config)
    samples, sim, _ = _dataset(args, config)
    _, test_idx = _split(samples, config)
    belt = [samples[i] for i in test_idx]
    with run.stage("simulate"):
        ab = ab_experiment(model, belt, config.drift_config(), config.rl_config(), sim.reference,
                           config.seed_for("conveyor"), config.feature_params(), config.rl.final_window)
    run.add([write_log_csv(ab.adaptive, run.out / "adaptation_log.csv"),
             write_log_csv(ab.frozen, run.out / "baseline_log.csv"),
             write_qtable_json(ab.adaptive.q, run.out / "qtable.json")])
    summary = ab.summary()
    run.write_json("summary.json", summary)
    p = run.out / "summary.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["baseline_accuracy", "adaptive_accuracy", "gap"])
        w.writerow([repr(summary["baseline_accuracy"]), repr(summary["adaptive_accuracy"]), repr(summary["gap"])])
    run.add([p])
    return (f"final {ab.final_window} steps: baseline {summary['baseline_accuracy']:.4f} "
            f"adaptive {summary['adaptive_accuracy']:.4f} gap {summary['gap']:+.4f}")


def cmd_eval(args, config: RunConfig, run: Run) -> str:
    from .evalmetrics import evaluate, write_report_files
    model = _model(args, config)
    samples, sim, _ = _dataset(args, config)
    _, test_idx = _split(samples, config)
    if len(test_idx) < 8:
        raise ConfigError(f"eval split holds {len(test_idx)} samples; at least 8 are required")
    with run.stage("preprocess"):
        data = _prepared([samples[i] for i in test_idx], sim, config)
    with run.stage("evaluate"):
        report = evaluate(model, data, config.eval.threshold)
    run.add(write_report_files(report, run.out))
    return f"variety accuracy {report.variety.accuracy:.4f}, spoilage AUC {report.spoilage.auc.get('spoiled', float('nan')):.4f}"


HANDLERS = {"gen": cmd_gen, "train": cmd_train, "evolve": cmd_evolve, "simulate": cmd_simulate, "eval": cmd_eval}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"datesort: error: {e}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    run = None
    try:
        config = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            config.seed = args.seed
        out = Path(args.out) if args.out else _root(args, config) / args.command
        run = Run(args.command, config, out, args.force)
        message = HANDLERS[args.command](args, config, run)
        run.finish()
    except VALIDATION_ERRORS as e:
        if run is not None:
            run.abandon()
        print(f"datesort: error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # runtime failure
        if run is not None:
            run.abandon()
        log.debug("runtime failure", exc_info=True)
        print(f"datesort: runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    print(message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
