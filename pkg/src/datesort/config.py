"""Run configuration: one JSON document, strictly parsed.

Every module seed is derived from the single root ``seed``::

    simulator  derive_seed(seed, "synthcrop")
    split      derive_seed(seed, "split")
    model      derive_seed(seed, "model")
    ga         derive_seed(seed, "ga")
    conveyor   derive_seed(seed, "conveyor")
    rl         derive_seed(seed, "rl")
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .seeding import derive_seed
from .synthcrop.tables import REFERENCE_COUNTS, Variety


class ConfigError(ValueError):
    """Invalid run configuration (exit code 1)."""


@dataclass
class SimulatorSection:
    counts: Any = "reference"      # "reference" or {variety name: count}
    image_size: int = 64
    spoil_prob: float = 0.1
    spectral_noise: float = 0.004
    separation: float = 1.0
    tamar_moisture_max: float = 35.0


@dataclass
class PreprocessSection:
    size: int = 64
    sigma: float = 0.8
    threshold: float = 0.1


@dataclass
class ModelSection:
    conv_blocks: list = field(default_factory=lambda: [{"filters": 8, "kernel": 3}, {"filters": 16, "kernel": 3}])
    dense_widths: list = field(default_factory=lambda: [64])
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 10
    momentum: float = 0.9
    augment_flip: bool = True
    augment_brightness: bool = True
    augment_rotate: bool = True
    spoil_weight: float = 1.0
    shelf_weight: float = 1.0
    feature_mask: Any = None


@dataclass
class GASection:
    population_size: int = 8
    generations: int = 5
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    elitism_count: int = 1
    k: int = 3
    fitness_epochs: int = 3
    max_samples: int = 240       # stratified slice of the training split used for fitness


@dataclass
class DriftSection:
    enabled: bool = True
    gain_sigma: float = 0.02
    offset_sigma: float = 0.002
    offset_cap: float = 0.05


@dataclass
class RLSection:
    alpha: float = 0.1
    gamma: float = 0.9
    eps_start: float = 0.3
    eps_end: float = 0.02
    eps_decay_steps: Any = None   # default: all pre-training steps
    audit_prob: float = 0.2
    window: int = 20
    steps: int = 3000
    idle_prior: float = 0.0
    move_cost: float = 0.05
    episodes: int = 3           # pre-training episodes before the scored run
    final_window: int = 1000


@dataclass
class EvalSection:
    test_fraction: float = 0.2
    threshold: float = 0.5


SECTIONS = {
    "simulator": SimulatorSection,
    "preprocess": PreprocessSection,
    "model": ModelSection,
    "ga": GASection,
    "drift": DriftSection,
    "rl": RLSection,
    "eval": EvalSection,
}


@dataclass
class RunConfig:
    seed: int = 42
    out_dir: str = "run"
    simulator: SimulatorSection = field(default_factory=SimulatorSection)
    preprocess: PreprocessSection = field(default_factory=PreprocessSection)
    model: ModelSection = field(default_factory=ModelSection)
    ga: GASection = field(default_factory=GASection)
    drift: DriftSection = field(default_factory=DriftSection)
    rl: RLSection = field(default_factory=RLSection)
    eval: EvalSection = field(default_factory=EvalSection)

    def seed_for(self, module: str) -> int:
        return derive_seed(self.seed, module)

    def to_dict(self) -> dict:
        return asdict(self)

    def canonical_bytes(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n").encode()

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    # typed views for the modules -------------------------------------------

    def variety_counts(self) -> dict[Variety, int]:
        c = self.simulator.counts
        if c == "reference":
            return dict(REFERENCE_COUNTS)
        return {Variety[name]: int(n) for name, n in c.items()}

    def simulator_config(self):
        from .synthcrop import SimulatorConfig
        s = self.simulator
        return SimulatorConfig(s.image_size, s.spoil_prob, s.spectral_noise, s.separation, s.tamar_moisture_max)

    def feature_params(self):
        from .features import FeatureParams
        p = self.preprocess
        return FeatureParams(p.size, p.sigma, p.threshold)

    def model_config(self):
        from .neuralmodel import ConvBlock, ModelConfig
        m = self.model
        cfg = ModelConfig(
            input_size=self.preprocess.size,
            conv_blocks=[ConvBlock(int(b["filters"]), int(b["kernel"])) for b in m.conv_blocks],
            dense_widths=[int(w) for w in m.dense_widths], learning_rate=m.learning_rate,
            batch_size=m.batch_size, epochs=m.epochs, momentum=m.momentum,
            augment_flip=m.augment_flip, augment_brightness=m.augment_brightness,
            augment_rotate=m.augment_rotate, spoil_weight=m.spoil_weight, shelf_weight=m.shelf_weight,
            feature_mask=None if m.feature_mask is None else [bool(b) for b in m.feature_mask],
            seed=self.seed_for("model"))
        cfg.validate()
        return cfg

    def ga_config(self):
        from .evolver import GAConfig
        g = self.ga
        cfg = GAConfig(g.population_size, g.generations, g.tournament_size, g.crossover_rate,
                       g.mutation_rate, g.elitism_count, g.k, self.seed_for("ga"))
        cfg.validate()
        return cfg

    def drift_config(self):
        from .synthcrop import DriftConfig
        d = self.drift
        return DriftConfig(d.enabled, d.gain_sigma, d.offset_sigma, d.offset_cap)

    def rl_config(self):
        from .adaptor import RLConfig
        r = self.rl
        return RLConfig(alpha=r.alpha, gamma=r.gamma, eps_start=r.eps_start, eps_end=r.eps_end,
                        eps_decay_steps=r.eps_decay_steps, audit_prob=r.audit_prob, window=r.window,
                        steps=r.steps, idle_prior=r.idle_prior, move_cost=r.move_cost,
                        episodes=r.episodes, seed=self.seed_for("rl"))


_NUMBER = (int, float)


def _check_type(key: str, value, default) -> Any:
    if default is None or isinstance(default, (list, dict)) or key.endswith(".counts"):
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, _NUMBER):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    return value


def _section(cls, data, prefix: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix}: expected an object")
    names = {f.name for f in fields(cls)}
    for key in data:
        if key not in names:
            raise ConfigError(f"unknown key '{prefix}.{key}'")
    obj = cls()
    for key, value in data.items():
        setattr(obj, key, _check_type(f"{prefix}.{key}", value, getattr(obj, key)))
    return obj


def _validate(cfg: RunConfig) -> None:
    c = cfg.simulator.counts
    if c != "reference":
        if not isinstance(c, dict) or not c:
            raise ConfigError("simulator.counts: expected \"reference\" or a non-empty {variety: count} object")
        for name, n in c.items():
            if name not in Variety.__members__:
                raise ConfigError(f"simulator.counts: invalid variety name '{name}'")
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(f"simulator.counts.{name}: count must be an integer >= 1")
    if cfg.seed < 0:
        raise ConfigError("seed must be >= 0")
    if not 0.0 < cfg.eval.test_fraction < 1.0:
        raise ConfigError("eval.test_fraction must lie in (0, 1)")
    if not 0.0 <= cfg.eval.threshold <= 1.0:
        raise ConfigError("eval.threshold must lie in [0, 1]")
    if cfg.preprocess.size < 8:
        raise ConfigError("preprocess.size must be >= 8")
    if cfg.ga.fitness_epochs < 1 or cfg.ga.max_samples < 8:
        raise ConfigError("ga.fitness_epochs >= 1 and ga.max_samples >= 8 required")
    if cfg.rl.episodes < 0:
        raise ConfigError("rl.episodes must be >= 0")
    if cfg.rl.steps < 1 or not 0 < cfg.rl.final_window <= cfg.rl.steps:
        raise ConfigError("rl.steps >= 1 and 0 < rl.final_window <= rl.steps required")
    if not 0.0 <= cfg.rl.audit_prob <= 1.0:
        raise ConfigError("rl.audit_prob must lie in [0, 1]")
    for block in cfg.model.conv_blocks:
        if not isinstance(block, dict) or set(block) != {"filters", "kernel"}:
            raise ConfigError("model.conv_blocks entries need exactly 'filters' and 'kernel'")
    try:
        cfg.model_config()
        cfg.ga_config()
    except ConfigError:
        raise
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from None


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = RunConfig()
    for key, value in data.items():
        if key in SECTIONS:
            setattr(cfg, key, _section(SECTIONS[key], value, key))
        elif key in ("seed", "out_dir"):
            setattr(cfg, key, _check_type(key, value, getattr(cfg, key)))
        else:
            raise ConfigError(f"unknown key '{key}'")
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    return from_dict(data)
