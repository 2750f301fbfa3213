"""Genetic search over training hyperparameters and the 46-slot feature mask.

A single chromosome carries both the hyperparameters and the mask. Fitness
is mean k-fold validation accuracy of the variety head.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .features.fusion import N_FEATURES
from .neuralmodel import ConvBlock, DivergenceError, ModelConfig, kfold_cv
from .seeding import derive_seed

log = logging.getLogger(__name__)

LOG_LR_RANGE = (-4.0, -1.0)
BATCH_SIZES = (8, 16, 32, 64)
CONV_BLOCKS = (1, 2, 3)
FILTERS_BASE = (4, 8, 16)
DENSE_WIDTHS = (32, 64, 128)
NUMERIC_GENES = ("log_lr", "batch_size", "conv_blocks", "filters_base", "dense_width")


@dataclass(frozen=True)
class Genome:
    log_lr: float
    batch_size: int
    conv_blocks: int
    filters_base: int
    dense_width: int
    mask: tuple[bool, ...]

    def __post_init__(self):
        if not LOG_LR_RANGE[0] <= self.log_lr <= LOG_LR_RANGE[1]:
            raise ValueError(f"log_lr {self.log_lr} outside {LOG_LR_RANGE}")
        for name, domain in (("batch_size", BATCH_SIZES), ("conv_blocks", CONV_BLOCKS),
                             ("filters_base", FILTERS_BASE), ("dense_width", DENSE_WIDTHS)):
            if getattr(self, name) not in domain:
                raise ValueError(f"{name}={getattr(self, name)} not in {domain}")
        if len(self.mask) != N_FEATURES:
            raise ValueError(f"mask must have {N_FEATURES} bits")
        if not any(self.mask):
            raise ValueError("mask has no set bit")

    @property
    def learning_rate(self) -> float:
        return float(10.0 ** self.log_lr)

    def model_config(self, base: ModelConfig | None = None) -> ModelConfig:
        """Model config for this genome; non-genome fields come from ``base``."""
        base = base or ModelConfig()
        blocks = [ConvBlock(self.filters_base * 2 ** i, 3) for i in range(self.conv_blocks)]
        return replace(base, conv_blocks=blocks, dense_widths=[self.dense_width],
                       learning_rate=self.learning_rate, batch_size=self.batch_size,
                       feature_mask=list(self.mask))

    def to_dict(self) -> dict:
        return {"log_lr": self.log_lr, "batch_size": self.batch_size, "conv_blocks": self.conv_blocks,
                "filters_base": self.filters_base, "dense_width": self.dense_width,
                "mask": [int(b) for b in self.mask]}

    @classmethod
    def from_dict(cls, d: dict) -> "Genome":
        return cls(float(d["log_lr"]), int(d["batch_size"]), int(d["conv_blocks"]),
                   int(d["filters_base"]), int(d["dense_width"]), tuple(bool(b) for b in d["mask"]))


@dataclass
class GAConfig:
    population_size: int = 8
    generations: int = 5
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    elitism_count: int = 1
    k: int = 3
    seed: int = 0

    def validate(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ValueError("tournament_size must be in 1..population_size")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be < population_size")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.k < 2:
            raise ValueError("k must be >= 2")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _draw_gene(name: str, rng: np.random.Generator):
    if name == "log_lr":
        return float(rng.uniform(*LOG_LR_RANGE))
    domain = {"batch_size": BATCH_SIZES, "conv_blocks": CONV_BLOCKS,
              "filters_base": FILTERS_BASE, "dense_width": DENSE_WIDTHS}[name]
    return int(domain[rng.integers(len(domain))])


def _repair(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # every operator leaves at least one feature slot switched on
    if not mask.any():
        mask = mask.copy()
        mask[rng.integers(N_FEATURES)] = True
    return mask


def random_genome(seed: int) -> Genome:
    rng = np.random.default_rng(seed)
    genes = {name: _draw_gene(name, rng) for name in NUMERIC_GENES}
    mask = rng.uniform(size=N_FEATURES) < 0.5
    while not mask.any():
        mask = rng.uniform(size=N_FEATURES) < 0.5
    return Genome(**genes, mask=tuple(bool(b) for b in mask))


def dataset_hash(data) -> str:
    h = hashlib.sha256()
    for arr in (data.images, data.features, data.labels.variety, data.labels.spoiled, data.labels.shelf_days):
        a = np.ascontiguousarray(arr)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


class FitnessCache:
    """Memo of fitness values keyed by (genome, dataset hash, k); counts misses."""

    def __init__(self):
        self.values: dict = {}
        self.misses = 0

    def get(self, key, compute: Callable[[], float]) -> float:
        if key not in self.values:
            self.misses += 1
            self.values[key] = compute()
        return self.values[key]


def fitness(genome: Genome, data, k: int = 3, base: ModelConfig | None = None,
            cache: FitnessCache | None = None) -> float:
    """Mean k-fold variety accuracy of a model built from ``genome``.

    Training divergence scores 0 (logged as a warning).
    """
    def compute() -> float:
        cfg = genome.model_config(base)
        # the smallest training fold bounds the usable batch size
        fold_train = len(data) - -(-len(data) // k)
        if cfg.batch_size > fold_train:
            cfg = replace(cfg, batch_size=max(1, fold_train))
        try:
            return float(kfold_cv(data, cfg, k).mean_accuracy)
        except DivergenceError as exc:
            log.warning("fitness 0 for diverging genome %s: %s", genome.to_dict(), exc)
            return 0.0

    if cache is None:
        return compute()
    return cache.get((genome, dataset_hash(data), k), compute)


def _tournament(fitnesses, size: int, rng: np.random.Generator) -> int:
    entrants = rng.choice(len(fitnesses), size=size, replace=False)
    # ties break to the lowest population index
    return int(min(entrants, key=lambda i: (-fitnesses[i], i)))


def _crossover(a: Genome, b: Genome, rng: np.random.Generator) -> dict:
    genes = {}
    for name in NUMERIC_GENES:
        genes[name] = getattr(a, name) if rng.uniform() < 0.5 else getattr(b, name)
    pick_a = rng.uniform(size=N_FEATURES) < 0.5
    genes["mask"] = np.where(pick_a, np.array(a.mask), np.array(b.mask))
    return genes


def _mutate(genes: dict, rate: float, rng: np.random.Generator) -> Genome:
    for name in NUMERIC_GENES:
        hit = rng.uniform() < rate
        fresh = _draw_gene(name, rng)
        if hit:
            genes[name] = fresh
    # a mutated mask bit is redrawn like a numeric gene, so it changes half the time
    hit = rng.uniform(size=N_FEATURES) < rate
    fresh = rng.uniform(size=N_FEATURES) < 0.5
    mask = _repair(np.where(hit, fresh, np.asarray(genes["mask"], dtype=bool)), rng)
    genes["mask"] = tuple(bool(b) for b in mask)
    return Genome(**genes)


def evolve_generation(population: list[Genome], fitnesses, config: GAConfig, seed: int) -> list[Genome]:
    """Elites, then tournament pairs, uniform crossover and per-gene mutation."""
    if len(population) != config.population_size or len(fitnesses) != len(population):
        raise ValueError("population size does not match config")
    rng = np.random.default_rng(seed)
    ranked = sorted(range(len(population)), key=lambda i: (-fitnesses[i], i))
    new = [population[i] for i in ranked[:config.elitism_count]]
    while len(new) < config.population_size:
        pa = population[_tournament(fitnesses, config.tournament_size, rng)]
        pb = population[_tournament(fitnesses, config.tournament_size, rng)]
        if rng.uniform() < config.crossover_rate:
            genes = _crossover(pa, pb, rng)
        else:
            genes = {n: getattr(pa, n) for n in NUMERIC_GENES} | {"mask": np.array(pa.mask)}
        new.append(_mutate(genes, config.mutation_rate, rng))
    return new


@dataclass
class GAReport:
    history: list[dict] = field(default_factory=list)    # generation, best, mean, evaluations
    best_genome: Genome | None = None
    best_fitness: float = float("-inf")
    evaluations: int = 0

    @property
    def best_curve(self) -> list[float]:
        return [row["best"] for row in self.history]

    def to_dict(self) -> dict:
        return {"history": self.history, "best_fitness": self.best_fitness,
                "best_genome": self.best_genome.to_dict() if self.best_genome else None,
                "evaluations": self.evaluations}


def run_ga(data, config: GAConfig, base: ModelConfig | None = None,
           fitness_fn: Callable[[Genome], float] | None = None) -> GAReport:
    """Evolve ``config.generations`` populations (the first is random).

    ``fitness_fn`` replaces the k-fold fitness, e.g. for cheap surrogates;
    it is memoized per genome like the real one.
    """
    config.validate()
    cache = FitnessCache()
    if fitness_fn is None:
        def score(g: Genome) -> float:
            return fitness(g, data, config.k, base, cache)
    else:
        def score(g: Genome) -> float:
            return cache.get(g, lambda: float(fitness_fn(g)))

    population = [random_genome(derive_seed(config.seed, "genome", i)) for i in range(config.population_size)]
    report = GAReport()
    for gen in range(config.generations):
        if gen > 0:
            population = evolve_generation(population, fits, config, derive_seed(config.seed, "generation", gen))
        before = cache.misses
        fits = [score(g) for g in population]
        best_i = int(np.argmax(fits))
        if fits[best_i] > report.best_fitness:
            report.best_fitness, report.best_genome = fits[best_i], population[best_i]
        report.history.append({"generation": gen, "best": float(fits[best_i]),
                               "mean": float(np.mean(fits)), "evaluations": cache.misses - before})
        log.info("generation %d best %.4f mean %.4f", gen, fits[best_i], np.mean(fits))
    report.evaluations = cache.misses
    return report


def write_ga_files(report: GAReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    js = out / "ga_report.json"
    js.write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    cs = out / "ga_history.csv"
    with open(cs, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["generation", "best", "mean", "evaluations"])
        for row in report.history:
            w.writerow([row["generation"], repr(row["best"]), repr(row["mean"]), row["evaluations"]])
    return [js, cs]
