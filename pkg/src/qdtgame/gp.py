"""Genetic programming over quantum decision trees.

Fitness is the accumulated quantum expected value of a tree's bets. Two
modes are offered:

``expected``
    the exact expectation over OR coins and action draws (deterministic,
    the default);
``sampled``
    the sum of bet values from one simulated play with a seeded stream.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from .gameplay import sampled_value
from .qdt import DEFAULT_MAX_DEPTH, Qdt, depth, iter_nodes, parse, random_tree, replace_at, to_string
from .rng import Rng, make_rng
from .valuation import DEFAULT_ORDERING, ORDERINGS, expected_advantage
from .world import FrequencyPair, WorldRecord, state_counts, state_frequencies

FITNESS_MODES = ("expected", "sampled")
CROSSOVER_RETRIES = 10


@dataclass
class GpConfig:
    population_size: int = 100
    generations: int = 88
    crossover_prob: float = 0.8
    mutation_prob: float = 0.05
    max_depth: int = DEFAULT_MAX_DEPTH
    fitness_mode: str = "expected"
    elitism: int = 1
    seed: int = 0
    ordering: str = DEFAULT_ORDERING

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.fitness_mode not in FITNESS_MODES:
            raise ValueError(f"fitness_mode must be one of {FITNESS_MODES}")
        if not 0 <= self.elitism <= self.population_size:
            raise ValueError("elitism must lie in [0, population_size]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")

    @classmethod
    def from_mapping(cls, values: dict) -> "GpConfig":
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            default = getattr(cls, key)
            kwargs[key] = type(default)(raw)
        return cls(**kwargs)

    @classmethod
    def read(cls, path: str | Path) -> "GpConfig":
        """Read a flat ``key = value`` file; ``#`` starts a comment."""
        values = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        return cls.from_mapping(values)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


@dataclass(frozen=True)
class Individual:
    tree: Qdt
    fitness: float


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best: float
    mean: float


@dataclass
class EvolutionResult:
    final_population: list[Individual]
    history: list[GenerationStats] = field(default_factory=list)

    @property
    def best(self) -> Individual:
        return self.final_population[0]


# -- fitness ------------------------------------------------------------------

def fitness(
    tree: Qdt,
    records: Sequence[WorldRecord],
    freq: FrequencyPair | None = None,
    mode: str = "expected",
    rng: Rng | None = None,
    ordering: str = DEFAULT_ORDERING,
) -> float:
    if not records:
        raise ValueError("need at least one record")
    freq = freq or state_frequencies(records)
    if mode == "expected":
        n1, n2 = state_counts(records)
        return expected_advantage(tree, ordering) * (n1 * freq.w1 - n2 * freq.w2)
    if mode == "sampled":
        if rng is None:
            raise ValueError("sampled fitness needs a random stream")
        return sampled_value(tree, records, rng, freq, ordering)
    raise ValueError(f"unknown fitness mode {mode!r}")


# objective(tree, rng) -> fitness; rng is the individual's derived stream
Objective = Callable[[Qdt, Rng], float]


def default_objective(records: Sequence[WorldRecord], config: GpConfig) -> Objective:
    freq = state_frequencies(records)
    if config.fitness_mode == "expected":
        n1, n2 = state_counts(records)
        scale = n1 * freq.w1 - n2 * freq.w2
        return lambda tree, rng: expected_advantage(tree, config.ordering) * scale
    return lambda tree, rng: fitness(tree, records, freq, "sampled", rng, config.ordering)


# -- selection and variation ----------------------------------------------------

class RouletteWheel:
    """Fitness-proportionate selection over min-shifted fitness."""

    def __init__(self, fitnesses: Sequence[float]):
        if not fitnesses:
            raise ValueError("empty population")
        lo, hi = min(fitnesses), max(fitnesses)
        eps = 1e-6 * (hi - lo + 1.0)
        self.weights = [f - lo + eps for f in fitnesses]
        self.cumulative = []
        total = 0.0
        for w in self.weights:
            total += w
            self.cumulative.append(total)
        self.total = total
        self.uniform = hi == lo

    def spin(self, rng: Rng) -> int:
        if self.uniform:
            return rng.integers(len(self.weights))
        i = bisect.bisect_right(self.cumulative, rng.random() * self.total)
        return min(i, len(self.cumulative) - 1)


def select_parent(population: Sequence[Individual], rng: Rng) -> Individual:
    wheel = RouletteWheel([ind.fitness for ind in population])
    return population[wheel.spin(rng)]


def _random_node(tree: Qdt, rng: Rng):
    nodes = list(iter_nodes(tree))
    return nodes[rng.integers(len(nodes))]


def crossover(a: Qdt, b: Qdt, max_depth: int, rng: Rng) -> tuple[Qdt, Qdt]:
    """Swap uniformly chosen subtrees; give up after a few over-deep tries."""
    for _ in range(CROSSOVER_RETRIES):
        path_a, sub_a = _random_node(a, rng)
        path_b, sub_b = _random_node(b, rng)
        child_a = replace_at(a, path_a, sub_b)
        child_b = replace_at(b, path_b, sub_a)
        if depth(child_a) <= max_depth and depth(child_b) <= max_depth:
            return child_a, child_b
    return a, b


def mutate(tree: Qdt, max_depth: int, rng: Rng) -> Qdt:
    """Replace a uniformly chosen subtree with a freshly grown one."""
    path, _ = _random_node(tree, rng)
    room = max_depth - len(path)
    return replace_at(tree, path, random_tree(max(room, 1), rng))


# -- the loop -----------------------------------------------------------------

def _score(population: list[Qdt], objective: Objective, config: GpConfig, generation: int,
           cache: dict | None) -> list[Individual]:
    scored = []
    for i, tree in enumerate(population):
        if cache is not None and tree in cache:
            f = cache[tree]
        else:
            f = objective(tree, make_rng(config.seed, generation, i))
            if cache is not None:
                cache[tree] = f
        scored.append(Individual(tree, float(f)))
    return scored


def _stats(generation: int, scored: Sequence[Individual]) -> GenerationStats:
    fs = [ind.fitness for ind in scored]
    return GenerationStats(generation, max(fs), statistics.fmean(fs))


def evolve(
    config: GpConfig,
    records: Sequence[WorldRecord],
    objective: Objective | None = None,
    deterministic: bool | None = None,
) -> EvolutionResult:
    """Evolve a population and return it sorted by fitness, best first.

    ``objective`` replaces the standard bet-value fitness. Set
    ``deterministic`` when it ignores its stream so that scores can be
    memoized per tree; it defaults to True only for expected-mode fitness.
    """
    if not records:
        raise ValueError("need at least one record")
    config.validate()
    if objective is None:
        objective = default_objective(records, config)
        if deterministic is None:
            deterministic = config.fitness_mode == "expected"
    cache: dict | None = {} if deterministic else None

    rng = make_rng(config.seed)
    trees = [random_tree(config.max_depth, rng) for _ in range(config.population_size)]
    scored = _score(trees, objective, config, 0, cache)
    history = [_stats(0, scored)]

    for gen in range(1, config.generations + 1):
        ranked = sorted(scored, key=lambda ind: ind.fitness, reverse=True)
        elites = ranked[: config.elitism]
        wheel = RouletteWheel([ind.fitness for ind in scored])
        children: list[Qdt] = []
        need = config.population_size - len(elites)
        while len(children) < need:
            a = scored[wheel.spin(rng)].tree
            b = scored[wheel.spin(rng)].tree
            if rng.random() < config.crossover_prob:
                a, b = crossover(a, b, config.max_depth, rng)
            for child in (a, b):
                if rng.random() < config.mutation_prob:
                    child = mutate(child, config.max_depth, rng)
                children.append(child)
        children = children[:need]
        # elites keep their score; only offspring are evaluated
        scored = list(elites) + _score(children, objective, config, gen, cache)
        history.append(_stats(gen, scored))

    final = sorted(scored, key=lambda ind: ind.fitness, reverse=True)
    return EvolutionResult(final, history)


# -- files --------------------------------------------------------------------

def population_to_json(population: Sequence[Individual]) -> str:
    ranked = sorted(population, key=lambda ind: ind.fitness, reverse=True)
    items = [{"expression": to_string(ind.tree), "fitness": ind.fitness} for ind in ranked]
    return json.dumps(items, indent=2) + "\n"


def write_population(population: Sequence[Individual], path: str | Path) -> None:
    Path(path).write_text(population_to_json(population), encoding="utf-8", newline="")


def read_population(path: str | Path) -> list[Individual]:
    items = json.loads(Path(path).read_text(encoding="utf-8"))
    return [Individual(parse(item["expression"]), float(item["fitness"])) for item in items]


def history_to_csv(history: Sequence[GenerationStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["generation", "best", "mean"])
    for h in history:
        w.writerow([h.generation, repr(h.best), repr(h.mean)])
    return buf.getvalue()
