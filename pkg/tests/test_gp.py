import collections
import itertools
import math
import statistics

import pytest

from qdtgame.gp import (
    CROSSOVER_RETRIES, GpConfig, Individual, RouletteWheel, crossover, evolve, fitness,
    history_to_csv, mutate, population_to_json, read_population, select_parent, write_population,
)
from qdtgame.qdt import Leaf, depth, parse, random_tree, to_string
from qdtgame.rng import make_rng
from qdtgame.valuation import strategy_beliefs
from qdtgame.world import from_states, generate, payoff, state_frequencies

from conftest import TWO_WAY_TREE, FOUR_WAY_TREE, _follow, or_nodes, random_mul_tree, random_trees


def brute_force_expectation(tree, records):
    """Exact expected total bet value over every coin assignment and action."""
    freq = state_frequencies(records)
    nodes = or_nodes(tree)
    total = 0.0
    for r in records:
        for bits in itertools.product((0, 1), repeat=len(nodes)):
            strategy = _follow(tree, dict(zip(nodes, bits)), (), [])
            b = strategy_beliefs(strategy)
            for action, p in ((1, b.p1), (2, b.p2)):
                total += 0.5 ** len(nodes) * p * (p * freq.of(r.state) * payoff(action, r.state))
    return total


# -- fitness -------------------------------------------------------------------

def test_expected_fitness_of_certain_tree_on_one_sided_data():
    records = from_states([0] * 40)
    assert fitness(parse("(H+I)"), records) == pytest.approx(40, abs=1e-9)


def test_mul_only_expected_fitness_vanishes():
    records = generate(2000, 0.5, 1)
    rng = make_rng(2)
    for _ in range(100):
        assert abs(fitness(random_mul_tree(6, rng), records)) <= 1e-9 * len(records)


def test_expected_fitness_matches_brute_force():
    trees = [parse(TWO_WAY_TREE), parse(FOUR_WAY_TREE), parse("(T+S)")]
    trees += [t for t in random_trees(300, max_depth=5, seed=3) if len(or_nodes(t)) <= 6][:60]
    for k, tree in enumerate(trees):
        records = generate(7, 0.5, k)
        assert fitness(tree, records) == pytest.approx(brute_force_expectation(tree, records), abs=1e-9)


def test_sampled_fitness_is_unbiased_small():
    records = generate(300, 0.5, 4)
    for k, tree in enumerate(random_trees(8, max_depth=6, seed=5)):
        samples = [fitness(tree, records, mode="sampled", rng=make_rng(k, s)) for s in range(200)]
        mean = statistics.fmean(samples)
        se = statistics.stdev(samples) / math.sqrt(len(samples))
        assert abs(mean - fitness(tree, records)) <= 3 * se + 1e-9


def test_fitness_argument_errors():
    records = from_states([0])
    with pytest.raises(ValueError):
        fitness(parse("H"), [])
    with pytest.raises(ValueError):
        fitness(parse("H"), records, mode="sampled")
    with pytest.raises(ValueError):
        fitness(parse("H"), records, mode="other")


# -- selection -----------------------------------------------------------------

def test_single_individual_always_selected():
    pop = [Individual(Leaf("H"), -3.0)]
    rng = make_rng(6)
    assert all(select_parent(pop, rng) is pop[0] for _ in range(100))


def spin_frequencies(fitnesses, n, seed):
    wheel = RouletteWheel(fitnesses)
    rng = make_rng(seed)
    counts = collections.Counter(wheel.spin(rng) for _ in range(n))
    return [counts[i] / n for i in range(len(fitnesses))]


@pytest.mark.parametrize("fitnesses", [[10.0, 0.0], [3.0, -1.0, 2.0, 0.5], [-5.0, -7.0]])
def test_roulette_follows_shifted_weights(fitnesses):
    n = 100_000
    lo, hi = min(fitnesses), max(fitnesses)
    eps = 1e-6 * (hi - lo + 1)
    weights = [f - lo + eps for f in fitnesses]
    for freq, w in zip(spin_frequencies(fitnesses, n, 7), weights):
        p = w / sum(weights)
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1 / n


def test_roulette_uniform_when_all_equal():
    n = 100_000
    for freq in spin_frequencies([2.5] * 4, n, 8):
        assert abs(freq - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)


def test_roulette_rejects_empty():
    with pytest.raises(ValueError):
        RouletteWheel([])


# -- variation -----------------------------------------------------------------

def test_crossover_of_two_leaves_swaps():
    assert crossover(Leaf("H"), Leaf("X"), 7, make_rng(9)) == (Leaf("X"), Leaf("H"))


def test_crossover_self_swap_identity():
    tree = parse(FOUR_WAY_TREE)
    rng = make_rng(10)
    hits = 0
    for _ in range(300):
        a, b = crossover(tree, tree, 7, rng)
        if a == tree:
            hits += 1
            assert b == tree
    assert hits > 0


def test_crossover_depth_bound():
    rng = make_rng(11)
    for _ in range(1000):
        a, b = random_tree(6, rng), random_tree(6, rng)
        for child in crossover(a, b, 6, rng):
            assert depth(child) <= 6


def test_crossover_gives_up_on_impossible_depth():
    a, b = parse("((H+X)*S)"), parse("(Z*(Y+T))")
    assert crossover(a, b, 1, make_rng(12)) == (a, b)
    assert CROSSOVER_RETRIES == 10


def test_mutation_depth_bound_and_determinism():
    rng = make_rng(13)
    for _ in range(1000):
        tree = random_tree(7, rng)
        assert depth(mutate(tree, 7, rng)) <= 7
    leaf = Leaf("I")
    assert depth(mutate(leaf, 4, make_rng(14))) <= 4
    assert mutate(parse(FOUR_WAY_TREE), 7, make_rng(15)) == mutate(parse(FOUR_WAY_TREE), 7, make_rng(15))


# -- evolution -----------------------------------------------------------------

def test_elitist_best_fitness_never_drops():
    records = generate(500, 0.5, 16)
    for seed in range(20):
        for mode in ("expected", "sampled"):
            if mode == "sampled" and seed >= 5:
                continue
            config = GpConfig(population_size=20, generations=15, seed=seed, fitness_mode=mode)
            bests = [h.best for h in evolve(config, records).history]
            assert all(b2 >= b1 for b1, b2 in zip(bests, bests[1:]))


def test_every_scored_tree_respects_depth():
    records = generate(100, 0.5, 17)
    seen = []

    def objective(tree, rng):
        seen.append(depth(tree))
        return fitness(tree, records)

    evolve(GpConfig(population_size=30, generations=10, max_depth=5, seed=3), records, objective)
    assert len(seen) >= 30 and max(seen) <= 5


def test_evolve_reproducible():
    records = generate(300, 0.5, 18)
    for mode in ("expected", "sampled"):
        config = GpConfig(population_size=20, generations=5, seed=4, fitness_mode=mode)
        a, b = evolve(config, records), evolve(config, records)
        assert a == b
        assert population_to_json(a.final_population) == population_to_json(b.final_population)


def test_evolve_result_shape():
    records = generate(300, 0.5, 19)
    result = evolve(GpConfig(population_size=12, generations=4, seed=1), records)
    assert len(result.final_population) == 12
    assert [h.generation for h in result.history] == [0, 1, 2, 3, 4]
    fits = [ind.fitness for ind in result.final_population]
    assert fits == sorted(fits, reverse=True)
    assert result.best == result.final_population[0]
    assert result.best.fitness == pytest.approx(fitness(result.best.tree, records), abs=1e-9)


def test_minimal_run():
    result = evolve(GpConfig(population_size=2, generations=1, seed=0), from_states([0, 1]))
    assert len(result.final_population) == 2


def test_default_scale_run_finds_positive_fitness():
    records = generate(2000, 0.5, 20)
    result = evolve(GpConfig(population_size=100, generations=50, seed=5), records)
    assert result.best.fitness > 0


def test_config_validation():
    for bad in (dict(population_size=0), dict(crossover_prob=1.5), dict(mutation_prob=-0.1),
                dict(max_depth=0), dict(fitness_mode="other"), dict(elitism=200),
                dict(seed=-1), dict(ordering="other"), dict(generations=-1)):
        with pytest.raises(ValueError):
            GpConfig(**bad)


def test_config_file_round_trip(tmp_path):
    config = GpConfig(population_size=150, generations=60, crossover_prob=0.7, seed=9,
                      fitness_mode="sampled")
    path = tmp_path / "gp.cfg"
    path.write_text("# tuned run\n" + config.to_text() + "\n")
    assert GpConfig.read(path) == config
    path.write_text("generations = 12  # short\nmutation_prob=0.1\n")
    assert GpConfig.read(path) == GpConfig(generations=12, mutation_prob=0.1)
    path.write_text("colour = red\n")
    with pytest.raises(ValueError):
        GpConfig.read(path)
    path.write_text("generations 12\n")
    with pytest.raises(ValueError):
        GpConfig.read(path)


def test_population_and_history_files(tmp_path):
    records = generate(200, 0.5, 21)
    result = evolve(GpConfig(population_size=10, generations=3, seed=2), records)
    path = tmp_path / "pop.json"
    write_population(result.final_population, path)
    back = read_population(path)
    assert [to_string(i.tree) for i in back] == [to_string(i.tree) for i in result.final_population]
    assert [i.fitness for i in back] == [i.fitness for i in result.final_population]
    lines = history_to_csv(result.history).splitlines()
    assert lines[0] == "generation,best,mean" and len(lines) == 5
