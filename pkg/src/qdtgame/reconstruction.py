"""Trajectory reconstruction: one evolved tree per contiguous data group.

Each group's tree is trained on that group with a fitness whose bet values
are damped by the divergence between the predicted walk and the real one,
then replayed over the group to draw a predicted walk. The predicted walk
is continuous across groups and starts at 0 like the real one.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .gp import GpConfig, evolve
from .qdt import Qdt
from .rng import make_rng
from .valuation import A1, DEFAULT_ORDERING, BeliefCache, expected_beliefs
from .world import FrequencyPair, WorldRecord, state_frequencies, step, walk


@dataclass(frozen=True)
class GroupPartition:
    groups: list[list[WorldRecord]]
    group_size: int


@dataclass
class ReconstructionResult:
    predicted_walk: list[int]
    actual_walk: list[int]
    directional_accuracy: float
    per_group_trees: list[Qdt]

    def matches(self) -> list[int]:
        a, p = self.actual_walk, self.predicted_walk
        return [int((a[k] - a[k - 1]) == (p[k] - p[k - 1])) for k in range(1, len(a))]


def partition(records: Sequence[WorldRecord], group_size: int) -> GroupPartition:
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if group_size > len(records):
        raise ValueError(f"group_size {group_size} exceeds {len(records)} records")
    groups = [list(records[i:i + group_size]) for i in range(0, len(records), group_size)]
    return GroupPartition(groups, group_size)


def _group_origin(group: Sequence[WorldRecord]) -> int:
    first = group[0]
    return first.x - step(first.state)


class FeedbackObjective:
    """Feedback-damped expected bet value of a tree over one group.

    The predicted walk advances by the tree's expected step ``p1 - p2`` per
    record, starting from the real walk value just before the group. Each
    expected bet value is divided by ``max(1, |y_k - x_k|)``; with
    ``whole_sum`` the summed value is divided once by the final divergence.
    """

    def __init__(self, group: Sequence[WorldRecord], freq: FrequencyPair | None = None,
                 whole_sum: bool = False, ordering: str = DEFAULT_ORDERING):
        if not group:
            raise ValueError("need at least one record")
        freq = freq or state_frequencies(group)
        states = np.array([r.state for r in group])
        self.x = np.array([r.x for r in group], dtype=float)
        self.origin = float(_group_origin(group))
        # per-record omega_j * sign: +w1 on q1 records, -w2 on q2 records
        self.signed_freq = np.where(states == 0, freq.w1, -freq.w2)
        self.k = np.arange(1, len(group) + 1, dtype=float)
        self.whole_sum = whole_sum
        self.ordering = ordering

    def __call__(self, tree: Qdt, rng=None) -> float:
        b = expected_beliefs(tree, self.ordering)
        advantage = b.p1 - b.p2
        values = self.signed_freq * advantage
        predicted = self.origin + advantage * self.k
        if self.whole_sum:
            return float(values.sum() / max(1.0, abs(predicted[-1] - self.x[-1])))
        divisor = np.maximum(1.0, np.abs(predicted - self.x))
        return float((values / divisor).sum())


def feedback_fitness(tree: Qdt, group: Sequence[WorldRecord], freq: FrequencyPair | None = None,
                     whole_sum: bool = False, ordering: str = DEFAULT_ORDERING) -> float:
    return FeedbackObjective(group, freq, whole_sum, ordering)(tree)


def directional_accuracy(actual: Sequence[int], predicted: Sequence[int]) -> float:
    """Fraction of steps where both walks move in the same direction."""
    if len(actual) != len(predicted):
        raise ValueError("walks must have equal length")
    if len(actual) < 2:
        raise ValueError("walks need at least two points")
    if actual[0] != predicted[0]:
        raise ValueError("walks must share their origin")
    n = len(actual) - 1
    hits = sum(
        1 for k in range(1, n + 1)
        if np.sign(actual[k] - actual[k - 1]) == np.sign(predicted[k] - predicted[k - 1])
    )
    return hits / n


def group_seed(seed: int, index: int) -> int:
    return make_rng(seed, index, 0).seeds(1)[0]


def reconstruct(
    records: Sequence[WorldRecord],
    group_size: int,
    gp: GpConfig,
    trees: Sequence[Qdt] | None = None,
    whole_sum: bool = False,
) -> ReconstructionResult:
    """Evolve (or take) one tree per group and replay it as a walk.

    Group ``i`` evolves with a seed derived from ``(gp.seed, i)`` and replays
    on the stream ``(gp.seed, i, 1)``; passing ``trees`` skips evolution.
    """
    if not records:
        raise ValueError("need at least one record")
    groups = partition(records, group_size).groups
    if trees is not None and len(trees) != len(groups):
        raise ValueError(f"expected {len(groups)} trees, got {len(trees)}")

    chosen: list[Qdt] = []
    predicted = [0]
    for i, group in enumerate(groups):
        if trees is None:
            objective = FeedbackObjective(group, whole_sum=whole_sum, ordering=gp.ordering)
            config = replace(gp, seed=group_seed(gp.seed, i))
            tree = evolve(config, group, objective=objective, deterministic=True).best.tree
        else:
            tree = trees[i]
        chosen.append(tree)
        agent = BeliefCache(tree, gp.ordering)
        rng = make_rng(gp.seed, i, 1)
        for _ in group:
            predicted.append(predicted[-1] + (1 if agent.decide(rng).action == A1 else -1))

    actual = walk(records)
    return ReconstructionResult(predicted, actual, directional_accuracy(actual, predicted), chosen)


RECONSTRUCTION_HEADER = ["k", "x_actual", "y_predicted", "match"]


def result_to_csv(result: ReconstructionResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECONSTRUCTION_HEADER)
    for k, m in enumerate(result.matches(), start=1):
        w.writerow([k, result.actual_walk[k], result.predicted_walk[k], m])
    return buf.getvalue()


def read_reconstruction(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RECONSTRUCTION_HEADER:
            raise ValueError(f"{path}: not a reconstruction file")
        return [{k: int(v) for k, v in row.items()} for row in reader]
