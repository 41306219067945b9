"""Playing trees against the world: bet values, play logs and the majority rule."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .qdt import Qdt
from .rng import Rng, child_seeds, make_rng
from .valuation import A1, A2, DEFAULT_ORDERING, BeliefCache, BeliefDistribution, Decision
from .world import FrequencyPair, WorldRecord, payoff, state_frequencies

ENSEMBLE_INDEX = -1


@dataclass(slots=True)
class BetOutcome:
    k: int
    state: int
    decision: Decision
    payoff: int
    bet_value: float


@dataclass
class PlayLog:
    outcomes: list[BetOutcome] = field(default_factory=list)

    @property
    def wins(self) -> int:
        return sum(1 for o in self.outcomes if o.payoff > 0)

    @property
    def winning_rate(self) -> float:
        return self.wins / len(self.outcomes) if self.outcomes else 0.0

    @property
    def total_value(self) -> float:
        total = 0.0
        for o in self.outcomes:
            total += o.bet_value
        return total


def bet_value(decision: Decision, state: int, freq: FrequencyPair) -> float:
    """Quantum expected value of one bet: belief * frequency * payoff."""
    return decision.belief * freq.of(state) * payoff(decision.action, state)


def _score(decision: Decision, record: WorldRecord, freq: FrequencyPair) -> BetOutcome:
    return BetOutcome(
        record.k, record.state, decision,
        payoff(decision.action, record.state),
        bet_value(decision, record.state, freq),
    )


def play(
    tree: Qdt,
    records: Sequence[WorldRecord],
    rng: Rng,
    freq: FrequencyPair | None = None,
    ordering: str = DEFAULT_ORDERING,
) -> PlayLog:
    """One decision per record; frequencies default to the whole dataset's."""
    if not records:
        raise ValueError("need at least one record")
    freq = freq or state_frequencies(records)
    agent = BeliefCache(tree, ordering)
    return PlayLog([_score(agent.decide(rng), r, freq) for r in records])


def majority_play(
    trees: Sequence[Qdt],
    records: Sequence[WorldRecord],
    rng: Rng,
    tree_rngs: Sequence[Rng] | None = None,
    freq: FrequencyPair | None = None,
    ordering: str = DEFAULT_ORDERING,
) -> PlayLog:
    """Let every tree vote on each record and bet with the strict majority.

    Each tree decides from its own stream (derived from ``rng`` in list order
    unless ``tree_rngs`` is given); an exact tie is settled by a fair coin
    drawn from ``rng``. The ensemble's belief in its action is the fraction of
    trees that voted for it.
    """
    if not trees:
        raise ValueError("need at least one tree")
    if not records:
        raise ValueError("need at least one record")
    if tree_rngs is None:
        tree_rngs = [make_rng(s) for s in child_seeds(rng, len(trees))]
    if len(tree_rngs) != len(trees):
        raise ValueError("one stream per tree required")
    freq = freq or state_frequencies(records)
    agents = [BeliefCache(t, ordering) for t in trees]
    n = len(trees)
    log = PlayLog()
    for r in records:
        votes = sum(1 for a, g in zip(agents, tree_rngs) if a.draw(g)[1] == A1)
        if 2 * votes > n:
            action = A1
        elif 2 * votes < n:
            action = A2
        else:
            action = A1 if rng.random() < 0.5 else A2
        beliefs = BeliefDistribution(votes / n, (n - votes) / n)
        decision = Decision(ENSEMBLE_INDEX, action, beliefs.of(action), beliefs)
        log.outcomes.append(_score(decision, r, freq))
    return log


def sampled_value(
    tree: Qdt,
    records: Sequence[WorldRecord],
    rng: Rng,
    freq: FrequencyPair | None = None,
    ordering: str = DEFAULT_ORDERING,
) -> float:
    """Total bet value of one play; equals ``play(...).total_value`` exactly."""
    freq = freq or state_frequencies(records)
    agent = BeliefCache(tree, ordering)
    w = (freq.w1, freq.w2)
    total = 0.0
    for r in records:
        _, action, beliefs = agent.draw(rng)
        belief = beliefs.p1 if action == A1 else beliefs.p2
        total += belief * w[r.state] * (1 if action == r.state + 1 else -1)
    return total


def winning_rate_stats(logs: Sequence[PlayLog]) -> tuple[float, float]:
    """Mean and population standard deviation of winning rates, in percent."""
    if not logs:
        raise ValueError("need at least one log")
    rates = [100.0 * log.winning_rate for log in logs]
    return statistics.fmean(rates), statistics.pstdev(rates)


PLAY_LOG_HEADER = ["k", "state", "strategy_index", "action", "belief", "payoff"]


def log_to_csv(log: PlayLog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLAY_LOG_HEADER)
    for o in log.outcomes:
        d = o.decision
        w.writerow([o.k, o.state, d.strategy_index, d.action, f"{d.belief:.4f}", o.payoff])
    return buf.getvalue()


def write_log(log: PlayLog, path: str | Path) -> None:
    Path(path).write_text(log_to_csv(log), encoding="utf-8", newline="")


def read_log_rows(path: str | Path) -> list[dict]:
    """Rows of a play-log CSV with numeric fields converted."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PLAY_LOG_HEADER:
            raise ValueError(f"{path}: not a play log")
        return [
            {
                "k": int(row["k"]),
                "state": int(row["state"]),
                "strategy_index": int(row["strategy_index"]),
                "action": int(row["action"]),
                "belief": float(row["belief"]),
                "payoff": int(row["payoff"]),
            }
            for row in reader
        ]
