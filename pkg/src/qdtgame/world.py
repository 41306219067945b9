"""Nature's side of the game: the digital cat's state stream and its walk.

State codes follow the data table of the experiment: 0 is q1 (atom not
decayed, cat alive) and 1 is q2 (decayed, cat dead). The walk starts at 0
and steps +1 on q1, -1 on q2.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rng import make_rng

Q1, Q2 = 0, 1


@dataclass(frozen=True)
class WorldRecord:
    k: int
    state: int
    x: int


@dataclass(frozen=True)
class FrequencyPair:
    w1: float
    w2: float

    def of(self, state: int) -> float:
        return self.w1 if state == Q1 else self.w2


def step(state: int) -> int:
    return 1 if state == Q1 else -1


def payoff(action: int, state: int) -> int:
    """+1 when action a_i matches state q_j (i == j), else -1."""
    return 1 if action == state + 1 else -1


def generate(n: int, p_decay: float = 0.5, seed: int = 0) -> list[WorldRecord]:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p_decay <= 1.0:
        raise ValueError(f"p_decay must lie in [0, 1], got {p_decay}")
    rng = make_rng(seed)
    states = (rng.random(n) < p_decay).astype(np.int64)
    return from_states(states.tolist())


def from_states(states: Iterable[int]) -> list[WorldRecord]:
    records = []
    x = 0
    for k, s in enumerate(states, start=1):
        if s not in (Q1, Q2):
            raise ValueError(f"state must be 0 or 1, got {s!r}")
        x += step(s)
        records.append(WorldRecord(k, int(s), x))
    return records


def state_counts(records: Sequence[WorldRecord]) -> tuple[int, int]:
    n2 = sum(r.state for r in records)
    return len(records) - n2, n2


def state_frequencies(records: Sequence[WorldRecord]) -> FrequencyPair:
    if not records:
        raise ValueError("need at least one record")
    n1, n2 = state_counts(records)
    return FrequencyPair(n1 / len(records), n2 / len(records))


def walk(records: Sequence[WorldRecord]) -> list[int]:
    """The walk including its origin: ``[0, x_1, ..., x_n]``."""
    return [0] + [r.x for r in records]


def to_csv(records: Sequence[WorldRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "state", "x"])
    for r in records:
        w.writerow([r.k, r.state, r.x])
    return buf.getvalue()


def write_csv(records: Sequence[WorldRecord], path: str | Path) -> None:
    Path(path).write_text(to_csv(records), encoding="utf-8", newline="")


def read_csv(path: str | Path) -> list[WorldRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["k", "state", "x"]:
            raise ValueError(f"{path}: expected header k,state,x")
        records = [WorldRecord(int(row["k"]), int(row["state"]), int(row["x"])) for row in reader]
    x = 0
    for i, r in enumerate(records, start=1):
        if r.state not in (Q1, Q2):
            raise ValueError(f"{path}: row {i}: state must be 0 or 1")
        x += step(r.state)
        if r.k != i or r.x != x:
            raise ValueError(f"{path}: row {i}: k or x inconsistent with the walk")
    return records
