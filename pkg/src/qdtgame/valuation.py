"""From strategies to value operators, belief distributions and decisions."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .matrix import ComplexMatrix2, add, eigenvalues, gate_matrix, mul
from .qdt import ADD, OR, Leaf, Qdt, Strategy, index_sampler, resolve, strategy_at
from .rng import Rng

A1, A2 = 1, 2

DEGENERATE_NORM = 1e-12

# Assignment of eigenvalues to actions a1/a2:
#   "diagonal"  - a1 takes the eigenvalue nearest the (1,1) entry, a2 the one
#                 nearest the (2,2) entry; ties fall back to "magnitude".
#   "magnitude" - descending |l|^2, then real part, then imaginary part.
ORDERINGS = ("diagonal", "magnitude")
DEFAULT_ORDERING = "diagonal"


@dataclass(frozen=True)
class ValueOperator:
    matrix: ComplexMatrix2
    eigen: tuple[complex, complex]


@dataclass(frozen=True)
class BeliefDistribution:
    p1: float
    p2: float
    degenerate: bool = False

    def of(self, action: int) -> float:
        return self.p1 if action == A1 else self.p2


@dataclass(slots=True)
class Decision:
    strategy_index: int
    action: int
    belief: float
    beliefs: BeliefDistribution


def evaluate_matrix(tree: Qdt) -> ComplexMatrix2:
    if isinstance(tree, Leaf):
        return gate_matrix(tree.gate)
    if tree.op == OR:
        raise ValueError("cannot evaluate a tree containing OR; resolve it first")
    left, right = evaluate_matrix(tree.left), evaluate_matrix(tree.right)
    return add(left, right) if tree.op == ADD else mul(left, right)


def _magnitude_key(z: complex):
    return (abs(z) ** 2, z.real, z.imag)


def order_eigenvalues(m: ComplexMatrix2, ordering: str = DEFAULT_ORDERING) -> tuple[complex, complex]:
    l1, l2 = eigenvalues(m)
    by_magnitude = tuple(sorted((l1, l2), key=_magnitude_key, reverse=True))
    if ordering == "magnitude":
        return by_magnitude
    if ordering != "diagonal":
        raise ValueError(f"unknown eigenvalue ordering {ordering!r}")
    straight = abs(l1 - m.m00) ** 2 + abs(l2 - m.m11) ** 2
    swapped = abs(l2 - m.m00) ** 2 + abs(l1 - m.m11) ** 2
    scale = sum(abs(z) ** 2 for z in m)
    if abs(straight - swapped) <= 1e-9 * scale:
        return by_magnitude
    return (l1, l2) if straight < swapped else (l2, l1)


def evaluate_strategy(s: Strategy | Qdt, ordering: str = DEFAULT_ORDERING) -> ValueOperator:
    tree = s.tree if isinstance(s, Strategy) else s
    m = evaluate_matrix(tree)
    return ValueOperator(m, order_eigenvalues(m, ordering))


def normalize(v: ValueOperator) -> BeliefDistribution:
    """Squared eigenvalue magnitudes scaled to sum to one."""
    w1, w2 = (abs(z) ** 2 for z in v.eigen)
    total = w1 + w2
    if total < DEGENERATE_NORM:
        return BeliefDistribution(0.5, 0.5, degenerate=True)
    p1 = w1 / total
    return BeliefDistribution(p1, 1.0 - p1)


def beliefs_of_matrix(m: ComplexMatrix2, ordering: str = DEFAULT_ORDERING) -> BeliefDistribution:
    return normalize(ValueOperator(m, order_eigenvalues(m, ordering)))


def strategy_beliefs(tree: Qdt, ordering: str = DEFAULT_ORDERING) -> BeliefDistribution:
    return beliefs_of_matrix(evaluate_matrix(tree), ordering)


def select_strategy(tree: Qdt, rng: Rng) -> tuple[Strategy, int]:
    """Pick one strategy by flipping a fair coin at each OR on the path."""
    resolved, index, weight = resolve(tree, rng)
    return Strategy(resolved, weight), index


class BeliefCache:
    """Memoizes the beliefs of resolved strategies of one tree.

    Coin flips and the action draw consume ``rng`` in the same order as
    :func:`decide`, so cached and uncached play are bit-identical.
    """

    def __init__(self, tree: Qdt, ordering: str = DEFAULT_ORDERING):
        self.tree = tree
        self.ordering = ordering
        self._sample_index = index_sampler(tree)
        self._by_index: dict[int, BeliefDistribution] = {}

    def draw(self, rng: Rng) -> tuple[int, int, BeliefDistribution]:
        """``(strategy_index, action, beliefs)`` without building a Decision."""
        index = self._sample_index(rng) if self._sample_index else 0
        beliefs = self._by_index.get(index)
        if beliefs is None:
            beliefs = strategy_beliefs(strategy_at(self.tree, index), self.ordering)
            self._by_index[index] = beliefs
        return index, (A1 if rng.random() < beliefs.p1 else A2), beliefs

    def decide(self, rng: Rng) -> Decision:
        index, action, beliefs = self.draw(rng)
        return Decision(index, action, beliefs.of(action), beliefs)


def decide(tree: Qdt, rng: Rng, ordering: str = DEFAULT_ORDERING) -> Decision:
    """Resolve the tree, evaluate its value operator and sample an action.

    Draw order on ``rng``: OR coins first (pre-order), then one uniform for
    the action, which is a1 when the draw falls below p1.
    """
    resolved, index, _ = resolve(tree, rng)
    beliefs = strategy_beliefs(resolved, ordering)
    action = A1 if rng.random() < beliefs.p1 else A2
    return Decision(index, action, beliefs.of(action), beliefs)


# -- mixture over strategies ---------------------------------------------------

@lru_cache(maxsize=1 << 15)
def matrix_distribution(tree: Qdt) -> tuple[tuple[ComplexMatrix2, float], ...]:
    """Distribution of value-operator matrices over a tree's strategies.

    Equal matrices are merged, which keeps OR-heavy trees tractable where
    the explicit strategy list would grow exponentially. Merging is on
    exact floating-point equality.
    """
    if isinstance(tree, Leaf):
        return ((gate_matrix(tree.gate), 1.0),)
    left = matrix_distribution(tree.left)
    right = matrix_distribution(tree.right)
    acc: dict[ComplexMatrix2, float] = {}
    if tree.op == OR:
        for m, w in left + right:
            acc[m] = acc.get(m, 0.0) + 0.5 * w
    else:
        combine = add if tree.op == ADD else mul
        for ma, wa in left:
            for mb, wb in right:
                m = combine(ma, mb)
                acc[m] = acc.get(m, 0.0) + wa * wb
    return tuple(acc.items())


@lru_cache(maxsize=1 << 16)
def _expected_beliefs(tree: Qdt, ordering: str) -> BeliefDistribution:
    p1 = 0.0
    for m, w in matrix_distribution(tree):
        p1 += w * beliefs_of_matrix(m, ordering).p1
    p1 = min(1.0, max(0.0, p1))
    return BeliefDistribution(p1, 1.0 - p1)


def expected_beliefs(tree: Qdt, ordering: str = DEFAULT_ORDERING) -> BeliefDistribution:
    """Strategy-weighted average of the belief distributions of ``tree``."""
    return _expected_beliefs(tree, ordering)


def expected_advantage(tree: Qdt, ordering: str = DEFAULT_ORDERING) -> float:
    """Expected ``p1 - p2`` of the tree's mixed strategy."""
    b = expected_beliefs(tree, ordering)
    return b.p1 - b.p2
