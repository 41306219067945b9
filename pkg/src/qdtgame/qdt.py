"""Quantum decision trees: AST, parser, printer, random growth, strategies.

Grammar (whitespace is ignored)::

    expr := leaf | "(" expr op expr ")"
    op   := "+" | "*" | "//" | "/"
    leaf := "H" | "X" | "Y" | "Z" | "S" | "D" | "T" | "I"

A single "/" is read as OR; the printer always emits "//".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Union

from .matrix import GATE_SYMBOLS
from .rng import Rng

ADD = "+"
MUL = "*"
OR = "//"
OPERATORS: tuple[str, ...] = (ADD, MUL, OR)

DEFAULT_MAX_DEPTH = 7


@dataclass(frozen=True, slots=True)
class Leaf:
    gate: str

    def __post_init__(self):
        if self.gate not in GATE_SYMBOLS:
            raise ValueError(f"unknown gate symbol {self.gate!r}")

    def __str__(self) -> str:
        return self.gate


@dataclass(frozen=True, slots=True)
class Node:
    op: str
    left: "Qdt"
    right: "Qdt"
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")
        # trees are used as memo keys; hashing must not walk the whole tree
        object.__setattr__(self, "_hash", hash((self.op, self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return to_string(self)


Qdt = Union[Leaf, Node]


@dataclass(frozen=True)
class Strategy:
    """An OR-free resolution of a tree and the probability of selecting it."""

    tree: Qdt
    weight: float


class QdtSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# -- parsing / printing -------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> Qdt:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            left = self.expr()
            op = self.operator()
            right = self.expr()
            if self.peek() != ")":
                raise QdtSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return Node(op, left, right)
        if ch and ch in GATE_SYMBOLS:
            self.pos += 1
            return Leaf(ch)
        if not ch:
            raise QdtSyntaxError("unexpected end of input", self.pos)
        raise QdtSyntaxError(f"unexpected character {ch!r}", self.pos)

    def operator(self) -> str:
        ch = self.peek()
        if ch == "/":
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos] == "/":
                self.pos += 1
            return OR
        if ch in ("+", "*"):
            self.pos += 1
            return ch
        if not ch:
            raise QdtSyntaxError("dangling expression, expected operator", self.pos)
        raise QdtSyntaxError(f"expected operator, got {ch!r}", self.pos)


def parse(text: str) -> Qdt:
    p = _Parser(text)
    tree = p.expr()
    if p.peek():
        raise QdtSyntaxError(f"trailing input {p.peek()!r}", p.pos)
    return tree


def to_string(tree: Qdt) -> str:
    if isinstance(tree, Leaf):
        return tree.gate
    return f"({to_string(tree.left)}{tree.op}{to_string(tree.right)})"


# -- structure ----------------------------------------------------------------

def depth(tree: Qdt) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + max(depth(tree.left), depth(tree.right))


def node_count(tree: Qdt) -> int:
    if isinstance(tree, Leaf):
        return 1
    return 1 + node_count(tree.left) + node_count(tree.right)


def has_or(tree: Qdt) -> bool:
    if isinstance(tree, Leaf):
        return False
    return tree.op == OR or has_or(tree.left) or has_or(tree.right)


def iter_nodes(tree: Qdt, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Qdt]]:
    """Pre-order walk yielding ``(path, subtree)``; path entries are 0=left, 1=right."""
    yield path, tree
    if isinstance(tree, Node):
        yield from iter_nodes(tree.left, path + (0,))
        yield from iter_nodes(tree.right, path + (1,))


def replace_at(tree: Qdt, path: tuple[int, ...], subtree: Qdt) -> Qdt:
    if not path:
        return subtree
    assert isinstance(tree, Node)
    if path[0] == 0:
        return Node(tree.op, replace_at(tree.left, path[1:], subtree), tree.right)
    return Node(tree.op, tree.left, replace_at(tree.right, path[1:], subtree))


def random_tree(max_depth: int, rng: Rng) -> Qdt:
    """Grow a random tree no deeper than ``max_depth``.

    Below the depth limit a node is internal with probability 1/2 (operator
    uniform over ADD/MUL/OR), otherwise a uniformly chosen gate leaf.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    return _grow(1, max_depth, rng)


def _grow(level: int, max_depth: int, rng: Rng) -> Qdt:
    if level < max_depth and rng.random() < 0.5:
        op = OPERATORS[rng.integers(len(OPERATORS))]
        left = _grow(level + 1, max_depth, rng)
        right = _grow(level + 1, max_depth, rng)
        return Node(op, left, right)
    return Leaf(GATE_SYMBOLS[rng.integers(len(GATE_SYMBOLS))])


# -- strategies ---------------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def strategy_count(tree: Qdt) -> int:
    if isinstance(tree, Leaf):
        return 1
    left, right = strategy_count(tree.left), strategy_count(tree.right)
    return left + right if tree.op == OR else left * right


def enumerate_strategies(tree: Qdt) -> list[Strategy]:
    """Expand every OR node into its alternatives.

    Each OR branch is taken with probability 1/2, so a strategy's weight is
    the product of the halves met on its path. ADD/MUL combine the strategies
    of both children pairwise (left-major order). Duplicates are kept.
    """
    if isinstance(tree, Leaf):
        return [Strategy(tree, 1.0)]
    left = enumerate_strategies(tree.left)
    right = enumerate_strategies(tree.right)
    if tree.op == OR:
        return [Strategy(s.tree, 0.5 * s.weight) for s in left + right]
    return [
        Strategy(Node(tree.op, a.tree, b.tree), a.weight * b.weight)
        for a in left
        for b in right
    ]


def resolve(tree: Qdt, rng: Rng) -> tuple[Qdt, int, float]:
    """Resolve OR nodes with fair coins, left-to-right in pre-order.

    Returns the OR-free tree, its index in ``enumerate_strategies`` order and
    its weight. A coin draw below 1/2 selects the left branch.
    """
    if isinstance(tree, Leaf):
        return tree, 0, 1.0
    if tree.op == OR:
        if rng.random() < 0.5:
            sub, idx, w = resolve(tree.left, rng)
            return sub, idx, 0.5 * w
        sub, idx, w = resolve(tree.right, rng)
        return sub, strategy_count(tree.left) + idx, 0.5 * w
    left, i, wl = resolve(tree.left, rng)
    right, j, wr = resolve(tree.right, rng)
    return Node(tree.op, left, right), i * strategy_count(tree.right) + j, wl * wr


def choose_index(tree: Qdt, rng: Rng) -> int:
    """Like :func:`resolve` but only returns the index; same coin draws."""
    if isinstance(tree, Leaf):
        return 0
    if tree.op == OR:
        if rng.random() < 0.5:
            return choose_index(tree.left, rng)
        return strategy_count(tree.left) + choose_index(tree.right, rng)
    i = choose_index(tree.left, rng)
    return i * strategy_count(tree.right) + choose_index(tree.right, rng)


def strategy_at(tree: Qdt, index: int) -> Qdt:
    """The OR-free tree at ``index`` in ``enumerate_strategies`` order."""
    if not 0 <= index < strategy_count(tree):
        raise IndexError(index)
    if isinstance(tree, Leaf):
        return tree
    if tree.op == OR:
        n_left = strategy_count(tree.left)
        if index < n_left:
            return strategy_at(tree.left, index)
        return strategy_at(tree.right, index - n_left)
    i, j = divmod(index, strategy_count(tree.right))
    return Node(tree.op, strategy_at(tree.left, i), strategy_at(tree.right, j))


def index_sampler(tree: Qdt):
    """Compile ``choose_index`` for one tree.

    Returns ``None`` when the tree has no OR node (the index is always 0),
    otherwise a function of the stream that skips OR-free subtrees.
    """
    if isinstance(tree, Leaf) or not has_or(tree):
        return None
    left, right = index_sampler(tree.left), index_sampler(tree.right)
    if tree.op == OR:
        n_left = strategy_count(tree.left)

        def pick(rng):
            if rng.random() < 0.5:
                return left(rng) if left else 0
            return n_left + (right(rng) if right else 0)
        return pick

    n_right = strategy_count(tree.right)
    if left is None:
        return right
    if right is None:
        return lambda rng: left(rng) * n_right
    return lambda rng: left(rng) * n_right + right(rng)
