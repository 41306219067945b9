"""Shared helpers and independent oracles for the test suite.

The oracles here deliberately avoid the package's own algebra: matrices are
numpy arrays, eigenvalues come from numpy.linalg, and strategies are found by
brute force over OR-node assignments.
"""

import cmath
import itertools
import math

import numpy as np
import pytest

from qdtgame.qdt import ADD, MUL, OR, Leaf, Node, random_tree
from qdtgame.rng import make_rng

SUM_TREE = "(T+S)"
TWO_WAY_TREE = "(I*(((T*Y)//X)*(X+I)))"
FOUR_WAY_TREE = "(((I//H)+I)//((Z+(D*(S//T)))*X))"
REFERENCE_TREES = (SUM_TREE, TWO_WAY_TREE, FOUR_WAY_TREE)

R = 1 / math.sqrt(2)
W8 = cmath.exp(1j * math.pi / 4)
GATE_ARRAYS = {
    "H": np.array([[R, R], [R, -R]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "D": np.array([[0, 1], [-1, 0]], dtype=complex),
    "T": np.array([[1, 0], [0, W8]], dtype=complex),
    "I": np.eye(2, dtype=complex),
}


def random_trees(n, max_depth=5, seed=0):
    rng = make_rng(seed)
    return [random_tree(max_depth, rng) for _ in range(n)]


def random_mul_tree(max_depth, rng, level=1):
    if level < max_depth and rng.random() < 0.5:
        return Node(MUL, random_mul_tree(max_depth, rng, level + 1),
                    random_mul_tree(max_depth, rng, level + 1))
    return Leaf("HXYZSDTI"[rng.integers(8)])


def random_or_free_tree(max_depth, rng, level=1):
    if level < max_depth and rng.random() < 0.6:
        op = (ADD, MUL)[rng.integers(2)]
        return Node(op, random_or_free_tree(max_depth, rng, level + 1),
                    random_or_free_tree(max_depth, rng, level + 1))
    return Leaf("HXYZSDTI"[rng.integers(8)])


def oracle_matrix(tree):
    """Value operator of an OR-free tree with numpy arithmetic."""
    if isinstance(tree, Leaf):
        return GATE_ARRAYS[tree.gate]
    a, b = oracle_matrix(tree.left), oracle_matrix(tree.right)
    if tree.op == ADD:
        return a + b
    if tree.op == MUL:
        return a @ b
    raise ValueError("OR node in strategy")


def oracle_beliefs(m):
    """(p1, p2) for a numpy 2x2 under the diagonal-nearest assignment.

    a1 takes the eigenvalue closest to m[0,0]; near-ties fall back to the
    larger |lambda|^2 (then real, then imaginary part).
    """
    l1, l2 = np.linalg.eigvals(m)
    straight = abs(l1 - m[0, 0]) ** 2 + abs(l2 - m[1, 1]) ** 2
    swapped = abs(l2 - m[0, 0]) ** 2 + abs(l1 - m[1, 1]) ** 2
    if abs(straight - swapped) <= 1e-9 * float(np.sum(np.abs(m) ** 2)):
        key = lambda z: (round(abs(z) ** 2, 9), round(z.real, 9), round(z.imag, 9))
        first, second = sorted((l1, l2), key=key, reverse=True)
    elif straight < swapped:
        first, second = l1, l2
    else:
        first, second = l2, l1
    w1, w2 = abs(first) ** 2, abs(second) ** 2
    if w1 + w2 < 1e-12:
        return 0.5, 0.5
    return w1 / (w1 + w2), w2 / (w1 + w2)


def or_nodes(tree, path=()):
    if isinstance(tree, Leaf):
        return []
    here = [path] if tree.op == OR else []
    return here + or_nodes(tree.left, path + (0,)) + or_nodes(tree.right, path + (1,))


def _follow(tree, choice, path=(), used=None):
    if isinstance(tree, Leaf):
        return tree
    if tree.op == OR:
        used.append(path)
        if choice[path] == 0:
            return _follow(tree.left, choice, path + (0,), used)
        return _follow(tree.right, choice, path + (1,), used)
    return Node(tree.op, _follow(tree.left, choice, path + (0,), used),
                _follow(tree.right, choice, path + (1,), used))


def brute_force_strategies(tree):
    """Distinct OR resolutions with their probability, by exhausting assignments.

    Every full assignment of left/right to the OR nodes is equally likely;
    assignments that agree on the OR nodes actually visited resolve to the
    same strategy, so strategies are keyed by the visited choices.
    """
    nodes = or_nodes(tree)
    found = {}
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        choice = dict(zip(nodes, bits))
        used = []
        resolved = _follow(tree, choice, (), used)
        key = tuple((p, choice[p]) for p in used)
        prob = found.get(key, (resolved, 0.0))[1]
        found[key] = (resolved, prob + 0.5 ** len(nodes))
    return list(found.values())


@pytest.fixture
def rng():
    return make_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = []


def record_criterion(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
