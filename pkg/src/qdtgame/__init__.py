"""Quantum decision trees evolved by genetic programming to bet on a digital cat."""

from .matrix import ComplexMatrix2, GATES, gate_matrix
from .qdt import Leaf, Node, Strategy, enumerate_strategies, parse, random_tree, to_string
from .valuation import BeliefDistribution, Decision, decide, expected_beliefs, normalize
from .world import WorldRecord, generate

__all__ = [
    "ComplexMatrix2", "GATES", "gate_matrix",
    "Leaf", "Node", "Strategy", "enumerate_strategies", "parse", "random_tree", "to_string",
    "BeliefDistribution", "Decision", "decide", "expected_beliefs", "normalize",
    "WorldRecord", "generate",
]
