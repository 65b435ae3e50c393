"""Adaptive distinguishing sequences computed directly from the observation tree.

``expected_reward(U)`` is the maximal expected number of apartness pairs
gained by running an adaptive experiment on a state that behaves like a
uniformly chosen member of ``U``. Values are exact fractions; among inputs
attaining the maximum the lowest index wins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .mealy import UNDEFINED
from .obstree import ObservationTree

ZERO = Fraction(0)


@dataclass
class AdsNode:
    states: tuple[int, ...]
    # origins[j] is the member of the root set that states[j] descends from
    origins: tuple[int, ...]
    score: Fraction = ZERO
    input: int | None = None
    children: dict[int, "AdsNode"] = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return self.input is None

    def paths(self):
        """Yield the input words along every root-to-leaf path."""
        if self.input is None:
            yield ()
            return
        for child in self.children.values():
            for rest in child.paths():
                yield (self.input,) + rest

    def depth(self) -> int:
        if self.input is None:
            return 0
        return 1 + max(c.depth() for c in self.children.values())


def _split(tree: ObservationTree, states, i):
    """Group the i-successors of ``states`` by output.

    Returns ``(defined, groups)`` where ``groups`` maps output -> list of
    ``(successor, position in states)``.
    """
    k, succ, out = tree.k, tree._succ, tree._out
    groups: dict[int, list[tuple[int, int]]] = {}
    defined = 0
    for pos, u in enumerate(states):
        s = succ[u * k + i]
        if s != UNDEFINED:
            groups.setdefault(out[u * k + i], []).append((s, pos))
            defined += 1
    return defined, groups


class _Solver:
    def __init__(self, tree: ObservationTree):
        self.tree = tree
        self.memo: dict[tuple[int, ...], tuple[Fraction, int | None]] = {}

    def best(self, states: tuple[int, ...]) -> tuple[Fraction, int | None]:
        # A single state can never be split, so every input is worth zero.
        if len(states) < 2:
            return ZERO, None
        hit = self.memo.get(states)
        if hit is not None:
            return hit
        best, best_input = ZERO, None
        for i in range(self.tree.k):
            defined, groups = _split(self.tree, states, i)
            if not defined:
                continue
            value = ZERO
            for members in groups.values():
                size = len(members)
                sub, _ = self.best(tuple(s for s, _ in members))
                value += Fraction(size * (defined - size), defined) + sub * Fraction(size, defined)
            if best_input is None or value > best:
                best, best_input = value, i
        self.memo[states] = (best, best_input)
        return best, best_input

    def build(self, states: tuple[int, ...], origins: tuple[int, ...]) -> AdsNode:
        score, i = self.best(states)
        node = AdsNode(states, origins, score)
        # E = 0 means no two members are apart; probing further cannot pay off.
        if i is None or score == 0:
            return node
        node.input = i
        _, groups = _split(self.tree, states, i)
        for o in sorted(groups):
            members = groups[o]
            node.children[o] = self.build(tuple(s for s, _ in members),
                                          tuple(origins[p] for _, p in members))
        return node


def expected_reward(tree: ObservationTree, states: Iterable[int]) -> Fraction:
    return _Solver(tree).best(tuple(states))[0]


def build_ads(tree: ObservationTree, states: Iterable[int]) -> AdsNode:
    states = tuple(states)
    return _Solver(tree).build(states, states)
