"""Mealy machines over interned alphabets.

States, inputs and outputs are dense integer indices. Names live in side
tables (:class:`Alphabet` for symbols, ``state_names`` for states), so all
hot-path lookups are list indexing.
"""
from __future__ import annotations

import random
from collections import deque
from typing import Iterable, NamedTuple, Sequence

UNDEFINED = -1


class Alphabet:
    """Bijective interning of symbol names to small integers."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        idx = self._index.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._index[name] = idx
        return idx

    def index(self, name: str) -> int:
        return self._index[name]

    def get(self, name: str, default=None):
        return self._index.get(name, default)

    def name(self, idx: int) -> str:
        return self._names[idx]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def copy(self) -> "Alphabet":
        return Alphabet(self._names)

    def encode(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self._index[n] for n in names)

    def decode(self, word: Iterable[int]) -> tuple[str, ...]:
        return tuple(self._names[i] for i in word)

    def __len__(self):
        return len(self._names)

    def __iter__(self):
        return iter(self._names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self._names == other._names

    def __hash__(self):
        return hash(tuple(self._names))

    def __repr__(self):
        return f"Alphabet({self._names!r})"


class TransferResult(NamedTuple):
    outputs: tuple[int, ...]
    end: int
    consumed: int


class PartialMachineError(ValueError):
    """Raised when an operation needs a complete machine."""


class GenerationError(RuntimeError):
    pass


class MealyMachine:
    """A (possibly partial) deterministic Mealy machine.

    ``succ[q][i]`` and ``out[q][i]`` hold the successor state and output index
    for state ``q`` and input ``i``; both are ``UNDEFINED`` together when the
    transition is missing. Instances are immutable.
    """

    __slots__ = ("inputs", "outputs", "state_names", "initial", "succ", "out", "complete")

    def __init__(self, inputs: Alphabet, outputs: Alphabet, state_names: Sequence[str],
                 initial: int, succ: Sequence[Sequence[int]], out: Sequence[Sequence[int]]):
        n, k = len(state_names), len(inputs)
        if not n:
            raise ValueError("machine has no states")
        if not 0 <= initial < n:
            raise ValueError(f"initial state {initial} out of range")
        if len(succ) != n or len(out) != n:
            raise ValueError("transition table size does not match state count")
        complete = True
        for q in range(n):
            if len(succ[q]) != k or len(out[q]) != k:
                raise ValueError(f"row {q} does not cover the input alphabet")
            for i in range(k):
                s, o = succ[q][i], out[q][i]
                if (s == UNDEFINED) != (o == UNDEFINED):
                    raise ValueError(f"state {q}, input {i}: output and successor must be defined together")
                if s == UNDEFINED:
                    complete = False
                elif not (0 <= s < n and 0 <= o < len(outputs)):
                    raise ValueError(f"state {q}, input {i}: index out of range")
        setter = object.__setattr__
        setter(self, "inputs", inputs)
        setter(self, "outputs", outputs)
        setter(self, "state_names", tuple(state_names))
        setter(self, "initial", initial)
        setter(self, "succ", tuple(tuple(row) for row in succ))
        setter(self, "out", tuple(tuple(row) for row in out))
        setter(self, "complete", complete)

    def __setattr__(self, name, value):
        raise AttributeError("MealyMachine is immutable")

    def __reduce__(self):
        return (MealyMachine, (self.inputs, self.outputs, self.state_names, self.initial, self.succ, self.out))

    @classmethod
    def from_transitions(cls, transitions: Iterable[tuple[str, str, str, str]],
                         initial: str | None = None, inputs: Iterable[str] | None = None,
                         states: Iterable[str] | None = None) -> "MealyMachine":
        """Build from ``(source, input, output, target)`` name tuples.

        States are numbered in order of first appearance (``states`` first,
        then sources/targets); the initial state defaults to the first one.
        """
        transitions = list(transitions)
        in_alpha = Alphabet(inputs or ())
        out_alpha = Alphabet()
        names: dict[str, int] = {}
        for s in states or ():
            names.setdefault(s, len(names))
        if initial is not None:
            names.setdefault(initial, len(names))
        for src, inp, outp, dst in transitions:
            names.setdefault(src, len(names))
            names.setdefault(dst, len(names))
            in_alpha.intern(inp)
            out_alpha.intern(outp)
        k = len(in_alpha)
        succ = [[UNDEFINED] * k for _ in names]
        out = [[UNDEFINED] * k for _ in names]
        for src, inp, outp, dst in transitions:
            q, i = names[src], in_alpha.index(inp)
            if succ[q][i] != UNDEFINED:
                raise ValueError(f"duplicate transition for state {src!r} on input {inp!r}")
            succ[q][i] = names[dst]
            out[q][i] = out_alpha.index(outp)
        init = names[initial] if initial is not None else 0
        return cls(in_alpha, out_alpha, list(names), init, succ, out)

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    def step(self, q: int, i: int):
        s = self.succ[q][i]
        if s == UNDEFINED:
            return None
        return self.out[q][i], s

    def transitions(self):
        """Yield ``(q, i, o, q')`` for every defined transition."""
        for q, row in enumerate(self.succ):
            for i, s in enumerate(row):
                if s != UNDEFINED:
                    yield q, i, self.out[q][i], s

    def state_index(self, name: str) -> int:
        return self.state_names.index(name)

    def output_names(self, word: Sequence[int], start: int | None = None) -> tuple[str, ...]:
        res = transfer(self, self.initial if start is None else start, word)
        return self.outputs.decode(res.outputs)

    def reachable_states(self) -> list[int]:
        seen = [False] * self.num_states
        seen[self.initial] = True
        order = [self.initial]
        queue = deque(order)
        while queue:
            q = queue.popleft()
            for s in self.succ[q]:
                if s != UNDEFINED and not seen[s]:
                    seen[s] = True
                    order.append(s)
                    queue.append(s)
        return order

    def access_sequences(self) -> dict[int, tuple[int, ...]]:
        """Shortest (BFS, ascending inputs) access word for each reachable state."""
        acc = {self.initial: ()}
        queue = deque([self.initial])
        while queue:
            q = queue.popleft()
            for i, s in enumerate(self.succ[q]):
                if s != UNDEFINED and s not in acc:
                    acc[s] = acc[q] + (i,)
                    queue.append(s)
        return acc

    def __repr__(self):
        kind = "complete" if self.complete else "partial"
        return f"<MealyMachine {self.num_states} states, {len(self.inputs)} inputs, {kind}>"


def transfer(m: MealyMachine, start: int, word: Sequence[int]) -> TransferResult:
    """Run ``word`` from ``start``, stopping at the first undefined transition."""
    q = start
    outs = []
    succ, out = m.succ, m.out
    for i in word:
        s = succ[q][i]
        if s == UNDEFINED:
            break
        outs.append(out[q][i])
        q = s
    return TransferResult(tuple(outs), q, len(outs))


def _require_complete(*machines: MealyMachine):
    for m in machines:
        if not m.complete:
            raise PartialMachineError("operation requires a complete Mealy machine")


def _input_map(m1: MealyMachine, m2: MealyMachine) -> list[int]:
    if m1.inputs is m2.inputs or m1.inputs == m2.inputs:
        return list(range(len(m1.inputs)))
    if set(m1.inputs) != set(m2.inputs):
        raise ValueError("machines have different input alphabets")
    return [m2.inputs.index(name) for name in m1.inputs]


def _output_map(m1: MealyMachine, m2: MealyMachine):
    """Translate m1 output indices into m2 ones (None for names m2 never emits)."""
    if m1.outputs is m2.outputs:
        return list(range(len(m1.outputs)))
    return [m2.outputs.get(name) for name in m1.outputs]


def shortest_separating_word(m1: MealyMachine, q1: int, m2: MealyMachine, q2: int):
    """Shortest input word (m1 input indices) on which q1 and q2 disagree, or None.

    Breadth-first search over the product automaton; the set of visited
    pairs is a bisimulation when no word is found.
    """
    _require_complete(m1, m2)
    imap = _input_map(m1, m2)
    omap = _output_map(m1, m2)
    k = len(m1.inputs)
    parent: dict[tuple[int, int], tuple[tuple[int, int], int] | None] = {(q1, q2): None}
    queue = deque([(q1, q2)])

    def word_to(pair, last):
        word = [last]
        while parent[pair] is not None:
            pair, i = parent[pair]
            word.append(i)
        return tuple(reversed(word))

    while queue:
        pair = queue.popleft()
        a, b = pair
        for i in range(k):
            j = imap[i]
            if omap[m1.out[a][i]] != m2.out[b][j]:
                return word_to(pair, i)
            nxt = (m1.succ[a][i], m2.succ[b][j])
            if nxt not in parent:
                parent[nxt] = (pair, i)
                queue.append(nxt)
    return None


def semantics_equal(m1: MealyMachine, q1: int, m2: MealyMachine, q2: int, depth: int | None = None) -> bool:
    """True iff no word of length <= depth separates the two states.

    The default depth ``|Q1|*|Q2|`` bounds the product automaton, so the
    answer is then exact equivalence.
    """
    if depth is None:
        depth = m1.num_states * m2.num_states
    word = shortest_separating_word(m1, q1, m2, q2)
    return word is None or len(word) > depth


def find_counterexample(m1: MealyMachine, m2: MealyMachine):
    """Shortest word whose outputs differ between the two initial states, or None."""
    return shortest_separating_word(m1, m1.initial, m2, m2.initial)


def bisimilar(m1: MealyMachine, m2: MealyMachine) -> bool:
    return find_counterexample(m1, m2) is None


def minimize(m: MealyMachine) -> MealyMachine:
    """Merge equivalent states by partition refinement.

    Unreachable states are dropped. Blocks are numbered in BFS order from the
    initial state and named after their lowest-index member.
    """
    _require_complete(m)
    reach = m.reachable_states()
    block = {q: m.out[q] for q in reach}
    count = len(set(block.values()))
    while True:
        ids: dict = {}
        new_block = {}
        for q in reach:
            sig = (block[q], tuple(block[s] for s in m.succ[q]))
            new_block[q] = ids.setdefault(sig, len(ids))
        block = new_block
        if len(ids) == count:
            break
        count = len(ids)

    members: dict[int, list[int]] = {}
    for q in sorted(reach):
        members.setdefault(block[q], []).append(q)
    order: dict[int, int] = {}
    queue = deque([block[m.initial]])
    order[block[m.initial]] = 0
    while queue:
        b = queue.popleft()
        rep = members[b][0]
        for s in m.succ[rep]:
            if block[s] not in order:
                order[block[s]] = len(order)
                queue.append(block[s])
    reps = sorted(order, key=order.get)
    succ = [[order[block[s]] for s in m.succ[members[b][0]]] for b in reps]
    out = [list(m.out[members[b][0]]) for b in reps]
    names = [m.state_names[members[b][0]] for b in reps]
    return MealyMachine(m.inputs, m.outputs, names, 0, succ, out)


def random_machine(n: int, k: int, p: int, seed: int, max_attempts: int = 10_000) -> MealyMachine:
    """Seeded random complete, reachable, minimal machine with exactly n states.

    A random spanning tree from state 0 fixes reachability; the remaining
    transitions and all outputs are uniform. Non-minimal draws are rejected.
    """
    if n < 1 or k < 1 or p < 2:
        raise ValueError("need n >= 1, k >= 1, p >= 2")
    rng = random.Random(seed)
    inputs = Alphabet(f"i{j}" for j in range(k))
    outputs = Alphabet(f"o{j}" for j in range(p))
    names = [f"s{j}" for j in range(n)]
    for _ in range(max_attempts):
        succ = [[UNDEFINED] * k for _ in range(n)]
        open_slots = [(0, i) for i in range(k)]
        for q in range(1, n):
            slot = open_slots.pop(rng.randrange(len(open_slots)))
            succ[slot[0]][slot[1]] = q
            open_slots.extend((q, i) for i in range(k))
        for q, i in open_slots:
            succ[q][i] = rng.randrange(n)
        out = [[rng.randrange(p) for _ in range(k)] for _ in range(n)]
        m = MealyMachine(inputs, outputs, names, 0, succ, out)
        if minimize(m).num_states == n:
            return m
    raise GenerationError(f"no minimal {n}-state machine found in {max_attempts} attempts")
