"""Observation tree with basis/frontier bookkeeping and the apartness relation."""
from __future__ import annotations

from collections import deque
from typing import Iterable, NamedTuple, Sequence

from .dot import quote
from .mealy import UNDEFINED, Alphabet

ROOT = 0


class OutputConflict(Exception):
    """The teacher answered differently for a transition already in the tree."""

    def __init__(self, node: int, input: int, old: str, new: str):
        self.node, self.input, self.old, self.new = node, input, old, new
        super().__init__(f"node {node}, input {input}: tree has output {old!r}, teacher now says {new!r}")


class NotIsolated(Exception):
    pass


class NotInFrontier(ValueError):
    pass


class NormSnapshot(NamedTuple):
    sq: int
    sdef: int
    sapart: int

    @property
    def total(self) -> int:
        return self.sq + self.sdef + self.sapart


class FrontierStatus(NamedTuple):
    kind: str  # "isolated" | "identified" | "ambiguous"
    candidates: tuple[int, ...]


def norm_bound(n: int, k: int) -> int:
    """Upper bound on the norm for a tree of an n-class machine with k inputs."""
    return n * (n + 1) // 2 + k * n + (n - 1) * (k * n + 1)


class ObservationTree:
    """A tree-shaped partial Mealy machine that only ever grows.

    Node 0 is the root and starts out as the only basis state. Transitions are
    stored in flat arrays indexed by ``node * k + input``.

    Apartness facts are memoized per unordered pair. A positive fact stores the
    divergence point ``(node, input)`` in the subtree of the smaller node; the
    witness word is materialized on request. A negative fact stores the tree
    version at which it was checked and stays valid until one of the two
    subtrees grows.
    """

    def __init__(self, inputs: Alphabet | Sequence[str]):
        self.inputs = inputs if isinstance(inputs, Alphabet) else Alphabet(inputs)
        self.k = len(self.inputs)
        if not self.k:
            raise ValueError("input alphabet is empty")
        self.outputs = Alphabet()
        self._succ = [UNDEFINED] * self.k
        self._out = [UNDEFINED] * self.k
        self._parent = [UNDEFINED]
        self._parent_input = [UNDEFINED]
        self._stamp = [0]
        self._version = 0
        self.basis: list[int] = [ROOT]
        self._in_basis = [True]
        # frontier node -> basis nodes not yet known to be apart from it
        self._cands: dict[int, list[int]] = {}
        self._cands_version: dict[int, int] = {}
        self._apart: dict[tuple[int, int], tuple[int, int]] = {}
        self._not_apart: dict[tuple[int, int], int] = {}

    # -- structure -------------------------------------------------------

    def __len__(self):
        return len(self._parent)

    @property
    def version(self) -> int:
        return self._version

    def succ(self, q: int, i: int) -> int:
        return self._succ[q * self.k + i]

    def output(self, q: int, i: int) -> int:
        return self._out[q * self.k + i]

    def parent(self, q: int) -> int:
        return self._parent[q]

    def transitions_from(self, q: int):
        """Yield ``(input, output, child)`` for the defined transitions of q."""
        base = q * self.k
        for i in range(self.k):
            s = self._succ[base + i]
            if s != UNDEFINED:
                yield i, self._out[base + i], s

    def access(self, q: int) -> tuple[int, ...]:
        word = []
        while q != ROOT:
            word.append(self._parent_input[q])
            q = self._parent[q]
        return tuple(reversed(word))

    def run(self, word: Iterable[int], start: int = ROOT):
        """Node reached by ``word`` from ``start``, or None if it leaves the tree."""
        q, k, succ = start, self.k, self._succ
        for i in word:
            q = succ[q * k + i]
            if q == UNDEFINED:
                return None
        return q

    def outputs_along(self, word: Iterable[int], start: int = ROOT):
        """Output indices produced by ``word`` from ``start``, or None if undefined."""
        q, k = start, self.k
        outs = []
        for i in word:
            s = self._succ[q * k + i]
            if s == UNDEFINED:
                return None
            outs.append(self._out[q * k + i])
            q = s
        return tuple(outs)

    def _new_node(self, q: int, i: int, o: int) -> int:
        node = len(self._parent)
        self._parent.append(q)
        self._parent_input.append(i)
        self._stamp.append(self._version)
        self._in_basis.append(False)
        self._succ.extend([UNDEFINED] * self.k)
        self._out.extend([UNDEFINED] * self.k)
        self._succ[q * self.k + i] = node
        self._out[q * self.k + i] = o
        if self._in_basis[q]:
            self._cands[node] = list(self.basis)
            self._cands_version[node] = -1
        return node

    def extend(self, start: int, word: Sequence[int], outputs: Sequence[str]) -> int:
        """Record that ``word`` from ``start`` produced ``outputs``; return the end node."""
        if len(word) != len(outputs):
            raise ValueError(f"word has {len(word)} inputs but {len(outputs)} outputs were given")
        k = self.k
        q = start
        created = False
        for i, name in zip(word, outputs):
            o = self.outputs.intern(name)
            idx = q * k + i
            s = self._succ[idx]
            if s == UNDEFINED:
                s = self._new_node(q, i, o)
                created = True
            elif self._out[idx] != o:
                raise OutputConflict(q, i, self.outputs.name(self._out[idx]), name)
            q = s
        if created:
            self._version += 1
            v = self._version
            node = q
            while node != UNDEFINED:
                self._stamp[node] = v
                node = self._parent[node]
        return q

    # -- apartness -------------------------------------------------------

    def _walk(self, a: int, b: int):
        """Breadth-first simultaneous walk; returns the divergence ``(node, input)``
        in the subtree of ``a``, or None when a and b agree wherever both are defined."""
        k, succ, out = self.k, self._succ, self._out
        queue = deque([(a, b)])
        pop, push = queue.popleft, queue.append
        while queue:
            x, y = pop()
            bx, by = x * k, y * k
            for i in range(k):
                sx = succ[bx + i]
                if sx == UNDEFINED:
                    continue
                sy = succ[by + i]
                if sy == UNDEFINED:
                    continue
                if out[bx + i] != out[by + i]:
                    return x, i
                push((sx, sy))
        return None

    def _word_between(self, top: int, node: int, last: int) -> tuple[int, ...]:
        word = [last]
        while node != top:
            word.append(self._parent_input[node])
            node = self._parent[node]
        return tuple(reversed(word))

    def find_witness(self, q: int, p: int):
        """Witness for q # p computed from scratch, without touching the memo."""
        if q == p:
            return None
        found = self._walk(q, p)
        return None if found is None else self._word_between(q, *found)

    def _lookup(self, q: int, p: int):
        key = (q, p) if q < p else (p, q)
        hit = self._apart.get(key)
        if hit is not None:
            return key, hit
        checked = self._not_apart.get(key)
        if checked is not None and self._stamp[q] <= checked and self._stamp[p] <= checked:
            return key, None
        found = self._walk(*key)
        if found is None:
            self._not_apart[key] = self._version
        else:
            self._apart[key] = found
            self._not_apart.pop(key, None)
        return key, found

    def apart(self, q: int, p: int) -> bool:
        if q == p:
            return False
        return self._lookup(q, p)[1] is not None

    def is_apart(self, q: int, p: int):
        """Stored witness word for q # p, or None if they are not (yet) apart."""
        if q == p:
            return None
        key, found = self._lookup(q, p)
        if found is None:
            return None
        return self._word_between(key[0], *found)

    witness = is_apart

    def apart_pairs(self):
        """All memoized apartness facts as ``{(lo, hi): witness}``."""
        return {key: self._word_between(key[0], *hit) for key, hit in self._apart.items()}

    # -- basis and frontier ---------------------------------------------

    def in_basis(self, q: int) -> bool:
        return self._in_basis[q]

    def in_frontier(self, q: int) -> bool:
        return q in self._cands

    @property
    def frontier(self) -> list[int]:
        return sorted(self._cands)

    def candidates(self, q: int) -> tuple[int, ...]:
        """Basis states not apart from frontier node q, in promotion order."""
        cands = self._cands.get(q)
        if cands is None:
            raise NotInFrontier(f"node {q} is not in the frontier")
        if self._cands_version[q] != self._version:
            cands[:] = [b for b in cands if not self.apart(b, q)]
            self._cands_version[q] = self._version
        return tuple(cands)

    def frontier_status(self, q: int) -> FrontierStatus:
        cands = self.candidates(q)
        if not cands:
            return FrontierStatus("isolated", cands)
        if len(cands) == 1:
            return FrontierStatus("identified", cands)
        return FrontierStatus("ambiguous", cands)

    def promote(self, q: int) -> None:
        if q not in self._cands:
            raise NotInFrontier(f"node {q} is not in the frontier")
        if self.candidates(q):
            raise NotIsolated(f"node {q} is not apart from basis states {list(self._cands[q])}")
        del self._cands[q]
        del self._cands_version[q]
        self._in_basis[q] = True
        self.basis.append(q)
        for f, cands in self._cands.items():
            cands.append(q)
            self._cands_version[f] = -1
        for _, _, child in self.transitions_from(q):
            self._cands[child] = list(self.basis)
            self._cands_version[child] = -1

    def missing_basis_transitions(self):
        """Yield ``(q, i)`` with q in the basis and no i-transition, in basis order."""
        for q in self.basis:
            base = q * self.k
            for i in range(self.k):
                if self._succ[base + i] == UNDEFINED:
                    yield q, i

    def basis_complete(self) -> bool:
        return next(self.missing_basis_transitions(), None) is None

    def norm(self) -> NormSnapshot:
        s = len(self.basis)
        sdef = 0
        for q in self.basis:
            base = q * self.k
            sdef += sum(1 for i in range(self.k) if self._succ[base + i] != UNDEFINED)
        sapart = sum(s - len(self.candidates(f)) for f in list(self._cands))
        return NormSnapshot(s * (s + 1) // 2, sdef, sapart)

    # -- debugging -------------------------------------------------------

    def to_dot(self) -> str:
        lines = ["digraph tree {"]
        for q in range(len(self)):
            cls = "basis" if self._in_basis[q] else "frontier" if q in self._cands else None
            attr = f' class="{cls}"' if cls else ""
            lines.append(f'    "t{q}" [label="t{q}"{attr}];')
        for q in range(len(self)):
            for i, o, s in self.transitions_from(q):
                label = f"{self.inputs.name(i)}/{self.outputs.name(o)}"
                lines.append(f'    "t{q}" -> "t{s}" [label={quote(label)}];')
        lines.append("}")
        return "\n".join(lines) + "\n"
