"""The L# learner.

The learner grows an observation tree until its basis covers every state of
the hidden machine. Four rules drive it:

* R1 promotes an isolated frontier node into the basis,
* R2 explores a missing basis transition,
* R3 separates a frontier node from one of its remaining basis candidates,
* R4 builds a hypothesis, checks it against the tree and then the teacher,
  and turns any counterexample into a new apartness fact.

Every rule application strictly increases the tree norm, which is checked
while running.
"""
from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .ads import AdsNode, build_ads
from .mealy import Alphabet, MealyMachine
from .obstree import ROOT, ObservationTree, OutputConflict

PLAIN, ADS = "plain", "ads"
STRATEGIC, ANY_ORDER = "strategic", "any"


class TeacherInconsistent(Exception):
    pass


class BudgetExceeded(Exception):
    pass


class IsolatedFrontier(Exception):
    pass


class NoConflict(Exception):
    pass


class NormDidNotIncrease(AssertionError):
    pass


@dataclass
class Hypothesis:
    machine: MealyMachine
    # hypothesis state j is tree node basis[j]
    basis: tuple[int, ...]
    choice: dict[int, int]

    def node_after(self, word: Sequence[int]) -> int:
        succ = self.machine.succ
        q = self.machine.initial
        for i in word:
            q = succ[q][i]
        return self.basis[q]


def build_hypothesis(tree: ObservationTree, choose: Callable[[int, tuple[int, ...]], int] | None = None) -> Hypothesis:
    """Fold every frontier node onto a basis state it is not apart from.

    By default the first candidate (lowest basis index) is chosen; ``choose``
    may override that for nodes with several candidates.
    """
    basis = tuple(tree.basis)
    index = {q: j for j, q in enumerate(basis)}
    choice: dict[int, int] = {}
    succ, out = [], []
    for q in basis:
        row_s, row_o = [], []
        for i in range(tree.k):
            s = tree.succ(q, i)
            if s < 0:
                raise ValueError(f"basis state {q} has no transition for input {i}")
            if s not in index:
                cands = tree.candidates(s)
                if not cands:
                    raise IsolatedFrontier(f"frontier node {s} is isolated")
                target = cands[0] if choose is None or len(cands) == 1 else choose(s, cands)
                choice[s] = target
                s = target
            row_s.append(index[s])
            row_o.append(tree.output(q, i))
        succ.append(row_s)
        out.append(row_o)
    machine = MealyMachine(tree.inputs, tree.outputs.copy(), [f"t{q}" for q in basis], 0, succ, out)
    return Hypothesis(machine, basis, choice)


def check_consistency(tree: ObservationTree, hyp: Hypothesis):
    """None if the tree maps into the hypothesis, else an access word leading to a conflict.

    Breadth-first search over pairs (tree node, hypothesis state).
    """
    hsucc = hyp.machine.succ
    queue = deque([(ROOT, hyp.machine.initial)])
    while queue:
        q, r = queue.popleft()
        if tree.find_witness(q, hyp.basis[r]) is not None:
            return tree.access(q)
        for i, _, p in tree.transitions_from(q):
            queue.append((p, hsucc[r][i]))
    return None


def shortest_conflict_prefix(tree: ObservationTree, hyp: Hypothesis, rho: Sequence[int]) -> tuple[int, ...]:
    """Shortest prefix of rho whose tree and hypothesis end states are apart."""
    node, r = ROOT, hyp.machine.initial
    hsucc = hyp.machine.succ
    for j in range(len(rho) + 1):
        if tree.find_witness(node, hyp.basis[r]) is not None:
            return tuple(rho[:j])
        if j == len(rho):
            break
        node = tree.succ(node, rho[j])
        if node < 0:
            raise NoConflict(f"counterexample leaves the tree after {j} symbols")
        r = hsucc[r][rho[j]]
    raise NoConflict("no prefix of the counterexample leads to a conflict")


@dataclass
class RunReport:
    hypothesis: MealyMachine
    rule_applications: Counter = field(default_factory=Counter)
    output_queries: int = 0
    input_symbols: int = 0
    eq_queries: int = 0
    consistency_conflicts: int = 0
    # longest conflict word handed to counterexample processing
    m_max: int = 0
    approximate: bool = False
    norm_trace: list[int] = field(default_factory=list)

    @property
    def failed_eq_queries(self) -> int:
        return max(self.eq_queries - 1, 0)


class Learner:
    def __init__(self, teacher, inputs: Alphabet | Sequence[str] | None = None, variant: str = PLAIN,
                 policy: str = STRATEGIC, seed: int = 0, max_output_queries: int | None = None,
                 event_sink: Callable[[dict], None] | None = None, check_norm: bool = True):
        if variant not in (PLAIN, ADS):
            raise ValueError(f"unknown variant {variant!r}")
        if policy not in (STRATEGIC, ANY_ORDER):
            raise ValueError(f"unknown policy {policy!r}")
        alphabet = teacher.inputs if inputs is None else inputs
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(alphabet)
        if alphabet != teacher.inputs:
            raise ValueError("learner alphabet must match the teacher's input alphabet")
        self.teacher = teacher
        self.tree = ObservationTree(alphabet)
        self.variant = variant
        self.policy = policy
        self.rng = random.Random(seed)
        self.max_output_queries = max_output_queries
        self.event_sink = event_sink
        self.check_norm = check_norm
        self.output_queries = 0
        self.input_symbols = 0
        self.eq_queries = 0
        self.consistency_conflicts = 0
        self.m_max = 0
        self.rule_applications: Counter = Counter()
        self.norm_trace: list[int] = []

    # -- queries ---------------------------------------------------------

    def _charge(self, symbols: int) -> None:
        if self.max_output_queries is not None and self.output_queries >= self.max_output_queries:
            raise BudgetExceeded(f"output query budget of {self.max_output_queries} exhausted")
        self.output_queries += 1
        self.input_symbols += symbols

    def _record(self, word, outputs) -> int:
        try:
            return self.tree.extend(ROOT, word, outputs)
        except OutputConflict as exc:
            raise TeacherInconsistent(str(exc)) from exc

    def output_query(self, word: Sequence[int]) -> tuple[str, ...]:
        word = tuple(word)
        self._charge(len(word))
        outputs = tuple(self.teacher.output_query(word))
        self._record(word, outputs)
        return outputs

    def adaptive_query(self, prefix: Sequence[int], ads: AdsNode):
        """One reset, the prefix, then follow the ADS on the outputs actually seen.

        Stops at a leaf or at an output the ADS has no branch for. Returns the
        executed ``(inputs, outputs)``.
        """
        if self.max_output_queries is not None and self.output_queries >= self.max_output_queries:
            raise BudgetExceeded(f"output query budget of {self.max_output_queries} exhausted")
        teacher = self.teacher
        teacher.reset()
        word = list(prefix)
        outputs = [teacher.step(i) for i in word]
        node = ads
        lookup = self.tree.outputs.get
        while node.input is not None:
            word.append(node.input)
            o = teacher.step(node.input)
            outputs.append(o)
            node = node.children.get(lookup(o, -1))
            if node is None:
                break
        self.output_queries += 1
        self.input_symbols += len(word)
        self._record(word, outputs)
        return tuple(word), tuple(outputs)

    # -- rules -----------------------------------------------------------

    def _isolated(self):
        tree = self.tree
        return [f for f in tree.frontier if not tree.candidates(f)]

    def _ambiguous(self):
        tree = self.tree
        return [f for f in tree.frontier if len(tree.candidates(f)) > 1]

    def rule_r1(self) -> bool:
        isolated = self._isolated()
        if not isolated:
            return False
        self.tree.promote(isolated[0])
        return True

    def rule_r2(self) -> bool:
        tree = self.tree
        missing = next(tree.missing_basis_transitions(), None)
        if missing is None:
            return False
        q, i = missing
        prefix = tree.access(q) + (i,)
        if self.variant == ADS:
            self.adaptive_query(prefix, build_ads(tree, tree.basis))
        else:
            self.output_query(prefix)
        return True

    def rule_r3(self) -> bool:
        tree = self.tree
        ambiguous = self._ambiguous()
        if not ambiguous:
            return False
        q = ambiguous[0]
        cands = tree.candidates(q)
        if self.variant == ADS:
            self.adaptive_query(tree.access(q), build_ads(tree, cands))
            after = tree.candidates(q)
            if len(after) < len(cands):
                return True
            cands = after
        r, r2 = cands[0], cands[1]
        self.output_query(tree.access(q) + tree.witness(r, r2))
        return True

    def rule_r4(self):
        """Returns the accepted hypothesis, or None after processing a counterexample."""
        tree = self.tree
        hyp = build_hypothesis(tree)
        sigma = check_consistency(tree, hyp)
        if sigma is None:
            self.eq_queries += 1
            rho = self.teacher.equivalence_query(hyp.machine)
            if rho is None:
                return hyp
            self.m_max = max(self.m_max, len(rho))
            self.output_query(rho)
            sigma = shortest_conflict_prefix(tree, hyp, rho)
        else:
            self.consistency_conflicts += 1
            self.m_max = max(self.m_max, len(sigma))
        self.process_counterexample(hyp, sigma)
        return None

    def process_counterexample(self, hyp: Hypothesis, sigma: Sequence[int]) -> None:
        """Binary search on a conflict word until the conflict sits on the frontier."""
        tree = self.tree
        sigma = tuple(sigma)
        while True:
            q = hyp.node_after(sigma)
            r = tree.run(sigma)
            if r is None:
                raise ValueError("conflict word is not in the observation tree")
            if tree.in_basis(r) or tree.in_frontier(r):
                return
            node, rho_len = ROOT, 0
            while tree.in_basis(node):
                node = tree.succ(node, sigma[rho_len])
                rho_len += 1
            h = (rho_len + len(sigma)) // 2
            sigma1, sigma2 = sigma[:h], sigma[h:]
            q1 = hyp.node_after(sigma1)
            r1 = tree.run(sigma1)
            eta = tree.witness(q, r)
            if eta is None:
                raise NoConflict(f"{sigma} does not lead to a conflict")
            self.output_query(tree.access(q1) + sigma2 + eta)
            if tree.apart(q1, r1):
                sigma = sigma1
            else:
                sigma = tree.access(q1) + sigma2

    # -- main loop -------------------------------------------------------

    def _applicable(self):
        tree = self.tree
        rules = []
        if self._isolated():
            rules.append("R1")
        elif tree.basis_complete():
            rules.append("R4")
        if not tree.basis_complete():
            rules.append("R2")
        if self._ambiguous():
            rules.append("R3")
        return rules

    def _step(self):
        """Apply one rule; return (rule name, accepted hypothesis or None)."""
        if self.policy == ANY_ORDER:
            rule = self.rng.choice(self._applicable())
            if rule == "R4":
                return rule, self.rule_r4()
            getattr(self, f"rule_{rule.lower()}")()
            return rule, None
        if self.rule_r1():
            return "R1", None
        if self.rule_r3():
            return "R3", None
        if self.rule_r2():
            return "R2", None
        return "R4", self.rule_r4()

    def run(self) -> RunReport:
        norm = self.tree.norm().total
        self.norm_trace = [norm]
        while True:
            queries, symbols = self.output_queries, self.input_symbols
            rule, accepted = self._step()
            if accepted is not None:
                self.rule_applications[rule] += 1
                break
            self.rule_applications[rule] += 1
            if self.check_norm or self.event_sink is not None:
                after = self.tree.norm().total
                if self.check_norm and after <= norm:
                    raise NormDidNotIncrease(f"{rule} left the norm at {after} (was {norm})")
                if self.event_sink is not None:
                    self.event_sink({"rule": rule, "norm_before": norm, "norm_after": after,
                                     "resets": self.output_queries - queries,
                                     "symbols": self.input_symbols - symbols})
                norm = after
                self.norm_trace.append(norm)
        return RunReport(
            hypothesis=accepted.machine,
            rule_applications=self.rule_applications,
            output_queries=self.output_queries,
            input_symbols=self.input_symbols,
            eq_queries=self.eq_queries,
            consistency_conflicts=self.consistency_conflicts,
            m_max=self.m_max,
            approximate=bool(getattr(self.teacher, "approximate", False)),
            norm_trace=self.norm_trace,
        )


def run(teacher, inputs=None, variant: str = PLAIN, policy: str = STRATEGIC, seed: int = 0, **kwargs) -> RunReport:
    return Learner(teacher, inputs, variant=variant, policy=policy, seed=seed, **kwargs).run()
