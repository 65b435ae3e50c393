"""Simulated teacher: a hidden machine behind reset/step, plus equivalence oracles."""
from __future__ import annotations

import logging
import random
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Sequence

from .mealy import MealyMachine, find_counterexample, shortest_separating_word, transfer

log = logging.getLogger(__name__)

EXACT = "exact"
RANDOM_WALK = "randomwalk"


class SulSession:
    """Reset/step access to a hidden complete machine, with cost counters.

    Counters are kept separately for the learning phase and the testing phase
    (equivalence checking); ``testing()`` switches phase for a block.
    """

    def __init__(self, machine: MealyMachine):
        if not machine.complete:
            raise ValueError("the system under learning must be a complete machine")
        self.machine = machine
        self.current = machine.initial
        self.phase = "learn"
        self.learn_resets = self.learn_symbols = 0
        self.test_resets = self.test_symbols = 0

    @property
    def inputs(self):
        return self.machine.inputs

    def reset(self) -> None:
        self.current = self.machine.initial
        if self.phase == "learn":
            self.learn_resets += 1
        else:
            self.test_resets += 1

    def step(self, i: int) -> str:
        m = self.machine
        o = m.out[self.current][i]
        self.current = m.succ[self.current][i]
        if self.phase == "learn":
            self.learn_symbols += 1
        else:
            self.test_symbols += 1
        return m.outputs.name(o)

    def output_query(self, word: Sequence[int]) -> tuple[str, ...]:
        self.reset()
        return tuple(self.step(i) for i in word)

    @contextmanager
    def testing(self):
        prev, self.phase = self.phase, "test"
        try:
            yield self
        finally:
            self.phase = prev


def output_query(sul: SulSession, word: Sequence[int]) -> tuple[str, ...]:
    return sul.output_query(word)


def step_session(sul: SulSession, i: int) -> str:
    return sul.step(i)


def reset_session(sul: SulSession) -> None:
    sul.reset()


@dataclass
class EqOracleConfig:
    kind: str = EXACT
    extra_states: int = 10
    infix_length: int = 10
    budget: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (EXACT, RANDOM_WALK):
            raise ValueError(f"unknown oracle kind {self.kind!r}")
        if self.budget < 1 or self.infix_length < 0 or self.extra_states < 0:
            raise ValueError("oracle budget must be positive and lengths non-negative")


def _differs(hyp: MealyMachine, sut: MealyMachine, word) -> bool:
    a = hyp.outputs.decode(transfer(hyp, hyp.initial, word).outputs)
    b = sut.outputs.decode(transfer(sut, sut.initial, word).outputs)
    return a != b


class _RandomTester:
    """Random conformance tests: access word, random infix, separating suffix."""

    def __init__(self, config: EqOracleConfig, sul: SulSession, hyp: MealyMachine, rng: random.Random):
        self.config, self.sul, self.hyp, self.rng = config, sul, hyp, rng
        self.access = hyp.access_sequences()
        self.states = sorted(self.access)
        self._sep: dict[tuple[int, int], tuple | None] = {}
        self.imap = [sul.inputs.index(name) for name in hyp.inputs]

    def separating(self, s: int, t: int):
        key = (s, t) if s < t else (t, s)
        if key not in self._sep:
            self._sep[key] = shortest_separating_word(self.hyp, key[0], self.hyp, key[1])
        return self._sep[key]

    def make_test(self) -> list[int]:
        rng, hyp = self.rng, self.hyp
        k = len(hyp.inputs)
        word = list(self.access[rng.choice(self.states)])
        word.extend(rng.randrange(k) for _ in range(rng.randint(0, self.config.infix_length)))
        end = transfer(hyp, hyp.initial, word).end
        if len(self.states) > 1:
            other = rng.choice([s for s in self.states if s != end] or self.states)
            suffix = self.separating(end, other)
            if suffix:
                word.extend(suffix)
        return word

    def run(self):
        hyp, sul, imap = self.hyp, self.sul, self.imap
        with sul.testing():
            for _ in range(self.config.budget):
                word = self.make_test()
                sul.reset()
                q = hyp.initial
                for j, i in enumerate(word):
                    got = sul.step(imap[i])
                    if hyp.outputs.name(hyp.out[q][i]) != got:
                        return tuple(word[: j + 1])
                    q = hyp.succ[q][i]
        return None


def equivalence_query(config: EqOracleConfig, sul: SulSession, hyp: MealyMachine,
                      rng: random.Random | None = None):
    """Return None when no difference is found, else a counterexample word.

    The exact oracle compares against the hidden machine directly and returns
    a shortest counterexample. The random-walk oracle gives up after
    ``config.budget`` passing tests, so None from it is only approximate.
    """
    if not hyp.complete:
        raise ValueError("hypothesis must be complete")
    if config.kind == EXACT:
        word = find_counterexample(hyp, sul.machine)
    else:
        if rng is None:
            rng = random.Random(config.seed)
        word = _RandomTester(config, sul, hyp, rng).run()
    if word is not None and not _differs(hyp, sul.machine, word):
        raise AssertionError(f"oracle produced a non-counterexample {word}")
    return word


class Teacher:
    """What the learner talks to: output queries, adaptive steps, equivalence queries."""

    def __init__(self, machine: MealyMachine, config: EqOracleConfig | None = None):
        self.sul = SulSession(machine)
        self.config = config or EqOracleConfig()
        self.rng = random.Random(self.config.seed)
        self.eq_queries = 0
        self.approximate = False

    @property
    def inputs(self):
        return self.sul.inputs

    def output_query(self, word: Sequence[int]) -> tuple[str, ...]:
        return self.sul.output_query(word)

    def reset(self) -> None:
        self.sul.reset()

    def step(self, i: int) -> str:
        return self.sul.step(i)

    def equivalence_query(self, hyp: MealyMachine):
        self.eq_queries += 1
        word = equivalence_query(self.config, self.sul, hyp, self.rng)
        if word is None and self.config.kind == RANDOM_WALK:
            self.approximate = True
            log.warning("random-walk oracle accepted after %d passing tests; acceptance is approximate",
                        self.config.budget)
        return word
