import random
import warnings

import pytest

from apartlearn.dot import (
    DotSyntaxError, DuplicateTransitionError, UnreachableStateWarning, parse_dot, render_dot,
)
from apartlearn.mealy import bisimilar, random_machine

ABC_DOT = """
digraph abc {
    __start0 [label="" shape="none"];
    q0 [shape="circle"];
    // comment
    q0 -> q0 [label="a/A"];
    q0 -> q1 [label="b/B"];
    q1 -> q0 [label="a/A"];
    q1 -> q2 [label="b/B"];
    q2 -> q1 [label="a/C"];
    q2 -> q2 [label="b/B"];
    __start0 -> q0;
}
"""


def test_abc_matches_programmatic(abc_machine):
    m = parse_dot(ABC_DOT)
    assert m.num_states == 3 and m.complete
    assert bisimilar(m, abc_machine)


def test_initial_from_start_edge():
    m = parse_dot('digraph g { a -> b [label="x/1"]; b -> a [label="x/2"]; __start0 -> b; }')
    assert m.state_names[m.initial] == "b"


def test_initial_defaults_to_first_source():
    m = parse_dot('digraph g { b -> a [label="x/1"]; a -> b [label="x/2"]; }')
    assert m.state_names[m.initial] == "b"


def test_label_split_at_first_slash_and_trimmed():
    m = parse_dot('digraph g { s -> s [label=" in / out/more "]; }')
    assert m.inputs.names == ("in",)
    assert m.outputs.names == ("out/more",)


def test_empty_graph():
    with pytest.raises(DotSyntaxError, match="no states"):
        parse_dot("digraph g { }")


def test_label_without_slash():
    with pytest.raises(DotSyntaxError) as info:
        parse_dot('digraph g {\n  s -> s [label="ab"];\n}')
    assert info.value.line == 2


def test_syntax_error_has_line():
    with pytest.raises(DotSyntaxError) as info:
        parse_dot('digraph g {\n\n s -> [label="a/b"];\n}')
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_duplicate_transition():
    text = 'digraph g {\n s -> s [label="a/1"];\n s -> t [label="a/2"];\n t -> s [label="a/1"];\n}'
    with pytest.raises(DuplicateTransitionError) as info:
        parse_dot(text)
    assert info.value.line == 3


def test_unreachable_states_dropped_with_warning():
    text = 'digraph g { s -> s [label="a/1"]; u -> s [label="a/2"]; }'
    with pytest.warns(UnreachableStateWarning, match="u"):
        m = parse_dot(text)
    assert m.state_names == ("s",)


def test_quoted_names_and_escapes():
    text = 'digraph "g" { "state \\"1\\"" -> "state \\"1\\"" [label="go/ok"]; }'
    m = parse_dot(text)
    assert m.state_names == ('state "1"',)


def test_undirected_edge_rejected():
    with pytest.raises(DotSyntaxError):
        parse_dot('digraph g { a -- b [label="x/y"]; }')


def test_round_trip_random():
    for seed in range(20):
        m = random_machine(random.Random(seed).randint(1, 12), 3, 3, seed)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            back = parse_dot(render_dot(m))
        assert sorted(back.state_names) == sorted(m.state_names)
        iso = [back.state_index(name) for name in m.state_names]
        assert iso[m.initial] == back.initial
        for q, i, o, s in m.transitions():
            assert back.succ[iso[q]][i] == iso[s]
            assert back.outputs.name(back.out[iso[q]][i]) == m.outputs.name(o)
        assert bisimilar(back, m)


def test_render_rejects_slash_in_input(abc_machine):
    m = parse_dot('digraph g { s -> s [label="a b/c"]; }')
    assert render_dot(m)
    from apartlearn.mealy import Alphabet, MealyMachine
    bad = MealyMachine(Alphabet(["x/y"]), Alphabet(["o"]), ["s"], 0, [[0]], [[0]])
    with pytest.raises(ValueError):
        render_dot(bad)
