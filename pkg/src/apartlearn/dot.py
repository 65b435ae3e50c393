"""Reading and writing Mealy machines in a small Graphviz DOT subset.

Accepted input is a ``digraph`` whose edges read ``src -> dst [label="in/out"]``.
The initial state is the target of an edge leaving a node whose name starts
with ``__start``; without one, the source of the first edge is used. Node
statements and graph attributes are accepted and ignored.
"""
from __future__ import annotations

import re
import warnings

from .mealy import UNDEFINED, Alphabet, MealyMachine


class DotError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DotSyntaxError(DotError):
    pass


class DuplicateTransitionError(DotError):
    pass


class UnreachableStateWarning(UserWarning):
    pass


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<hash>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<undirected>--)
  | (?P<string>"(?:\\.|[^"\\])*")
  | (?P<num>-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<id>[A-Za-z_\x80-\U0010ffff][A-Za-z_0-9\x80-\U0010ffff]*)
  | (?P<punct>[{}\[\];,=:])
""", re.VERBOSE | re.DOTALL)

_KEYWORDS = {"graph", "node", "edge", "digraph", "subgraph", "strict"}


def _tokenize(text: str):
    pos, line = 0, 1
    at_line_start = True
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DotSyntaxError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        value = m.group()
        if kind == "hash" and not at_line_start:
            raise DotSyntaxError("unexpected '#'", line)
        if kind == "string":
            tokens.append(("id", value[1:-1].replace('\\"', '"'), line, True))
        elif kind in ("num", "id"):
            tokens.append(("id", value, line, False))
        elif kind in ("arrow", "punct"):
            tokens.append((value, value, line, False))
        elif kind == "undirected":
            raise DotSyntaxError("undirected edge '--' in digraph", line)
        if kind == "nl":
            at_line_start = True
        elif kind != "ws":
            at_line_start = False
        line += value.count("\n")
        pos = m.end()
    tokens.append(("eof", None, line, False))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, offset=0):
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.next()
        if tok[0] != kind:
            found = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise DotSyntaxError(f"expected {what or kind!r}, found {found}", tok[2])
        return tok

    def is_keyword(self, tok, word):
        return tok[0] == "id" and not tok[3] and tok[1].lower() == word

    def attr_list(self):
        attrs = {}
        while self.peek()[0] == "[":
            self.next()
            while self.peek()[0] != "]":
                key = self.expect("id", "attribute name")[1]
                self.expect("=", "=")
                attrs[key] = self.expect("id", "attribute value")[1]
                if self.peek()[0] in (",", ";"):
                    self.next()
            self.next()
        return attrs

    def graph(self):
        """Return the list of ``(src, dst, attrs, line)`` edges."""
        if self.is_keyword(self.peek(), "strict"):
            self.next()
        head = self.next()
        if not self.is_keyword(head, "digraph"):
            raise DotSyntaxError("expected 'digraph'", head[2])
        if self.peek()[0] == "id":
            self.next()
        self.expect("{", "{")
        edges = []
        while True:
            tok = self.peek()
            if tok[0] == "}":
                self.next()
                break
            if tok[0] == ";":
                self.next()
                continue
            if tok[0] != "id":
                found = "end of input" if tok[0] == "eof" else repr(tok[1])
                raise DotSyntaxError(f"expected statement, found {found}", tok[2])
            if self.is_keyword(tok, "subgraph"):
                raise DotSyntaxError("subgraphs are not supported", tok[2])
            if not tok[3] and tok[1].lower() in ("graph", "node", "edge"):
                self.next()
                self.attr_list()
                continue
            self.next()
            if self.peek()[0] == "=":
                self.next()
                self.expect("id", "attribute value")
                continue
            if self.peek()[0] == ":":
                raise DotSyntaxError("ports are not supported", self.peek()[2])
            if self.peek()[0] == "->":
                self.next()
                dst = self.expect("id", "edge target")
                if self.peek()[0] == "->":
                    raise DotSyntaxError("chained edges are not supported", self.peek()[2])
                edges.append((tok[1], dst[1], self.attr_list(), tok[2]))
            else:
                self.attr_list()
        if self.peek()[0] != "eof":
            raise DotSyntaxError("trailing content after graph", self.peek()[2])
        return edges


def parse_dot(text: str) -> MealyMachine:
    edges = _Parser(text).graph()
    initial = None
    transitions = []
    for src, dst, attrs, line in edges:
        if src.startswith("__start"):
            if initial is None:
                initial = dst
            continue
        label = attrs.get("label")
        if label is None:
            raise DotSyntaxError(f"edge {src} -> {dst} has no label", line)
        if "/" not in label:
            raise DotSyntaxError(f"edge label {label!r} is not of the form 'input/output'", line)
        inp, outp = label.split("/", 1)
        transitions.append((src, inp.strip(), outp.strip(), dst, line))
    if not transitions:
        raise DotSyntaxError("no states")
    if initial is None:
        initial = transitions[0][0]

    names = {initial: 0}
    inputs, outputs = Alphabet(), Alphabet()
    for src, inp, outp, dst, _ in transitions:
        names.setdefault(src, len(names))
        names.setdefault(dst, len(names))
        inputs.intern(inp)
        outputs.intern(outp)
    k = len(inputs)
    succ = [[UNDEFINED] * k for _ in names]
    out = [[UNDEFINED] * k for _ in names]
    for src, inp, outp, dst, line in transitions:
        q, i = names[src], inputs.index(inp)
        if succ[q][i] != UNDEFINED:
            raise DuplicateTransitionError(f"state {src!r} has two transitions for input {inp!r}", line)
        succ[q][i] = names[dst]
        out[q][i] = outputs.index(outp)

    state_names = list(names)
    machine = MealyMachine(inputs, outputs, state_names, 0, succ, out)
    reachable = machine.reachable_states()
    if len(reachable) == len(state_names):
        return machine
    keep = sorted(reachable)
    dropped = [state_names[q] for q in range(len(state_names)) if q not in set(keep)]
    warnings.warn(f"dropping unreachable states: {', '.join(dropped)}", UnreachableStateWarning, stacklevel=2)
    renum = {q: j for j, q in enumerate(keep)}
    return MealyMachine(
        inputs, outputs, [state_names[q] for q in keep], renum[0],
        [[renum.get(s, UNDEFINED) for s in succ[q]] for q in keep],
        [out[q] for q in keep],
    )


def quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def render_dot(m: MealyMachine, name: str = "g") -> str:
    for inp in m.inputs:
        if "/" in inp:
            raise ValueError(f"input name {inp!r} contains '/' and cannot be written as a DOT label")
    lines = [f"digraph {name} {{", '    __start0 [label="" shape="none"];']
    for q in m.state_names:
        lines.append(f'    {quote(q)} [shape="circle" label={quote(q)}];')
    for q, i, o, s in m.transitions():
        label = f"{m.inputs.name(i)}/{m.outputs.name(o)}"
        lines.append(f"    {quote(m.state_names[q])} -> {quote(m.state_names[s])} [label={quote(label)}];")
    lines.append(f"    __start0 -> {quote(m.state_names[m.initial])};")
    lines.append("}")
    return "\n".join(lines) + "\n"
