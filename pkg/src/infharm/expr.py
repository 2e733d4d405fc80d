"""A small expression language over chart coordinates.

Grammar (``^`` and ``**`` are right associative and bind tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are the coordinates ``x1 .. xd``, the constants ``pi`` and ``e``, and
the functions below.  Parsed expressions evaluate on plain floats, arrays
or :class:`~infharm.jets.Jet2` coordinates.
"""

from __future__ import annotations

import math
import re

import numpy as np

from . import jets
from .errors import ParseError, SingularPointError

FUNCTIONS = {
    "sin": (1, jets.sin),
    "cos": (1, jets.cos),
    "exp": (1, jets.exp),
    "log": (1, jets.log),
    "sqrt": (1, jets.sqrt),
    "atan": (1, jets.atan),
    "atan2": (2, jets.atan2),
    "pow": (2, None),
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def tokenize(text):
    """List of (kind, text, column) with 1-based columns; ends with an 'end' token."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(f"unexpected character {text[col - 1]!r}", column=col)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


def _power(a, b):
    if isinstance(b, jets.Jet2):
        return jets.exp(b * jets.log(a))
    if np.ndim(b) == 0:
        return jets.pow_const(a, float(b))
    return np.power(a, b)


def _divide(a, b):
    if not isinstance(b, jets.Jet2) and np.any(np.asarray(b) == 0.0):
        raise SingularPointError("division by zero")
    return a / b


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _divide,
    "^": _power,
}


class Expression:
    """Parsed expression; call with a list of coordinates."""

    def __init__(self, text, tree, dim):
        self.text = text
        self.tree = tree
        self.dim = dim

    def __repr__(self):
        return f"Expression({self.text!r})"

    @property
    def variables(self):
        out = set()
        _collect(self.tree, out)
        return sorted(out)

    def __call__(self, X):
        return _eval(self.tree, X)


def _collect(node, out):
    kind = node[0]
    if kind == "var":
        out.add(node[1])
    elif kind == "neg":
        _collect(node[1], out)
    elif kind == "bin":
        _collect(node[2], out)
        _collect(node[3], out)
    elif kind == "call":
        for arg in node[2]:
            _collect(arg, out)


def _eval(node, X):
    kind = node[0]
    if kind == "num":
        return node[1]
    if kind == "var":
        return X[node[1]]
    if kind == "neg":
        return -_eval(node[1], X)
    if kind == "bin":
        return _BINARY[node[1]](_eval(node[2], X), _eval(node[3], X))
    name, args = node[1], [_eval(a, X) for a in node[2]]
    if name == "pow":
        return _power(*args)
    return FUNCTIONS[name][1](*args)


class _Parser:
    def __init__(self, text, dim):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, column=tok[2])

    def expect(self, text):
        tok = self.take()
        if tok[1] != text or tok[0] == "end":
            self.fail(f"expected {text!r}" + (f", found {tok[1]!r}" if tok[1] else " at end of input"), tok)

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("-", "+"):
            self.take()
            inner = self.unary()
            return ("neg", inner) if tok[1] == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] in ("^", "**"):
            self.take()
            return ("bin", "^", base, self.unary())
        return base

    def atom(self):
        tok = self.take()
        kind, text, col = tok
        if kind == "num":
            return ("num", float(text))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                return self.call(tok)
            if text in CONSTANTS:
                return ("num", CONSTANTS[text])
            m = re.fullmatch(r"x([1-9][0-9]*)", text)
            if m:
                idx = int(m.group(1))
                if idx > self.dim:
                    self.fail(f"coordinate {text} out of range for dimension {self.dim}", tok)
                return ("var", idx - 1)
            if text in FUNCTIONS:
                self.fail(f"function {text!r} needs arguments", tok)
            self.fail(f"unknown identifier {text!r}", tok)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {text!r}", tok)

    def call(self, tok):
        name = tok[1]
        if name not in FUNCTIONS:
            self.fail(f"unknown function {name!r}", tok)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name][0]
        if len(args) != arity:
            self.fail(f"{name} takes {arity} argument(s), got {len(args)}", tok)
        return ("call", name, args)


def parse(text, dim):
    """Parse ``text`` as an expression over coordinates ``x1 .. x{dim}``."""
    if not isinstance(text, str):
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            text = repr(float(text))
        else:
            raise ParseError(f"expected an expression string, got {type(text).__name__}")
    if text.strip() == "":
        raise ParseError("empty expression", column=1)
    return Expression(text, _Parser(text, dim).parse(), dim)
