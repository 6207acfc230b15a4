"""Small arithmetic expression language for coefficient and right-hand-side functions.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Evaluation is vectorized over numpy arrays.
"""

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import EvaluationError, InvalidInputError

__all__ = [
    "ExpressionError",
    "ExprSyntaxError",
    "Num",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "parse_expression",
    "to_source",
    "evaluate",
    "differentiate",
    "compile_expression",
    "FUNCTIONS",
    "CONSTANTS",
]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExpressionError(InvalidInputError):
    def __init__(self, message, line=None, column=None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class ExprSyntaxError(ExpressionError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    pos: tuple = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: tuple = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"
    pos: tuple = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"
    pos: tuple = field(default=(1, 1), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    pos: tuple = field(default=(1, 1), compare=False, repr=False)


Node = Union[Num, Var, Unary, Binary, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = variables

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", t.line, t.col)
        return self.advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "eof":
            t = self.tok
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            t = self.advance()
            node = Binary(t.text, node, self.term(), pos=(t.line, t.col))
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            t = self.advance()
            node = Binary(t.text, node, self.unary(), pos=(t.line, t.col))
        return node

    def unary(self):
        if self.tok.text in ("-", "+"):
            t = self.advance()
            return Unary(t.text, self.unary(), pos=(t.line, t.col))
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.text == "^":
            t = self.advance()
            return Binary("^", base, self.unary(), pos=(t.line, t.col))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text), pos=(t.line, t.col))
        if t.kind == "name":
            self.advance()
            if self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ExpressionError(f"unknown function {t.text!r}", t.line, t.col)
                self.advance()
                arg = self.expr()
                if self.tok.text == ",":
                    c = self.tok
                    raise ExpressionError(f"{t.text} takes exactly one argument", c.line, c.col)
                self.expect(")")
                return Call(t.text, arg, pos=(t.line, t.col))
            if t.text in FUNCTIONS:
                raise ExpressionError(f"function {t.text!r} needs an argument", t.line, t.col)
            if t.text not in CONSTANTS and t.text not in self.variables:
                raise ExpressionError(f"unknown identifier {t.text!r}", t.line, t.col)
            return Var(t.text, pos=(t.line, t.col))
        if t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ExprSyntaxError(f"unexpected {found}", t.line, t.col)


def parse_expression(text, variables=("x", "v", "u")):
    """Parse ``text``; identifiers other than ``variables``, ``pi`` and ``e`` are rejected."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 1, 1)
    return _Parser(text, frozenset(variables)).parse()


def to_source(node):
    """Fully parenthesized source text; ``parse_expression(to_source(t)) == t``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"({node.op}{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _fail(node, message):
    line, col = node.pos
    raise EvaluationError(f"{message} at line {line}, column {col}")


def evaluate(node, env):
    """Evaluate ``node`` with variable values from ``env`` (scalars or arrays)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name in env:
            return env[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        _fail(node, f"no value for {node.name!r}")
    if isinstance(node, Unary):
        val = evaluate(node.operand, env)
        return -val if node.op == "-" else val
    if isinstance(node, Binary):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if np.any(np.asarray(b) == 0):
                _fail(node, "division by zero")
            return np.divide(a, b)
        with np.errstate(all="ignore"):
            out = np.power(np.asarray(a, dtype=float), b)
        if not np.all(np.isfinite(out)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b)):
            _fail(node, "power is undefined for these operands")
        return out
    if isinstance(node, Call):
        a = evaluate(node.arg, env)
        arr = np.asarray(a)
        if node.func == "log" and np.any(arr <= 0):
            _fail(node, "log of a non-positive number")
        if node.func == "sqrt" and np.any(arr < 0):
            _fail(node, "sqrt of a negative number")
        return FUNCTIONS[node.func](a)
    raise TypeError(f"not an expression node: {node!r}")


def _depends_on(node, var):
    if isinstance(node, Var):
        return node.name == var
    if isinstance(node, Num):
        return False
    if isinstance(node, Unary):
        return _depends_on(node.operand, var)
    if isinstance(node, Binary):
        return _depends_on(node.left, var) or _depends_on(node.right, var)
    return _depends_on(node.arg, var)


def _is_num(node, value):
    return isinstance(node, Num) and node.value == value


def _add(a, b):
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return Binary("+", a, b)


def _sub(a, b):
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return Unary("-", b)
    return Binary("-", a, b)


def _mul(a, b):
    if _is_num(a, 0) or _is_num(b, 0):
        return Num(0.0)
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return Binary("*", a, b)


def _div(a, b):
    if _is_num(a, 0):
        return Num(0.0)
    return Binary("/", a, b)


def differentiate(node, var):
    """Symbolic partial derivative of ``node`` with respect to ``var``."""
    if not _depends_on(node, var):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Unary):
        d = differentiate(node.operand, var)
        return Unary("-", d) if node.op == "-" else d
    if isinstance(node, Binary):
        a, b = node.left, node.right
        da, db = differentiate(a, var), differentiate(b, var)
        if node.op == "+":
            return _add(da, db)
        if node.op == "-":
            return _sub(da, db)
        if node.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if node.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), Binary("^", b, Num(2.0)))
        # power
        if not _depends_on(b, var):
            return _mul(_mul(b, Binary("^", a, _sub(b, Num(1.0)))), da)
        return _mul(node, _add(_mul(db, Call("log", a)), _div(_mul(b, da), a)))
    if isinstance(node, Call):
        a = node.arg
        da = differentiate(a, var)
        outer = {
            "sin": lambda: Call("cos", a),
            "cos": lambda: Unary("-", Call("sin", a)),
            "tan": lambda: _div(Num(1.0), Binary("^", Call("cos", a), Num(2.0))),
            "exp": lambda: node,
            "log": lambda: _div(Num(1.0), a),
            "sqrt": lambda: _div(Num(0.5), node),
            "abs": lambda: _div(a, node),
        }[node.func]()
        return _mul(outer, da)
    raise TypeError(f"not an expression node: {node!r}")


def compile_expression(text_or_node, args=("x",)):
    """Return a vectorized Python callable ``fn(*args)`` for an expression."""
    node = text_or_node
    if isinstance(text_or_node, str):
        node = parse_expression(text_or_node, variables=args)

    def fn(*values):
        env = dict(zip(args, values))
        out = evaluate(node, env)
        shape = np.broadcast(*[np.asarray(v) for v in values]).shape if values else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape) + 0.0

    fn.node = node
    fn.source = to_source(node)
    return fn
