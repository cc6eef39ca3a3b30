"""Arithmetic expressions for density potentials.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Names are parameter variables ``x1, x2, ...``, sample variables ``w1`` and
``w2`` (the second factor of a product space), and the constants ``pi`` and
``e``.  On a finite space ``w1`` is the 1-based atom index.

Evaluation is vectorized over sample points with numpy.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InfoGeomError


class ExprError(InfoGeomError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprError):
    pass


class ArityError(ExprError):
    pass


class DomainError(ExprError, ArithmeticError):
    pass


class NonFinite(ExprError, ArithmeticError):
    pass


FUNCTIONS = {"exp": 1, "log": 1, "sqrt": 1, "cosh": 1, "abs": 1, "pow": 2}
CONSTANTS = {"pi": math.pi, "e": math.e}
_VAR = re.compile(r"^([xw])([1-9][0-9]*)$")

PREC_ADD, PREC_MUL, PREC_UNARY, PREC_POW, PREC_ATOM = 1, 2, 3, 4, 5


# ---------------------------------------------------------------------------
# Tree
# ---------------------------------------------------------------------------


class Expression:
    prec = PREC_ATOM

    def __str__(self):
        return self.to_text()

    def to_text(self) -> str:
        raise NotImplementedError

    def children(self):
        return ()

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def param_dim(self) -> int:
        return max((v.index for v in self.walk() if isinstance(v, Var) and v.kind == "x"), default=0)

    def sample_dim(self) -> int:
        return max((v.index for v in self.walk() if isinstance(v, Var) and v.kind == "w"), default=0)


def _wrap(node, min_prec):
    text = node.to_text()
    return f"({text})" if node.prec < min_prec else text


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class Num(Expression):
    value: float

    def to_text(self):
        return _fmt_number(self.value)


@dataclass(frozen=True)
class Var(Expression):
    kind: str
    index: int

    def to_text(self):
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class Const(Expression):
    name: str

    def to_text(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression
    prec = PREC_UNARY

    def to_text(self):
        return "-" + _wrap(self.arg, PREC_UNARY)

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    @property
    def prec(self):
        return {"+": PREC_ADD, "-": PREC_ADD, "*": PREC_MUL, "/": PREC_MUL, "^": PREC_POW}[self.op]

    def to_text(self):
        p = self.prec
        if self.op == "^":
            return f"{_wrap(self.left, PREC_ATOM)}^{_wrap(self.right, PREC_UNARY)}"
        sep = f" {self.op} " if p == PREC_ADD else self.op
        return f"{_wrap(self.left, p)}{sep}{_wrap(self.right, p + 1)}"

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Expression):
    name: str
    args: tuple

    def to_text(self):
        return f"{self.name}({', '.join(a.to_text() for a in self.args)})"

    def children(self):
        return self.args


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))")


def _tokenize(text):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, param_dim=None, sample_dim=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.param_dim = param_dim
        self.sample_dim = sample_dim

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if val != value or kind == "end":
            raise ExprSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.next()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[:2] == ("op", "("):
                return self.call(val, pos)
            return self.name(val, pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", pos)

    def call(self, name, pos):
        if name not in FUNCTIONS:
            raise UnknownIdentifier(f"unknown function {name!r} at offset {pos}")
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.next()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)} (offset {pos})")
        return Call(name, tuple(args))

    def name(self, val, pos):
        if val in CONSTANTS:
            return Const(val)
        if val in FUNCTIONS:
            raise ArityError(f"function {val!r} used without arguments (offset {pos})")
        m = _VAR.match(val)
        if not m:
            raise UnknownIdentifier(f"unknown identifier {val!r} at offset {pos}")
        kind, index = m.group(1), int(m.group(2))
        limit = self.param_dim if kind == "x" else self.sample_dim
        if kind == "w" and limit is None:
            limit = 2
        if limit is not None and index > limit:
            raise UnknownIdentifier(f"{val!r} exceeds declared dimension {limit} (offset {pos})")
        return Var(kind, index)


@functools.lru_cache(maxsize=1024)
def parse(text: str, param_dim: Optional[int] = None, sample_dim: Optional[int] = None) -> Expression:
    """Parse ``text`` into an expression tree.

    ``param_dim`` / ``sample_dim`` bound the admissible ``x`` / ``w`` indices.
    """
    return _Parser(text, param_dim, sample_dim).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _sample_env(w):
    if isinstance(w, tuple):
        return {1: np.asarray(w[0], dtype=float), 2: np.asarray(w[1], dtype=float)}
    return {1: np.asarray(w, dtype=float)}


def _ev(node, x, env, strict):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        if node.kind == "x":
            if node.index > len(x):
                raise UnknownIdentifier(f"x{node.index} but parameter dimension is {len(x)}")
            return x[node.index - 1]
        if node.index not in env:
            raise UnknownIdentifier(f"w{node.index} undefined on this sample space")
        return env[node.index]
    if isinstance(node, Neg):
        return -_ev(node.arg, x, env, strict)
    if isinstance(node, BinOp):
        a = _ev(node.left, x, env, strict)
        b = _ev(node.right, x, env, strict)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if strict and np.any(np.asarray(b) == 0):
                raise DomainError(f"division by zero in {node}")
            return np.divide(a, b)
        return _pow(a, b, strict, node)
    name = node.name
    args = [_ev(a, x, env, strict) for a in node.args]
    if name == "pow":
        return _pow(args[0], args[1], strict, node)
    a = args[0]
    if name == "exp":
        return np.exp(a)
    if name == "log":
        if strict and np.any(np.asarray(a) < 0):
            raise DomainError(f"log of negative value in {node}")
        return np.log(a)
    if name == "sqrt":
        if strict and np.any(np.asarray(a) < 0):
            raise DomainError(f"sqrt of negative value in {node}")
        return np.sqrt(a)
    if name == "cosh":
        return np.cosh(a)
    return np.abs(a)


def _pow(a, b, strict, node):
    if strict:
        aa, bb = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        bad = (aa < 0) & (bb != np.round(bb))
        if np.any(bad):
            raise DomainError(f"negative base with fractional exponent in {node}")
        if np.any((aa == 0) & (bb < 0)):
            raise DomainError(f"zero to a negative power in {node}")
    return np.power(a, b)


def evaluate(e: Expression, x, w, strict: bool = True):
    """Vectorized evaluation; ``w`` is a point array or a (w1, w2) tuple.

    With ``strict`` domain violations raise :class:`DomainError` and
    non-finite results raise :class:`NonFinite`; otherwise IEEE values
    (nan, inf) pass through.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    with np.errstate(all="ignore"):
        out = _ev(e, x, _sample_env(w), strict)
    out = np.asarray(out, dtype=float)
    if strict and not np.all(np.isfinite(out)):
        raise NonFinite(f"non-finite value of {e}")
    return out


def eval(e: Expression, x, w) -> float:  # noqa: A001 - mirrors the operation name
    """Evaluate at a single sample point ``w`` (a scalar or a pair)."""
    if isinstance(w, (tuple, list)) and len(w) == 2 and not isinstance(w, np.ndarray):
        pt = (np.array([w[0]], dtype=float), np.array([w[1]], dtype=float))
    else:
        pt = np.array([np.asarray(w, dtype=float).ravel()[0]])
    val = evaluate(e, x, pt, strict=True)
    return float(np.broadcast_to(val, (1,))[0])


# ---------------------------------------------------------------------------
# Log-derivatives
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=1024)
def log_of(e: Expression) -> Expression:
    """An expression for ``ln e`` that avoids forming ``e`` when possible."""
    if isinstance(e, Call) and e.name == "exp":
        return e.args[0]
    if isinstance(e, BinOp) and e.op in ("*", "/"):
        op = "+" if e.op == "*" else "-"
        return BinOp(op, log_of(e.left), log_of(e.right))
    if isinstance(e, BinOp) and e.op == "^" and isinstance(e.left, Call) and e.left.name == "exp":
        return BinOp("*", e.right, e.left.args[0])
    return Call("log", (e,))


EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DiffConfig:
    """Central differences with step ``eps**(1/3) * max(1, |x_i|)`` per axis."""

    step_scale: float = EPS ** (1.0 / 3.0)
    overrides: Optional[tuple] = None

    def __post_init__(self):
        if not self.step_scale > 0:
            raise ValueError("step_scale must be positive")
        if self.overrides is not None and any(h is not None and not h > 0 for h in self.overrides):
            raise ValueError("per-axis steps must be positive")

    def step(self, x, V) -> float:
        x = np.asarray(x, dtype=float)
        V = np.asarray(V, dtype=float)
        axis = self.step_scale * np.maximum(1.0, np.abs(x))
        if self.overrides is not None:
            axis = np.array([o if o is not None else a for o, a in zip(self.overrides, axis)])
        nz = V != 0
        return float(np.min(axis[nz] / np.abs(V[nz])))


DEFAULT_DIFF = DiffConfig()


def central_difference(f, x, V, cfg: DiffConfig = DEFAULT_DIFF):
    """``(f(x + hV) - f(x - hV)) / 2h`` for a vector-valued ``f``."""
    x = np.asarray(x, dtype=float)
    V = np.asarray(V, dtype=float)
    if not np.any(V):
        return np.zeros_like(np.asarray(f(x), dtype=float))
    h = cfg.step(x, V)
    return (np.asarray(f(x + h * V)) - np.asarray(f(x - h * V))) / (2.0 * h)


def dlog_dv_points(e: Expression, x, V, w, cfg: DiffConfig = DEFAULT_DIFF):
    """Vectorized ``∂_V ln e(x, w)`` over a point array ``w``."""
    L = log_of(e)

    def lnp(xx):
        try:
            return evaluate(L, xx, w, strict=True)
        except (DomainError, NonFinite) as exc:
            raise DomainError(f"density not positive on the difference stencil: {exc}") from exc

    return central_difference(lnp, x, V, cfg)


def dlog_dv(e: Expression, x, V, w, cfg: DiffConfig = DEFAULT_DIFF) -> float:
    """``∂_V ln e(x, w)`` at one sample point by central differences."""
    if isinstance(w, (tuple, list)) and len(w) == 2:
        pt = (np.array([w[0]], dtype=float), np.array([w[1]], dtype=float))
    else:
        pt = np.array([float(np.asarray(w).ravel()[0])])
    val = dlog_dv_points(e, x, V, pt, cfg)
    return float(np.broadcast_to(val, (1,))[0])
