"""Coordinate expression trees: parsing, printing, evaluation, derivatives.

Grammar (whitespace insignificant, numbers are decimal literals):

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' integer)?
    unary  := '-'? atom
    atom   := number | 'pi' | 'e' | ident | func '(' expr ')' | '(' expr ')'
    ident  := 'x' digit+
    func   := 'sin' | 'cos' | 'tan' | 'exp' | 'log' | 'sqrt'

Exponents are constant integer literals only; a general x^y does not parse.
That keeps every expression smooth wherever its denominators, logs, and
square roots are defined.

parse_expr builds a structurally faithful tree (no simplification), and
to_string prints it back so that parsing the output reproduces an equal
tree. Evaluation works on floats or on Dual numbers, which carry a gradient
vector through every operation; that is how Jacobians are computed exactly.
The folding constructors (fold_add and friends) do light constant folding
and are used by symbolic differentiation and substitution, never by the
parser.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError, UnknownSymbol


class Expr:
    """Base class for expression nodes. Nodes are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Const(Expr):
    name: str  # 'pi' or 'e'


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 1-based: x1, x2, ...


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


_CONSTS = {"pi": math.pi, "e": math.e}
_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt")


class Dual:
    """A value with a gradient vector, for forward-mode differentiation."""

    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad: np.ndarray):
        self.val = val
        self.grad = grad

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.grad + other.grad)
        return Dual(self.val + other, self.grad)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.grad - other.grad)
        return Dual(self.val - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.grad + other.val * self.grad)
        return Dual(self.val * other, other * self.grad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.val == 0.0:
                raise EvalError("division by zero")
            q = self.val / other.val
            return Dual(q, (self.grad - q * other.grad) / other.val)
        if other == 0.0:
            raise EvalError("division by zero")
        return Dual(self.val / other, self.grad / other)

    def __rtruediv__(self, other):
        if self.val == 0.0:
            raise EvalError("division by zero")
        q = other / self.val
        return Dual(q, -q / self.val * self.grad)

    def __neg__(self):
        return Dual(-self.val, -self.grad)


def _v(x):
    return x.val if isinstance(x, Dual) else x


def _int_pow(x, k: int):
    if _v(x) == 0.0 and k < 0:
        raise EvalError("zero raised to a negative power")
    if isinstance(x, Dual):
        if k == 0:
            return Dual(1.0, 0.0 * x.grad)
        return Dual(x.val**k, k * x.val ** (k - 1) * x.grad)
    return x**k


def _call(fn: str, x):
    v = _v(x)
    if fn == "sin":
        return Dual(math.sin(v), math.cos(v) * x.grad) if isinstance(x, Dual) else math.sin(v)
    if fn == "cos":
        return Dual(math.cos(v), -math.sin(v) * x.grad) if isinstance(x, Dual) else math.cos(v)
    if fn == "tan":
        c = math.cos(v)
        if c == 0.0:
            raise EvalError("tan at a pole")
        t = math.tan(v)
        return Dual(t, x.grad / (c * c)) if isinstance(x, Dual) else t
    if fn == "exp":
        try:
            ev = math.exp(v)
        except OverflowError as exc:
            raise EvalError("exp overflow") from exc
        return Dual(ev, ev * x.grad) if isinstance(x, Dual) else ev
    if fn == "log":
        if v <= 0.0:
            raise EvalError(f"log of non-positive value {v}")
        return Dual(math.log(v), x.grad / v) if isinstance(x, Dual) else math.log(v)
    if fn == "sqrt":
        if v < 0.0:
            raise EvalError(f"sqrt of negative value {v}")
        rt = math.sqrt(v)
        if isinstance(x, Dual):
            if rt == 0.0:
                raise EvalError("sqrt not differentiable at zero")
            return Dual(rt, x.grad / (2.0 * rt))
        return rt
    raise EvalError(f"unknown function {fn}")


def eval_expr(e: Expr, env):
    """Evaluate with env[i-1] bound to variable xi; floats or Duals.

    Raises EvalError at poles and domain edges (division by zero, log of a
    non-positive number, square root of a negative number).
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return _CONSTS[e.name]
    if isinstance(e, Var):
        if e.index > len(env):
            raise EvalError(f"no value for x{e.index}: point has {len(env)} coordinates")
        return env[e.index - 1]
    if isinstance(e, Neg):
        return -eval_expr(e.a, env)
    if isinstance(e, Add):
        return eval_expr(e.a, env) + eval_expr(e.b, env)
    if isinstance(e, Sub):
        return eval_expr(e.a, env) - eval_expr(e.b, env)
    if isinstance(e, Mul):
        return eval_expr(e.a, env) * eval_expr(e.b, env)
    if isinstance(e, Div):
        num = eval_expr(e.a, env)
        den = eval_expr(e.b, env)
        if _v(den) == 0.0:
            raise EvalError("division by zero")
        return num / den
    if isinstance(e, Pow):
        return _int_pow(eval_expr(e.base, env), e.exponent)
    if isinstance(e, Call):
        return _call(e.fn, eval_expr(e.arg, env))
    raise EvalError(f"unknown node {type(e).__name__}")


def max_var_index(e: Expr) -> int:
    """Largest variable index used, 0 if the expression is constant."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Neg):
        return max_var_index(e.a)
    if isinstance(e, (Add, Sub, Mul, Div)):
        return max(max_var_index(e.a), max_var_index(e.b))
    if isinstance(e, Pow):
        return max_var_index(e.base)
    if isinstance(e, Call):
        return max_var_index(e.arg)
    return 0


# ---------------------------------------------------------------------------
# Tokenizer and recursive-descent parser. Positions are 1-based columns.

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            stripped = text[i:].lstrip()
            if not stripped:
                break
            pos = n - len(stripped) + 1
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(_Token("num", m.group("num"), m.start("num") + 1))
        elif m.lastgroup == "name":
            tokens.append(_Token("name", m.group("name"), m.start("name") + 1))
        else:
            tokens.append(_Token(m.group("op"), m.group("op"), m.start("op") + 1))
        i = m.end()
    tokens.append(_Token("end", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            what = f"'{tok.text}'" if tok.kind != "end" else "end of input"
            raise ParseError(f"expected '{kind}', found {what}", tok.pos)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected '{tok.text}' after expression", tok.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            rhs = self.term()
            e = Add(e, rhs) if op.kind == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance()
            rhs = self.factor()
            e = Mul(e, rhs) if op.kind == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        e = self.unary()
        if self.peek().kind == "^":
            self.advance()
            e = Pow(e, self.integer())
        return e

    def integer(self) -> int:
        sign = 1
        if self.peek().kind == "-":
            self.advance()
            sign = -1
        tok = self.peek()
        if tok.kind != "num" or not re.fullmatch(r"\d+", tok.text):
            what = f"'{tok.text}'" if tok.kind != "end" else "end of input"
            raise ParseError(f"exponent must be an integer literal, found {what}", tok.pos)
        self.advance()
        return sign * int(tok.text)

    def unary(self) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            self.advance()
            name = tok.text
            if name in _CONSTS:
                return Const(name)
            if name in _FUNCS:
                self.expect("(")
                arg = self.expr()
                if self.peek().kind == ",":
                    raise ParseError(f"{name} takes one argument", self.peek().pos)
                self.expect(")")
                return Call(name, arg)
            m = re.fullmatch(r"x(\d+)", name)
            if m:
                idx = int(m.group(1))
                if idx == 0:
                    raise UnknownSymbol("variables are numbered from x1", tok.pos)
                return Var(idx)
            raise UnknownSymbol(f"unknown identifier '{name}'", tok.pos)
        what = f"'{tok.text}'" if tok.kind != "end" else "end of input"
        raise ParseError(f"expected an operand, found {what}", tok.pos)


def parse_expr(text: str) -> Expr:
    """Parse a DSL expression; ParseError/UnknownSymbol carry the column."""
    if not isinstance(text, str):
        raise ParseError("expression must be a string", 1)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing. Minimal parentheses, chosen so parse(to_string(e)) == e.


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _is_atomic(e: Expr) -> bool:
    return isinstance(e, (Const, Var, Call)) or (isinstance(e, Num) and e.value >= 0)


def to_string(e: Expr) -> str:
    if isinstance(e, Num):
        return _fmt_num(e.value) if e.value >= 0 else f"(-{_fmt_num(-e.value)})"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.a) if _is_atomic(e.a) else f"({to_string(e.a)})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = e.base
        if _is_atomic(base) or (isinstance(base, Neg) and _is_atomic(base.a)):
            b = to_string(base)
        else:
            b = f"({to_string(base)})"
        return f"{b}^{e.exponent}"
    if isinstance(e, (Mul, Div)):
        a, b = e.a, e.b
        left_plain = _is_atomic(a) or isinstance(a, (Mul, Div, Pow, Neg, Num))
        left = to_string(a) if left_plain else f"({to_string(a)})"
        right = f"({to_string(b)})" if isinstance(b, (Add, Sub, Mul, Div)) else to_string(b)
        op = "*" if isinstance(e, Mul) else "/"
        return f"{left} {op} {right}"
    if isinstance(e, (Add, Sub)):
        a, b = e.a, e.b
        left = to_string(a)
        right_needs = isinstance(b, (Add, Sub)) or isinstance(b, Neg)
        right = f"({to_string(b)})" if right_needs else to_string(b)
        op = "+" if isinstance(e, Add) else "-"
        return f"{left} {op} {right}"
    raise EvalError(f"unknown node {type(e).__name__}")


# ---------------------------------------------------------------------------
# Folding constructors: light constant folding for derivative and
# substitution output. Never used by the parser.


def _as_num(e: Expr):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg) and isinstance(e.a, Num):
        return -e.a.value
    return None


def _num(v: float) -> Expr:
    return Num(v) if v >= 0 else Neg(Num(-v))


def num_literal(v: float) -> Expr:
    """A literal node for v; negatives become Neg(Num) as the grammar would."""
    return _num(float(v))


def fold_add(a: Expr, b: Expr) -> Expr:
    va, vb = _as_num(a), _as_num(b)
    if va is not None and vb is not None:
        return _num(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    return Add(a, b)


def fold_sub(a: Expr, b: Expr) -> Expr:
    va, vb = _as_num(a), _as_num(b)
    if va is not None and vb is not None:
        return _num(va - vb)
    if vb == 0:
        return a
    if va == 0:
        return fold_neg(b)
    return Sub(a, b)


def fold_neg(a: Expr) -> Expr:
    va = _as_num(a)
    if va is not None:
        return _num(-va)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def fold_mul(a: Expr, b: Expr) -> Expr:
    va, vb = _as_num(a), _as_num(b)
    if va is not None and vb is not None:
        return _num(va * vb)
    if va == 0 or vb == 0:
        return Num(0.0)
    if va == 1:
        return b
    if vb == 1:
        return a
    if va == -1:
        return fold_neg(b)
    if vb == -1:
        return fold_neg(a)
    return Mul(a, b)


def fold_div(a: Expr, b: Expr) -> Expr:
    va, vb = _as_num(a), _as_num(b)
    if vb is not None and vb == 0:
        raise EvalError("division by constant zero")
    if va is not None and vb is not None:
        return _num(va / vb)
    if va == 0:
        return Num(0.0)
    if vb == 1:
        return a
    return Div(a, b)


def fold_pow(base: Expr, k: int) -> Expr:
    if k == 0:
        return Num(1.0)
    if k == 1:
        return base
    vb = _as_num(base)
    if vb is not None and not (vb == 0 and k < 0):
        return _num(vb**k)
    return Pow(base, k)


def diff(e: Expr, index: int) -> Expr:
    """Symbolic partial derivative with respect to x{index}, lightly folded."""
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0) if e.index == index else Num(0.0)
    if isinstance(e, Neg):
        return fold_neg(diff(e.a, index))
    if isinstance(e, Add):
        return fold_add(diff(e.a, index), diff(e.b, index))
    if isinstance(e, Sub):
        return fold_sub(diff(e.a, index), diff(e.b, index))
    if isinstance(e, Mul):
        return fold_add(fold_mul(diff(e.a, index), e.b), fold_mul(e.a, diff(e.b, index)))
    if isinstance(e, Div):
        num = fold_sub(fold_mul(diff(e.a, index), e.b), fold_mul(e.a, diff(e.b, index)))
        return fold_div(num, fold_pow(e.b, 2))
    if isinstance(e, Pow):
        inner = diff(e.base, index)
        return fold_mul(fold_mul(_num(float(e.exponent)), fold_pow(e.base, e.exponent - 1)), inner)
    if isinstance(e, Call):
        u, du = e.arg, diff(e.arg, index)
        if e.fn == "sin":
            return fold_mul(Call("cos", u), du)
        if e.fn == "cos":
            return fold_neg(fold_mul(Call("sin", u), du))
        if e.fn == "tan":
            return fold_div(du, fold_pow(Call("cos", u), 2))
        if e.fn == "exp":
            return fold_mul(Call("exp", u), du)
        if e.fn == "log":
            return fold_div(du, u)
        if e.fn == "sqrt":
            return fold_div(du, fold_mul(Num(2.0), Call("sqrt", u)))
    raise EvalError(f"cannot differentiate node {type(e).__name__}")


def subst(e: Expr, replacements) -> Expr:
    """Replace x{i} by replacements[i-1] throughout; folds as it goes.

    Variables with indices beyond the replacement list are an error, since
    substitution is used for composing maps where every input must bind.
    """
    if isinstance(e, (Num, Const)):
        return e
    if isinstance(e, Var):
        if e.index > len(replacements):
            raise EvalError(f"substitution has no binding for x{e.index}")
        return replacements[e.index - 1]
    if isinstance(e, Neg):
        return fold_neg(subst(e.a, replacements))
    if isinstance(e, Add):
        return fold_add(subst(e.a, replacements), subst(e.b, replacements))
    if isinstance(e, Sub):
        return fold_sub(subst(e.a, replacements), subst(e.b, replacements))
    if isinstance(e, Mul):
        return fold_mul(subst(e.a, replacements), subst(e.b, replacements))
    if isinstance(e, Div):
        return fold_div(subst(e.a, replacements), subst(e.b, replacements))
    if isinstance(e, Pow):
        return fold_pow(subst(e.base, replacements), e.exponent)
    if isinstance(e, Call):
        return Call(e.fn, subst(e.arg, replacements))
    raise EvalError(f"cannot substitute into node {type(e).__name__}")
