"""Expression trees for single-variable model functions.

Nodes are immutable. Structural differentiation produces new trees that
share subtrees with their input, so a derivative is a DAG rather than a
plain tree; :func:`compile_expr` evaluates every shared node once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import EvaluationError

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt", "tanh")

_MATH = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "sqrt": math.sqrt,
    "tanh": math.tanh,
}


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    __slots__ = ()

    def to_text(self, var: str = "x") -> str:
        return to_text(self, var)

    def __str__(self):
        return to_text(self)

    def evaluate(self, x):
        return compile_expr(self)(x)

    def diff(self, order: int = 1) -> "Expr":
        return differentiate(self, order)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    name: str
    arg: Expr


ExprLike = Union[Expr, float, int]

X = Var()
ZERO = Num(0.0)
ONE = Num(1.0)


# --- constructors with light constant folding -------------------------------
# Used by differentiation and model algebra; the parser builds raw nodes so
# that printing and re-parsing is structurally exact.

def _lift(e: ExprLike) -> Expr:
    if isinstance(e, Expr):
        return e
    return Num(float(e))


def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


def _fold(value):
    if math.isfinite(value):
        return Num(value)
    return None


def add(a: ExprLike, b: ExprLike) -> Expr:
    a, b = _lift(a), _lift(b)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return _fold(a.value + b.value) or Add(a, b)
    return Add(a, b)


def sub(a: ExprLike, b: ExprLike) -> Expr:
    a, b = _lift(a), _lift(b)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    if _is_num(a) and _is_num(b):
        return _fold(a.value - b.value) or Sub(a, b)
    return Sub(a, b)


def mul(a: ExprLike, b: ExprLike) -> Expr:
    a, b = _lift(a), _lift(b)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return _fold(a.value * b.value) or Mul(a, b)
    return Mul(a, b)


def div(a: ExprLike, b: ExprLike) -> Expr:
    a, b = _lift(a), _lift(b)
    if _is_num(b, 1.0):
        return a
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return ZERO
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        return _fold(a.value / b.value) or Div(a, b)
    return Div(a, b)


def neg(a: ExprLike) -> Expr:
    a = _lift(a)
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base: ExprLike, n: int) -> Expr:
    base = _lift(base)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if _is_num(base) and not (base.value == 0.0 and n < 0):
        try:
            return _fold(base.value ** n) or Pow(base, n)
        except OverflowError:
            return Pow(base, n)
    return Pow(base, int(n))


def call(name: str, arg: ExprLike) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    arg = _lift(arg)
    if _is_num(arg):
        try:
            folded = _fold(_MATH[name](arg.value))
        except (ValueError, OverflowError):
            folded = None
        if folded is not None:
            return folded
    return Call(name, arg)


def exp(a):
    return call("exp", a)


def log(a):
    return call("log", a)


def sqrt(a):
    return call("sqrt", a)


# --- differentiation ---------------------------------------------------------

def _d_call(node: Call, du: Expr) -> Expr:
    u = node.arg
    name = node.name
    if name == "exp":
        outer = node
    elif name == "log":
        return div(du, u)
    elif name == "sin":
        outer = call("cos", u)
    elif name == "cos":
        outer = neg(call("sin", u))
    elif name == "sinh":
        outer = call("cosh", u)
    elif name == "cosh":
        outer = call("sinh", u)
    elif name == "sqrt":
        return div(du, mul(2.0, node))
    elif name == "tanh":
        outer = sub(1.0, power(node, 2))
    else:  # pragma: no cover - FUNCTIONS is closed
        raise ValueError(name)
    return mul(outer, du)


def _d(node: Expr, memo: dict) -> Expr:
    key = id(node)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(node, Num):
        out = ZERO
    elif isinstance(node, Var):
        out = ONE
    elif isinstance(node, Neg):
        out = neg(_d(node.arg, memo))
    elif isinstance(node, Add):
        out = add(_d(node.left, memo), _d(node.right, memo))
    elif isinstance(node, Sub):
        out = sub(_d(node.left, memo), _d(node.right, memo))
    elif isinstance(node, Mul):
        a, b = node.left, node.right
        out = add(mul(_d(a, memo), b), mul(a, _d(b, memo)))
    elif isinstance(node, Div):
        a, b = node.left, node.right
        da, db = _d(a, memo), _d(b, memo)
        # (a/b)' = a'/b - a b' / b^2
        out = sub(div(da, b), div(mul(a, db), power(b, 2)))
    elif isinstance(node, Pow):
        n = node.exponent
        out = mul(mul(float(n), power(node.base, n - 1)), _d(node.base, memo))
    elif isinstance(node, Call):
        out = _d_call(node, _d(node.arg, memo))
    else:
        raise TypeError(f"not an expression node: {node!r}")
    memo[key] = (node, out)
    return out


MAX_ORDER = 4


def differentiate(f: Expr, order: int = 1) -> Expr:
    """Exact structural derivative d^order f / dx^order, 0 <= order <= 4."""
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise ValueError(f"derivative order must be an integer in [0, {MAX_ORDER}], got {order!r}")
    out = f
    for _ in range(order):
        out = _d(out, {})
    return out


def substitute(f: Expr, replacement: Expr) -> Expr:
    """Return f with the variable replaced by ``replacement`` (composition f(g(x)))."""
    memo: dict = {}

    def walk(node):
        key = id(node)
        if key in memo:
            return memo[key][1]
        if isinstance(node, Var):
            out = replacement
        elif isinstance(node, Num):
            out = node
        elif isinstance(node, Neg):
            out = Neg(walk(node.arg))
        elif isinstance(node, (Add, Sub, Mul, Div)):
            out = type(node)(walk(node.left), walk(node.right))
        elif isinstance(node, Pow):
            out = Pow(walk(node.base), node.exponent)
        elif isinstance(node, Call):
            out = Call(node.name, walk(node.arg))
        else:
            raise TypeError(f"not an expression node: {node!r}")
        memo[key] = (node, out)
        return out

    return walk(f)


def depends_on_x(f: Expr) -> bool:
    seen = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            return True
        if isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, (Add, Sub, Mul, Div)):
            stack.extend((node.left, node.right))
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, Call):
            stack.append(node.arg)
    return False


# --- printing ------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _prec(node):
    return _PREC.get(type(node), 5)


def to_text(f: Expr, var: str = "x") -> str:
    """Infix text that parses back to the same tree."""

    def paren(node, ok):
        s = walk(node)
        return s if ok else f"({s})"

    def walk(node):
        if isinstance(node, Num):
            s = repr(float(node.value))
            return f"({s})" if node.value < 0 or s.startswith("-") else s
        if isinstance(node, Var):
            return var
        if isinstance(node, Neg):
            return "-" + paren(node.arg, _prec(node.arg) >= 3)
        if isinstance(node, (Add, Sub, Mul, Div)):
            p = _PREC[type(node)]
            left = paren(node.left, _prec(node.left) >= p)
            right = paren(node.right, _prec(node.right) > p)
            return f"{left} {_SYMBOL[type(node)]} {right}"
        if isinstance(node, Pow):
            base = paren(node.base, _prec(node.base) >= 5)
            n = node.exponent
            return f"{base}^{n}" if n >= 0 else f"{base}^({n})"
        if isinstance(node, Call):
            return f"{node.name}({walk(node.arg)})"
        raise TypeError(f"not an expression node: {node!r}")

    return walk(f)


# --- compilation ---------------------------------------------------------------

_NP_FUNCS = {name: getattr(np, name) for name in FUNCTIONS}


def compile_expr(f: Expr) -> Callable:
    """Compile ``f`` into a vectorized numpy callable.

    The returned function accepts a float or array and raises
    :class:`EvaluationError` if any result is non-finite.
    """
    lines = []
    names: dict = {}

    def emit(node):
        key = id(node)
        if key in names:
            return names[key]
        if isinstance(node, Num):
            return f"({float(node.value)!r})"
        if isinstance(node, Var):
            return "x"
        if isinstance(node, Neg):
            code = f"-{emit(node.arg)}"
        elif isinstance(node, (Add, Sub, Mul, Div)):
            code = f"{emit(node.left)} {_SYMBOL[type(node)]} {emit(node.right)}"
        elif isinstance(node, Pow):
            code = f"{emit(node.base)} ** {node.exponent}"
        elif isinstance(node, Call):
            code = f"{node.name}({emit(node.arg)})"
        else:
            raise TypeError(f"not an expression node: {node!r}")
        name = f"t{len(lines)}"
        lines.append(f"    {name} = {code}")
        names[key] = name
        return name

    result = emit(f)
    src = "def _compiled(x):\n" + "\n".join(lines) + f"\n    return {result} + 0.0 * x\n"
    namespace = dict(_NP_FUNCS, inf=np.inf, nan=np.nan)
    exec(compile(src, "<effaction-expr>", "exec"), namespace)
    raw = namespace["_compiled"]

    def evaluate(x):
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = raw(arr)
        if not np.all(np.isfinite(out)):
            bad = arr if arr.ndim == 0 else arr[~np.isfinite(out)][0]
            raise EvaluationError(
                f"non-finite expression value at x={float(bad)!r} "
                "(division by zero or log/sqrt outside its domain)"
            )
        if arr.ndim == 0:
            return float(out)
        return out

    evaluate.source = src
    return evaluate
