"""Tiny arithmetic-expression evaluator for command-line custom losses.

A loss given on the command line is a single expression over the scalar
argument ``u``, e.g. ``log(1+exp(-u))`` or ``max(0, 1-u)**2``.  The
expression is parsed with :mod:`ast` and compiled against a whitelist of
arithmetic operations and numpy functions — no ``eval``, no names beyond the
listed ones — and evaluates vectorized over ``u``.
"""

import ast
import operator

import numpy as np

from .errors import ExpressionError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}

_UNARYOPS = {
    ast.UAdd: operator.pos,
    ast.USub: operator.neg,
}

_FUNCTIONS = {
    "abs": np.abs,
    "exp": np.exp,
    "expm1": np.expm1,
    "log": np.log,
    "log1p": np.log1p,
    "sqrt": np.sqrt,
    "max": np.maximum,
    "min": np.minimum,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "sinh": np.sinh,
}

_CONSTANTS = {
    "pi": np.pi,
    "e": np.e,
}


def _compile(node):
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            value = float(node.value)
            return lambda u: value
        raise ExpressionError(f"unsupported constant {node.value!r}")
    if isinstance(node, ast.Name):
        if node.id == "u":
            return lambda u: u
        if node.id in _CONSTANTS:
            value = _CONSTANTS[node.id]
            return lambda u: value
        raise ExpressionError(f"unknown name {node.id!r}; only 'u' and constants allowed")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left = _compile(node.left)
        right = _compile(node.right)
        return lambda u: op(left(u), right(u))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARYOPS:
        op = _UNARYOPS[type(node.op)]
        arg = _compile(node.operand)
        return lambda u: op(arg(u))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError("only these functions are allowed: " + ", ".join(sorted(_FUNCTIONS)))
        if node.keywords:
            raise ExpressionError("keyword arguments are not supported")
        fn = _FUNCTIONS[node.func.id]
        args = [_compile(a) for a in node.args]
        if node.func.id in ("max", "min"):
            if len(args) != 2:
                raise ExpressionError(f"{node.func.id} takes exactly 2 arguments")
        elif len(args) != 1:
            raise ExpressionError(f"{node.func.id} takes exactly 1 argument")
        return lambda u: fn(*[a(u) for a in args])
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_loss_expression(text):
    """Compile an expression string into a vectorized ``u -> loss(u)``."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse loss expression: {exc}") from exc
    fn = _compile(tree)

    def loss(u):
        with np.errstate(all="ignore"):
            return fn(np.asarray(u, dtype=float))

    return loss
