"""Dynamics/output expression grammar: a validated subset of Python syntax.

Allowed: variables x1..xn and u1..um, numeric constants, + - * /, unary
minus, and the functions sin, cos, exp, abs. Anything else is rejected at
parse time, after which the expression is compiled for fast evaluation in
an empty-builtins environment.
"""

from __future__ import annotations

import ast
import math
from typing import Callable, Sequence

from .errors import ParseError

__all__ = ["compile_expr", "ExprFn"]

_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "abs": abs}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div)

ExprFn = Callable[[Sequence[float], Sequence[float]], float]


def _validate(node: ast.AST, names: set[str], text: str) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, names, text)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        _validate(node.left, names, text)
        _validate(node.right, names, text)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        _validate(node.operand, names, text)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ParseError(f"expression {text!r}: unknown function call")
        if len(node.args) != 1 or node.keywords:
            raise ParseError(f"expression {text!r}: functions take one argument")
        _validate(node.args[0], names, text)
    elif isinstance(node, ast.Name):
        if node.id not in names:
            raise ParseError(
                f"expression {text!r}: unknown variable {node.id!r} "
                f"(column {node.col_offset})"
            )
    elif isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ParseError(f"expression {text!r}: only numeric constants allowed")
    else:
        raise ParseError(
            f"expression {text!r}: construct {type(node).__name__} not in the grammar"
        )


def compile_expr(text: str, n_states: int, n_inputs: int) -> ExprFn:
    """Compile one expression over x1..xn, u1..um into a callable f(x, u)."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("expression must be a nonempty string")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"expression {text!r}: {exc.msg} (column {exc.offset})") from exc
    state_names = {f"x{i + 1}" for i in range(n_states)}
    input_names = {f"u{j + 1}" for j in range(n_inputs)}
    _validate(tree, state_names | input_names, text)
    code = compile(tree, filename=f"<expr {text!r}>", mode="eval")
    base = {"__builtins__": {}}
    base.update(_FUNCS)

    def run(x: Sequence[float], u: Sequence[float]) -> float:
        env = {f"x{i + 1}": x[i] for i in range(n_states)}
        for j in range(n_inputs):
            env[f"u{j + 1}"] = u[j]
        return float(eval(code, base, env))

    return run
