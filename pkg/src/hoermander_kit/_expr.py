"""Tiny arithmetic expression language for coefficient tables.

Supports +, -, *, /, **, unary minus, the functions sin, cos, tan, exp, log,
sqrt, sinh, cosh, tanh, abs, and the constants pi and e, over named variables.
Compiled through the ast module with a whitelist; anything else is rejected.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

import numpy as np

__all__ = ["compile_expr"]

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "abs": np.abs,
}

_CONSTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}


def compile_expr(src: str, variables: tuple[str, ...]) -> Callable:
    """Compile an expression over the named variables to a vectorized callable."""
    tree = ast.parse(src, mode="eval")

    def check(node: ast.AST) -> None:
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ValueError(f"operator {type(node.op).__name__} not allowed")
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ValueError("only unary +/- allowed")
            check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ValueError("only whitelisted function calls allowed")
            if node.keywords:
                raise ValueError("keyword arguments not allowed")
            for a in node.args:
                check(a)
        elif isinstance(node, ast.Name):
            if node.id not in variables and node.id not in _CONSTS:
                raise ValueError(f"unknown name {node.id!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ValueError("only numeric constants allowed")
        else:
            raise ValueError(f"syntax element {type(node).__name__} not allowed")

    check(tree)
    code = compile(tree, "<coefficient>", "eval")
    namespace = dict(_FUNCS)
    namespace.update(_CONSTS)

    def fn(*args):
        local = dict(zip(variables, args))
        return eval(code, {"__builtins__": {}}, {**namespace, **local})

    fn.__doc__ = f"compiled expression: {src!r} over {variables}"
    return fn
