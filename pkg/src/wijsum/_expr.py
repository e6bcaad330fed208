"""Small whitelisted expression language for set sequences in config files.

    sphere((k, 0), k)
    singleton((k, 0)) if issquare(k) else singleton((0, 0))
    ball((0, 0), 1 + (-1)**k / 2)

Only arithmetic, comparisons, boolean logic, conditional expressions,
tuples, the variable ``k`` and the functions in ``FUNCTIONS`` are accepted.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

from .errors import ParseError
from .metric_sets import (
    AxisBox,
    Ball,
    ClosedSet,
    FinitePointSet,
    Hyperplane,
    SetSequence,
    Singleton,
    Sphere,
)


def _issquare(k) -> bool:
    k = int(k)
    return k >= 0 and math.isqrt(k) ** 2 == k


def _points(*pts):
    return FinitePointSet(tuple(pts))


FUNCTIONS = {
    "singleton": Singleton,
    "points": _points,
    "ball": Ball,
    "sphere": Sphere,
    "box": AxisBox,
    "hyperplane": Hyperplane,
    "issquare": _issquare,
    "sqrt": math.sqrt,
    "abs": abs,
    "floor": math.floor,
    "min": min,
    "max": max,
    "sin": math.sin,
    "cos": math.cos,
    "log": math.log,
    "exp": math.exp,
}
CONSTANTS = {"pi": math.pi, "e": math.e}

_ALLOWED = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.BoolOp, ast.Compare, ast.IfExp,
    ast.Call, ast.Name, ast.Load, ast.Constant, ast.Tuple, ast.List,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.FloorDiv, ast.Mod, ast.Pow,
    ast.USub, ast.UAdd, ast.Not, ast.And, ast.Or,
    ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE,
)


def _compile(text: str, names: set):
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ParseError(f"{type(node).__name__} is not allowed in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ParseError(f"only numeric constants are allowed in {text!r}")
        if isinstance(node, ast.Name) and node.id not in names:
            raise ParseError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                raise ParseError(f"only {sorted(FUNCTIONS)} may be called")
            if node.keywords:
                raise ParseError("keyword arguments are not supported")
    return compile(tree, "<expr>", "eval")


def _eval(code, env: dict):
    try:
        out = eval(code, {"__builtins__": {}}, env)  # noqa: S307 - whitelisted AST
    except ParseError:
        raise
    except Exception as exc:  # shape constructors and math raise assorted errors
        raise ParseError(f"evaluation failed: {exc}") from None
    if not isinstance(out, ClosedSet):
        raise ParseError(f"expression gave {type(out).__name__}, not a closed set")
    return out


def parse_set(text: str) -> ClosedSet:
    """A single closed set (no ``k``), e.g. ``hyperplane((1, 0), 0)``."""
    code = _compile(text, set(FUNCTIONS) | set(CONSTANTS))
    return _eval(code, {**FUNCTIONS, **CONSTANTS})


def parse_sequence(text: str) -> SetSequence:
    """A set sequence k -> A_k; evaluated once per k (no batch path)."""
    code = _compile(text, set(FUNCTIONS) | set(CONSTANTS) | {"k"})
    env = {**FUNCTIONS, **CONSTANTS}

    def gen(k: int) -> ClosedSet:
        return _eval(code, {**env, "k": k})

    gen(1)  # fail early on shape errors
    return SetSequence(text.strip(), gen)


def sequence_factory(text: str) -> Callable[[int], ClosedSet]:
    return parse_sequence(text).generator
