"""Closed-form scalar fields over chart and fiber coordinates.

Grammar (version 1): decimal numbers; names ``x1..xn`` and ``y1..yn``;
binary ``+ - * / **``; unary minus; calls to ``sqrt``, ``exp``, ``log``,
``sin``, ``cos``, ``tan``; parentheses.  Anything else is rejected, so a
config typo cannot silently evaluate to something unintended.

Compiled fields are polymorphic: they accept plain floats or jets.
"""

from __future__ import annotations

import ast

from . import jets
from .errors import ConfigError

GRAMMAR_VERSION = "1"

_FUNCTIONS = {
    "sqrt": jets.sqrt,
    "exp": jets.exp,
    "log": jets.log,
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def _names(n: int):
    return {f"x{i + 1}": ("x", i) for i in range(n)} | {
        f"y{i + 1}": ("y", i) for i in range(n)
    }


class CompiledField:
    """A validated expression, callable on (x, y) sequences of floats or jets."""

    def __init__(self, source: str, n: int):
        self.source = source
        self.n = n
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {source!r}: {exc}") from exc
        self._names = _names(n)
        self.used_x, self.used_y = set(), set()
        self._validate(tree.body)
        self._tree = tree.body

    def _validate(self, node: ast.AST):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ConfigError(f"literal {node.value!r} is not a number")
            return
        if isinstance(node, ast.Name):
            if node.id not in self._names:
                raise ConfigError(
                    f"unknown name {node.id!r}; allowed: x1..x{self.n}, y1..y{self.n}"
                )
            kind, i = self._names[node.id]
            (self.used_x if kind == "x" else self.used_y).add(i)
            return
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._validate(node.operand)
            return
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
            self._validate(node.left)
            self._validate(node.right)
            return
        if isinstance(node, ast.Call):
            if (
                not isinstance(node.func, ast.Name)
                or node.func.id not in _FUNCTIONS
                or node.keywords
                or len(node.args) != 1
            ):
                raise ConfigError(
                    f"only single-argument calls to {sorted(_FUNCTIONS)} are allowed"
                )
            self._validate(node.args[0])
            return
        raise ConfigError(f"disallowed syntax in expression: {ast.dump(node)}")

    def __call__(self, x, y):
        return self._eval(self._tree, x, y)

    def _eval(self, node, x, y):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            kind, i = self._names[node.id]
            return x[i] if kind == "x" else y[i]
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, x, y)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a = self._eval(node.left, x, y)
            b = self._eval(node.right, x, y)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
            return jets.power(a, b) if not isinstance(b, jets.Jet) else jets.exp(b * jets.log(a))
        # validated Call
        return _FUNCTIONS[node.func.id](self._eval(node.args[0], x, y))


def compile_field(source: str, n: int) -> CompiledField:
    return CompiledField(source, n)
