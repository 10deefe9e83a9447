"""Small expression language for user-defined planar vector fields.

Grammar: numbers, identifiers, ``+ - * / ^`` (``^`` right-associative),
unary minus, parentheses, and the single-argument functions
sin, cos, tan, atan, exp, ln, sqrt, abs. Identifiers resolve to the
state variables ``x``/``y`` or to declared parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ExprError",
    "Node",
    "Num",
    "Name",
    "Unary",
    "BinOp",
    "Call",
    "parse",
    "unparse",
    "FieldExpr",
]

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "atan": math.atan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


class ExprError(ValueError):
    """Syntax or resolution error; carries the character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class Node:
    pass


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Name(Node):
    ident: str


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


_TOKEN_CHARS = set("+-*/^(),")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, offset) triples; kind in {num, name, op}."""
    toks = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            toks.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_e = False
            while j < n:
                c = src[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and not seen_e and j + 1 < n and (
                    src[j + 1].isdigit() or src[j + 1] in "+-"
                ):
                    seen_e = True
                    j += 2 if src[j + 1] in "+-" else 1
                else:
                    break
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprError(f"malformed number {text!r}", i) from None
            toks.append(("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(("name", src[i:j], i))
            i = j
            continue
        raise ExprError(f"unexpected character {ch!r}", i)
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, src: str, names: set[str]):
        self.src = src
        self.toks = _tokenize(src)
        self.pos = 0
        self.names = names

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, tok, off = self.next()
        if tok != text:
            raise ExprError(f"expected {text!r}, found {tok or 'end of input'!r}", off)

    def parse(self) -> Node:
        node = self.additive()
        kind, tok, off = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected token {tok!r}", off)
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = BinOp(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[1] == "-":
            self.next()
            return Unary("-", self.unary())
        if self.peek()[1] == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.peek()[1] == "^":
            self.next()
            # right-associative; exponent may carry a unary minus
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        kind, tok, off = self.next()
        if kind == "num":
            return Num(float(tok))
        if kind == "name":
            if self.peek()[1] == "(":
                if tok not in FUNCTIONS:
                    raise ExprError(f"unknown function {tok!r}", off)
                self.next()
                arg = self.additive()
                if self.peek()[1] == ",":
                    raise ExprError(f"function {tok!r} takes exactly one argument",
                                    self.peek()[2])
                self.expect(")")
                return Call(tok, arg)
            if tok not in self.names:
                raise ExprError(f"unknown identifier {tok!r}", off)
            return Name(tok)
        if tok == "(":
            node = self.additive()
            self.expect(")")
            return node
        raise ExprError(f"unexpected token {tok or 'end of input'!r}", off)


def parse(src: str, names: set[str]) -> Node:
    """Parse ``src`` into an AST; ``names`` are the legal identifiers."""
    return _Parser(src, names).parse()


def unparse(node: Node) -> str:
    """Canonical, fully parenthesized source for ``node``.

    ``parse(unparse(ast)) == ast`` for any valid AST.
    """
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Name):
        return node.ident
    if isinstance(node, Unary):
        return f"(-{unparse(node.operand)})"
    if isinstance(node, BinOp):
        return f"({unparse(node.left)} {node.op} {unparse(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    raise TypeError(f"not an AST node: {node!r}")


def evaluate(node: Node, env: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Name):
        return env[node.ident]
    if isinstance(node, Unary):
        return -evaluate(node.operand, env)
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a ** b
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, env))
    raise TypeError(f"not an AST node: {node!r}")


class FieldExpr:
    """Compiled pair of expressions for a planar vector field.

    Immutable; evaluation is deterministic and reentrant.
    """

    def __init__(self, source_x: str, source_y: str, params: dict[str, float]):
        names = {"x", "y"} | set(params)
        self.source_x = source_x
        self.source_y = source_y
        self.params = dict(params)
        self.ast_x = parse(source_x, names)
        self.ast_y = parse(source_y, names)

    def __call__(self, state, params: dict[str, float] | None = None):
        env = dict(self.params if params is None else params)
        env["x"] = float(state[0])
        env["y"] = float(state[1])
        return (evaluate(self.ast_x, env), evaluate(self.ast_y, env))
