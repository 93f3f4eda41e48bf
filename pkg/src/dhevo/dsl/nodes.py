"""AST for the scoring-heuristic language.

Nodes are frozen dataclasses, so structural equality and hashing come for
free and programs are safely shareable values. A program pairs a numeric
score expression with a boolean roundup expression, capped in depth and
node count so mutation and generation can never blow up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import DslTypeError, LimitExceeded, UnknownIdentifier
from ..features import BOOLEAN_FEATURES, NUMERIC_FEATURES

MAX_DEPTH = 24
MAX_NODES = 512

NUM_OPS = ("+", "-", "*", "/")
CMP_OPS = ("<", "<=", ">", ">=", "==")
BOOL_OPS = ("and", "or")

NUM, BOOL = "num", "bool"


@dataclass(frozen=True)
class Num:
    value: float          # non-negative by construction; sign lives in Neg


@dataclass(frozen=True)
class Feature:
    name: str             # numeric or boolean feature reference


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str               # min | max | abs
    args: tuple


@dataclass(frozen=True)
class If:
    cond: "Node"
    then: "Node"
    other: "Node"


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Not:
    operand: "Node"


Node = Union[Num, Feature, BoolLit, Neg, BinOp, Call, If, Cmp, BoolOp, Not]


def children(node: Node) -> tuple:
    if isinstance(node, (Num, Feature, BoolLit)):
        return ()
    if isinstance(node, (Neg, Not)):
        return (node.operand,)
    if isinstance(node, (BinOp, Cmp, BoolOp)):
        return (node.left, node.right)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, If):
        return (node.cond, node.then, node.other)
    raise TypeError(f"not an AST node: {node!r}")


def replace_child(node: Node, index: int, new: Node) -> Node:
    """Copy of node with child ``index`` swapped for ``new``."""
    if isinstance(node, (Neg, Not)):
        return type(node)(new)
    if isinstance(node, (BinOp, Cmp, BoolOp)):
        return type(node)(node.op, new if index == 0 else node.left,
                          new if index == 1 else node.right)
    if isinstance(node, Call):
        args = tuple(new if i == index else a for i, a in enumerate(node.args))
        return Call(node.fn, args)
    if isinstance(node, If):
        parts = [node.cond, node.then, node.other]
        parts[index] = new
        return If(*parts)
    raise TypeError(f"node {node!r} has no children")


def node_count(node: Node) -> int:
    # Iterative: must stay safe on arbitrarily deep ill-formed input.
    count = 0
    stack = [node]
    while stack:
        current = stack.pop()
        count += 1
        stack.extend(children(current))
    return count


def depth(node: Node) -> int:
    best = 0
    stack = [(node, 1)]
    while stack:
        current, d = stack.pop()
        kids = children(current)
        if not kids:
            best = max(best, d)
        for c in kids:
            stack.append((c, d + 1))
    return best


def infer_kind(node: Node) -> str:
    """Numeric/boolean kind of a node; raises on ill-typed trees."""
    if isinstance(node, Num):
        return NUM
    if isinstance(node, BoolLit):
        return BOOL
    if isinstance(node, Feature):
        if node.name in NUMERIC_FEATURES:
            return NUM
        if node.name in BOOLEAN_FEATURES:
            return BOOL
        raise UnknownIdentifier(f"unknown feature {node.name!r}")
    if isinstance(node, Neg):
        _expect(node.operand, NUM, "unary minus")
        return NUM
    if isinstance(node, BinOp):
        _expect(node.left, NUM, f"operator {node.op!r}")
        _expect(node.right, NUM, f"operator {node.op!r}")
        return NUM
    if isinstance(node, Call):
        want = {"min": 2, "max": 2, "abs": 1}.get(node.fn)
        if want is None:
            raise UnknownIdentifier(f"unknown function {node.fn!r}")
        if len(node.args) != want:
            raise DslTypeError(f"{node.fn} takes {want} argument(s)")
        for a in node.args:
            _expect(a, NUM, f"call to {node.fn}")
        return NUM
    if isinstance(node, If):
        _expect(node.cond, BOOL, "if condition")
        _expect(node.then, NUM, "if branch")
        _expect(node.other, NUM, "if branch")
        return NUM
    if isinstance(node, Cmp):
        _expect(node.left, NUM, f"comparison {node.op!r}")
        _expect(node.right, NUM, f"comparison {node.op!r}")
        return BOOL
    if isinstance(node, BoolOp):
        _expect(node.left, BOOL, f"operator {node.op!r}")
        _expect(node.right, BOOL, f"operator {node.op!r}")
        return BOOL
    if isinstance(node, Not):
        _expect(node.operand, BOOL, "not")
        return BOOL
    raise TypeError(f"not an AST node: {node!r}")


def _expect(node: Node, kind: str, where: str) -> None:
    got = infer_kind(node)
    if got != kind:
        raise DslTypeError(f"{where} needs a {kind} operand, got {got}")


@dataclass(frozen=True)
class Program:
    """A validated scoring heuristic: numeric score, boolean roundup."""

    score: Node
    roundup: Node
    spans: dict = field(default_factory=dict, compare=False, repr=False)

    @staticmethod
    def create(score: Node, roundup: Node, spans: dict | None = None) -> "Program":
        # Caps first: kind inference recurses, so it must only ever see
        # trees already known to respect the depth cap.
        total = node_count(score) + node_count(roundup)
        if total > MAX_NODES:
            raise LimitExceeded(f"program has {total} nodes (cap {MAX_NODES})")
        deepest = max(depth(score), depth(roundup))
        if deepest > MAX_DEPTH:
            raise LimitExceeded(f"program depth {deepest} (cap {MAX_DEPTH})")
        if infer_kind(score) != NUM:
            raise DslTypeError("score expression must be numeric")
        if infer_kind(roundup) != BOOL:
            raise DslTypeError("roundup expression must be boolean")
        return Program(score=score, roundup=roundup, spans=spans or {})

    def size(self) -> int:
        return node_count(self.score) + node_count(self.roundup)


def const(value: float) -> Node:
    """Numeric literal with the sign normalized into a Neg wrapper."""
    if value < 0:
        return Neg(Num(-float(value)))
    return Num(float(value))
