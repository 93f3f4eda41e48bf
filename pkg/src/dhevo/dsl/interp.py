"""Total evaluator and canonical renderer for heuristic programs.

Evaluation can never fault or produce NaN/inf: division by anything within
1e-9 of zero yields 0, and every numeric intermediate is clamped to
[-1e12, 1e12]. Rendering is fully parenthesized so parse(render(p)) is
structurally identical to p.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (
    BinOp, BoolLit, BoolOp, Call, Cmp, Feature, If, Neg, Node, Not, Num,
    Program,
)

CLAMP = 1e12
DIV_EPS = 1e-9


@dataclass(frozen=True)
class EvalOutput:
    score: float
    roundup: bool


def _clamp(v: float) -> float:
    if v > CLAMP:
        return CLAMP
    if v < -CLAMP:
        return -CLAMP
    return v


def eval_node(node: Node, fv) -> float | bool:
    """Evaluate one node against a feature record (attribute access)."""
    if isinstance(node, Num):
        return _clamp(node.value)
    if isinstance(node, BoolLit):
        return node.value
    if isinstance(node, Feature):
        raw = getattr(fv, node.name)
        if isinstance(raw, bool):
            return raw
        return _clamp(float(raw))
    if isinstance(node, Neg):
        return _clamp(-eval_node(node.operand, fv))
    if isinstance(node, BinOp):
        a = eval_node(node.left, fv)
        b = eval_node(node.right, fv)
        if node.op == "+":
            return _clamp(a + b)
        if node.op == "-":
            return _clamp(a - b)
        if node.op == "*":
            return _clamp(a * b)
        if abs(b) < DIV_EPS:
            return 0.0
        return _clamp(a / b)
    if isinstance(node, Call):
        vals = [eval_node(a, fv) for a in node.args]
        if node.fn == "min":
            return _clamp(min(vals))
        if node.fn == "max":
            return _clamp(max(vals))
        return _clamp(abs(vals[0]))
    if isinstance(node, If):
        cond = eval_node(node.cond, fv)
        then = eval_node(node.then, fv)
        other = eval_node(node.other, fv)
        return then if cond else other
    if isinstance(node, Cmp):
        a = eval_node(node.left, fv)
        b = eval_node(node.right, fv)
        return {"<": a < b, "<=": a <= b, ">": a > b,
                ">=": a >= b, "==": a == b}[node.op]
    if isinstance(node, BoolOp):
        a = eval_node(node.left, fv)
        b = eval_node(node.right, fv)
        return (a and b) if node.op == "and" else (a or b)
    if isinstance(node, Not):
        return not eval_node(node.operand, fv)
    raise TypeError(f"not an AST node: {node!r}")


def eval_program(program: Program, fv) -> EvalOutput:
    """Score and rounding direction of a program on one feature record."""
    return EvalOutput(score=float(eval_node(program.score, fv)),
                      roundup=bool(eval_node(program.roundup, fv)))


def render_node(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, BoolLit):
        return "true" if node.value else "false"
    if isinstance(node, Feature):
        return node.name
    if isinstance(node, Neg):
        return f"(-{render_node(node.operand)})"
    if isinstance(node, (BinOp, Cmp)):
        return f"({render_node(node.left)} {node.op} {render_node(node.right)})"
    if isinstance(node, BoolOp):
        return f"({render_node(node.left)} {node.op} {render_node(node.right)})"
    if isinstance(node, Not):
        return f"(not {render_node(node.operand)})"
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(render_node(a) for a in node.args)})"
    if isinstance(node, If):
        return (f"if({render_node(node.cond)}, {render_node(node.then)}, "
                f"{render_node(node.other)})")
    raise TypeError(f"not an AST node: {node!r}")


def render(program: Program) -> str:
    """Canonical source text; deterministic and reparseable."""
    return f"score: {render_node(program.score)} roundup: {render_node(program.roundup)}"
