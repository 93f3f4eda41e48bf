"""Sandboxed expression language for diving score heuristics."""

from .interp import CLAMP, DIV_EPS, EvalOutput, eval_program, render
from .nodes import MAX_DEPTH, MAX_NODES, Program, const, depth, node_count
from .ops import crossover, mutate, random_program
from .parser import parse

__all__ = [
    "CLAMP", "DIV_EPS", "EvalOutput", "MAX_DEPTH", "MAX_NODES", "Program",
    "const", "crossover", "depth", "eval_program", "mutate", "node_count",
    "parse", "random_program", "render",
]
