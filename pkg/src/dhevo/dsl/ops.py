"""Grammar-directed generation, mutation, and crossover of programs.

All three take an explicit numpy Generator so evolution can hand each
operation its own derived stream; identical streams give identical output.
Every result satisfies the Program invariants (kind-correct, within the
depth and node caps) by construction plus bounded retry.
"""

from __future__ import annotations

import numpy as np

from ..errors import LimitExceeded
from ..features import BOOLEAN_FEATURES, NUMERIC_FEATURES
from .nodes import (
    BOOL, BOOL_OPS, CMP_OPS, MAX_DEPTH, NUM, NUM_OPS,
    BinOp, BoolLit, BoolOp, Call, Cmp, Feature, If, Neg, Node, Not, Num,
    Program, children, const, infer_kind, replace_child,
)

_GRAFT_DEPTH = 3
_RETRIES = 24


def random_num(rng: np.random.Generator, max_depth: int) -> Node:
    """Random numeric expression of depth at most max_depth (>= 1)."""
    if max_depth <= 1:
        if rng.random() < 0.65:
            return Feature(str(rng.choice(NUMERIC_FEATURES)))
        # Leaves are bare non-negative literals; Neg productions add sign.
        return Num(float(np.round(rng.uniform(0.0, 10.0), 4)))
    roll = rng.random()
    if roll < 0.40:
        op = str(rng.choice(NUM_OPS))
        return BinOp(op, random_num(rng, max_depth - 1),
                     random_num(rng, max_depth - 1))
    if roll < 0.55:
        fn = str(rng.choice(("min", "max", "abs")))
        if fn == "abs":
            return Call("abs", (random_num(rng, max_depth - 1),))
        return Call(fn, (random_num(rng, max_depth - 1),
                         random_num(rng, max_depth - 1)))
    if roll < 0.65:
        return If(random_bool(rng, max_depth - 1),
                  random_num(rng, max_depth - 1),
                  random_num(rng, max_depth - 1))
    if roll < 0.75:
        return Neg(random_num(rng, max_depth - 1))
    return random_num(rng, 1)


def random_bool(rng: np.random.Generator, max_depth: int) -> Node:
    """Random boolean expression of depth at most max_depth (>= 1)."""
    if max_depth <= 1:
        if rng.random() < 0.65:
            return Feature(str(rng.choice(BOOLEAN_FEATURES)))
        return BoolLit(bool(rng.random() < 0.5))
    roll = rng.random()
    if roll < 0.45:
        op = str(rng.choice(CMP_OPS))
        return Cmp(op, random_num(rng, max_depth - 1),
                   random_num(rng, max_depth - 1))
    if roll < 0.65:
        op = str(rng.choice(BOOL_OPS))
        return BoolOp(op, random_bool(rng, max_depth - 1),
                      random_bool(rng, max_depth - 1))
    if roll < 0.75:
        return Not(random_bool(rng, max_depth - 1))
    return random_bool(rng, 1)


def random_program(rng: np.random.Generator, max_depth: int = 5) -> Program:
    """Fresh random program; always valid."""
    if not (1 <= max_depth <= MAX_DEPTH):
        raise LimitExceeded(f"max_depth must be in [1, {MAX_DEPTH}]")
    while True:
        try:
            return Program.create(random_num(rng, max_depth),
                                  random_bool(rng, max_depth))
        except LimitExceeded:
            max_depth = max(1, max_depth - 1)


# --- tree surgery helpers ---

def _all_sites(root: Node) -> list[tuple[tuple[int, ...], Node]]:
    out = []

    def walk(node: Node, path: tuple[int, ...]) -> None:
        out.append((path, node))
        for i, child in enumerate(children(node)):
            walk(child, path + (i,))

    walk(root, ())
    return out


def _replace_at(root: Node, path: tuple[int, ...], new: Node) -> Node:
    if not path:
        return new
    kids = children(root)
    return replace_child(root, path[0], _replace_at(kids[path[0]], path[1:], new))


def _pick(rng: np.random.Generator, items: list):
    return items[int(rng.integers(len(items)))]


def _shape(node: Node) -> tuple:
    """Root-level signature; single-edit mutations must change it so an
    AST diff sees exactly one divergence site."""
    return (type(node).__name__, getattr(node, "op", None),
            getattr(node, "fn", None), getattr(node, "value", None),
            getattr(node, "name", None), len(children(node)))


# --- mutation ---

def _perturb_constant(rng, value: float) -> Node:
    if rng.random() < 0.5 and value != 0.0:
        new = value * rng.uniform(0.5, 2.0)
    else:
        new = value + rng.uniform(-10.0, 10.0)
    if abs(new - value) < 1e-12:
        new = value + 1.0
    return const(float(new))


def _mutate_tree(rng: np.random.Generator, root: Node,
                 allow_growth: bool) -> Node | None:
    """One random edit applied to one site of the tree, or None if no edit
    of the drawn kind applies."""
    sites = _all_sites(root)
    kinds = ["const", "opswap", "featswap"]
    if allow_growth:
        kinds += ["wrap", "graft"]
    edit = _pick(rng, kinds)

    if edit == "const":
        spots = [(p, n) for p, n in sites if isinstance(n, Num)]
        if not spots:
            return None
        path, node = _pick(rng, spots)
        return _replace_at(root, path, _perturb_constant(rng, node.value))

    if edit == "opswap":
        spots = [(p, n) for p, n in sites if isinstance(n, (BinOp, Cmp, BoolOp))]
        if not spots:
            return None
        path, node = _pick(rng, spots)
        pool = {BinOp: NUM_OPS, Cmp: CMP_OPS, BoolOp: BOOL_OPS}[type(node)]
        alternatives = [op for op in pool if op != node.op]
        new_op = _pick(rng, alternatives)
        return _replace_at(root, path, type(node)(new_op, node.left, node.right))

    if edit == "featswap":
        spots = [(p, n) for p, n in sites if isinstance(n, Feature)]
        if not spots:
            return None
        path, node = _pick(rng, spots)
        pool = NUMERIC_FEATURES if node.name in NUMERIC_FEATURES else BOOLEAN_FEATURES
        alternatives = [f for f in pool if f != node.name]
        return _replace_at(root, path, Feature(_pick(rng, alternatives)))

    if edit == "wrap":
        spots = [(p, n) for p, n in sites if infer_kind(n) == NUM]
        if not spots:
            return None
        path, node = _pick(rng, spots)
        # Wrapping a min/max call in the same function would smear the
        # diff across both arguments; pick a different wrapper then.
        options = [fn for fn in ("abs", "min", "max")
                   if not (isinstance(node, Call) and fn != "abs"
                           and node.fn == fn)]
        which = _pick(rng, options)
        if which == "abs":
            wrapped: Node = Call("abs", (node,))
        else:
            bound = const(float(np.round(rng.uniform(-10.0, 10.0), 4)))
            wrapped = Call(which, (node, bound))
        return _replace_at(root, path, wrapped)

    # graft: fresh subtree of matching kind, root shape forced to differ
    path, node = _pick(rng, sites)
    kind = infer_kind(node)
    for _ in range(8):
        fresh = (random_num if kind == NUM else random_bool)(rng, _GRAFT_DEPTH)
        if _shape(fresh) != _shape(node):
            return _replace_at(root, path, fresh)
    return None


def mutate(program: Program, rng: np.random.Generator) -> Program:
    """One random edit: constant perturbation, operator swap, feature swap,
    min/max/abs wrap, or a fresh subtree graft. Output always valid."""
    for attempt in range(_RETRIES):
        # After repeated cap failures, stop proposing growth edits.
        allow_growth = attempt < _RETRIES // 2
        mutate_score = rng.random() < _score_site_fraction(program)
        root_attr = "score" if mutate_score else "roundup"
        tree = getattr(program, root_attr)
        mutated = _mutate_tree(rng, tree, allow_growth)
        if mutated is None or mutated == tree:
            continue
        try:
            if root_attr == "score":
                return Program.create(mutated, program.roundup)
            return Program.create(program.score, mutated)
        except LimitExceeded:
            continue
    # Degenerate fallback (no drawable edit applied): negate the rounding
    # rule, which is a single-site change valid for any program.
    return Program.create(program.score, Not(program.roundup))


def _score_site_fraction(program: Program) -> float:
    a = len(_all_sites(program.score))
    b = len(_all_sites(program.roundup))
    return a / (a + b)


# --- crossover ---

def _cross_trees(rng: np.random.Generator, recipient: Node,
                 donor: Node) -> Node | None:
    """Swap a random subtree of recipient for a kind-matching donor subtree."""
    r_sites = _all_sites(recipient)
    d_sites = _all_sites(donor)
    for _ in range(_RETRIES):
        path, node = _pick(rng, r_sites)
        kind = infer_kind(node)
        matching = [n for _, n in d_sites if infer_kind(n) == kind]
        if not matching:
            continue
        graft = _pick(rng, matching)
        return _replace_at(recipient, path, graft)
    return None


def crossover(a: Program, b: Program, rng: np.random.Generator) -> Program:
    """Child of a with kind-matching subtrees imported from b.

    The score and roundup components each cross with probability one half;
    when no kind-matching pair exists (or the child would breach the node
    cap) the component stays as in a.
    """
    score, roundup = a.score, a.roundup
    if rng.random() < 0.5:
        crossed = _cross_trees(rng, a.score, b.score)
        if crossed is not None:
            score = crossed
    if rng.random() < 0.5:
        crossed = _cross_trees(rng, a.roundup, b.roundup)
        if crossed is not None:
            roundup = crossed
    # Post-trim: revert components until the caps hold.
    for candidate in ((score, roundup), (score, a.roundup),
                      (a.score, roundup), (a.score, a.roundup)):
        try:
            return Program.create(*candidate)
        except LimitExceeded:
            continue
    return a
