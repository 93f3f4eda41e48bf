"""Prompt assembly for the multi-agent generation episodes.

Templates are plain-text files with {{placeholder}} slots, one per
role/operation combination (with a role-wide fallback). Standard blocks —
the feature table, the scoring-language grammar, the output contract, and
the marker protocol — are injected from code so every template states the
same interface.
"""

from __future__ import annotations

from importlib import resources

from ..errors import MissingPlaceholder, MissingTemplate

ROLES = ("designer", "coder", "reviewer", "judge")
OPS = ("init", "mutation", "crossover")

DES_START, DES_END = "<start_des>", "</end_des>"
CODE_START, CODE_END = "<start_code>", "</end_code>"

FEATURE_DOC = {
    "mayrounddown": "bool; rounding the variable down cannot violate any constraint",
    "mayroundup": "bool; rounding the variable up cannot violate any constraint",
    "candsfrac": "float; fractional part of the variable's LP value, in [0, 1)",
    "candsol": "float; the variable's value in the current LP solution",
    "nlocksdown": "int; count of constraints that block decreasing the variable",
    "nlocksup": "int; count of constraints that block increasing the variable",
    "obj": "float; the variable's objective coefficient",
    "objnorm": "float; Euclidean norm of the whole objective vector",
    "pscostdown": "float; average objective change per unit when fixed downward",
    "pscostup": "float; average objective change per unit when fixed upward",
    "rootsolval": "float; the variable's value in the root LP (0 if unavailable)",
    "nNonz": "int; number of constraint rows the variable appears in",
    "isBinary": "bool; true when the variable's domain is {0, 1}",
}

GRAMMAR_DOC = """\
Write the heuristic in this expression mini-language, nothing else:

    score: <numeric expression>  roundup: <boolean expression>

Numeric expressions: + - * / with usual precedence, unary minus,
parentheses, min(a, b), max(a, b), abs(a), if(condition, a, b), numeric
literals, and the numeric feature names. Boolean expressions: and, or,
not, comparisons (< <= > >= ==) between numeric expressions, true, false,
and the boolean feature names. No loops, statements, or assignments."""

CONTRACT_DOC = """\
The heuristic is evaluated once per fractional variable. 'score' is a
float; the variable with the highest score is picked. 'roundup' is a
boolean; true fixes the variable upward, false downward."""

MARKER_DOC = f"""\
The description must start with '{DES_START}' and end with '{DES_END}'.
The code must start with '{CODE_START}' and end with '{CODE_END}'."""


def _feature_block() -> str:
    return "\n".join(f"- {name}: {doc}" for name, doc in FEATURE_DOC.items())


STANDARD_SLOTS = {
    "features": _feature_block(),
    "grammar": GRAMMAR_DOC,
    "io_contract": CONTRACT_DOC,
    "marker_rules": MARKER_DOC,
}


def _load_template(role: str, op: str) -> str:
    if role not in ROLES:
        raise MissingTemplate(f"unknown role {role!r}")
    if op not in OPS:
        raise MissingTemplate(f"unknown operation {op!r}")
    base = resources.files("dhevo") / "prompts"
    for name in (f"{role}_{op}.txt", f"{role}.txt"):
        candidate = base / name
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    raise MissingTemplate(f"no template for role={role!r} op={op!r}")


def _render_parents(parents) -> str:
    if not parents:
        return "(none)"
    blocks = []
    for i, parent in enumerate(parents):
        text = parent if isinstance(parent, str) else parent.program_text()
        desc = "" if isinstance(parent, str) else f"\n  intent: {parent.description}"
        blocks.append(f"Parent {chr(ord('A') + i)}:{desc}\n  {text}")
    return "\n".join(blocks)


def render_prompt(role: str, op: str, ctx: dict) -> str:
    """Fill the role/op template with standard blocks plus caller context.

    ctx may contain: task, parents (strings or Candidates), plan,
    diagnostics, code, validation, history. Raises MissingTemplate or, if
    any {{slot}} remains unfilled, MissingPlaceholder.
    """
    template = _load_template(role, op)
    slots = dict(STANDARD_SLOTS)
    slots["task"] = ctx.get("task", "a mixed-integer program at its root relaxation")
    slots["operation"] = op
    slots["parents"] = _render_parents(ctx.get("parents"))
    for key in ("plan", "diagnostics", "code", "validation", "history"):
        slots[key] = str(ctx.get(key, "(none)"))
    text = template
    for key, value in slots.items():
        text = text.replace("{{" + key + "}}", value)
    if "{{" in text:
        start = text.index("{{")
        end = text.find("}}", start)
        slot = text[start + 2:end] if end > 0 else text[start:start + 24]
        raise MissingPlaceholder(f"template {role}/{op} slot {slot!r} not provided")
    return text
