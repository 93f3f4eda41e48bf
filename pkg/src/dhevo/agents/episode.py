"""One generation episode: Designer plans, Coder and Reviewer iterate,
Judge arbitrates when they do not converge.

The harness owns all mechanical validation (parse, kind check, probe
evaluation); the Reviewer role sees the mechanical verdict and may still
reject sound code, which sends the episode to the Judge. A candidate is
returned only if its program parses, type-checks, and evaluates cleanly
on all eight probe feature vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..dsl import Program, eval_program, parse, render
from ..errors import DslError, EpisodeFailed, MarkerMissing
from ..features import probe_vectors
from .prompts import CODE_END, CODE_START, DES_END, DES_START, render_prompt
from .providers import ProviderRequest

ORIGINS = {"init": "Init", "mutation": "Mutation", "crossover": "Crossover"}


@dataclass
class EpisodeLimits:
    max_rounds: int = 3
    max_retries: int = 3
    call_budget: int = 10


@dataclass
class TranscriptEntry:
    role: str
    prompt: str
    response: str
    step: int           # logical timestamp within the episode


@dataclass
class AgentTranscript:
    episode_id: str
    op: str
    entries: list = field(default_factory=list)
    verdict: str = "Discarded"          # Accepted | Revised | Discarded

    @property
    def calls(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict:
        return {
            "episode_id": self.episode_id,
            "op": self.op,
            "verdict": self.verdict,
            "entries": [
                {"role": e.role, "prompt": e.prompt, "response": e.response,
                 "step": e.step}
                for e in self.entries
            ],
        }


@dataclass
class Candidate:
    program: Program
    description: str
    transcript: AgentTranscript
    origin: str                         # Init | Mutation | Crossover

    def program_text(self) -> str:
        return render(self.program)

    def as_dict(self) -> dict:
        return {
            "program": self.program_text(),
            "description": self.description,
            "origin": self.origin,
            "episode_id": self.transcript.episode_id,
            "verdict": self.transcript.verdict,
        }


def extract_blocks(response: str) -> dict:
    """First well-nested description and code blocks of a response.

    Surrounding prose is ignored. Raises MarkerMissing("description") or
    MarkerMissing("code") when a pair is absent or crossed.
    """

    def grab(start: str, end: str, which: str) -> str:
        i = response.find(start)
        if i < 0:
            raise MarkerMissing(which)
        j = response.find(end, i + len(start))
        if j < 0:
            raise MarkerMissing(which)
        content = response[i + len(start):j].strip()
        if not content:
            # An empty block cannot satisfy the candidate contract.
            raise MarkerMissing(which)
        return content

    return {
        "description": grab(DES_START, DES_END, "description"),
        "code": grab(CODE_START, CODE_END, "code"),
    }


def validate_code(code: str) -> tuple[Optional[Program], str]:
    """Compile-and-probe check. Returns (program, "ok ...") on success or
    (None, diagnostic) on any failure."""
    try:
        program = parse(code)
    except DslError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    try:
        for fv in probe_vectors():
            out = eval_program(program, fv)
            if out.score != out.score:   # NaN guard; eval contract forbids it
                return None, "probe evaluation produced NaN"
    except Exception as exc:  # pragma: no cover - eval is total by contract
        return None, f"probe evaluation failed: {exc}"
    return program, f"ok: parsed, kind-checked, and evaluated on {len(probe_vectors())} probes"


def run_episode(op: str, parents: list, provider,
                limits: EpisodeLimits = EpisodeLimits(),
                episode_id: str = "episode", episode_seed: int = 0,
                task: str = "") -> Candidate:
    """Produce one validated Candidate via the Designer/Coder/Reviewer/Judge
    protocol, or raise EpisodeFailed (the transcript rides on the exception).
    """
    if op not in ORIGINS:
        raise ValueError(f"unknown episode operation {op!r}")
    arity = {"init": 0, "mutation": 1, "crossover": 2}[op]
    if len(parents) != arity:
        raise ValueError(f"{op} episode needs {arity} parent(s), got {len(parents)}")

    parent_texts = [p if isinstance(p, str) else p.program_text() for p in parents]
    transcript = AgentTranscript(episode_id=episode_id, op=op)
    base_ctx = {"parents": parent_texts}
    if task:
        base_ctx["task"] = task

    def call(role: str, prompt: str, extra_ctx: dict) -> str:
        if transcript.calls >= limits.call_budget:
            raise EpisodeFailed(_fail(transcript, "provider call budget exhausted"))
        context = {"episode_seed": episode_seed,
                   "call_index": transcript.calls,
                   "parents": parent_texts}
        context.update(extra_ctx)
        response = provider.complete(
            ProviderRequest(role=role, op=op, prompt=prompt, context=context))
        transcript.entries.append(TranscriptEntry(
            role=role, prompt=prompt, response=response, step=transcript.calls))
        return response

    plan = call("designer", render_prompt("designer", op, base_ctx), {})

    diagnostics = "(none yet)"
    last_valid: Optional[tuple[dict, Program]] = None
    invalid_rounds = 0
    accepted: Optional[tuple[dict, Program, int]] = None

    for round_no in range(1, limits.max_rounds + 1):
        coder_ctx = dict(base_ctx, plan=plan, diagnostics=diagnostics)
        response = call("coder", render_prompt("coder", op, coder_ctx), {})
        try:
            blocks = extract_blocks(response)
            program, verdict = validate_code(blocks["code"])
        except MarkerMissing as exc:
            blocks, program, verdict = None, None, str(exc)
        if program is not None:
            last_valid = (blocks, program)

        review_ctx = dict(base_ctx,
                          code=blocks["code"] if blocks else "(no code block)",
                          validation=verdict)
        review = call("reviewer", render_prompt("reviewer", op, review_ctx),
                      {"validation": verdict})
        if program is not None and review.strip().upper().startswith("ACCEPT"):
            accepted = (blocks, program, round_no)
            break
        if program is None:
            invalid_rounds += 1
            if invalid_rounds >= limits.max_retries:
                break
        diagnostics = verdict if program is None else f"reviewer said: {review}"

    if accepted is not None:
        blocks, program, round_no = accepted
        transcript.verdict = "Accepted" if round_no == 1 else "Revised"
        return Candidate(program=program, description=blocks["description"],
                         transcript=transcript, origin=ORIGINS[op])

    # No consensus: the Judge reviews the history and picks the output.
    history = "\n---\n".join(
        f"[{e.role} @ step {e.step}]\n{e.response}" for e in transcript.entries)
    judge_ctx = dict(base_ctx, history=history)
    judge_extra = {"last_valid_code": render(last_valid[1]) if last_valid else ""}
    if transcript.calls < limits.call_budget:
        response = call("judge", render_prompt("judge", op, judge_ctx), judge_extra)
        try:
            blocks = extract_blocks(response)
            program, _ = validate_code(blocks["code"])
            if program is not None:
                transcript.verdict = "Revised"
                return Candidate(program=program, description=blocks["description"],
                                 transcript=transcript, origin=ORIGINS[op])
        except MarkerMissing:
            pass
    if last_valid is not None:
        blocks, program = last_valid
        transcript.verdict = "Revised"
        return Candidate(program=program, description=blocks["description"],
                         transcript=transcript, origin=ORIGINS[op])
    raise EpisodeFailed(_fail(transcript, "no valid candidate produced"))


def _fail(transcript: AgentTranscript, reason: str) -> str:
    transcript.verdict = "Discarded"
    return (f"episode {transcript.episode_id} ({transcript.op}) failed after "
            f"{transcript.calls} provider calls: {reason}")
