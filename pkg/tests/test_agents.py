import json

import httpx
import pytest

from dhevo.agents import (
    EpisodeLimits, HttpProvider, ProviderRequest, extract_blocks,
    mock_provider, render_prompt, run_episode, validate_code,
)
from dhevo.errors import (
    EpisodeFailed, HttpError, MarkerMissing, MissingTemplate, QuotaExceeded,
)
from dhevo.features import FEATURE_NAMES


# --- prompt templates ---

def test_coder_init_prompt_contains_features_and_markers():
    text = render_prompt("coder", "init", {})
    for name in FEATURE_NAMES:
        assert name in text
    for marker in ("<start_des>", "</end_des>", "<start_code>", "</end_code>"):
        assert marker in text


def test_crossover_prompt_embeds_both_parents():
    text = render_prompt("coder", "crossover", {
        "parents": ["score: candsfrac roundup: true",
                    "score: obj * 2 roundup: isBinary"]})
    assert "score: candsfrac roundup: true" in text
    assert "score: obj * 2 roundup: isBinary" in text


def test_unknown_role_and_op_rejected():
    with pytest.raises(MissingTemplate):
        render_prompt("oracle", "init", {})
    with pytest.raises(MissingTemplate):
        render_prompt("coder", "transmute", {})


# --- block extraction ---

def test_extract_blocks_direct():
    out = extract_blocks("<start_des>d</end_des>"
                         "<start_code>score: 1 roundup: true</end_code>")
    assert out == {"description": "d", "code": "score: 1 roundup: true"}


def test_extract_blocks_missing_code():
    with pytest.raises(MarkerMissing) as err:
        extract_blocks("<start_des>d</end_des> nothing else")
    assert err.value.which == "code"


def test_extract_blocks_missing_description():
    with pytest.raises(MarkerMissing) as err:
        extract_blocks("<start_code>score: 1 roundup: true</end_code>")
    assert err.value.which == "description"


def test_extract_blocks_ignores_padding():
    rng_texts = ["preamble " * 5, "\n\nnoise\n", "<irrelevant tag>", ""]
    for pad in rng_texts:
        out = extract_blocks(f"{pad}<start_des>why</end_des>{pad}"
                             f"<start_code>score: obj roundup: false</end_code>{pad}")
        assert out["description"] == "why"
        assert out["code"] == "score: obj roundup: false"


def test_validate_code_catches_bad_programs():
    program, verdict = validate_code("score: wibble roundup: true")
    assert program is None and "UnknownIdentifier" in verdict
    program, verdict = validate_code("score: 1 roundup: true")
    assert program is not None and verdict.startswith("ok")


# --- episodes over the mock provider ---

def test_mock_episode_reproducible():
    a = run_episode("init", [], mock_provider(5), episode_id="e", episode_seed=3)
    b = run_episode("init", [], mock_provider(5), episode_id="e", episode_seed=3)
    assert a.program_text() == b.program_text()
    assert a.transcript.as_dict() == b.transcript.as_dict()
    assert a.transcript.entries[0].role == "designer"


def test_mock_episode_within_two_rounds():
    cand = run_episode("init", [], mock_provider(5), episode_id="e",
                       episode_seed=3)
    assert cand.transcript.verdict == "Accepted"
    assert cand.transcript.calls <= 5      # designer + <= 2 coder/review rounds


def test_invalid_coder_output_retried_with_diagnostics():
    provider = mock_provider(5, fail_marker_times=1)
    cand = run_episode("init", [], provider, episode_id="e", episode_seed=3)
    assert cand.transcript.verdict == "Revised"
    prompts = [e.prompt for e in cand.transcript.entries if e.role == "coder"]
    assert len(prompts) == 2
    assert "lacks" in prompts[1]           # diagnostics fed back to the coder


def test_garbage_provider_fails_after_retries():
    provider = mock_provider(5, fail_marker_times=100)
    with pytest.raises(EpisodeFailed):
        run_episode("init", [], provider, episode_id="e", episode_seed=3)


def test_call_budget_never_exceeded():
    for fails in (0, 1, 2, 100):
        provider = mock_provider(5, fail_marker_times=fails)
        limits = EpisodeLimits(call_budget=10)
        try:
            cand = run_episode("init", [], provider, limits=limits,
                               episode_id="e", episode_seed=3)
            assert cand.transcript.calls <= 10
        except EpisodeFailed:
            assert provider.calls <= 10


def test_episode_arity_enforced():
    with pytest.raises(ValueError):
        run_episode("mutation", [], mock_provider(1))


def test_mutation_episode_uses_parent():
    base = run_episode("init", [], mock_provider(5), episode_id="e0",
                       episode_seed=1)
    child = run_episode("mutation", [base], mock_provider(6), episode_id="e1",
                        episode_seed=2)
    assert child.origin == "Mutation"
    coder_prompt = next(e.prompt for e in child.transcript.entries
                        if e.role == "coder")
    assert base.program_text() in coder_prompt


# --- http provider ---

def _http(handler, **kwargs):
    transport = httpx.MockTransport(handler)
    return HttpProvider(endpoint="https://llm.example/v1", model="m",
                        api_key="sk-SECRET123", backoff=0.0,
                        transport=transport, **kwargs)


def _request():
    return ProviderRequest(role="coder", op="init", prompt="hello")


def test_http_success_returns_first_choice():
    def handler(request):
        body = json.loads(request.content)
        assert body["model"] == "m"
        assert body["messages"][0]["role"] == "system"
        assert body["messages"][1]["content"] == "hello"
        assert request.headers["authorization"] == "Bearer sk-SECRET123"
        return httpx.Response(200, json={
            "choices": [{"message": {"content": "the reply"}}]})
    assert _http(handler).complete(_request()) == "the reply"


def test_http_429_becomes_quota_exceeded():
    calls = {"n": 0}
    def handler(request):
        calls["n"] += 1
        return httpx.Response(429, json={"error": "slow down"})
    with pytest.raises(QuotaExceeded):
        _http(handler).complete(_request())
    assert calls["n"] == 3                 # three attempts with backoff


def test_http_transient_500_then_success():
    calls = {"n": 0}
    def handler(request):
        calls["n"] += 1
        if calls["n"] == 1:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json={
            "choices": [{"message": {"content": "ok"}}]})
    assert _http(handler).complete(_request()) == "ok"


def test_http_malformed_body_is_http_error():
    def handler(request):
        return httpx.Response(200, text="not json at all")
    with pytest.raises(HttpError):
        _http(handler).complete(_request())


def test_http_hard_4xx_raised_immediately():
    calls = {"n": 0}
    def handler(request):
        calls["n"] += 1
        return httpx.Response(400, text="bad request sk-SECRET123 leaked")
    with pytest.raises(HttpError) as err:
        _http(handler).complete(_request())
    assert calls["n"] == 1
    assert "sk-SECRET123" not in str(err.value)   # key redacted


def test_extract_blocks_empty_block_counts_as_missing():
    with pytest.raises(MarkerMissing):
        extract_blocks("<start_des>   </end_des>"
                       "<start_code>score: 1 roundup: true</end_code>")


def test_missing_placeholder_detected(monkeypatch):
    from dhevo.agents import prompts as prompts_mod
    from dhevo.errors import MissingPlaceholder
    monkeypatch.setattr(prompts_mod, "_load_template",
                        lambda role, op: "{{features}} and {{wibble}}")
    with pytest.raises(MissingPlaceholder) as err:
        prompts_mod.render_prompt("coder", "init", {})
    assert "wibble" in str(err.value)


def test_http_timeout_surfaced_distinctly():
    from dhevo.errors import ProviderTimeout

    def handler(request):
        raise httpx.ConnectTimeout("took too long")

    with pytest.raises(ProviderTimeout):
        _http(handler).complete(_request())


def test_transcripts_never_contain_api_key():
    sentinel = "sk-SECRET123"
    def handler(request):
        return httpx.Response(200, json={
            "choices": [{"message": {"content":
                "<start_des>d</end_des>"
                "<start_code>score: 1 roundup: true</end_code>"}}]})
    provider = _http(handler)
    cand = run_episode("init", [], provider, episode_id="e", episode_seed=1)
    dump = json.dumps(cand.transcript.as_dict())
    assert sentinel not in dump
