"""Text-generation providers: a deterministic mock and an HTTP client.

A provider answers one ProviderRequest at a time. The request carries the
full prompt (what a real model sees) plus structured context; the mock
reads only the structured side so its behavior is a pure function of
(provider seed, episode seed, call index, operation), which makes whole
evolution runs replayable bit for bit.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Optional

import httpx

from ..dsl import mutate, parse, random_program, render
from ..errors import DslError, HttpError, ProviderTimeout, QuotaExceeded
from ..rng import derive_seed, stream
from .prompts import CODE_END, CODE_START, DES_END, DES_START

ENV_API_KEY = "DHEVO_API_KEY"
ENV_API_BASE = "DHEVO_API_BASE"
ENV_MODEL = "DHEVO_MODEL"


@dataclass
class ProviderRequest:
    role: str                      # designer | coder | reviewer | judge
    op: str                        # init | mutation | crossover
    prompt: str
    context: dict = field(default_factory=dict)
    # context keys used by the mock: episode_seed, call_index, parents
    # (rendered program strings), validation, last_valid_code.


class MockProvider:
    """Role-aware canned responder for tests and offline runs.

    ``fail_marker_times`` makes the first N coder calls emit marker-less
    text, exercising the retry and failure paths deterministically.
    """

    kind = "mock"

    def __init__(self, seed: int, fail_marker_times: int = 0):
        self.seed = seed
        self.fail_marker_times = fail_marker_times
        self.calls = 0
        self._coder_calls = 0

    def complete(self, request: ProviderRequest) -> str:
        self.calls += 1
        handler = {
            "designer": self._designer,
            "coder": self._coder,
            "reviewer": self._reviewer,
            "judge": self._judge,
        }.get(request.role)
        if handler is None:
            raise ValueError(f"mock provider got unknown role {request.role!r}")
        return handler(request)

    def _rng(self, request: ProviderRequest):
        episode_seed = int(request.context.get("episode_seed", 0))
        call_index = int(request.context.get("call_index", 0))
        return stream(self.seed, "mock", episode_seed, call_index, request.op)

    def _designer(self, request: ProviderRequest) -> str:
        plan_id = derive_seed(self.seed, "plan",
                              request.context.get("episode_seed", 0)) % 1000
        return (f"Design note mock-{plan_id:03d}: weight fractionality against "
                f"lock counts, let pseudocosts steer the direction, and favor "
                f"binary columns; operation = {request.op}.")

    def _coder(self, request: ProviderRequest) -> str:
        self._coder_calls += 1
        if self._coder_calls <= self.fail_marker_times:
            return ("I considered several directions for this rule but "
                    "nothing concrete emerged this round.")
        rng = self._rng(request)
        parents = []
        for text in request.context.get("parents", []):
            try:
                parents.append(parse(text))
            except DslError:
                continue
        if request.op == "mutation" and parents:
            program = mutate(parents[0], rng)
            gist = "one nudged term of the parent rule"
        elif request.op == "crossover" and len(parents) >= 2:
            from ..dsl import crossover
            program = crossover(parents[0], parents[1], rng)
            gist = "a splice of both parent rules"
        else:
            program = random_program(rng, max_depth=4)
            gist = "a fresh weighted blend of the features"
        return (f"{DES_START}Scores candidates with {gist}.{DES_END}\n"
                f"{CODE_START}{render(program)}{CODE_END}")

    def _reviewer(self, request: ProviderRequest) -> str:
        verdict = str(request.context.get("validation", ""))
        if verdict.startswith("ok"):
            return "ACCEPT"
        return f"REJECT: {verdict or 'no code to review'}"

    def _judge(self, request: ProviderRequest) -> str:
        last = request.context.get("last_valid_code")
        if last:
            return (f"{DES_START}Final selection of the last sound rule."
                    f"{DES_END}\n{CODE_START}{last}{CODE_END}")
        return "No coder output in this episode was sound; nothing to select."


def mock_provider(seed: int, fail_marker_times: int = 0) -> MockProvider:
    return MockProvider(seed, fail_marker_times=fail_marker_times)


class HttpProvider:
    """Chat-completions client with bounded retries and key redaction."""

    kind = "http"

    def __init__(self, endpoint: str, model: str, temperature: float = 1.0,
                 api_key: str = "", timeout: float = 60.0,
                 max_attempts: int = 3, backoff: float = 0.5,
                 transport: Optional[httpx.BaseTransport] = None):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.temperature = temperature
        self._api_key = api_key
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.calls = 0
        self._client = httpx.Client(timeout=timeout, transport=transport)

    @classmethod
    def from_env(cls, **kwargs) -> "HttpProvider":
        key = os.environ.get(ENV_API_KEY, "")
        base = os.environ.get(ENV_API_BASE, "")
        model = os.environ.get(ENV_MODEL, "")
        if not key or not base or not model:
            raise QuotaExceeded(
                f"set {ENV_API_KEY}, {ENV_API_BASE} and {ENV_MODEL} to use "
                f"the http provider")
        return cls(endpoint=base, model=model, api_key=key, **kwargs)

    def _redact(self, text: str) -> str:
        if self._api_key:
            return text.replace(self._api_key, "[redacted]")
        return text

    def complete(self, request: ProviderRequest) -> str:
        self.calls += 1
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system",
                 "content": f"You are the {request.role} agent in a "
                            f"heuristic-generation team."},
                {"role": "user", "content": request.prompt},
            ],
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        url = f"{self.endpoint}/chat/completions"
        last_exc: Exception = QuotaExceeded("no attempts made")
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(url, json=payload, headers=headers)
            except httpx.TimeoutException as exc:
                last_exc = ProviderTimeout(self._redact(str(exc)))
                continue
            except httpx.HTTPError as exc:
                last_exc = HttpError(0, self._redact(str(exc)))
                continue
            if resp.status_code == 429:
                last_exc = QuotaExceeded("rate limited (429)")
                continue
            if resp.status_code >= 500:
                last_exc = HttpError(resp.status_code,
                                     self._redact(resp.text[:200]))
                continue
            if resp.status_code != 200:
                raise HttpError(resp.status_code, self._redact(resp.text[:200]))
            try:
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError):
                raise HttpError(resp.status_code,
                                "malformed body: " + self._redact(resp.text[:200]))
        raise last_exc


def http_provider(**kwargs) -> HttpProvider:
    return HttpProvider.from_env(**kwargs)
