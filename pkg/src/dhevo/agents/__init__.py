"""Multi-agent candidate generation over pluggable text providers."""

from .episode import (
    AgentTranscript, Candidate, EpisodeLimits, extract_blocks, run_episode,
    validate_code,
)
from .prompts import render_prompt
from .providers import (
    HttpProvider, MockProvider, ProviderRequest, http_provider, mock_provider,
)

__all__ = [
    "AgentTranscript", "Candidate", "EpisodeLimits", "HttpProvider",
    "MockProvider", "ProviderRequest", "extract_blocks", "http_provider",
    "mock_provider", "render_prompt", "run_episode", "validate_code",
]
