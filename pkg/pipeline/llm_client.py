"""
LLM Client — single-shot completions for extraction and live decisions.

Backends:
    ScriptedBackend         canned replies keyed by sha256(prompt); deterministic
    ChatCompletionBackend   chat-completion JSON over HTTPS, bearer token from env
    GeminiBackend           google-genai client, same retry policy

Transient failures (connection errors, timeouts, 429, 5xx) are retried up to
3 times with exponential backoff. Authentication failures are not retried.
"""
import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional

import requests

from backend.config import RunConfig
from backend.errors import CompletionError, ConfigError

logger = logging.getLogger(__name__)

EMPTY_EXTRACTION_REPLY = '{"items": []}'
MAX_RETRIES = 3
BACKOFF_SECONDS = 0.5


@dataclass(frozen=True)
class CompletionParams:
    temperature: float = 0.3
    model: str = "gpt-4o-mini"


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _with_retries(
    call: Callable[[], str],
    label: str,
    max_retries: int = MAX_RETRIES,
    backoff: float = BACKOFF_SECONDS,
    sleep: Callable[[float], None] = time.sleep,
) -> str:
    last_error: Optional[CompletionError] = None
    for attempt in range(max_retries + 1):
        try:
            return call()
        except CompletionError as exc:
            if not exc.retryable:
                raise
            last_error = exc
        if attempt < max_retries:
            delay = backoff * (2 ** attempt)
            logger.warning("[llm_client] %s attempt %d failed (%s), retrying in %.1fs",
                           label, attempt + 1, last_error, delay)
            sleep(delay)
    raise CompletionError(f"{label}: retries exhausted ({last_error})", retryable=False)


# ── Scripted ──────────────────────────────────────────────────────────────────

class ScriptedBackend:
    """Replays canned replies by prompt hash. Records every prompt it sees."""

    def __init__(self, responses: Optional[Mapping[str, str]] = None, strict: bool = True):
        self.responses: Dict[str, str] = dict(responses or {})
        self.strict = strict
        self.calls: List[str] = []

    def complete(self, prompt: str, params: CompletionParams) -> str:
        self.calls.append(prompt)
        key = prompt_hash(prompt)
        if key in self.responses:
            return self.responses[key]
        if self.strict:
            raise CompletionError(f"no scripted reply for prompt hash {key[:12]}")
        return EMPTY_EXTRACTION_REPLY


# ── Chat completion over HTTPS ────────────────────────────────────────────────

class ChatCompletionBackend:
    def __init__(
        self,
        api_url: str,
        api_key: str,
        session: Optional[requests.Session] = None,
        timeout: float = 30.0,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.api_url = api_url
        self.api_key = api_key
        self.session = session or requests.Session()
        self.timeout = timeout
        self._sleep = sleep

    @classmethod
    def from_env(cls, **kwargs: Any) -> "ChatCompletionBackend":
        api_url = os.environ.get("GRATR_API_URL", "").strip()
        api_key = os.environ.get("GRATR_API_KEY", "").strip()
        if not api_url:
            raise ConfigError("GRATR_API_URL must be set for --backend live (chat-completion endpoint URL)")
        if not api_key:
            raise ConfigError("GRATR_API_KEY must be set for --backend live")
        return cls(api_url, api_key, **kwargs)

    def _post_once(self, prompt: str, params: CompletionParams) -> str:
        body = {
            "model": params.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        }
        headers = {"Authorization": f"Bearer {self.api_key}", "Content-Type": "application/json"}
        try:
            resp = self.session.post(self.api_url, json=body, headers=headers, timeout=self.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise CompletionError(f"transport error: {exc}", retryable=True)

        if resp.status_code in (401, 403):
            raise CompletionError(f"authentication failed (HTTP {resp.status_code})")
        if resp.status_code == 429 or resp.status_code >= 500:
            raise CompletionError(f"HTTP {resp.status_code}", retryable=True)
        if resp.status_code >= 400:
            raise CompletionError(f"HTTP {resp.status_code}: {resp.text[:200]}")

        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise CompletionError(f"unexpected completion payload: {resp.text[:200]}")
        if not isinstance(content, str) or not content:
            raise CompletionError("empty completion")
        return content

    def complete(self, prompt: str, params: CompletionParams) -> str:
        return _with_retries(lambda: self._post_once(prompt, params), "chat-completion", sleep=self._sleep)


# ── Gemini ────────────────────────────────────────────────────────────────────

def _get_gemini_client():
    """Create a Gemini client using the API key from env."""
    api_key = os.environ.get("GRATR_API_KEY", "")
    if not api_key:
        raise ConfigError("GRATR_API_KEY must be set for --backend live")
    from google import genai
    return genai.Client(api_key=api_key)


def _gemini_failure(exc: Exception) -> CompletionError:
    """Sort a google-genai failure by the HTTP status on its `code`."""
    code = getattr(exc, "code", None)
    if not isinstance(code, int):
        return CompletionError(f"gemini error: {exc}", retryable=True)
    if code in (401, 403):
        return CompletionError(f"gemini authentication failed (HTTP {code})")
    if code == 429 or code >= 500:
        return CompletionError(f"gemini HTTP {code}: {exc}", retryable=True)
    return CompletionError(f"gemini HTTP {code}: {exc}")


class GeminiBackend:
    def __init__(self, client: Any = None, sleep: Callable[[float], None] = time.sleep):
        self.client = client if client is not None else _get_gemini_client()
        self._sleep = sleep

    def _generate_once(self, prompt: str, params: CompletionParams) -> str:
        from google.genai import types

        try:
            response = self.client.models.generate_content(
                model=params.model,
                contents=prompt,
                config=types.GenerateContentConfig(temperature=params.temperature),
            )
        except Exception as exc:
            raise _gemini_failure(exc)
        text = getattr(response, "text", "") or ""
        if not text:
            raise CompletionError("empty completion")
        return text

    def complete(self, prompt: str, params: CompletionParams) -> str:
        return _with_retries(lambda: self._generate_once(prompt, params), "gemini", sleep=self._sleep)


def make_backend(config: RunConfig):
    """Live backend for the configured provider. Scripted runs use fixture extractors instead."""
    if config.provider == "gemini":
        return GeminiBackend()
    return ChatCompletionBackend.from_env()
