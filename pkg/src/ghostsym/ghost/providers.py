"""Ghost providers: an offline fixture directory and an HTTP LLM endpoint.

Both map a prompt to response text.  The fixture provider looks the prompt's
hash up in a directory of ``<hash>.minic`` files.  The HTTP provider posts
``{model, prompt, temperature, max_tokens}`` and caches every response in a
content-addressed directory so that reruns are deterministic.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import ProviderUnavailable
from .prompts import prompt_hash

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.5
DEFAULT_MAX_TOKENS = 2048


@dataclass
class ProviderResponse:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    cached: bool = False
    key: str = ""


class GhostProvider:
    """Contract: ``request(prompt, params) -> ProviderResponse``."""
    name = "abstract"
    model = ""
    deterministic = False

    def request(self, prompt: str, params: Optional[dict] = None) -> ProviderResponse:
        raise NotImplementedError

    def rank(self, program_text: str):
        """Optional fragment ranking; ``None`` means no opinion."""
        return None


class FixtureProvider(GhostProvider):
    """Answers from ``<dir>/<prompt hash>.minic``.

    A retry prompt (the base prompt plus a diagnostic) that has no file of its
    own falls back to the base prompt's file, passed as ``params['base']``.
    """
    name = "fixture"
    deterministic = True

    def __init__(self, directory):
        self.directory = Path(directory)

    def path_for(self, prompt: str) -> Path:
        return self.directory / f"{prompt_hash(prompt)}.minic"

    def request(self, prompt, params=None):
        params = params or {}
        for candidate in (prompt, params.get("base")):
            if candidate is None:
                continue
            path = self.path_for(candidate)
            if path.is_file():
                return ProviderResponse(path.read_text(encoding="utf-8"), cached=True,
                                        key=path.stem)
        raise ProviderUnavailable(f"no fixture {prompt_hash(prompt)}.minic in {self.directory}")


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _response_text(payload: dict) -> str:
    """Accept the common completion response shapes."""
    if isinstance(payload.get("text"), str):
        return payload["text"]
    if isinstance(payload.get("completion"), str):
        return payload["completion"]
    choices = payload.get("choices")
    if choices:
        first = choices[0]
        if isinstance(first.get("text"), str):
            return first["text"]
        msg = first.get("message") or {}
        if isinstance(msg.get("content"), str):
            return msg["content"]
    content = payload.get("content")
    if isinstance(content, list):
        return "".join(part.get("text", "") for part in content if isinstance(part, dict))
    raise ProviderUnavailable("response carries no text field")


def _usage(payload: dict):
    usage = payload.get("usage") or {}
    inp = usage.get("input_tokens", usage.get("prompt_tokens", 0)) or 0
    out = usage.get("output_tokens", usage.get("completion_tokens", 0)) or 0
    return int(inp), int(out)


class HttpProvider(GhostProvider):
    """POSTs prompts to ``url``; responses are cached under ``cache_dir``."""
    name = "http"
    deterministic = True

    def __init__(self, url: Optional[str] = None, key: Optional[str] = None,
                 model: str = "default", cache_dir=None, temperature: float = DEFAULT_TEMPERATURE,
                 max_tokens: int = DEFAULT_MAX_TOKENS, timeout: float = 120.0):
        self.url = url or os.environ.get("GHOSTSYM_LLM_URL")
        self.key = key or os.environ.get("GHOSTSYM_LLM_KEY")
        self.model = model
        cache = cache_dir or os.environ.get("GHOSTSYM_CACHE_DIR")
        self.cache_dir = Path(cache) if cache else None
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout

    def cache_key(self, prompt: str) -> str:
        blob = json.dumps([self.model, self.temperature, self.max_tokens, prompt])
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def request(self, prompt, params=None):
        key = self.cache_key(prompt)
        path = self.cache_dir / f"{key}.json" if self.cache_dir else None
        if path is not None and path.is_file():
            entry = json.loads(path.read_text(encoding="utf-8"))
            return ProviderResponse(entry["text"], entry.get("input_tokens", 0),
                                    entry.get("output_tokens", 0), cached=True, key=key)
        if not self.url:
            raise ProviderUnavailable("GHOSTSYM_LLM_URL is not set")
        body = json.dumps({"model": self.model, "prompt": prompt,
                           "temperature": self.temperature,
                           "max_tokens": self.max_tokens}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.key:
            headers["Authorization"] = f"Bearer {self.key}"
        req = urllib.request.Request(self.url, data=body, headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            raise ProviderUnavailable(f"LLM endpoint failed: {exc}") from exc
        text = _response_text(payload)
        inp, out = _usage(payload)
        if path is not None:
            _atomic_write(path, json.dumps({"prompt": prompt, "text": text,
                                            "input_tokens": inp, "output_tokens": out}))
        return ProviderResponse(text, inp, out, cached=False, key=key)


def provider_from_config(kind: str, **kw) -> GhostProvider:
    if kind == "fixture":
        return FixtureProvider(kw.get("directory") or default_fixture_dir())
    if kind == "http":
        return HttpProvider(**{k: v for k, v in kw.items() if k != "directory"})
    raise ProviderUnavailable(f"unknown provider {kind!r}")


def default_fixture_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "corpus" / "fixtures"


__all__ = ["ProviderResponse", "GhostProvider", "FixtureProvider", "HttpProvider",
           "provider_from_config", "default_fixture_dir"]
