"""Chat-LLM orchestration: prompt assembly, dialog sessions, backends.

The live backend speaks the chat-completions JSON protocol over HTTP.
A table-driven mock backend stands in for it in tests, demos, and
anywhere network access is unwanted.  Both expose a single method,
``complete(messages) -> str``.
"""

from __future__ import annotations

import logging
import os
import time
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import httpx

from .dsl import (
    ParseDiagnostic,
    RawCompletion,
    extract_layout_block,
    parse_layout,
    serialize_layout,
)
from .geometry import DEFAULT_CANVAS, BoundingBox, Layout, ObjectSpec

__all__ = [
    "ChatMessage",
    "LlmConfig",
    "InContextExample",
    "PromptTemplate",
    "DEFAULT_TEMPLATE",
    "EXAMPLE_CAPTION_TRANSLATIONS",
    "build_prompt",
    "make_multilingual_template",
    "template_for_language",
    "LlmError",
    "TransportError",
    "RateLimited",
    "ApiError",
    "MockLlm",
    "HttpLlm",
    "default_mock",
    "request_layout",
    "DialogSession",
    "start_session",
    "dialog_turn",
]

logger = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-3.5-turbo"

_ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"unknown chat role {self.role!r}")


@dataclass(frozen=True)
class LlmConfig:
    """Connection settings for the chat backend.

    The API key is kept out of ``repr`` and must never be logged.
    """

    endpoint_url: str = DEFAULT_API_BASE + "/chat/completions"
    model_name: str = DEFAULT_MODEL
    api_key: str | None = field(default=None, repr=False)
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 2
    use_system_role: bool = False

    @classmethod
    def from_env(cls, **overrides) -> "LlmConfig":
        """Build a config from LMD_* environment variables.

        LMD_API_BASE, LMD_MODEL, and LMD_API_KEY override both the
        built-in defaults and any keyword overrides: the environment
        wins when both are set.
        """
        base = os.environ.get("LMD_API_BASE")
        if base:
            overrides["endpoint_url"] = base.rstrip("/") + "/chat/completions"
        model = os.environ.get("LMD_MODEL")
        if model:
            overrides["model_name"] = model
        key = os.environ.get("LMD_API_KEY")
        if key:
            overrides["api_key"] = key
        return cls(**overrides)


@dataclass(frozen=True)
class InContextExample:
    """One worked example shown to the model: a caption and its layout."""

    caption: str
    layout: Layout


@dataclass(frozen=True)
class PromptTemplate:
    """The fixed parts of the layout-generation prompt.

    The three instruction fields joined by single spaces form the
    opening paragraph; each example renders as a caption line followed
    by the serialized layout.
    """

    task_specification: str
    supporting_details: str
    guessing_attitude: str
    examples: tuple[InContextExample, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "examples", tuple(self.examples))
        if not self.examples:
            raise ValueError("prompt template needs at least one example")


_SKIER_EXAMPLE = InContextExample(
    "A realistic image of four skiers standing in a line on the snow near a palm tree",
    Layout(
        (
            ObjectSpec("a skier", BoundingBox(5, 152, 139, 168)),
            ObjectSpec("a skier", BoundingBox(278, 192, 121, 158)),
            ObjectSpec("a skier", BoundingBox(148, 173, 124, 155)),
            ObjectSpec("a palm tree", BoundingBox(404, 180, 103, 180)),
        ),
        "A realistic image of an outdoor scene with snow",
    ),
)

# "bambooo" is intentional: the shipped example reproduces its source
# text exactly, typo included.
_PANDA_EXAMPLE = InContextExample(
    "A watercolor painting of two pandas eating bamboo in a forest",
    Layout(
        (
            ObjectSpec("a panda eating bambooo", BoundingBox(30, 133, 212, 226)),
            ObjectSpec("a panda eating bambooo", BoundingBox(262, 137, 222, 221)),
        ),
        "A watercolor painting of a forest",
    ),
)

DEFAULT_TEMPLATE = PromptTemplate(
    task_specification=(
        "You are an intelligent bounding box generator. I will provide you with a caption "
        "for a photo, image, or painting. Your task is to generate the bounding boxes for "
        "the objects mentioned in the caption, along with a background prompt describing "
        "the scene."
    ),
    supporting_details=(
        "The images are of size 512x512, and the bounding boxes should not overlap or go "
        "beyond the image boundaries. Each bounding box should be in the format of (object "
        "name, [top-left x coordinate, top-left y coordinate, box width, box height]) and "
        "include exactly one object. Do not put objects that are already provided in the "
        "bounding boxes into the background prompt."
    ),
    guessing_attitude=(
        "If needed, you can make reasonable guesses. Please refer to the example below for "
        "the desired format."
    ),
    examples=(_SKIER_EXAMPLE, _PANDA_EXAMPLE),
)

# Hand-translated captions of the last default example, used to localize
# the template for non-English input.
EXAMPLE_CAPTION_TRANSLATIONS = {
    "zh": "一幅水彩画，两只熊猫在森林里吃竹子",
    "es": "Una acuarela de dos pandas comiendo bambú en un bosque",
    "fr": "Une aquarelle de deux pandas mangeant du bambou dans une forêt",
}


def build_prompt(template: PromptTemplate, caption: str) -> str:
    """Assemble the full prompt for one caption.

    Ends with the completion cue ``Caption: <caption>\\nObjects: `` so
    the model continues with the object list.
    """
    header = " ".join(
        (template.task_specification, template.supporting_details, template.guessing_attitude)
    )
    blocks = [header]
    for example in template.examples:
        blocks.append(f"Caption: {example.caption}\n{serialize_layout(example.layout)}")
    blocks.append(f"Caption: {caption}\nObjects: ")
    return "\n\n".join(blocks)


def make_multilingual_template(
    template: PromptTemplate, translated_caption: str
) -> PromptTemplate:
    """Localize a template by swapping the last example's caption.

    The example layout (and therefore every box) is untouched; only the
    caption text changes, which is enough to cue the model that
    non-English input is expected.
    """
    examples = list(template.examples)
    examples[-1] = InContextExample(translated_caption, examples[-1].layout)
    return replace(template, examples=tuple(examples))


def template_for_language(language: str | None) -> PromptTemplate:
    """Default template adjusted for a language hint.

    Known hints swap in a translated example caption; unknown hints are
    just that — hints — and fall back to the plain default.
    """
    if language and language in EXAMPLE_CAPTION_TRANSLATIONS:
        return make_multilingual_template(
            DEFAULT_TEMPLATE, EXAMPLE_CAPTION_TRANSLATIONS[language]
        )
    return DEFAULT_TEMPLATE


class LlmError(RuntimeError):
    """Base class for chat-backend failures."""


class TransportError(LlmError):
    """The endpoint could not be reached (DNS, refused, timeout...)."""


class RateLimited(LlmError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class ApiError(LlmError):
    def __init__(self, status: int, body: str):
        super().__init__(f"chat endpoint returned HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


def _caption_tail(content: str) -> str:
    """Text after the last ``Caption: `` marker, or the whole message.

    Mock-table patterns are matched against this tail so that captions
    quoted inside in-context examples can never trigger an entry.
    """
    idx = content.rfind("Caption: ")
    if idx == -1:
        return content
    return content[idx + len("Caption: ") :]


class MockLlm:
    """Table-driven stand-in for the chat backend.

    ``table`` maps substring patterns to canned completions; patterns
    are tried in order against the caption tail of the last user
    message and the first hit wins.  ``default`` (a string or a
    callable taking the tail) covers everything else.
    """

    def __init__(self, table=(), default=None):
        self.table = list(table)
        self.default = default
        self.calls: list[str] = []

    def complete(self, messages) -> str:
        last_user = next((m for m in reversed(messages) if m.role != "assistant"), None)
        if last_user is None:
            raise ValueError("no user message to complete")
        tail = _caption_tail(last_user.content)
        self.calls.append(tail)
        for pattern, completion in self.table:
            if pattern in tail:
                return completion
        if self.default is not None:
            return self.default(tail) if callable(self.default) else self.default
        raise KeyError(f"mock backend has no entry matching {tail!r}")


def completion_for_layout(layout: Layout) -> str:
    """Serialize a layout the way a model completion would look.

    The prompt already ends with ``Objects: ``, so the completion text
    starts directly with the bracketed list.
    """
    text = serialize_layout(layout)
    assert text.startswith("Objects: ")
    return text[len("Objects: ") :]


def _echo_completion(tail: str) -> str:
    caption = tail.split("\n", 1)[0].strip() or "an object"
    desc = caption.replace("'", "").replace('"', "")
    return f"[('{desc}', [176, 176, 160, 160])]\nBackground prompt: a plain background"


_PANDA_COMPLETION = completion_for_layout(_PANDA_EXAMPLE.layout)
_PANDA_PLUS_DOG = completion_for_layout(
    Layout(
        _PANDA_EXAMPLE.layout.objects + (ObjectSpec("a dog", BoundingBox(380, 370, 110, 100)),),
        _PANDA_EXAMPLE.layout.background_prompt,
    )
)

DEMO_TABLE = (
    ("two pandas", _PANDA_COMPLETION),
    ("four skiers", completion_for_layout(_SKIER_EXAMPLE.layout)),
    ("add a dog on the right", _PANDA_PLUS_DOG),
    (
        "red circle",
        "[('a red circle', [64, 160, 160, 160]), ('a blue square', [288, 160, 160, 160])]\n"
        "Background prompt: a white background",
    ),
)


def default_mock() -> MockLlm:
    """Mock backend with a few canned demo captions and an echo fallback."""
    return MockLlm(DEMO_TABLE, default=_echo_completion)


class HttpLlm:
    """Chat-completions client with retry on transient failures.

    Retries cover transport errors and HTTP 429 (honoring a numeric
    Retry-After header), with exponential backoff.  Other non-2xx
    statuses raise ApiError immediately.
    """

    def __init__(self, config: LlmConfig, transport=None, backoff_base: float = 0.5):
        self.config = config
        self.backoff_base = backoff_base
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        return headers

    def _sleep(self, attempt: int, retry_after: float | None = None) -> None:
        delay = self.backoff_base * (2**attempt)
        if retry_after is not None:
            delay = max(delay, retry_after)
        if delay > 0:
            time.sleep(min(delay, 30.0))

    def complete(self, messages) -> str:
        payload = {
            "model": self.config.model_name,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
        }
        attempt = 0
        while True:
            try:
                response = self._client.post(
                    self.config.endpoint_url, json=payload, headers=self._headers()
                )
            except httpx.TransportError as exc:
                if attempt >= self.config.max_retries:
                    raise TransportError(f"chat endpoint unreachable: {exc}") from exc
                logger.warning("transport error (attempt %d), retrying", attempt + 1)
                self._sleep(attempt)
                attempt += 1
                continue
            if response.status_code == 429:
                retry_after = _parse_retry_after(response.headers.get("Retry-After"))
                if attempt >= self.config.max_retries:
                    raise RateLimited("rate limited by chat endpoint", retry_after)
                logger.warning("rate limited (attempt %d), retrying", attempt + 1)
                self._sleep(attempt, retry_after)
                attempt += 1
                continue
            if not 200 <= response.status_code < 300:
                raise ApiError(response.status_code, response.text)
            try:
                data = response.json()
                content = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise ApiError(response.status_code, f"malformed response body: {exc}") from exc
            if not isinstance(content, str):
                raise ApiError(response.status_code, "completion content is not a string")
            return content


def _parse_retry_after(value: str | None) -> float | None:
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


def _complete(config: LlmConfig, backend, messages) -> str:
    if backend is None:
        backend = HttpLlm(config)
    return backend.complete(messages)


def request_layout(config: LlmConfig, prompt: str, backend=None) -> RawCompletion:
    """Send one assembled prompt and return the verbatim completion."""
    role = "system" if config.use_system_role else "user"
    return RawCompletion(_complete(config, backend, [ChatMessage(role, prompt)]))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class DialogSession:
    """One refinement dialog: full message history plus the latest layout.

    ``current_layout`` is the most recent successfully parsed layout;
    a failed parse leaves it alone and records the diagnostic.
    """

    id: str
    messages: list[ChatMessage]
    current_layout: Layout | None
    last_diagnostic: ParseDiagnostic | None
    created_at: str
    updated_at: str


def _parse_completion(completion: str, canvas) -> tuple[Layout | None, ParseDiagnostic | None]:
    block = extract_layout_block(completion)
    if isinstance(block, ParseDiagnostic):
        return None, block
    result = parse_layout(block, canvas)
    if isinstance(result, ParseDiagnostic):
        return None, result
    return result, None


def start_session(
    config: LlmConfig,
    template: PromptTemplate,
    caption: str,
    backend=None,
    canvas=DEFAULT_CANVAS,
) -> DialogSession:
    """Open a dialog with the full in-context prompt for ``caption``."""
    if not caption.strip():
        raise ValueError("caption must be non-empty")
    prompt = build_prompt(template, caption)
    role = "system" if config.use_system_role else "user"
    messages = [ChatMessage(role, prompt)]
    completion = _complete(config, backend, messages)
    messages.append(ChatMessage("assistant", completion))
    layout, diagnostic = _parse_completion(completion, canvas)
    now = _now()
    return DialogSession(
        id=uuid.uuid4().hex,
        messages=messages,
        current_layout=layout,
        last_diagnostic=diagnostic,
        created_at=now,
        updated_at=now,
    )


def dialog_turn(
    session: DialogSession,
    instruction: str,
    config: LlmConfig,
    backend=None,
    canvas=DEFAULT_CANVAS,
) -> DialogSession:
    """Append one user instruction, get a completion, reparse the layout.

    Every turn grows the history by exactly two messages; the history
    itself is append-only.
    """
    if not instruction.strip():
        raise ValueError("instruction must be non-empty")
    session.messages.append(ChatMessage("user", instruction))
    completion = _complete(config, backend, session.messages)
    session.messages.append(ChatMessage("assistant", completion))
    layout, diagnostic = _parse_completion(completion, canvas)
    if layout is not None:
        session.current_layout = layout
    session.last_diagnostic = diagnostic
    session.updated_at = _now()
    return session
