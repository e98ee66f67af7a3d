"""Parsing and serialization of the two-line layout text format.

The text form looks like::

    Objects: [('a skier', [5, 152, 139, 168]), ('a palm tree', [404, 180, 103, 180])]
    Background prompt: A realistic image of an outdoor scene with snow

Model output is messy, so parsing tolerates leading chatter, either
quote style, arbitrary whitespace, and trailing lines.  Failures are
reported as diagnostics rather than exceptions: feeding this module
arbitrary bytes must never raise.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .geometry import DEFAULT_CANVAS, BoundingBox, Layout, ObjectSpec

__all__ = [
    "DiagnosticKind",
    "ParseDiagnostic",
    "ParseOutcome",
    "RawCompletion",
    "parse_layout",
    "parse_layout_full",
    "serialize_layout",
    "extract_layout_block",
]

# Label introducing the background line; matched case-insensitively.
_BACKGROUND_RE = re.compile(
    r"^[ \t]*background prompt[ \t]*:[ \t]*(?P<value>[^\n]*)$",
    re.IGNORECASE | re.MULTILINE,
)
# Optional prefix in front of the object list.
_OBJECTS_PREFIX_RE = re.compile(r"[ \t]*objects[ \t]*:", re.IGNORECASE)
_INT_RE = re.compile(r"[+-]?\d+")
_QUOTES = ("'", '"')


class DiagnosticKind(enum.Enum):
    MALFORMED_LIST = "MalformedList"
    MALFORMED_TUPLE = "MalformedTuple"
    MALFORMED_BOX = "MalformedBox"
    MISSING_BACKGROUND = "MissingBackground"
    TRAILING_GARBAGE = "TrailingGarbage"


@dataclass(frozen=True)
class ParseDiagnostic:
    """One parse problem: what kind, where (char offset), and why."""

    kind: DiagnosticKind
    message: str
    position: int = 0


@dataclass(frozen=True)
class RawCompletion:
    """Verbatim completion text, starting after the ``Objects:`` cue."""

    text: str


@dataclass(frozen=True)
class ParseOutcome:
    """Full parse result: a layout (if one was recovered) plus diagnostics.

    ``layout`` is None exactly when a fatal diagnostic is present; any
    TrailingGarbage diagnostics are advisory and do not fail the parse.
    """

    layout: Layout | None
    diagnostics: tuple[ParseDiagnostic, ...]


def _as_text(raw: str | RawCompletion) -> str:
    return raw.text if isinstance(raw, RawCompletion) else raw


class _Scanner:
    """Cursor over the input with whitespace skipping."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False


def _fail(kind: DiagnosticKind, message: str, pos: int) -> ParseOutcome:
    return ParseOutcome(None, (ParseDiagnostic(kind, message, pos),))


def _scan_int(scanner: _Scanner) -> int | None:
    match = _INT_RE.match(scanner.text, scanner.pos)
    if not match:
        return None
    scanner.pos = match.end()
    return int(match.group())


def _scan_box(scanner: _Scanner) -> BoundingBox | ParseDiagnostic:
    start = scanner.pos
    if not scanner.take("["):
        return ParseDiagnostic(DiagnosticKind.MALFORMED_BOX, "expected '[' to open box", start)
    coords: list[int] = []
    while True:
        scanner.skip_ws()
        value = _scan_int(scanner)
        if value is None:
            return ParseDiagnostic(
                DiagnosticKind.MALFORMED_BOX, "box coordinate is not an integer", scanner.pos
            )
        coords.append(value)
        scanner.skip_ws()
        if scanner.take("]"):
            break
        if not scanner.take(","):
            return ParseDiagnostic(
                DiagnosticKind.MALFORMED_BOX, "expected ',' or ']' in box", scanner.pos
            )
    if len(coords) != 4:
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_BOX,
            f"box needs exactly 4 coordinates, got {len(coords)}",
            start,
        )
    try:
        return BoundingBox(*coords)
    except ValueError as exc:
        return ParseDiagnostic(DiagnosticKind.MALFORMED_BOX, str(exc), start)


def _scan_object(scanner: _Scanner) -> ObjectSpec | ParseDiagnostic:
    start = scanner.pos
    if not scanner.take("("):
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "expected '(' to open object tuple", start
        )
    scanner.skip_ws()
    quote = scanner.peek()
    if quote not in _QUOTES:
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "expected quoted object description", scanner.pos
        )
    scanner.pos += 1
    end = scanner.text.find(quote, scanner.pos)
    if end == -1:
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "unterminated object description", scanner.pos
        )
    description = scanner.text[scanner.pos : end]
    scanner.pos = end + 1
    if not description.strip():
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "object description is empty", start
        )
    scanner.skip_ws()
    if not scanner.take(","):
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "expected ',' between description and box", scanner.pos
        )
    scanner.skip_ws()
    box = _scan_box(scanner)
    if isinstance(box, ParseDiagnostic):
        return box
    scanner.skip_ws()
    if not scanner.take(")"):
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_TUPLE, "expected ')' to close object tuple", scanner.pos
        )
    return ObjectSpec(description, box)


def parse_layout_full(
    raw: str | RawCompletion, canvas: tuple[int, int] = DEFAULT_CANVAS
) -> ParseOutcome:
    """Parse the two-line form, collecting every diagnostic.

    The object list is scanned structurally; whatever follows it is
    searched for the first ``Background prompt:`` line.  Unrecognized
    text between or after those parts is ignored but reported as
    TrailingGarbage.
    """
    text = _as_text(raw)
    scanner = _Scanner(text)
    scanner.skip_ws()
    prefix = _OBJECTS_PREFIX_RE.match(text, scanner.pos)
    if prefix:
        scanner.pos = prefix.end()
        scanner.skip_ws()
    if not scanner.take("["):
        return _fail(DiagnosticKind.MALFORMED_LIST, "no object list found", scanner.pos)

    objects: list[ObjectSpec] = []
    scanner.skip_ws()
    if not scanner.take("]"):
        while True:
            item = _scan_object(scanner)
            if isinstance(item, ParseDiagnostic):
                return ParseOutcome(None, (item,))
            objects.append(item)
            scanner.skip_ws()
            if scanner.take("]"):
                break
            if not scanner.take(","):
                return _fail(
                    DiagnosticKind.MALFORMED_LIST,
                    "expected ',' or ']' after object tuple",
                    scanner.pos,
                )
            scanner.skip_ws()
            if scanner.take("]"):  # tolerate a trailing comma
                break

    diagnostics: list[ParseDiagnostic] = []
    remainder_start = scanner.pos
    match = _BACKGROUND_RE.search(text, remainder_start)
    if match is None:
        return _fail(
            DiagnosticKind.MISSING_BACKGROUND, "no background prompt line", remainder_start
        )
    background = match.group("value").strip()
    if not background:
        return _fail(DiagnosticKind.MISSING_BACKGROUND, "background prompt is empty", match.start())

    between = text[remainder_start : match.start()]
    if between.strip():
        diagnostics.append(
            ParseDiagnostic(
                DiagnosticKind.TRAILING_GARBAGE,
                "ignored text between object list and background prompt",
                remainder_start,
            )
        )
    after = text[match.end() :]
    if after.strip():
        diagnostics.append(
            ParseDiagnostic(
                DiagnosticKind.TRAILING_GARBAGE,
                "ignored text after background prompt",
                match.end(),
            )
        )
    layout = Layout(tuple(objects), background, canvas)
    return ParseOutcome(layout, tuple(diagnostics))


def parse_layout(
    raw: str | RawCompletion, canvas: tuple[int, int] = DEFAULT_CANVAS
) -> Layout | ParseDiagnostic:
    """Parse the two-line form; on failure return the first diagnostic."""
    outcome = parse_layout_full(raw, canvas)
    if outcome.layout is not None:
        return outcome.layout
    return outcome.diagnostics[0]


def serialize_layout(layout: Layout) -> str:
    """Render a layout in the canonical two-line text form.

    Descriptions are single-quoted, switching to double quotes when the
    text itself contains a single quote.  A description using both
    quote characters has no faithful rendering and is rejected.
    """
    parts = []
    for spec in layout.objects:
        desc = spec.description
        if "'" in desc and '"' in desc:
            raise ValueError(f"description mixes both quote characters: {desc!r}")
        quote = '"' if "'" in desc else "'"
        b = spec.box
        parts.append(f"({quote}{desc}{quote}, [{b.x}, {b.y}, {b.w}, {b.h}])")
    return (
        "Objects: ["
        + ", ".join(parts)
        + "]\nBackground prompt: "
        + layout.background_prompt
    )


def extract_layout_block(response: str | RawCompletion) -> RawCompletion | ParseDiagnostic:
    """Cut the layout block out of a chatty model response.

    Takes the first bracketed list (balanced, so nested box brackets are
    fine) through the end of the following ``Background prompt:`` line,
    dropping anything around it.  Already-clean completions pass through
    unchanged.
    """
    text = _as_text(response)
    start = text.find("[")
    if start == -1:
        return ParseDiagnostic(DiagnosticKind.MALFORMED_LIST, "no bracketed list in response", 0)
    depth = 0
    end = -1
    for i in range(start, len(text)):
        if text[i] == "[":
            depth += 1
        elif text[i] == "]":
            depth -= 1
            if depth == 0:
                end = i
                break
    if end == -1:
        return ParseDiagnostic(
            DiagnosticKind.MALFORMED_LIST, "unbalanced brackets in response", start
        )
    match = _BACKGROUND_RE.search(text, end + 1)
    if match is None:
        return RawCompletion(text[start : end + 1])
    return RawCompletion(text[start : match.end()])
