"""Layout benchmarks: task generation, checkers, and the runner.

Four task families probe distinct failure modes of caption-to-layout
generation: negation ("without X"), numeracy ("with 3 X"), attribute
binding ("red X and blue Y"), and spatial placement ("X on the left,
Y on the right").  Checking is purely textual/geometric: descriptions
are matched by case-insensitive substring, positions by box centers.
"""

from __future__ import annotations

import enum
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .dsl import ParseDiagnostic, extract_layout_block, parse_layout
from .geometry import BoundingBox, Layout, ObjectSpec, box_center
from .llm import ChatMessage, MockLlm, PromptTemplate, build_prompt, completion_for_layout

__all__ = [
    "OBJECT_NAMES",
    "COLOR_NAMES",
    "LOCATIONS",
    "OPPOSITE_LOCATION",
    "TaskKind",
    "BenchmarkTask",
    "TaskResult",
    "BenchmarkReport",
    "generate_tasks",
    "count_matching",
    "check_negation",
    "check_numeracy",
    "check_attribute",
    "check_spatial",
    "run_benchmark",
    "oracle_completion",
    "mock_for_tasks",
    "format_report_table",
    "report_to_json",
]

OBJECT_NAMES = (
    "backpack",
    "book",
    "bottle",
    "bowl",
    "car",
    "cat",
    "chair",
    "cup",
    "dog",
    "laptop",
)
COLOR_NAMES = (
    "red",
    "orange",
    "yellow",
    "green",
    "blue",
    "purple",
    "pink",
    "brown",
    "black",
    "white",
    "gray",
)
LOCATIONS = ("left", "right", "top", "bottom")
OPPOSITE_LOCATION = {"left": "right", "right": "left", "top": "bottom", "bottom": "top"}
COUNTS = (1, 2, 3, 4, 5)


class TaskKind(enum.Enum):
    NEGATION = "negation"
    NUMERACY = "numeracy"
    ATTRIBUTE = "attribute"
    SPATIAL = "spatial"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


_DISPLAY_NAMES = {
    TaskKind.NEGATION: "Negation",
    TaskKind.NUMERACY: "Generative Numeracy",
    TaskKind.ATTRIBUTE: "Attribute Assignment",
    TaskKind.SPATIAL: "Spatial Relationships",
}


@dataclass(frozen=True)
class BenchmarkTask:
    """One benchmark prompt plus the facts a correct layout must satisfy.

    ``expected`` depends on the kind:
      negation   (object_name,)
      numeracy   (object_name, count)
      attribute  ((color1, object1), (color2, object2))
      spatial    ((object1, location1), (object2, location2))
    """

    kind: TaskKind
    prompt: str
    expected: tuple


def _plural(name: str, count: int) -> str:
    return name if count == 1 else name + "s"


def generate_tasks(kind: TaskKind, n: int, seed: int) -> tuple[BenchmarkTask, ...]:
    """Sample ``n`` tasks of one kind, uniformly with replacement.

    The same (kind, n, seed) always yields the same list; string
    seeding keeps the stream stable across platforms.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = random.Random(f"{kind.value}/{n}/{seed}")
    tasks = []
    for _ in range(n):
        if kind is TaskKind.NEGATION:
            obj = rng.choice(OBJECT_NAMES)
            prompt = f"A realistic photo of a scene without {obj}"
            expected: tuple = (obj,)
        elif kind is TaskKind.NUMERACY:
            obj = rng.choice(OBJECT_NAMES)
            count = rng.choice(COUNTS)
            prompt = f"A realistic photo of a scene with {count} {_plural(obj, count)}"
            expected = (obj, count)
        elif kind is TaskKind.ATTRIBUTE:
            obj1, obj2 = rng.sample(OBJECT_NAMES, 2)
            color1, color2 = rng.sample(COLOR_NAMES, 2)
            prompt = f"A realistic photo of a scene with {color1} {obj1} and {color2} {obj2}"
            expected = ((color1, obj1), (color2, obj2))
        elif kind is TaskKind.SPATIAL:
            obj1, obj2 = rng.sample(OBJECT_NAMES, 2)
            loc1 = rng.choice(LOCATIONS)
            loc2 = OPPOSITE_LOCATION[loc1]
            prompt = (
                f"A realistic photo of a scene with {obj1} on the {loc1} "
                f"and {obj2} on the {loc2}"
            )
            expected = ((obj1, loc1), (obj2, loc2))
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown task kind {kind!r}")
        tasks.append(BenchmarkTask(kind, prompt, expected))
    return tuple(tasks)


def _normalize(text: str) -> str:
    return " ".join(text.split()).lower()


def _contains(description: str, needle: str) -> bool:
    return _normalize(needle) in _normalize(description)


def count_matching(layout: Layout, object_name: str) -> int:
    """Number of boxes whose description mentions ``object_name``.

    Matching is case-insensitive substring after whitespace
    normalization, so "two Chairs " counts for "chair".
    """
    return sum(1 for spec in layout.objects if _contains(spec.description, object_name))


def check_negation(layout: Layout, object_name: str) -> bool:
    return count_matching(layout, object_name) == 0


def check_numeracy(layout: Layout, object_name: str, count: int) -> bool:
    return count_matching(layout, object_name) == count


def check_attribute(layout: Layout, pairs) -> bool:
    """Each (color, object) pair must own a box, with no cross-binding.

    True iff for every pair at least one box mentions both words, and
    no box mentions the pair's object together with the other pair's
    color.
    """
    (color1, obj1), (color2, obj2) = pairs
    for color, obj, other_color in ((color1, obj1, color2), (color2, obj2, color1)):
        own = [s for s in layout.objects if _contains(s.description, obj)]
        if not any(_contains(s.description, color) for s in own):
            return False
        if any(_contains(s.description, other_color) for s in own):
            return False
    return True


def _in_half_plane(cx: float, cy: float, location: str, canvas) -> bool:
    w, h = canvas
    if location == "left":
        return cx < w / 2
    if location == "right":
        return cx > w / 2
    if location == "top":
        return cy < h / 2
    if location == "bottom":
        return cy > h / 2
    raise ValueError(f"unknown location {location!r}")


def _spatial_verdict(layout, obj1, loc1, obj2, loc2) -> tuple[bool, str | None]:
    centers = []
    for name in (obj1, obj2):
        hits = [s for s in layout.objects if _contains(s.description, name)]
        if len(hits) > 1:
            return False, "ambiguous match"
        if not hits:
            return False, f"no box matches {name!r}"
        centers.append(box_center(hits[0].box))
    for (cx, cy), location in zip(centers, (loc1, loc2)):
        # Strict inequality: a center sitting exactly on the midline is
        # in neither half-plane.
        if not _in_half_plane(cx, cy, location, layout.canvas):
            return False, "wrong half-plane"
    return True, None


def check_spatial(layout: Layout, obj1: str, loc1: str, obj2: str, loc2: str) -> bool:
    """True iff each object matches exactly one box in the right half."""
    return _spatial_verdict(layout, obj1, loc1, obj2, loc2)[0]


@dataclass(frozen=True)
class TaskResult:
    task: BenchmarkTask
    passed: bool
    failure_reason: str | None
    layout: Layout | None
    raw: str


@dataclass(frozen=True)
class BenchmarkReport:
    results: tuple[TaskResult, ...]
    accuracy: dict  # TaskKind -> fraction in [0, 1]
    n: int
    seed: int


def _check_task(task: BenchmarkTask, layout: Layout) -> tuple[bool, str | None]:
    if task.kind is TaskKind.NEGATION:
        ok = check_negation(layout, task.expected[0])
        return ok, None if ok else "object present"
    if task.kind is TaskKind.NUMERACY:
        ok = check_numeracy(layout, *task.expected)
        return ok, None if ok else "wrong object count"
    if task.kind is TaskKind.ATTRIBUTE:
        ok = check_attribute(layout, task.expected)
        return ok, None if ok else "attribute mismatch"
    (obj1, loc1), (obj2, loc2) = task.expected
    return _spatial_verdict(layout, obj1, loc1, obj2, loc2)


def _run_one(backend, template: PromptTemplate, task: BenchmarkTask) -> TaskResult:
    prompt = build_prompt(template, task.prompt)
    raw = backend.complete([ChatMessage("user", prompt)])
    block = extract_layout_block(raw)
    if isinstance(block, ParseDiagnostic):
        return TaskResult(task, False, f"parse error: {block.kind.value}", None, raw)
    parsed = parse_layout(block)
    if isinstance(parsed, ParseDiagnostic):
        return TaskResult(task, False, f"parse error: {parsed.kind.value}", None, raw)
    passed, reason = _check_task(task, parsed)
    return TaskResult(task, passed, reason, parsed, raw)


def run_benchmark(
    backend,
    template: PromptTemplate,
    kinds,
    n: int,
    seed: int,
    parallelism: int = 4,
) -> BenchmarkReport:
    """Run ``n`` tasks per kind against a backend and score them.

    Tasks may execute concurrently up to ``parallelism``; results are
    reassembled in task order so the report is deterministic for a
    deterministic backend.
    """
    kinds = tuple(kinds)
    tasks: list[BenchmarkTask] = []
    for kind in kinds:
        tasks.extend(generate_tasks(kind, n, seed))
    if tasks:
        workers = max(1, min(parallelism, len(tasks)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(lambda t: _run_one(backend, template, t), tasks))
    else:
        results = ()
    accuracy = {}
    for kind in kinds:
        kind_results = [r for r in results if r.task.kind is kind]
        accuracy[kind] = (
            sum(r.passed for r in kind_results) / len(kind_results) if kind_results else 0.0
        )
    return BenchmarkReport(results, accuracy, n, seed)


# --- reference completions ------------------------------------------------
#
# For offline runs the backend is a mock whose table is built from the
# task list itself: each prompt maps to a layout constructed to satisfy
# the checker.  Tests sabotage selected entries to script failures.


def _oracle_layout(task: BenchmarkTask) -> Layout:
    if task.kind is TaskKind.NEGATION:
        return Layout((), "A realistic photo of a scene")
    if task.kind is TaskKind.NUMERACY:
        obj, count = task.expected
        boxes = tuple(
            ObjectSpec(f"a {obj}", BoundingBox(16 + 96 * i, 208, 80, 80)) for i in range(count)
        )
        return Layout(boxes, "A realistic photo of a scene")
    if task.kind is TaskKind.ATTRIBUTE:
        (color1, obj1), (color2, obj2) = task.expected
        return Layout(
            (
                ObjectSpec(f"a {color1} {obj1}", BoundingBox(48, 176, 160, 160)),
                ObjectSpec(f"a {color2} {obj2}", BoundingBox(304, 176, 160, 160)),
            ),
            "A realistic photo of a scene",
        )
    placements = {
        "left": BoundingBox(78, 206, 100, 100),
        "right": BoundingBox(334, 206, 100, 100),
        "top": BoundingBox(206, 78, 100, 100),
        "bottom": BoundingBox(206, 334, 100, 100),
    }
    (obj1, loc1), (obj2, loc2) = task.expected
    return Layout(
        (
            ObjectSpec(f"a {obj1}", placements[loc1]),
            ObjectSpec(f"a {obj2}", placements[loc2]),
        ),
        "A realistic photo of a scene",
    )


def oracle_completion(task: BenchmarkTask) -> str:
    """A completion whose layout satisfies the task's checker."""
    return completion_for_layout(_oracle_layout(task))


def mock_for_tasks(tasks, overrides=None) -> MockLlm:
    """Mock backend answering each task's prompt with its oracle layout.

    ``overrides`` maps a task index to a replacement completion; note
    that tasks sharing a prompt share one table entry, so overriding a
    duplicated prompt affects every duplicate.
    """
    overrides = overrides or {}
    table: dict[str, str] = {}
    for i, task in enumerate(tasks):
        completion = overrides.get(i, oracle_completion(task))
        if i in overrides or task.prompt not in table:
            table[task.prompt] = completion
    return MockLlm(tuple(table.items()))


def format_report_table(report: BenchmarkReport) -> str:
    """Fixed-order accuracy table, one row per benchmark kind."""
    lines = [f"{'Benchmark':<25}Accuracy (%)"]
    for kind in TaskKind:
        if kind in report.accuracy:
            lines.append(f"{kind.display_name:<25}{100 * report.accuracy[kind]:>11.1f}")
    return "\n".join(lines)


def report_to_json(report: BenchmarkReport) -> dict:
    return {
        "n": report.n,
        "seed": report.seed,
        "accuracy": {kind.display_name: report.accuracy[kind] for kind in report.accuracy},
        "tasks": [
            {
                "kind": r.task.kind.value,
                "prompt": r.task.prompt,
                "passed": r.passed,
                "failure_reason": r.failure_reason,
            }
            for r in report.results
        ],
    }
