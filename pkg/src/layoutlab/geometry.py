"""Axis-aligned box layouts on an integer canvas.

Value types shared by the whole package: bounding boxes, object specs,
and whole-canvas layouts, plus the geometric checks everything else
builds on.  All types are immutable and all operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DEFAULT_CANVAS",
    "BoundingBox",
    "ObjectSpec",
    "Layout",
    "ValidationReport",
    "round_half_up",
    "box_center",
    "intersection_area",
    "validate_layout",
    "scale_layout",
    "layout_to_json",
    "layout_from_json",
]

DEFAULT_CANVAS = (512, 512)


def round_half_up(value: float) -> int:
    """Round to the nearest integer with exact halves going toward +inf."""
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given as its top-left corner plus extent.

    Corner coordinates may be negative (out-of-bounds boxes are
    representable; ``validate_layout`` reports them), but the extent
    must be positive.
    """

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValueError(f"box field {name!r} must be an int, got {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extent must be positive, got w={self.w}, h={self.h}")

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]


@dataclass(frozen=True)
class ObjectSpec:
    """One object to draw: a free-text description and where it goes."""

    description: str
    box: BoundingBox

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise ValueError("object description must be non-empty")


@dataclass(frozen=True)
class Layout:
    """An ordered set of objects plus a background prompt on one canvas."""

    objects: tuple[ObjectSpec, ...]
    background_prompt: str
    canvas: tuple[int, int] = DEFAULT_CANVAS

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "canvas", (int(self.canvas[0]), int(self.canvas[1])))
        if self.canvas[0] <= 0 or self.canvas[1] <= 0:
            raise ValueError(f"canvas must be positive, got {self.canvas}")
        if not self.background_prompt.strip():
            raise ValueError("background prompt must be non-empty")


@dataclass(frozen=True)
class ValidationReport:
    """Indices of boxes that fall off the canvas, and pairs that overlap."""

    out_of_bounds: tuple[int, ...]
    overlapping: tuple[tuple[int, int], ...]

    @property
    def is_clean(self) -> bool:
        return not self.out_of_bounds and not self.overlapping


def box_center(box: BoundingBox) -> tuple[float, float]:
    """Center point of a box in real (not integer) coordinates."""
    return (box.x + box.w / 2.0, box.y + box.h / 2.0)


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Area of the overlap between two boxes; 0.0 when they only touch."""
    overlap_w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    overlap_h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if overlap_w <= 0 or overlap_h <= 0:
        return 0.0
    return float(overlap_w) * float(overlap_h)


def validate_layout(layout: Layout) -> ValidationReport:
    """Report out-of-bounds boxes and positively overlapping pairs.

    Overlap is advisory (models routinely emit slightly intersecting
    boxes), so this never raises; callers decide what to do with it.
    """
    canvas_w, canvas_h = layout.canvas
    out_of_bounds = []
    for i, spec in enumerate(layout.objects):
        b = spec.box
        if b.x < 0 or b.y < 0 or b.x + b.w > canvas_w or b.y + b.h > canvas_h:
            out_of_bounds.append(i)
    overlapping = []
    for i in range(len(layout.objects)):
        for j in range(i + 1, len(layout.objects)):
            if intersection_area(layout.objects[i].box, layout.objects[j].box) > 0:
                overlapping.append((i, j))
    return ValidationReport(tuple(out_of_bounds), tuple(overlapping))


def scale_layout(layout: Layout, target_canvas: tuple[int, int]) -> Layout:
    """Rescale a layout onto a new canvas.

    Box corners and extents scale proportionally and are rounded
    half-up to integers; extents that would collapse are clamped to 1.
    Descriptions and the background prompt pass through unchanged.
    """
    target_w, target_h = int(target_canvas[0]), int(target_canvas[1])
    if target_w <= 0 or target_h <= 0:
        raise ValueError(f"target canvas must be positive, got {target_canvas}")
    sx = target_w / layout.canvas[0]
    sy = target_h / layout.canvas[1]
    scaled = []
    for spec in layout.objects:
        b = spec.box
        scaled.append(
            ObjectSpec(
                spec.description,
                BoundingBox(
                    round_half_up(b.x * sx),
                    round_half_up(b.y * sy),
                    max(1, round_half_up(b.w * sx)),
                    max(1, round_half_up(b.h * sy)),
                ),
            )
        )
    return Layout(tuple(scaled), layout.background_prompt, (target_w, target_h))


def layout_to_json(layout: Layout) -> dict:
    """Canonical JSON-ready form of a layout."""
    return {
        "canvas": [layout.canvas[0], layout.canvas[1]],
        "background_prompt": layout.background_prompt,
        "objects": [
            {"description": spec.description, "box": spec.box.as_list()}
            for spec in layout.objects
        ],
    }


def layout_from_json(payload: dict) -> Layout:
    """Inverse of :func:`layout_to_json`.  Raises ValueError on bad shape."""
    try:
        canvas = payload.get("canvas", DEFAULT_CANVAS)
        objects = tuple(
            ObjectSpec(entry["description"], BoundingBox(*entry["box"]))
            for entry in payload.get("objects", [])
        )
        return Layout(objects, payload["background_prompt"], (canvas[0], canvas[1]))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed layout payload: {exc}") from exc
