"""Layout-guided generation over the toy diffusion engine.

The pieces mirror a layout-to-image pipeline at desk scale: a
procedural shape renderer supplies per-object target images (standing
in for text-conditioned generation), an attenuated per-object pull on
the noise prediction supplies a spatial control signal whose magnitude
doubles as a saliency map, a threshold flood fill turns saliency into
a foreground mask, and composition freezes masked foreground latents
along their inversion trajectories for the first ``1 - r`` fraction of
denoising steps before letting the whole image evolve freely.

Coordinates: layouts arrive in canvas space and must be scaled to the
latent grid (see :func:`layoutlab.geometry.scale_layout`) before any
function here sees them; every box below is in latent pixels.
"""

from __future__ import annotations

import json
import re
import time
import warnings
import zlib
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dsl import ParseDiagnostic, extract_layout_block, parse_layout, serialize_layout
from .geometry import (
    DEFAULT_CANVAS,
    BoundingBox,
    Layout,
    ObjectSpec,
    box_center,
    layout_to_json,
    round_half_up,
    scale_layout,
    validate_layout,
)
from .diffusion import (
    Condition,
    NoiseSchedule,
    ObjectTerm,
    Trajectory,
    ddim_invert,
    ddim_sample,
    ddim_step,
    make_schedule,
    sampling_grid,
    save_latent,
    save_trajectory,
)
from .llm import DEFAULT_TEMPLATE, LlmConfig, build_prompt, request_layout

__all__ = [
    "Shape",
    "ObjectDescriptor",
    "GenerationConfig",
    "SaliencyRecorder",
    "ForegroundAsset",
    "PipelineResult",
    "LayoutStageError",
    "ImageStageError",
    "parse_descriptor",
    "background_color",
    "render_target",
    "render_background",
    "shape_support",
    "make_composite_predictor",
    "asset_noise",
    "scene_noise",
    "generate_single_object",
    "refine_mask",
    "build_foreground_asset",
    "place_foreground",
    "compose_and_generate",
    "generate_image",
    "run_pipeline",
    "layout_from_caption",
]


class Shape(Enum):
    CIRCLE = "circle"
    SQUARE = "square"
    TRIANGLE = "triangle"


# Named colors understood in object descriptions and background prompts.
COLOR_VALUES: dict[str, tuple[float, float, float]] = {
    "red": (1.0, 0.0, 0.0),
    "orange": (1.0, 0.5, 0.0),
    "yellow": (1.0, 1.0, 0.0),
    "green": (0.0, 0.8, 0.0),
    "blue": (0.0, 0.0, 1.0),
    "purple": (0.6, 0.0, 0.8),
    "pink": (1.0, 0.6, 0.8),
    "brown": (0.55, 0.35, 0.15),
    "black": (0.0, 0.0, 0.0),
    "white": (1.0, 1.0, 1.0),
    "gray": (0.5, 0.5, 0.5),
}

DEFAULT_OBJECT_COLOR = COLOR_VALUES["gray"]
# Backgrounds without a recognized color word get a light neutral fill,
# deliberately distinct from the gray object fallback so an
# unrecognized object on a default background still stands out.
DEFAULT_BACKGROUND_COLOR = (0.8, 0.8, 0.8)


@dataclass(frozen=True)
class ObjectDescriptor:
    """What to draw for one object: a primitive shape and a fill color."""

    shape: Shape
    color: tuple[float, float, float]


def _find_keyword(text: str, words) -> str | None:
    for word in words:
        if re.search(rf"\b{re.escape(word)}\b", text, re.IGNORECASE):
            return word
    return None


def parse_descriptor(description: str) -> ObjectDescriptor:
    """Map free text to a drawable descriptor by keyword lookup.

    Unknown shapes fall back to a circle and unknown colors to gray,
    each with a warning, so arbitrary captions still produce output.
    """
    shape_word = _find_keyword(description, [s.value for s in Shape])
    if shape_word is None:
        warnings.warn(f"no shape keyword in {description!r}; drawing a circle")
        shape = Shape.CIRCLE
    else:
        shape = Shape(shape_word)
    color_word = _find_keyword(description, COLOR_VALUES)
    if color_word is None:
        warnings.warn(f"no color keyword in {description!r}; using gray")
        color = DEFAULT_OBJECT_COLOR
    else:
        color = COLOR_VALUES[color_word]
    return ObjectDescriptor(shape, color)


def background_color(background_prompt: str) -> tuple[float, float, float]:
    """Fill color for a background prompt (light neutral when unnamed)."""
    word = _find_keyword(background_prompt, COLOR_VALUES)
    return COLOR_VALUES[word] if word else DEFAULT_BACKGROUND_COLOR


@dataclass(frozen=True)
class GenerationConfig:
    """Knobs for the image stage.

    ``r`` splits denoising into a frozen prefix (foreground pinned to
    its inversion trajectory) and a free suffix of ``r * n_steps``
    steps; ``attenuation`` scales object pulls outside their boxes;
    ``mask_threshold`` is the saliency cut for mask extraction.
    """

    r: float = 0.3
    n_steps: int = 50
    seed: int = 0
    attenuation: float = 0.1
    mask_threshold: float = 0.5
    latent_shape: tuple[int, int, int] = (4, 64, 64)
    canvas: tuple[int, int] = DEFAULT_CANVAS
    timesteps: int = 1000

    def __post_init__(self) -> None:
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must be in [0, 1], got {self.r}")
        if not 0.0 <= self.attenuation <= 1.0:
            raise ValueError(f"attenuation must be in [0, 1], got {self.attenuation}")
        if not 0.0 < self.mask_threshold < 1.0:
            raise ValueError(f"mask_threshold must be in (0, 1), got {self.mask_threshold}")
        if len(self.latent_shape) != 3 or any(d < 1 for d in self.latent_shape):
            raise ValueError(f"latent_shape must be (C, H, W) positive, got {self.latent_shape}")
        if not 1 <= self.n_steps <= self.timesteps:
            raise ValueError(f"n_steps must be in [1, {self.timesteps}], got {self.n_steps}")

    def schedule(self) -> NoiseSchedule:
        return make_schedule(self.timesteps)

    def split_steps(self) -> tuple[int, int]:
        """(frozen, free) step counts; free = floor(r * n_steps)."""
        # The epsilon absorbs float artifacts like 0.3 * 50 = 15.000000000000002.
        free = int(np.floor(self.r * self.n_steps + 1e-9))
        return self.n_steps - free, free


# --- procedural rendering -------------------------------------------------


def shape_support(shape: Shape, box: BoundingBox, grid_hw: tuple[int, int]) -> np.ndarray:
    """Boolean (H, W) raster of ``shape`` centered in ``box`` at 80% extent.

    A pixel belongs to the shape when its center satisfies the
    inclusive analytic inside-test; pixels outside the grid are
    clipped away.
    """
    height, width = grid_hw
    cx, cy = box_center(box)
    half_w, half_h = 0.4 * box.w, 0.4 * box.h
    ys, xs = np.mgrid[0:height, 0:width]
    px = xs + 0.5
    py = ys + 0.5
    if shape is Shape.CIRCLE:
        return ((px - cx) / half_w) ** 2 + ((py - cy) / half_h) ** 2 <= 1.0
    if shape is Shape.SQUARE:
        return (np.abs(px - cx) <= half_w) & (np.abs(py - cy) <= half_h)
    # Apex-up triangle inscribed in the 80% box: apex on the top edge
    # midpoint, base along the bottom edge.
    top, bottom = cy - half_h, cy + half_h
    inside_rows = (py >= top) & (py <= bottom)
    # Width grows linearly from 0 at the apex to half_w at the base.
    frac = np.clip((py - top) / (bottom - top), 0.0, 1.0)
    return inside_rows & (np.abs(px - cx) <= frac * half_w)


def _color_plane(color: tuple[float, float, float], channels: int) -> np.ndarray:
    """Per-channel values: RGB on the first three, luminance beyond."""
    lum = sum(color) / 3.0
    if channels < 3:
        values = [lum] * channels
    else:
        values = list(color) + [lum] * (channels - 3)
    return np.asarray(values, dtype=np.float64)


def render_background(background_prompt: str, latent_shape: tuple[int, int, int]) -> np.ndarray:
    channels, height, width = latent_shape
    values = _color_plane(background_color(background_prompt), channels)
    return np.broadcast_to(values[:, None, None], (channels, height, width)).copy()


def render_target(
    descriptor: ObjectDescriptor,
    box: BoundingBox,
    background_prompt: str,
    latent_shape: tuple[int, int, int],
) -> np.ndarray:
    """Background fill plus the descriptor's shape drawn inside ``box``."""
    target = render_background(background_prompt, latent_shape)
    support = shape_support(descriptor.shape, box, target.shape[1:])
    if not support.any():
        raise ValueError(f"box {box.as_list()} is degenerate on grid {latent_shape[1:]}")
    target[:, support] = _color_plane(descriptor.color, latent_shape[0])[:, None]
    return target


def _box_mask(box: BoundingBox, grid_hw: tuple[int, int], outside: float) -> np.ndarray:
    """(H, W) grid: 1 inside the box, ``outside`` elsewhere."""
    mask = np.full(grid_hw, outside, dtype=np.float64)
    y0, y1 = max(box.y, 0), min(box.y + box.h, grid_hw[0])
    x0, x1 = max(box.x, 0), min(box.x + box.w, grid_hw[1])
    if y0 < y1 and x0 < x1:
        mask[y0:y1, x0:x1] = 1.0
    return mask


# --- composite condition --------------------------------------------------


class SaliencyRecorder:
    """Accumulates per-object pull magnitudes across predictor calls."""

    def __init__(self, n_objects: int, grid_hw: tuple[int, int]):
        self.totals = [np.zeros(grid_hw) for _ in range(n_objects)]

    def record(self, index: int, magnitude: np.ndarray) -> None:
        self.totals[index] += magnitude

    def saliency(self, index: int) -> np.ndarray:
        """Accumulated magnitude normalized to max 1 (zeros if inactive)."""
        total = self.totals[index]
        peak = float(total.max())
        return total / peak if peak > 0 else total.copy()


def make_composite_predictor(
    schedule: NoiseSchedule, condition: Condition, recorder: SaliencyRecorder | None = None
):
    """Blend the background's exact predictor with attenuated object pulls.

    Each object shifts the prediction by
    ``mask * sqrt(ab)/sqrt(1-ab) * (bg_target - obj_target)`` — the
    exact difference between the object's and the background's
    closed-form predictors, which does not depend on the latent.
    Computing it from the targets directly keeps the pull bitwise-equal
    across pixels of equal color, so saliency ties break by pixel order
    rather than rounding noise.
    """
    bg = condition.background_target

    def predict(x, t, _condition=None):
        ab = schedule.alpha_bar(t)
        if not ab < 1.0:
            raise ValueError(f"predictor undefined at t={t} (alpha_bar is 1)")
        scale = np.sqrt(ab) / np.sqrt(1.0 - ab)
        eps = (x - np.sqrt(ab) * bg) / np.sqrt(1.0 - ab)
        for i, term in enumerate(condition.object_terms):
            pull = term.attenuation[None, :, :] * (scale * (bg - term.target))
            if recorder is not None:
                recorder.record(i, np.sqrt(np.sum(pull**2, axis=0)))
            eps = eps + pull
        return eps

    return predict


# --- seeding --------------------------------------------------------------
#
# Every latent draw flows from a SeedSequence keyed by the run seed
# plus a stream tag, so per-box work is order-independent and the
# whole run is reproducible from one integer.


def _asset_key(spec: ObjectSpec) -> int:
    box = spec.box
    text = f"{spec.description}|{box.x},{box.y},{box.w},{box.h}"
    return zlib.crc32(text.encode("utf-8"))


def asset_noise(spec: ObjectSpec, config: GenerationConfig) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=[config.seed, 1, _asset_key(spec)])
    return np.random.default_rng(seq).standard_normal(config.latent_shape)


def scene_noise(config: GenerationConfig) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=[config.seed, 2])
    return np.random.default_rng(seq).standard_normal(config.latent_shape)


# --- single-object stage --------------------------------------------------


def _object_condition(
    spec: ObjectSpec, background_prompt: str, config: GenerationConfig
) -> Condition:
    descriptor = parse_descriptor(spec.description)
    target = render_target(descriptor, spec.box, background_prompt, config.latent_shape)
    mask = _box_mask(spec.box, config.latent_shape[1:], config.attenuation)
    bg = render_background(background_prompt, config.latent_shape)
    return Condition(bg, (ObjectTerm(target, spec.box, mask),))


def generate_single_object(
    spec: ObjectSpec, background_prompt: str, config: GenerationConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Sample one object against the background; return (sample, saliency).

    The saliency map is the accumulated object-pull magnitude over all
    sampling steps, normalized to max 1; it is identically zero only
    when the object render matches the background everywhere (e.g. a
    gray square on a gray background).
    """
    condition = _object_condition(spec, background_prompt, config)
    schedule = config.schedule()
    recorder = SaliencyRecorder(1, config.latent_shape[1:])
    predictor = make_composite_predictor(schedule, condition, recorder)
    trajectory = ddim_sample(asset_noise(spec, config), schedule, predictor, condition, config.n_steps)
    return trajectory.latents[0], recorder.saliency(0)


def refine_mask(saliency: np.ndarray, threshold: float) -> tuple[np.ndarray, BoundingBox]:
    """Extract the mask around the saliency peak.

    The seed is the argmax pixel (ties resolve to the smallest row,
    then column); the mask is the 4-connected component of
    ``saliency >= threshold * max`` containing the seed, and the outer
    box is its tight bounds.
    """
    peak = float(saliency.max())
    if peak <= 0:
        raise ValueError("saliency has no positive peak")
    seed = np.unravel_index(int(np.argmax(saliency)), saliency.shape)
    candidates = saliency >= threshold * peak
    mask = np.zeros_like(candidates)
    stack = [seed]
    mask[seed] = True
    height, width = saliency.shape
    while stack:
        r, c = stack.pop()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < height and 0 <= nc < width and candidates[nr, nc] and not mask[nr, nc]:
                mask[nr, nc] = True
                stack.append((nr, nc))
    return mask, _tight_box(mask)


def _tight_box(mask: np.ndarray) -> BoundingBox:
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    return BoundingBox(
        x=int(cols[0]),
        y=int(rows[0]),
        w=int(cols[-1] - cols[0] + 1),
        h=int(rows[-1] - rows[0] + 1),
    )


@dataclass(frozen=True)
class ForegroundAsset:
    """Everything composition needs for one boxed object."""

    trajectory: Trajectory
    mask: np.ndarray
    mask_outer_box: BoundingBox
    spec: ObjectSpec
    term: ObjectTerm

    def __post_init__(self) -> None:
        if not self.mask.any():
            raise ValueError("foreground mask is empty")


def build_foreground_asset(
    spec: ObjectSpec, background_prompt: str, config: GenerationConfig
) -> ForegroundAsset:
    """Sample, mask, and invert one object.

    The trajectory is stored unmasked — masking happens at placement —
    because a masked latent is no longer on the inversion path the
    frozen phase replays.
    """
    condition = _object_condition(spec, background_prompt, config)
    schedule = config.schedule()
    recorder = SaliencyRecorder(1, config.latent_shape[1:])
    predictor = make_composite_predictor(schedule, condition, recorder)
    sample_traj = ddim_sample(
        asset_noise(spec, config), schedule, predictor, condition, config.n_steps
    )
    sample = sample_traj.latents[0]
    saliency = recorder.saliency(0)
    if saliency.max() > 0:
        mask, outer = refine_mask(saliency, config.mask_threshold)
    else:
        warnings.warn(
            f"object {spec.description!r} is indistinguishable from the background; "
            "masking its drawn shape directly"
        )
        descriptor = parse_descriptor(spec.description)
        mask = shape_support(descriptor.shape, spec.box, config.latent_shape[1:])
        outer = _tight_box(mask)
    inversion = ddim_invert(sample, schedule, predictor, condition, config.n_steps)
    return ForegroundAsset(inversion, mask, outer, spec, condition.object_terms[0])


# --- composition ----------------------------------------------------------


def place_foreground(
    background_latent: np.ndarray, asset: ForegroundAsset, step_latent: np.ndarray
) -> np.ndarray:
    """Overwrite masked foreground pixels, centered on the spec box.

    The mask and latent translate together by the integer offset
    (round-half-up) that moves the mask's outer-box center onto the
    spec-box center; pixels translated off the grid are dropped.
    """
    if background_latent.shape != step_latent.shape:
        raise ValueError(
            f"shape mismatch: {background_latent.shape} vs {step_latent.shape}"
        )
    spec_cx, spec_cy = box_center(asset.spec.box)
    outer_cx, outer_cy = box_center(asset.mask_outer_box)
    dx = round_half_up(spec_cx - outer_cx)
    dy = round_half_up(spec_cy - outer_cy)
    rows, cols = np.nonzero(asset.mask)
    new_rows, new_cols = rows + dy, cols + dx
    height, width = background_latent.shape[1:]
    keep = (new_rows >= 0) & (new_rows < height) & (new_cols >= 0) & (new_cols < width)
    out = background_latent.copy()
    out[:, new_rows[keep], new_cols[keep]] = step_latent[:, rows[keep], cols[keep]]
    return out


def compose_and_generate(
    layout: Layout,
    assets: list[ForegroundAsset],
    config: GenerationConfig,
    record_steps: bool = False,
) -> tuple[np.ndarray, dict]:
    """Generate the full scene from per-object assets.

    ``layout`` must already be in latent coordinates and match the
    assets one-to-one in order.  Composition seeds a fresh background
    latent, pastes each asset's top-step inversion latent, then
    denoises: the first ``n - floor(r*n)`` steps re-pin every
    foreground to its trajectory after each step, and the remainder
    evolve the whole latent freely.  With ``record_steps`` the returned
    record carries every intermediate as ``step_latents``: a list of
    (timestep, latent) from the composed start down to the output.
    """
    if len(assets) != len(layout.objects):
        raise ValueError(f"{len(assets)} assets for {len(layout.objects)} layout objects")
    for asset, spec in zip(assets, layout.objects):
        if asset.spec.box != spec.box:
            raise ValueError(f"asset box {asset.spec.box} does not match layout box {spec.box}")

    schedule = config.schedule()
    condition = Condition(
        render_background(layout.background_prompt, config.latent_shape),
        tuple(asset.term for asset in assets),
    )
    predictor = make_composite_predictor(schedule, condition)
    frozen, free = config.split_steps()
    grid = sampling_grid(schedule.timesteps, config.n_steps)

    x = scene_noise(config)
    for asset in assets:
        x = place_foreground(x, asset, asset.trajectory.latent_at(grid[0]))
    step_latents = [(grid[0], x)]
    started = time.perf_counter()
    for i, (t_from, t_to) in enumerate(zip(grid[:-1], grid[1:])):
        x = ddim_step(x, t_from, t_to, schedule, predictor, condition)
        if i < frozen:
            for asset in assets:
                x = place_foreground(x, asset, asset.trajectory.latent_at(t_to))
        if record_steps:
            step_latents.append((t_to, x))
    record = {
        "seed": config.seed,
        "n_steps": config.n_steps,
        "r": config.r,
        "frozen_steps": frozen,
        "free_steps": free,
        "grid": [int(t) for t in grid],
        "objects": len(assets),
        "denoise_seconds": round(time.perf_counter() - started, 6),
    }
    if record_steps:
        record["step_latents"] = step_latents
    return x, record


# --- full pipeline --------------------------------------------------------


class LayoutStageError(Exception):
    """Text-to-layout failed: transport, parse, or validation."""


class ImageStageError(Exception):
    """Layout-to-image failed."""


def layout_from_caption(
    caption: str,
    llm_config: LlmConfig,
    *,
    backend=None,
    template=None,
    canvas: tuple[int, int] = DEFAULT_CANVAS,
) -> Layout:
    """One-shot caption -> layout via the configured completion backend."""
    prompt = build_prompt(template or DEFAULT_TEMPLATE, caption)
    completion = request_layout(llm_config, prompt, backend=backend)
    block = extract_layout_block(completion.text)
    parsed = block if isinstance(block, ParseDiagnostic) else parse_layout(block, canvas=canvas)
    if isinstance(parsed, ParseDiagnostic):
        raise LayoutStageError(f"completion did not parse: {parsed.kind.value}: {parsed.message}")
    return parsed


@dataclass(frozen=True)
class PipelineResult:
    layout: Layout
    image: np.ndarray
    run_dir: Path | None
    artifacts: dict[str, Path] = field(default_factory=dict)
    record: dict = field(default_factory=dict)


def generate_image(
    layout: Layout,
    gen_config: GenerationConfig,
    *,
    out_dir: str | Path | None = None,
    caption: str = "",
) -> PipelineResult:
    """The image stage alone: validate, scale, build assets, compose.

    ``layout`` is in canvas coordinates.  Out-of-bounds boxes abort
    with :class:`LayoutStageError` before any diffusion work;
    overlapping boxes only warn, since composition resolves overlap by
    layout order.  When ``out_dir`` is given, all intermediates are
    persisted beneath it.
    """
    report = validate_layout(layout)
    if report.out_of_bounds:
        raise LayoutStageError(
            f"{len(report.out_of_bounds)} box(es) leave the canvas: "
            f"{[layout.objects[i].box.as_list() for i in report.out_of_bounds]}"
        )
    if report.overlapping:
        warnings.warn(f"overlapping boxes {report.overlapping}; later objects draw on top")

    started = time.perf_counter()
    _, height, width = gen_config.latent_shape
    scaled = scale_layout(layout, (width, height))
    try:
        assets = [
            build_foreground_asset(spec, scaled.background_prompt, gen_config)
            for spec in scaled.objects
        ]
        image, record = compose_and_generate(scaled, assets, gen_config)
    except Exception as exc:
        raise ImageStageError(str(exc)) from exc
    record["image_seconds"] = round(time.perf_counter() - started, 6)

    run_dir = None
    artifacts: dict[str, Path] = {}
    if out_dir is not None:
        run_dir = Path(out_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        artifacts = _persist_run(run_dir, caption, layout, assets, image, gen_config, record)
    return PipelineResult(layout, image, run_dir, artifacts, record)


def run_pipeline(
    caption: str,
    llm_config: LlmConfig,
    gen_config: GenerationConfig,
    *,
    backend=None,
    template=None,
    out_dir: str | Path | None = None,
) -> PipelineResult:
    """Caption to image: the text stage feeding :func:`generate_image`."""
    started = time.perf_counter()
    try:
        layout = layout_from_caption(
            caption, llm_config, backend=backend, template=template, canvas=gen_config.canvas
        )
    except LayoutStageError:
        raise
    except Exception as exc:
        raise LayoutStageError(str(exc)) from exc
    layout_seconds = round(time.perf_counter() - started, 6)
    result = generate_image(layout, gen_config, out_dir=out_dir, caption=caption)
    result.record["layout_seconds"] = layout_seconds
    return result


def _write_pbm(path: Path, mask: np.ndarray) -> None:
    lines = [" ".join("1" if v else "0" for v in row) for row in mask]
    path.write_text(f"P1\n{mask.shape[1]} {mask.shape[0]}\n" + "\n".join(lines) + "\n")


def _persist_run(
    run_dir: Path,
    caption: str,
    layout: Layout,
    assets: list[ForegroundAsset],
    image: np.ndarray,
    config: GenerationConfig,
    record: dict,
) -> dict[str, Path]:
    artifacts: dict[str, Path] = {}

    def emit(name: str, writer) -> Path:
        path = run_dir / name
        writer(path)
        artifacts[name] = path
        return path

    emit("layout.json", lambda p: p.write_text(json.dumps(layout_to_json(layout), indent=2) + "\n"))
    for i, asset in enumerate(assets):
        emit(f"box_{i:02d}.traj", lambda p, a=asset: save_trajectory(p, a.trajectory, seed=config.seed))
        emit(f"box_{i:02d}.mask.pbm", lambda p, a=asset: _write_pbm(p, a.mask))
    emit("image.f32", lambda p: save_latent(p, image))

    from .render import latent_to_png  # local import: Pillow only needed here

    emit("image.png", lambda p: latent_to_png(image, p))
    run_info = {
        "caption": caption,
        "layout_text": serialize_layout(layout),
        "config": {
            "r": config.r,
            "n_steps": config.n_steps,
            "seed": config.seed,
            "attenuation": config.attenuation,
            "mask_threshold": config.mask_threshold,
            "latent_shape": list(config.latent_shape),
            "canvas": list(config.canvas),
            "timesteps": config.timesteps,
        },
        "stages": {"layout": "done", "image": "done"},
        "record": record,
    }
    emit("run.json", lambda p: p.write_text(json.dumps(run_info, indent=2) + "\n"))
    return artifacts
