"""Visual output: layout SVGs and latent-to-PNG conversion."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from PIL import Image

from .geometry import Layout

__all__ = ["render_layout_svg", "latent_to_png", "latent_to_rgb"]

# Box outline colors cycle through a fixed palette by object index, so
# the same layout always renders to the same bytes.
_PALETTE = (
    "#e6194b",
    "#3cb44b",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
    "#9a6324",
)


def render_layout_svg(layout: Layout) -> str:
    """SVG of the layout: one labeled rectangle per object."""
    width, height = layout.canvas
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}" style="background:#f8f8f4">',
        f"<title>{escape(layout.background_prompt)}</title>",
    ]
    for i, spec in enumerate(layout.objects):
        color = _PALETTE[i % len(_PALETTE)]
        box = spec.box
        parts.append(
            f'<rect x="{box.x}" y="{box.y}" width="{box.w}" height="{box.h}" '
            f'fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{box.x + 4}" y="{box.y + 16}" font-family="sans-serif" '
            f'font-size="14" fill="{color}">{escape(spec.description)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def latent_to_rgb(latent: np.ndarray) -> np.ndarray:
    """(C, H, W) float latent to (H, W, 3) uint8, clipped to [0, 1].

    The first three channels are read as RGB; single- or two-channel
    latents broadcast their first channel to all three.
    """
    if latent.ndim != 3:
        raise ValueError(f"expected (C, H, W), got shape {latent.shape}")
    if latent.shape[0] >= 3:
        rgb = latent[:3]
    else:
        rgb = np.repeat(latent[:1], 3, axis=0)
    clipped = np.clip(rgb, 0.0, 1.0)
    return (clipped * 255.0).round().astype(np.uint8).transpose(1, 2, 0)


def latent_to_png(latent: np.ndarray, path: str | Path, upscale: int = 8) -> None:
    """Write the latent as a nearest-neighbor upscaled PNG."""
    if upscale < 1:
        raise ValueError(f"upscale must be >= 1, got {upscale}")
    pixels = latent_to_rgb(latent)
    image = Image.fromarray(pixels, mode="RGB")
    if upscale > 1:
        image = image.resize((pixels.shape[1] * upscale, pixels.shape[0] * upscale), Image.NEAREST)
    image.save(path, format="PNG")
