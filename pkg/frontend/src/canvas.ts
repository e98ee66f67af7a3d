import { LayoutJson } from "./types.js";

// The subset of CanvasRenderingContext2D the renderer touches, so tests
// can record calls without a DOM. Style properties keep the DOM union
// type so a real 2d context satisfies the interface structurally.
export interface DrawContext {
  canvas: { width: number; height: number };
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  measureText(text: string): { width: number };
}

export const BOX_COLOR = "#2563eb";
export const HIGHLIGHT_COLOR = "#f59e0b";
const LABEL_HEIGHT = 16;

/**
 * Draw every labeled box; indices in `highlight` get the accent color
 * and a heavier stroke. The layout's own canvas size sets the scale,
 * so a 512x512 layout fills the element whatever its pixel size.
 */
export function drawLayout(
  ctx: DrawContext,
  layout: LayoutJson | null,
  highlight: ReadonlySet<number> = new Set(),
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  if (!layout || layout.objects.length === 0) return;

  const sx = ctx.canvas.width / layout.canvas[0];
  const sy = ctx.canvas.height / layout.canvas[1];
  ctx.font = "12px ui-sans-serif, system-ui";

  layout.objects.forEach((obj, i) => {
    const [x, y, w, h] = obj.box;
    const color = highlight.has(i) ? HIGHLIGHT_COLOR : BOX_COLOR;
    ctx.lineWidth = highlight.has(i) ? 3 : 2;
    ctx.strokeStyle = color;
    ctx.strokeRect(x * sx, y * sy, w * sx, h * sy);

    const label = obj.description;
    const pad = 4;
    const labelWidth = ctx.measureText(label).width + pad * 2;
    const top = Math.max(0, y * sy - LABEL_HEIGHT);
    ctx.fillStyle = color;
    ctx.fillRect(x * sx, top, labelWidth, LABEL_HEIGHT);
    ctx.fillStyle = "#ffffff";
    ctx.fillText(label, x * sx + pad, top + LABEL_HEIGHT - 4);
  });
}
