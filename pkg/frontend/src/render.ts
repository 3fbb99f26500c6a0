/**
 * Canvas drawing helpers (browser only). Pure functions of their inputs;
 * all state lives in the store.
 */

import type { RasterDoc } from "./api.js";
import { ROOM_COLORS, SELECTED_COLOR, clusterColor } from "./colors.js";
import type { EditorRect } from "./editor.js";
import { CANVAS } from "./editor.js";

export function drawPointCloud(
  ctx: CanvasRenderingContext2D,
  projected: Float32Array,
  labelOf: (index: number) => number | null,
  selectedIndex: number | null,
): void {
  const { width, height } = ctx.canvas;
  ctx.fillStyle = "#12141a";
  ctx.fillRect(0, 0, width, height);
  const n = projected.length / 3;
  if (n === 0) {
    ctx.fillStyle = "#8b93a7";
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("no data", width / 2, height / 2);
    return;
  }
  // painter's order: far to near
  const order = Array.from({ length: n }, (_, i) => i);
  order.sort((a, b) => projected[a * 3 + 2] - projected[b * 3 + 2]);
  for (const i of order) {
    const x = projected[i * 3];
    const y = projected[i * 3 + 1];
    const depth = projected[i * 3 + 2];
    const r = 2.2 + 1.3 * (depth + 1);
    ctx.beginPath();
    ctx.arc(x, y, r, 0, Math.PI * 2);
    ctx.fillStyle = clusterColor(labelOf(i));
    ctx.fill();
  }
  if (selectedIndex !== null) {
    const x = projected[selectedIndex * 3];
    const y = projected[selectedIndex * 3 + 1];
    ctx.beginPath();
    ctx.arc(x, y, 7, 0, Math.PI * 2);
    ctx.strokeStyle = SELECTED_COLOR;
    ctx.lineWidth = 2;
    ctx.stroke();
  }
}

/** Render a raster document into a canvas, one cell per scaled pixel block. */
export function drawRaster(canvas: HTMLCanvasElement, doc: RasterDoc): void {
  const res = doc.resolution;
  const off = document.createElement("canvas");
  off.width = res;
  off.height = res;
  const octx = off.getContext("2d");
  if (!octx) {
    return;
  }
  const image = octx.createImageData(res, res);
  for (let y = 0; y < res; y++) {
    const row = doc.cells[y];
    for (let x = 0; x < res; x++) {
      const color = ROOM_COLORS[row[x]] ?? ROOM_COLORS[0];
      const k = (y * res + x) * 4;
      image.data[k] = parseInt(color.slice(1, 3), 16);
      image.data[k + 1] = parseInt(color.slice(3, 5), 16);
      image.data[k + 2] = parseInt(color.slice(5, 7), 16);
      image.data[k + 3] = 255;
    }
  }
  octx.putImageData(image, 0, 0);
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

export function drawEditor(
  canvas: HTMLCanvasElement,
  rects: readonly EditorRect[],
  preview: { x0: number; y0: number; x1: number; y1: number } | null,
  rejected: boolean,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const scale = canvas.width / CANVAS;
  ctx.fillStyle = "#1b1e24";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#262b34";
  ctx.lineWidth = 1;
  for (let g = 0; g <= CANVAS; g += 8) {
    ctx.beginPath();
    ctx.moveTo(g * scale, 0);
    ctx.lineTo(g * scale, canvas.height);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(0, g * scale);
    ctx.lineTo(canvas.width, g * scale);
    ctx.stroke();
  }
  const codeOf: Record<string, number> = {
    living: 1, bedroom: 2, kitchen: 3, bathroom: 4,
    balcony: 5, storage: 6, corridor: 7, other: 8,
  };
  for (const rect of rects) {
    ctx.fillStyle = ROOM_COLORS[codeOf[rect.category]];
    ctx.fillRect(rect.x0 * scale, rect.y0 * scale,
                 (rect.x1 - rect.x0) * scale, (rect.y1 - rect.y0) * scale);
    ctx.strokeStyle = "#12141a";
    ctx.strokeRect(rect.x0 * scale, rect.y0 * scale,
                   (rect.x1 - rect.x0) * scale, (rect.y1 - rect.y0) * scale);
  }
  if (preview) {
    ctx.strokeStyle = rejected ? "#e45756" : "#ffffff";
    ctx.lineWidth = rejected ? 2 : 1;
    ctx.setLineDash([4, 3]);
    ctx.strokeRect(
      Math.min(preview.x0, preview.x1) * scale,
      Math.min(preview.y0, preview.y1) * scale,
      Math.abs(preview.x1 - preview.x0) * scale,
      Math.abs(preview.y1 - preview.y0) * scale,
    );
    ctx.setLineDash([]);
  }
}
