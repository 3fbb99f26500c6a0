/**
 * Grid editor model for drawing a new floor plan.
 *
 * Rectangles live on the 256 canvas and snap to an 8-pixel grid, which
 * keeps drawn plans valid for the service and meaningful for the IoU
 * oracle. Overlapping rectangles are rejected at draw time so the editor
 * can only ever hold a valid plan body.
 */

import type { RoomDoc } from "./api.js";

export const CANVAS = 256;
export const GRID = 8;

export const CATEGORIES = [
  "living",
  "bedroom",
  "kitchen",
  "bathroom",
  "balcony",
  "storage",
  "corridor",
  "other",
] as const;

export type Category = (typeof CATEGORIES)[number];

export interface EditorRect {
  category: Category;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export type AddResult =
  | { ok: true; rect: EditorRect }
  | { ok: false; reason: string };

/** Snap a canvas coordinate to the grid, clamped to [0, 256]. */
export function snap(v: number): number {
  const snapped = Math.round(v / GRID) * GRID;
  return Math.min(CANVAS, Math.max(0, snapped));
}

export function rectsOverlap(a: EditorRect, b: EditorRect): boolean {
  const w = Math.min(a.x1, b.x1) - Math.max(a.x0, b.x0);
  const h = Math.min(a.y1, b.y1) - Math.max(a.y0, b.y0);
  return w > 0 && h > 0;
}

export class EditorModel {
  private readonly items: EditorRect[] = [];

  get rects(): readonly EditorRect[] {
    return this.items;
  }

  /**
   * Snap a dragged corner pair and add the rectangle. Degenerate (snaps to
   * zero area) and overlapping rectangles are rejected with a reason the
   * UI can surface next to the offending drag.
   */
  addRect(category: Category, ax: number, ay: number, bx: number, by: number): AddResult {
    const x0 = snap(Math.min(ax, bx));
    const x1 = snap(Math.max(ax, bx));
    const y0 = snap(Math.min(ay, by));
    const y1 = snap(Math.max(ay, by));
    if (x0 >= x1 || y0 >= y1) {
      return { ok: false, reason: "room collapses to zero area on the grid" };
    }
    const rect: EditorRect = { category, x0, y0, x1, y1 };
    for (const existing of this.items) {
      if (rectsOverlap(rect, existing)) {
        return { ok: false, reason: "rooms must not overlap" };
      }
    }
    this.items.push(rect);
    return { ok: true, rect };
  }

  removeLast(): void {
    this.items.pop();
  }

  clear(): void {
    this.items.length = 0;
  }

  /** Submit is possible once at least one room exists. */
  canSubmit(): boolean {
    return this.items.length > 0;
  }

  toPlanDoc(): { rooms: RoomDoc[] } {
    return {
      rooms: this.items.map((r) => ({
        category: r.category,
        box: [r.x0, r.y0, r.x1, r.y1] as [number, number, number, number],
      })),
    };
  }
}
