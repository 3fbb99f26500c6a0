import assert from "node:assert/strict";
import { test } from "node:test";

import { EditorModel, GRID, rectsOverlap, snap } from "../src/editor.js";

test("snap rounds to the 8-pixel grid and clamps to the canvas", () => {
  assert.equal(snap(0), 0);
  assert.equal(snap(3), 0);
  assert.equal(snap(4), 8);
  assert.equal(snap(13), 16);
  assert.equal(snap(-5), 0);
  assert.equal(snap(270), 256);
  assert.equal(GRID, 8);
});

test("addRect normalizes dragged corners and snaps", () => {
  const editor = new EditorModel();
  const result = editor.addRect("living", 130.7, 90.2, 30.1, 10.4);
  assert.ok(result.ok);
  assert.deepEqual(result.rect, { category: "living", x0: 32, y0: 8, x1: 128, y1: 88 });
});

test("zero-area drags are rejected", () => {
  const editor = new EditorModel();
  const result = editor.addRect("living", 10, 10, 11, 300);
  assert.ok(!result.ok);
  assert.match(result.reason, /zero area/);
  assert.equal(editor.rects.length, 0);
});

test("overlapping rectangles are rejected, adjacent ones accepted", () => {
  const editor = new EditorModel();
  assert.ok(editor.addRect("living", 0, 0, 128, 128).ok);
  const overlap = editor.addRect("bedroom", 64, 64, 192, 192);
  assert.ok(!overlap.ok);
  assert.match(overlap.reason, /overlap/);
  assert.equal(editor.rects.length, 1);
  // sharing an edge is fine with half-open boxes
  assert.ok(editor.addRect("bedroom", 128, 0, 256, 128).ok);
});

test("rectsOverlap detects strict interior intersection only", () => {
  const a = { category: "living" as const, x0: 0, y0: 0, x1: 16, y1: 16 };
  const b = { category: "living" as const, x0: 16, y0: 0, x1: 32, y1: 16 };
  const c = { category: "living" as const, x0: 8, y0: 8, x1: 24, y1: 24 };
  assert.equal(rectsOverlap(a, b), false);
  assert.equal(rectsOverlap(a, c), true);
});

test("submit gate requires at least one room", () => {
  const editor = new EditorModel();
  assert.equal(editor.canSubmit(), false);
  editor.addRect("kitchen", 0, 0, 64, 64);
  assert.equal(editor.canSubmit(), true);
  editor.clear();
  assert.equal(editor.canSubmit(), false);
});

test("toPlanDoc emits the service plan body", () => {
  const editor = new EditorModel();
  editor.addRect("living", 0, 0, 64, 64);
  editor.addRect("bathroom", 64, 0, 96, 32);
  assert.deepEqual(editor.toPlanDoc(), {
    rooms: [
      { category: "living", box: [0, 0, 64, 64] },
      { category: "bathroom", box: [64, 0, 96, 32] },
    ],
  });
});

test("removeLast pops the newest rectangle", () => {
  const editor = new EditorModel();
  editor.addRect("living", 0, 0, 64, 64);
  editor.addRect("bedroom", 64, 0, 128, 64);
  editor.removeLast();
  assert.equal(editor.rects.length, 1);
  assert.equal(editor.rects[0].category, "living");
});
