/**
 * End-to-end loop against a real served 500-plan workspace:
 * select a plan -> read its k=5 neighbor panel -> verify id-order equality
 * with a direct similar call -> insert a drawn copy of the selected plan ->
 * verify the new plan's nearest neighbor is the original at distance <= 1e-3.
 *
 * Requires the python package to be installed (pip install -e ..); the
 * workspace is generated fresh, encoded with the IoU oracle over all pairs
 * and solved before the service starts.
 */

import assert from "node:assert/strict";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { after, before, test } from "node:test";

import { ApiClient } from "../src/api.js";
import { EditorModel, type Category } from "../src/editor.js";
import { Store } from "../src/state.js";

const PYTHON = process.env.PLANSPACE_PYTHON ?? "python3";
const N_PLANS = 500;

/** Deterministic 32-bit PRNG so the corpus reproduces across runs. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Single-room plans on the 8-pixel grid; IoU distances between them carry
 * real geometric structure, so the embedding solve converges tightly. */
function makeCorpus(n: number): object[] {
  const rand = mulberry32(20240808);
  const randInt = (lo: number, hi: number) => lo + Math.floor(rand() * (hi - lo + 1));
  const docs = [];
  for (let i = 0; i < n; i++) {
    const w = 8 * randInt(8, 16);
    const h = 8 * randInt(8, 16);
    const x0 = 8 * randInt(0, (256 - w) / 8);
    const y0 = 8 * randInt(0, (256 - h) / 8);
    docs.push({
      id: `p${String(i).padStart(3, "0")}`,
      rooms: [{ category: "living", box: [x0, y0, x0 + w, y0 + h] }],
    });
  }
  return docs;
}

function runPipeline(workspace: string, args: string[]): void {
  const proc = spawnSync(PYTHON, ["-m", "planspace", ...args], {
    cwd: workspace,
    encoding: "utf-8",
    timeout: 420_000,
  });
  assert.equal(
    proc.status,
    0,
    `planspace ${args.join(" ")} failed:\n${proc.stdout}\n${proc.stderr}`,
  );
}

let workspace: string;
let server: ChildProcess | null = null;
let baseUrl = "";

before(async () => {
  workspace = mkdtempSync(join(tmpdir(), "planspace-e2e-"));
  writeFileSync(join(workspace, "plans.json"), JSON.stringify(makeCorpus(N_PLANS)));
  runPipeline(workspace, ["encode", "--oracle", "iou", "--pairs", "all"]);
  runPipeline(workspace, [
    "solve", "--dim", "3", "--seed", "7", "--restarts", "1",
    "--tol", "1e-11", "--max-iters", "1200",
  ]);

  server = spawn(PYTHON, ["-m", "planspace", "serve", "--port", "0"], {
    cwd: workspace,
    stdio: ["ignore", "pipe", "pipe"],
  });
  const port = await new Promise<number>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 60_000);
    let buffer = "";
    server!.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      for (const line of buffer.split("\n")) {
        if (line.includes('"command": "serve"')) {
          clearTimeout(timer);
          resolve(JSON.parse(line).port as number);
          return;
        }
      }
    });
    server!.on("exit", (code) => reject(new Error(`server exited early (${code})`)));
  });
  baseUrl = `http://127.0.0.1:${port}`;
  // wait until the service answers
  const api = new ApiClient(baseUrl);
  for (let attempt = 0; ; attempt++) {
    try {
      await api.health();
      break;
    } catch (err) {
      if (attempt > 50) throw err;
      await new Promise((r) => setTimeout(r, 100));
    }
  }
});

after(() => {
  server?.kill();
  rmSync(workspace, { recursive: true, force: true });
});

test("full user loop: select, neighbors, insert drawn copy, re-explore", async () => {
  const api = new ApiClient(baseUrl);
  const store = new Store(api);

  await store.loadEmbedding();
  assert.equal(store.ids.length, N_PLANS);
  assert.equal(store.error, null);

  // select the first listed plan, neighbor panel at k=5
  const page = await api.listPlans(1, 10);
  const selected = page.ids[0];
  assert.equal(store.k, 5);
  await store.select(selected);
  assert.ok(store.neighbors, "neighbor panel loaded");
  assert.equal(store.neighbors!.length, 5);

  // the panel must equal a direct API call, id for id, in order
  const direct = await api.similar(selected, 5, "nearest");
  assert.deepEqual(
    store.neighbors!.map((r) => r.id),
    direct.results.map((r) => r.id),
    "panel ids equal the raw API response ids",
  );

  // draw a copy of the selected plan in the editor and insert it
  const planDoc = await api.getPlan(selected);
  const editor = new EditorModel();
  for (const room of planDoc.rooms) {
    const result = editor.addRect(
      room.category as Category, room.box[0], room.box[1], room.box[2], room.box[3],
    );
    assert.ok(result.ok, "copied rooms are grid-aligned and disjoint");
  }
  assert.ok(editor.canSubmit());
  const inserted = await store.insertDrawnPlan(editor);
  assert.ok(inserted.id.startsWith("u-"));
  assert.equal(store.selectedId, inserted.id);
  assert.equal(store.ids.length, N_PLANS + 1);

  // the copy's nearest neighbor is the original, essentially at distance 0
  assert.ok(store.neighbors, "neighbors of the inserted plan loaded");
  const nearest = store.neighbors![0];
  assert.equal(nearest.id, selected, "nearest neighbor is the copied original");
  assert.ok(
    nearest.distance <= 1e-3,
    `distance to the original should be <= 1e-3, got ${nearest.distance}`,
  );

  // follow the feedback loop once more: re-center on the original
  await store.select(nearest.id);
  assert.equal(store.neighborsFor, selected);
  assert.ok(store.neighbors!.some((r) => r.id === inserted.id),
    "the inserted copy shows up in the original's neighborhood");
});

test("snapshot versions advanced exactly once for the single insert", async () => {
  const api = new ApiClient(baseUrl);
  const health = await api.health();
  assert.equal(health.version, 2);
  assert.equal(health.plans, N_PLANS + 1);
});
