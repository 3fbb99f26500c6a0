/**
 * Browser bootstrap: wires the store to the canvases and panels.
 */

import { ApiClient } from "./api.js";
import { CATEGORIES, CANVAS, EditorModel, type Category } from "./editor.js";
import { Store } from "./state.js";
import { defaultCamera, fitBounds, pick, projectPoints } from "./projection.js";
import { drawEditor, drawPointCloud, drawRaster } from "./render.js";

const PICK_RADIUS = 8;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function main(): void {
  const api = new ApiClient("");
  const store = new Store(api);
  const camera = defaultCamera();
  const editor = new EditorModel();

  const cloud = el<HTMLCanvasElement>("cloud");
  const cloudCtx = cloud.getContext("2d")!;
  const banner = el<HTMLDivElement>("banner");
  const retry = el<HTMLButtonElement>("retry");
  const neighborList = el<HTMLDivElement>("neighbors");
  const selectedLabel = el<HTMLSpanElement>("selected-label");
  const selectedThumb = el<HTMLCanvasElement>("selected-thumb");
  const kSlider = el<HTMLInputElement>("k-slider");
  const kValue = el<HTMLSpanElement>("k-value");
  const orderToggle = el<HTMLButtonElement>("order-toggle");
  const clusterInput = el<HTMLInputElement>("cluster-k");
  const clusterButton = el<HTMLButtonElement>("cluster-apply");
  const editorCanvas = el<HTMLCanvasElement>("editor");
  const palette = el<HTMLDivElement>("palette");
  const submitButton = el<HTMLButtonElement>("submit-plan");
  const clearButton = el<HTMLButtonElement>("clear-plan");
  const undoButton = el<HTMLButtonElement>("undo-plan");
  const editorNote = el<HTMLDivElement>("editor-note");

  let projected: Float32Array = new Float32Array(0);
  let bounds = fitBounds([]);
  let currentCategory: Category = "living";
  let preview: { x0: number; y0: number; x1: number; y1: number } | null = null;
  let previewRejected = false;
  let neighborEpoch = 0;

  function labelOf(index: number): number | null {
    if (!store.labels) {
      return null;
    }
    const id = store.ids[index];
    return store.labels[id] ?? null;
  }

  function redrawCloud(): void {
    bounds = fitBounds(store.points);
    projected = projectPoints(store.points, bounds, camera, cloud.width, cloud.height);
    const selectedIndex =
      store.selectedId === null ? null : store.ids.indexOf(store.selectedId);
    drawPointCloud(cloudCtx, projected,
                   labelOf, selectedIndex === -1 ? null : selectedIndex);
  }

  function redrawEditor(): void {
    drawEditor(editorCanvas, editor.rects, preview, previewRejected);
    submitButton.disabled = !editor.canSubmit();
  }

  async function renderNeighbors(): Promise<void> {
    const epoch = ++neighborEpoch;
    neighborList.textContent = "";
    if (store.selectedId === null) {
      selectedLabel.textContent = "nothing selected";
      selectedThumb.getContext("2d")?.clearRect(0, 0, selectedThumb.width, selectedThumb.height);
      return;
    }
    selectedLabel.textContent = store.selectedId;
    try {
      const doc = await api.raster(store.selectedId);
      if (epoch === neighborEpoch) {
        drawRaster(selectedThumb, doc);
      }
    } catch {
      // raster may 404 if the snapshot moved; the banner reports separately
    }
    if (!store.neighbors) {
      return;
    }
    for (const item of store.neighbors) {
      const row = document.createElement("div");
      row.className = "neighbor";
      const thumb = document.createElement("canvas");
      thumb.width = 96;
      thumb.height = 96;
      const caption = document.createElement("div");
      caption.textContent = `${item.id}  d=${item.distance.toFixed(4)}`;
      row.append(thumb, caption);
      row.addEventListener("click", () => {
        void store.select(item.id);
      });
      neighborList.append(row);
      api
        .raster(item.id)
        .then((doc) => {
          if (epoch === neighborEpoch) {
            drawRaster(thumb, doc);
          }
        })
        .catch(() => undefined);
    }
  }

  store.onChange(() => {
    banner.hidden = store.error === null;
    if (store.error !== null) {
      banner.firstChild!.textContent = store.error;
    }
    redrawCloud();
    void renderNeighbors();
  });

  // ---- point cloud interactions -----------------------------------------
  let dragging = false;
  let moved = false;
  let lastX = 0;
  let lastY = 0;
  cloud.addEventListener("mousedown", (ev) => {
    dragging = true;
    moved = false;
    lastX = ev.offsetX;
    lastY = ev.offsetY;
  });
  cloud.addEventListener("mousemove", (ev) => {
    if (!dragging) {
      return;
    }
    const dx = ev.offsetX - lastX;
    const dy = ev.offsetY - lastY;
    if (Math.abs(dx) + Math.abs(dy) > 2) {
      moved = true;
    }
    camera.yaw += dx * 0.01;
    camera.pitch = Math.max(-1.5, Math.min(1.5, camera.pitch + dy * 0.01));
    lastX = ev.offsetX;
    lastY = ev.offsetY;
    redrawCloud();
  });
  window.addEventListener("mouseup", (ev) => {
    if (!dragging) {
      return;
    }
    dragging = false;
    if (moved) {
      return;
    }
    const target = ev.target as HTMLElement;
    if (target !== cloud) {
      return;
    }
    const rect = cloud.getBoundingClientRect();
    const index = pick(projected, ev.clientX - rect.left, ev.clientY - rect.top, PICK_RADIUS);
    void store.select(index === null ? null : store.ids[index]);
  });
  cloud.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    camera.zoom = Math.max(0.2, Math.min(8, camera.zoom * (ev.deltaY < 0 ? 1.1 : 0.9)));
    redrawCloud();
  });

  // ---- panel controls -----------------------------------------------------
  kSlider.addEventListener("input", () => {
    kValue.textContent = kSlider.value;
    void store.setK(parseInt(kSlider.value, 10));
  });
  orderToggle.addEventListener("click", () => {
    orderToggle.textContent = store.order === "nearest" ? "farthest" : "nearest";
    void store.setOrder(store.order === "nearest" ? "farthest" : "nearest");
  });
  clusterButton.addEventListener("click", () => {
    const k = parseInt(clusterInput.value, 10);
    if (k >= 1) {
      void store.loadClusters(k);
    }
  });
  retry.addEventListener("click", () => {
    void store.loadEmbedding();
  });

  // ---- editor --------------------------------------------------------------
  for (const category of CATEGORIES) {
    const button = document.createElement("button");
    button.textContent = category;
    button.className = category === currentCategory ? "cat active" : "cat";
    button.addEventListener("click", () => {
      currentCategory = category;
      for (const other of Array.from(palette.children)) {
        other.className = "cat";
      }
      button.className = "cat active";
    });
    palette.append(button);
  }

  function editorCoords(ev: MouseEvent): { x: number; y: number } {
    const rect = editorCanvas.getBoundingClientRect();
    const scale = CANVAS / rect.width;
    return { x: (ev.clientX - rect.left) * scale, y: (ev.clientY - rect.top) * scale };
  }

  let drawStart: { x: number; y: number } | null = null;
  editorCanvas.addEventListener("mousedown", (ev) => {
    drawStart = editorCoords(ev);
    preview = { x0: drawStart.x, y0: drawStart.y, x1: drawStart.x, y1: drawStart.y };
    previewRejected = false;
    redrawEditor();
  });
  editorCanvas.addEventListener("mousemove", (ev) => {
    if (!drawStart) {
      return;
    }
    const pos = editorCoords(ev);
    preview = { x0: drawStart.x, y0: drawStart.y, x1: pos.x, y1: pos.y };
    redrawEditor();
  });
  window.addEventListener("mouseup", (ev) => {
    if (!drawStart) {
      return;
    }
    const pos = editorCoords(ev as MouseEvent);
    const result = editor.addRect(currentCategory, drawStart.x, drawStart.y, pos.x, pos.y);
    drawStart = null;
    preview = null;
    if (!result.ok) {
      editorNote.textContent = result.reason;
      previewRejected = true;
    } else {
      editorNote.textContent = "";
      previewRejected = false;
    }
    redrawEditor();
  });
  clearButton.addEventListener("click", () => {
    editor.clear();
    editorNote.textContent = "";
    redrawEditor();
  });
  undoButton.addEventListener("click", () => {
    editor.removeLast();
    redrawEditor();
  });
  submitButton.addEventListener("click", () => {
    if (!editor.canSubmit()) {
      return;
    }
    submitButton.disabled = true;
    store
      .insertDrawnPlan(editor)
      .then(() => {
        editor.clear();
        editorNote.textContent = "";
        redrawEditor();
      })
      .catch((err) => {
        editorNote.textContent = String(err.message ?? err);
        submitButton.disabled = !editor.canSubmit();
      });
  });

  redrawEditor();
  void store.loadEmbedding();
}

main();
