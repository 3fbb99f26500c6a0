/**
 * Application store: the single owner of view state.
 *
 * The store holds no authoritative data; everything displayed is fetched
 * from the service and kept verbatim (never reordered, filtered or
 * re-scored). All mutations flow through the insert endpoint. Neighbor
 * requests carry a token so a stale response (superseded selection, k or
 * order) is discarded instead of clobbering the current panel.
 */

import {
  ApiClient,
  ApiError,
  type InsertResponse,
  type Order,
  type SimilarResult,
} from "./api.js";
import type { EditorModel } from "./editor.js";

export type Listener = () => void;

export class Store {
  version = 0;
  ids: string[] = [];
  points: number[][] = [];
  labels: Record<string, number> | null = null;
  selectedId: string | null = null;
  k = 5;
  order: Order = "nearest";
  neighbors: SimilarResult[] | null = null;
  neighborsFor: string | null = null;
  loading = false;
  error: string | null = null;

  private listeners: Listener[] = [];
  private neighborToken = 0;
  private indexOf = new Map<string, number>();

  constructor(private readonly api: ApiClient) {}

  onChange(fn: Listener): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) {
      fn();
    }
  }

  coordinateOf(id: string): number[] | null {
    const idx = this.indexOf.get(id);
    return idx === undefined ? null : this.points[idx];
  }

  async loadEmbedding(): Promise<void> {
    this.loading = true;
    this.error = null;
    this.notify();
    try {
      const table = await this.api.embedding();
      this.version = table.version;
      this.ids = table.ids;
      this.points = table.coordinates;
      this.indexOf = new Map(table.ids.map((id, i) => [id, i]));
      if (this.selectedId !== null && !this.indexOf.has(this.selectedId)) {
        this.selectedId = null;
        this.neighbors = null;
        this.neighborsFor = null;
      }
    } catch (err) {
      this.error = (err as Error).message;
    } finally {
      this.loading = false;
      this.notify();
    }
  }

  async loadClusters(k: number, seed = 0): Promise<void> {
    try {
      const doc = await this.api.clusters(k, seed);
      this.labels = doc.labels;
      this.error = null;
    } catch (err) {
      this.error = (err as Error).message;
    }
    this.notify();
  }

  async select(id: string | null): Promise<void> {
    this.selectedId = id;
    this.neighbors = null;
    this.neighborsFor = null;
    this.notify();
    if (id !== null) {
      await this.refreshNeighbors();
    }
  }

  async setK(k: number): Promise<void> {
    this.k = k;
    await this.refreshNeighbors();
  }

  async setOrder(order: Order): Promise<void> {
    this.order = order;
    await this.refreshNeighbors();
  }

  /**
   * Fetch the neighbor panel for the current (selection, k, order).
   * Responses for superseded requests are dropped by token comparison.
   */
  async refreshNeighbors(): Promise<void> {
    const id = this.selectedId;
    if (id === null) {
      return;
    }
    const token = ++this.neighborToken;
    try {
      const response = await this.api.similar(id, this.k, this.order);
      if (token !== this.neighborToken) {
        return; // stale: selection, k or order changed while in flight
      }
      this.neighbors = response.results;
      this.neighborsFor = id;
      this.error = null;
    } catch (err) {
      if (token !== this.neighborToken) {
        return;
      }
      if (err instanceof ApiError && err.status === 404) {
        // the selected plan vanished from the snapshot
        this.selectedId = null;
        this.neighbors = null;
        this.neighborsFor = null;
        this.error = `plan ${id} no longer exists`;
      } else {
        this.error = (err as Error).message;
      }
    }
    this.notify();
  }

  /**
   * Post the drawn plan, reload the embedding and select the new id so its
   * neighborhood opens immediately (the explore feedback loop).
   */
  async insertDrawnPlan(editor: EditorModel): Promise<InsertResponse> {
    const response = await this.api.insertPlan(editor.toPlanDoc());
    await this.loadEmbedding();
    await this.select(response.id);
    return response;
  }
}
