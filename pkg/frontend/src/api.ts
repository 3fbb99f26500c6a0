/**
 * Typed client for the embedding service.
 *
 * All service responses are passed through verbatim: the client never
 * reorders, filters or re-scores results. The fetch implementation is
 * injectable so the store logic is testable without a network.
 */

export interface RoomDoc {
  category: string;
  box: [number, number, number, number];
}

export interface PlanDoc {
  id: string;
  rooms: RoomDoc[];
  coordinate: number[] | null;
  cluster: number | null;
  version: number;
}

export interface PlanPage {
  ids: string[];
  page: number;
  page_size: number;
  total: number;
  version: number;
}

export type Order = "nearest" | "farthest";

export interface SimilarResult {
  id: string;
  distance: number;
  raster: string;
}

export interface SimilarResponse {
  query: string;
  order: Order;
  k: number;
  version: number;
  results: SimilarResult[];
}

export interface EmbeddingTable {
  dim: number | null;
  n: number;
  version: number;
  ids: string[];
  coordinates: number[][];
}

export interface RasterDoc {
  id: string;
  resolution: number;
  legend: Record<string, string>;
  cells: number[][];
}

export interface ClustersDoc {
  k: number;
  seed: number;
  version: number;
  labels: Record<string, number>;
  centroids: number[][];
}

export interface HealthDoc {
  version: number;
  plans: number;
  dim: number | null;
}

export interface InsertResponse {
  id: string;
  coordinate: number[];
  stress: number;
  version: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string, readonly violations?: string[]) {
    super(message);
    this.name = "ApiError";
  }
}

/** The slice of fetch/Response the client needs; easy to stub in tests. */
export interface MinimalResponse {
  ok: boolean;
  status: number;
  statusText: string;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<MinimalResponse>;

const defaultFetch: FetchLike = (url, init) => fetch(url, init);

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  private async request<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    let resp: MinimalResponse;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${(err as Error).message}`);
    }
    let body: unknown = {};
    try {
      body = await resp.json();
    } catch {
      // non-JSON error body; fall through to statusText
    }
    if (!resp.ok) {
      const doc = body as { error?: string; violations?: string[] };
      throw new ApiError(resp.status, doc.error ?? resp.statusText, doc.violations);
    }
    return body as T;
  }

  health(): Promise<HealthDoc> {
    return this.request("/api/health");
  }

  listPlans(page = 1, pageSize = 50): Promise<PlanPage> {
    return this.request(`/api/plans?page=${page}&page_size=${pageSize}`);
  }

  getPlan(id: string): Promise<PlanDoc> {
    return this.request(`/api/plans/${encodeURIComponent(id)}`);
  }

  similar(id: string, k: number, order: Order): Promise<SimilarResponse> {
    return this.request(
      `/api/plans/${encodeURIComponent(id)}/similar?k=${k}&order=${order}`,
    );
  }

  raster(id: string): Promise<RasterDoc> {
    return this.request(`/api/plans/${encodeURIComponent(id)}/raster`);
  }

  embedding(): Promise<EmbeddingTable> {
    return this.request("/api/embedding");
  }

  clusters(k: number, seed = 0): Promise<ClustersDoc> {
    return this.request(`/api/clusters?k=${k}&seed=${seed}`);
  }

  insertPlan(doc: { rooms: RoomDoc[] }): Promise<InsertResponse> {
    return this.request("/api/plans", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
  }
}
