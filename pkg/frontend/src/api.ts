// Typed client for the graph service JSON API. The client talks only to
// these endpoints; it never computes visibility or focus sets itself.

export interface GraphSummary {
  id: string;
  nodes: number;
  edges: number;
  quality: QualityReport | null;
}

export interface QualityReport {
  precision: number;
  recall: number;
  matched: number;
  system_size: number;
  gold_size: number;
}

export interface CollectionDoc {
  id: string;
  title: string;
  url: string;
  rank: number;
}

export interface CollectionPartition {
  id: string;
  query: string;
  documents: CollectionDoc[];
}

export interface Collection {
  partitions: CollectionPartition[];
}

export interface MinimapConcept {
  entity: string;
  degree: number;
  frequency: number;
  anchors: string[];
}

export interface Minimap {
  doc_id: string;
  concepts: MinimapConcept[];
}

export interface DetailNode {
  entity: string;
  label: string;
  degree: number;
  frequency: number;
  central: boolean;
  visible: boolean;
}

export interface DetailEdge {
  id: string;
  source: string;
  target: string;
  relations: number;
}

export interface Detail {
  doc_id: string;
  hide_threshold: number;
  nodes: DetailNode[];
  edges: DetailEdge[];
}

export interface EdgeRelation {
  relation: string;
  snippet: string;
  doc_id: string;
  start: number;
  end: number;
  salience: number;
}

export interface EdgeRelations {
  id: string;
  source: string;
  target: string;
  relations: EdgeRelation[];
}

export interface DocumentText {
  doc_id: string;
  title: string;
  url: string;
  body: string;
}

export interface InteractionEventBody {
  session: string;
  t_ms: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface SessionMetrics {
  session: string;
  nc: number;
  ec: number;
  v: number;
  vt_s: number;
  duration_s: number;
  view_fractions: Record<string, number>;
  views: string[];
  heatmap: number[][];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail?: string,
  ) {
    super(detail ? `${code}: ${detail}` : code);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    const data = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, data?.error ?? "request_failed", data?.detail);
    }
    return data as T;
  }

  listGraphs(): Promise<GraphSummary[]> {
    return this.request("GET", "/api/graphs");
  }

  collection(graph: string): Promise<Collection> {
    return this.request("GET", `/api/graphs/${encodeURIComponent(graph)}/collection`);
  }

  minimap(graph: string, doc: string): Promise<Minimap> {
    return this.request(
      "GET",
      `/api/graphs/${encodeURIComponent(graph)}/documents/${encodeURIComponent(doc)}/minimap`,
    );
  }

  detail(graph: string, doc: string, visibleOnly = false): Promise<Detail> {
    const suffix = visibleOnly ? "?visible_only=true" : "";
    return this.request(
      "GET",
      `/api/graphs/${encodeURIComponent(graph)}/documents/${encodeURIComponent(doc)}/detail${suffix}`,
    );
  }

  expand(graph: string, doc: string, session: string, node: string): Promise<{ visible: string[] }> {
    return this.request(
      "POST",
      `/api/graphs/${encodeURIComponent(graph)}/documents/${encodeURIComponent(doc)}/expand`,
      { session, node },
    );
  }

  edgeRelations(graph: string, edgeId: string): Promise<EdgeRelations> {
    return this.request(
      "GET",
      `/api/graphs/${encodeURIComponent(graph)}/edges/${encodeURIComponent(edgeId)}/relations`,
    );
  }

  documentText(doc: string): Promise<DocumentText> {
    return this.request("GET", `/api/documents/${encodeURIComponent(doc)}/text`);
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("POST", "/api/sessions");
    return body.session_id;
  }

  postEvent(event: InteractionEventBody): Promise<{ status: string }> {
    return this.request("POST", "/api/events", event);
  }

  sessionMetrics(session: string): Promise<SessionMetrics> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(session)}/metrics`);
  }
}
