import type {
  FlexibilityPayload,
  GeometryPayload,
  JobPayload,
  LoopsPayload,
  PairingEntry,
  Role,
  Segment,
  SessionSummary,
  TriageState,
  XcorrPayload,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Thin typed client over the service API; every UI mutation goes through
 * here so the server stays the single source of truth. */
export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createSession(
    scaffoldId: string, scaffoldChain: string,
    insertId: string, insertChain: string,
  ): Promise<SessionSummary> {
    return this.post("/sessions", {
      scaffold_id: scaffoldId, scaffold_chain: scaffoldChain,
      insert_id: insertId, insert_chain: insertChain,
    });
  }

  getSession(id: string): Promise<SessionSummary> {
    return this.request(`/sessions/${id}`);
  }

  setPhase(id: string, phase: number): Promise<SessionSummary> {
    return this.post(`/sessions/${id}/phase`, { phase });
  }

  overrideSS(
    id: string, role: Role, startSeq: number, endSeq: number, ssClass: string,
  ): Promise<{ segments: Segment[]; staleness: Record<string, boolean> }> {
    return this.post(`/sessions/${id}/ss-override`, {
      role, start_seq: startSeq, end_seq: endSeq, ss_class: ssClass,
    });
  }

  getLoops(id: string): Promise<LoopsPayload> {
    return this.request(`/sessions/${id}/loops`);
  }

  setTriage(id: string, loopId: string, state: TriageState): Promise<LoopsPayload> {
    return this.post(`/sessions/${id}/loops/${loopId}/triage`, { state });
  }

  getGeometry(id: string): Promise<GeometryPayload> {
    return this.request(`/sessions/${id}/geometry`);
  }

  getFlexibility(id: string, methods: string[], role: Role = "scaffold"):
      Promise<FlexibilityPayload> {
    const q = new URLSearchParams({ method: methods.join(","), role });
    return this.request(`/sessions/${id}/flexibility?${q}`);
  }

  getXcorr(id: string, sort = "ss_to_coil", order = "desc"): Promise<XcorrPayload> {
    const q = new URLSearchParams({ sort, order });
    return this.request(`/sessions/${id}/xcorr?${q}`);
  }

  setPairings(id: string, pairings: PairingEntry[]): Promise<SessionSummary> {
    return this.post(`/sessions/${id}/pairings`, { pairings });
  }

  submitGraft(id: string, window = 0): Promise<JobPayload> {
    return this.post(`/sessions/${id}/graft`, { window });
  }

  getJob(jobId: string): Promise<JobPayload> {
    return this.request(`/jobs/${jobId}`);
  }

  modelPdbUrl(modelId: string): string {
    return `${this.base}/models/${modelId}.pdb`;
  }
}
