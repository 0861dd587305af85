import type { ApiClient } from "./api.js";
import type {
  GeometryPayload,
  LoopsPayload,
  SessionSummary,
  TriageState,
  XcorrPayload,
} from "./types.js";

/** Client-side view state. Every mutation round-trips through the API and
 * re-renders from the server response, so reloading from the session id
 * reproduces the identical view. */
export class ViewModel {
  session: SessionSummary | null = null;
  loops: LoopsPayload | null = null;
  geometry: GeometryPayload | null = null;
  xcorr: XcorrPayload | null = null;
  selection = new Set<string>();
  hover: number | null = null;

  private listeners: (() => void)[] = [];

  constructor(private api: ApiClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  get phase(): number {
    return this.session?.phase ?? 1;
  }

  async load(sessionId: string): Promise<void> {
    this.session = await this.api.getSession(sessionId);
    this.loops = await this.api.getLoops(sessionId);
    this.pruneSelection();
    this.notify();
  }

  /** Selecting highlights the same ids everywhere; unknown ids are ignored. */
  select(ids: string[]): void {
    const known = new Set(
      [...(this.loops?.scaffold ?? []), ...(this.loops?.insert ?? [])].map(
        (l) => l.id,
      ),
    );
    this.selection = new Set(ids.filter((id) => known.has(id)));
    this.notify();
  }

  private pruneSelection(): void {
    const known = new Set(
      [...(this.loops?.scaffold ?? []), ...(this.loops?.insert ?? [])].map(
        (l) => l.id,
      ),
    );
    this.selection = new Set([...this.selection].filter((id) => known.has(id)));
  }

  setHover(index: number | null): void {
    this.hover = index;
    this.notify();
  }

  async setPhase(phase: number): Promise<void> {
    if (!this.session) throw new Error("no session loaded");
    this.session = await this.api.setPhase(this.session.id, phase);
    this.hover = null; // hover never survives a phase change
    this.notify();
  }

  /** Pessimistic triage: the list re-renders from the server's response,
   * never from a local guess. */
  async setTriage(loopId: string, state: TriageState): Promise<void> {
    if (!this.session) throw new Error("no session loaded");
    this.loops = await this.api.setTriage(this.session.id, loopId, state);
    this.pruneSelection();
    this.notify();
  }

  async refreshGeometry(): Promise<void> {
    if (!this.session) throw new Error("no session loaded");
    this.geometry = await this.api.getGeometry(this.session.id);
    this.notify();
  }

  async refreshXcorr(sort = "ss_to_coil", order = "desc"): Promise<void> {
    if (!this.session) throw new Error("no session loaded");
    this.xcorr = await this.api.getXcorr(this.session.id, sort, order);
    this.notify();
  }
}
