// Session flow state machine. All protocol state lives on the server; the
// browser keeps only the session id (for resume) and transient view state.

import { ApiError, RatingApi, SessionResource } from "./api.js";

export const MIN_PLAYBACK_SECONDS = 3;
const STORAGE_KEY = "relcomp.session";

export type StorageLike = {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
};

export type FlowState =
  | { kind: "login"; error: string | null }
  | {
      kind: "rating";
      session: SessionResource;
      playedSeconds: number;
      submitting: boolean;
      error: string | null;
    }
  | { kind: "finished"; session: SessionResource }
  | { kind: "fatal"; message: string };

export class SessionFlow {
  state: FlowState = { kind: "login", error: null };

  constructor(
    private readonly api: RatingApi,
    private readonly storage: StorageLike,
    private readonly onChange: (state: FlowState) => void = () => {},
  ) {}

  private transition(state: FlowState): void {
    this.state = state;
    this.onChange(state);
  }

  /** Pick up a stored session after a reload; false when there is none. */
  async resume(): Promise<boolean> {
    const stored = this.storage.getItem(STORAGE_KEY);
    if (!stored) {
      this.transition({ kind: "login", error: null });
      return false;
    }
    try {
      const session = await this.api.getSession(stored);
      this.enterSession(session);
      return true;
    } catch (error) {
      // stale id (server reset): fall back to login rather than dead-end
      this.storage.removeItem(STORAGE_KEY);
      this.transition({ kind: "login", error: describe(error) });
      return false;
    }
  }

  async start(
    participant: string,
    category: string,
    catalogId: string,
  ): Promise<void> {
    try {
      const session = await this.api.startSession(participant, category, catalogId);
      this.storage.setItem(STORAGE_KEY, session.id);
      this.enterSession(session);
    } catch (error) {
      this.transition({ kind: "login", error: describe(error) });
    }
  }

  private enterSession(session: SessionResource): void {
    if (session.done) {
      this.storage.removeItem(STORAGE_KEY);
      this.transition({ kind: "finished", session });
    } else {
      this.transition({
        kind: "rating",
        session,
        playedSeconds: 0,
        submitting: false,
        error: null,
      });
    }
  }

  /** Report observed playback progress (seconds into the clip).

  Mutates in place instead of transitioning: playback ticks arrive several
  times a second and must not re-render the view (the gate is synced by the
  view's own event handler). */
  notePlayback(seconds: number): void {
    if (this.state.kind !== "rating") return;
    this.state.playedSeconds = Math.max(this.state.playedSeconds, seconds);
  }

  get canJudge(): boolean {
    return (
      this.state.kind === "rating" &&
      !this.state.submitting &&
      this.state.playedSeconds >= MIN_PLAYBACK_SECONDS
    );
  }

  async submitVerdict(acceptable: boolean): Promise<void> {
    if (this.state.kind !== "rating" || !this.canJudge) return;
    const { session } = this.state;
    this.transition({ ...this.state, submitting: true, error: null });
    try {
      const next = await this.api.postVerdict(
        session.id,
        acceptable,
        session.version,
      );
      this.enterSession(next);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // stale version: refetch the authoritative state, never retry blindly
        const fresh = await this.api.getSession(session.id);
        this.enterSession(fresh);
        return;
      }
      if (error instanceof ApiError && error.status === 410) {
        const fresh = await this.api.getSession(session.id);
        this.enterSession(fresh);
        return;
      }
      // network failure: keep all state, surface a banner, allow retry
      this.transition({
        ...this.state,
        submitting: false,
        error: describe(error),
      });
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}
