// Interaction event recorder: one monotone per-session clock, events
// delivered to the server strictly in emission order.

import type { ApiClient } from "./api.js";

export type EventSink = (kind: string, payload: Record<string, unknown>) => void;

export class EventRecorder {
  private readonly t0: number;
  private lastT = 0;
  private queue: Promise<unknown> = Promise.resolve();
  private failures = 0;

  constructor(
    private readonly api: ApiClient,
    readonly session: string,
    private readonly clock: () => number = () => performance.now(),
  ) {
    this.t0 = this.clock();
  }

  // Fire-and-forget: rendering never waits on the log. Timestamps are
  // clamped to be non-decreasing so the server's per-session clock
  // invariant always holds.
  emit(kind: string, payload: Record<string, unknown> = {}): void {
    const t = Math.max(this.lastT, Math.round(this.clock() - this.t0));
    this.lastT = t;
    this.queue = this.queue
      .then(() => this.api.postEvent({ session: this.session, t_ms: t, kind, payload }))
      .catch(() => {
        this.failures += 1;
      });
  }

  // Resolves once every emitted event has been delivered (or failed).
  flush(): Promise<void> {
    return this.queue.then(() => undefined);
  }

  failureCount(): number {
    return this.failures;
  }
}
