/**
 * Annotation session engine: pulls pair assignments from the service,
 * presents one pair at a time with randomized left/right placement, and
 * turns side choices back into canonical votes.
 *
 * Votes are never retried automatically (a retry could double-count);
 * assignment fetches are idempotent and retry with backoff.
 */

import { ApiClient, ApiError, VoteAck } from './api.js';
import { mulberry32 } from './rng.js';

export type Side = 'left' | 'right';

export type SessionStatus =
  | 'idle'
  | 'loading'
  | 'presenting'
  | 'submitting'
  | 'finished'
  | 'error';

export interface Presentation {
  /** Canonical server pair, first index < second. */
  pair: [number, number];
  /** Item labels/URIs in pair order. */
  labels: [string, string];
  /** Which element of the pair is displayed on the left. */
  leftIndex: 0 | 1;
}

export interface SessionView {
  experimentId: string;
  annotatorId: string;
  status: SessionStatus;
  presentation: Presentation | null;
  queued: number;
  votesSubmitted: number;
  mode: 'GM' | 'MST' | null;
  lastError: string | null;
}

export interface SessionOptions {
  /** Stop after this many acknowledged votes (0 = unlimited). */
  maxVotes?: number;
  /** Seed for placement randomization. */
  seed?: number;
  /** Pairs requested per batch call. */
  pairsPerFetch?: number;
  /** Retry schedule for assignment fetches, milliseconds. */
  retryDelays?: number[];
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class SessionController {
  private queue: { pair: [number, number]; labels: [string, string] }[] = [];
  private view: SessionView;
  private rng: () => number;
  private inFlight = false;
  private listeners: ((view: SessionView) => void)[] = [];
  private readonly maxVotes: number;
  private readonly pairsPerFetch: number;
  private readonly retryDelays: number[];
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly api: ApiClient,
    experimentId: string,
    annotatorId: string,
    options: SessionOptions = {},
  ) {
    this.rng = mulberry32(options.seed ?? Date.now());
    this.maxVotes = options.maxVotes ?? 0;
    this.pairsPerFetch = options.pairsPerFetch ?? 1;
    this.retryDelays = options.retryDelays ?? [250, 500, 1000, 2000, 4000];
    this.sleep = options.sleep ?? defaultSleep;
    this.view = {
      experimentId,
      annotatorId,
      status: 'idle',
      presentation: null,
      queued: 0,
      votesSubmitted: 0,
      mode: null,
      lastError: null,
    };
  }

  subscribe(listener: (view: SessionView) => void): void {
    this.listeners.push(listener);
  }

  snapshot(): SessionView {
    return { ...this.view, presentation: this.view.presentation && { ...this.view.presentation } };
  }

  private update(patch: Partial<SessionView>): void {
    this.view = { ...this.view, ...patch, queued: this.queue.length };
    for (const listener of this.listeners) listener(this.snapshot());
  }

  /** Fetch (or dequeue) the next assignment and present it. */
  async nextAssignment(): Promise<SessionView> {
    if (this.view.status === 'finished') return this.snapshot();
    if (this.maxVotes > 0 && this.view.votesSubmitted >= this.maxVotes) {
      this.update({ status: 'finished', presentation: null });
      return this.snapshot();
    }
    if (this.queue.length === 0) {
      this.update({ status: 'loading', presentation: null, lastError: null });
      const batch = await this.fetchWithRetry();
      if (batch === null) return this.snapshot();
      for (let k = 0; k < batch.pairs.length; k++) {
        this.queue.push({ pair: batch.pairs[k], labels: batch.items[k] });
      }
      this.view.mode = batch.mode;
    }
    const next = this.queue.shift();
    if (!next) {
      this.update({ status: 'error', lastError: 'server returned an empty batch' });
      return this.snapshot();
    }
    const leftIndex: 0 | 1 = this.rng() < 0.5 ? 0 : 1;
    this.update({
      status: 'presenting',
      presentation: { pair: next.pair, labels: next.labels, leftIndex },
    });
    return this.snapshot();
  }

  private async fetchWithRetry() {
    for (let attempt = 0; ; attempt++) {
      try {
        return await this.api.getBatch(
          this.view.experimentId,
          this.view.annotatorId,
          this.pairsPerFetch,
        );
      } catch (error) {
        if (error instanceof ApiError) {
          // 404/terminal conditions are not retryable
          this.update({ status: 'error', lastError: `${error.status}: ${error.message}` });
          return null;
        }
        if (attempt >= this.retryDelays.length) {
          this.update({ status: 'error', lastError: String(error) });
          return null;
        }
        await this.sleep(this.retryDelays[attempt]);
      }
    }
  }

  /**
   * Record the annotator's side choice for the displayed pair.
   *
   * Resolves to the acknowledgement, or null when no pair is shown or a
   * submission is already in flight (double clicks are dropped).
   */
  async submitChoice(side: Side): Promise<VoteAck | null> {
    const shown = this.view.presentation;
    if (!shown || this.inFlight || this.view.status !== 'presenting') return null;
    const preferredIndex = side === 'left' ? shown.leftIndex : ((1 - shown.leftIndex) as 0 | 1);
    const y: 0 | 1 = preferredIndex === 0 ? 1 : 0;

    this.inFlight = true;
    this.update({ status: 'submitting' });
    try {
      const ack = await this.api.submitVote(
        this.view.experimentId,
        shown.pair,
        y,
        this.view.annotatorId,
      );
      this.inFlight = false;
      this.update({
        votesSubmitted: this.view.votesSubmitted + 1,
        mode: ack.mode,
        presentation: null,
        status: 'idle',
      });
      await this.nextAssignment();
      return ack;
    } catch (error) {
      // leave the same pair on screen so the annotator can try again
      this.inFlight = false;
      const message = error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
      this.update({ status: 'presenting', lastError: message });
      return null;
    }
  }

  /** Run a full scripted session: fetch, choose, repeat until finished. */
  async runScripted(pickSide: (view: SessionView) => Side): Promise<SessionView> {
    await this.nextAssignment();
    while (this.view.status === 'presenting') {
      await this.submitChoice(pickSide(this.snapshot()));
    }
    return this.snapshot();
  }
}
