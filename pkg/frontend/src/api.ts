/** Typed client for the pairrank experiment service. */

export interface BatchResponse {
  experiment: string;
  annotator: string;
  mode: 'GM' | 'MST';
  pairs: [number, number][];
  items: [string, string][];
}

export interface VoteAck {
  experiment: string;
  pair: [number, number];
  y: 0 | 1;
  observed_total: number;
  mode: 'GM' | 'MST';
  refitted: boolean;
}

export interface ExperimentMeta {
  id: string;
  items: string[];
  mode: 'GM' | 'MST';
  observed_total: number;
  standard_trial_votes: number;
  batch_size: number;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getExperiment(experimentId: string): Promise<ExperimentMeta> {
    return this.request(`/experiments/${experimentId}`);
  }

  getBatch(experimentId: string, annotator: string, maxPairs = 1): Promise<BatchResponse> {
    const params = new URLSearchParams({ annotator, max_pairs: String(maxPairs) });
    return this.request(`/experiments/${experimentId}/batch?${params}`);
  }

  submitVote(
    experimentId: string,
    pair: [number, number],
    y: 0 | 1,
    annotator: string,
  ): Promise<VoteAck> {
    return this.request(`/experiments/${experimentId}/votes`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ pair, y, annotator }),
    });
  }
}
