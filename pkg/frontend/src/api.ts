// Typed client for the sweep service. All numbers come from the backend;
// the UI does no math beyond pixel mapping.

export interface Meta {
  task: string;
  dim: number;
  image_shape: [number, number];
  vocabulary: string[];
  instructions: string[];
  variants: string[];
  schedulers: string[];
  defaults: { w: number; scheduler: string; variant: string; alphas: number[]; steps: number };
  checkpoint_id: string;
}

export interface SweepRequest {
  instruction: string;
  variant: string;
  w: number;
  scheduler: string;
  alphas: number[];
  seed: number;
  case_seed: number;
  steps: number;
}

export interface Panel {
  alpha?: number;
  values: number[];
  png: string;
}

export interface MetricsReport {
  delta_smooth: number | null;
  linearity_cv: number | null;
  norm_dir: number | null;
  traj_consistency: number | null;
  mean_step: number | null;
  manifold_residual_per_alpha: number[] | null;
  degenerate: boolean;
}

export interface SweepResponse {
  source: Panel;
  outputs: (Panel & { alpha: number })[];
  references: (Panel & { alpha: number })[];
  norm_traces: (number | null)[];
  metrics: MetricsReport | null;
  config: SweepRequest;
  checkpoint_id: string;
}

export class DivergenceError extends Error {
  constructor(readonly variant: string, readonly step: number, readonly alpha: number) {
    super(`sampling diverged: variant=${variant} step=${step} alpha=${alpha}`);
  }
}

export class ValidationError extends Error {
  constructor(readonly errors: { field: string; message: string }[]) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; "));
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async meta(): Promise<Meta> {
    const res = await this.fetchFn(`${this.baseUrl}/api/meta`);
    if (!res.ok) throw new Error(`meta failed: HTTP ${res.status}`);
    return res.json();
  }

  async sweep(req: SweepRequest): Promise<SweepResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/api/sweep`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    if (res.status === 422) {
      const body = await res.json();
      throw new DivergenceError(body.variant, body.step, body.alpha);
    }
    if (res.status === 400) {
      const body = await res.json();
      throw new ValidationError(body.errors ?? []);
    }
    if (!res.ok) throw new Error(`sweep failed: HTTP ${res.status}`);
    return res.json();
  }
}
