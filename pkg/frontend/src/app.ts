// DOM-free controller: control state, debounced requests, stale-response
// gating and panel building. main.ts only binds this to the document.

import {
  DivergenceError,
  Meta,
  SweepRequest,
  SweepResponse,
} from "./api.js";
import { Debouncer } from "./debounce.js";
import { Pixels, renderPanel } from "./render.js";

export interface SweepApi {
  meta(): Promise<Meta>;
  sweep(req: SweepRequest): Promise<SweepResponse>;
}

export interface LiveView {
  alpha: number;
  source: Pixels;
  current: Pixels;
  full: Pixels;
}

export interface StripPanel {
  alpha: number;
  pixels: Pixels;
  reference: Pixels;
}

export interface StripView {
  panels: StripPanel[];
  source: Pixels;
  metrics: SweepResponse["metrics"];
  showReferences: boolean;
}

export interface CompareRow {
  variant: string;
  panels?: StripPanel[];
  metrics?: SweepResponse["metrics"];
  failure?: string;
}

export interface ControlState {
  instruction: string;
  variant: string;
  scheduler: string;
  w: number;
  alpha: number;
  caseSeed: number;
  seed: number;
  steps: number;
}

export class ExplorerApp {
  meta?: Meta;
  controls: ControlState = {
    instruction: "",
    variant: "adaor",
    scheduler: "sqrt",
    w: 4.0,
    alpha: 0.5,
    caseSeed: 0,
    seed: 0,
    steps: 64,
  };
  live?: LiveView;
  strip?: StripView;
  compare?: CompareRow[];
  error?: string;
  inFlight = 0;
  onChange: () => void = () => {};

  private debouncer: Debouncer;
  private issued = 0;
  private rendered = 0;

  constructor(
    private readonly client: SweepApi,
    debounceMs = 150,
    private readonly scale = 8,
  ) {
    this.debouncer = new Debouncer(debounceMs);
  }

  async init(): Promise<void> {
    this.meta = await this.client.meta();
    this.controls.instruction = this.meta.instructions[0];
    this.controls.variant = this.meta.defaults.variant;
    this.controls.scheduler = this.meta.defaults.scheduler;
    this.controls.w = this.meta.defaults.w;
    this.controls.steps = this.meta.defaults.steps;
    this.onChange();
  }

  private request(alphas: number[]): SweepRequest {
    const c = this.controls;
    return {
      instruction: c.instruction,
      variant: c.variant,
      scheduler: c.scheduler,
      w: c.w,
      alphas,
      seed: c.seed,
      case_seed: c.caseSeed,
      steps: c.steps,
    };
  }

  private panel(values: number[]): Pixels {
    const meta = this.meta!;
    return renderPanel(values, meta.task, meta.image_shape, this.scale);
  }

  /** Slider drag: debounced three-panel request (source / alpha / full). */
  onSliderInput(alpha: number): void {
    this.controls.alpha = alpha;
    this.debouncer.schedule(() => void this.refreshLive());
  }

  async refreshLive(): Promise<void> {
    const alpha = this.controls.alpha;
    const seq = ++this.issued;
    this.inFlight += 1;
    this.onChange();
    try {
      const resp = await this.client.sweep(this.request([0, alpha, 1]));
      if (seq <= this.rendered) return; // superseded by a newer response
      this.rendered = seq;
      this.live = {
        alpha,
        source: this.panel(resp.source.values),
        current: this.panel(resp.outputs[1].values),
        full: this.panel(resp.outputs[2].values),
      };
      this.error = undefined;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.inFlight -= 1;
      this.onChange();
    }
  }

  /** Slider release: full default-grid strip with references and metrics. */
  async refreshStrip(): Promise<void> {
    const alphas = this.meta!.defaults.alphas;
    const seq = ++this.issued;
    this.inFlight += 1;
    this.onChange();
    try {
      const resp = await this.client.sweep(this.request(alphas));
      if (seq <= this.rendered) return;
      this.rendered = seq;
      this.strip = {
        source: this.panel(resp.source.values),
        panels: resp.outputs.map((o, i) => ({
          alpha: o.alpha,
          pixels: this.panel(o.values),
          reference: this.panel(resp.references[i].values),
        })),
        metrics: resp.metrics,
        showReferences: this.strip?.showReferences ?? false,
      };
      this.error = undefined;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.inFlight -= 1;
      this.onChange();
    }
  }

  /** Pure view flag: never refetches. */
  toggleReferences(): void {
    if (this.strip) {
      this.strip.showReferences = !this.strip.showReferences;
      this.onChange();
    }
  }

  /** One request per variant; a divergence renders as a failure cell. */
  async compareVariants(): Promise<void> {
    const meta = this.meta!;
    const rows: CompareRow[] = [];
    this.compare = rows;
    for (const variant of meta.variants) {
      this.inFlight += 1;
      this.onChange();
      try {
        const resp = await this.client.sweep({
          ...this.request(meta.defaults.alphas),
          variant,
        });
        rows.push({
          variant,
          panels: resp.outputs.map((o, i) => ({
            alpha: o.alpha,
            pixels: this.panel(o.values),
            reference: this.panel(resp.references[i].values),
          })),
          metrics: resp.metrics,
        });
      } catch (err) {
        if (err instanceof DivergenceError) {
          rows.push({ variant, failure: `diverged at step ${err.step}` });
        } else {
          rows.push({
            variant,
            failure: err instanceof Error ? err.message : String(err),
          });
        }
      } finally {
        this.inFlight -= 1;
        this.onChange();
      }
    }
  }
}
