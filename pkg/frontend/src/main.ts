// DOM wiring for the explorer: controls on the left, live triptych and the
// full strip on the right, variant comparison below.

import { ApiClient } from "./api.js";
import { ExplorerApp, StripPanel } from "./app.js";
import { Pixels } from "./render.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function drawPanel(pixels: Pixels): HTMLCanvasElement {
  const canvas = el("canvas", { width: String(pixels.width), height: String(pixels.height) });
  const ctx = canvas.getContext("2d")!;
  ctx.putImageData(new ImageData(pixels.rgba, pixels.width, pixels.height), 0, 0);
  return canvas;
}

function metricChips(metrics: { delta_smooth: number | null; linearity_cv: number | null } | null): HTMLElement {
  const box = el("span", { class: "chips" });
  if (!metrics) return box;
  const fmt = (v: number | null) => (v === null ? "n/a" : v.toFixed(3));
  box.appendChild(el("span", { class: "chip" }, `delta_smooth ${fmt(metrics.delta_smooth)}`));
  box.appendChild(el("span", { class: "chip" }, `linearity ${fmt(metrics.linearity_cv)}`));
  return box;
}

function stripRow(panels: StripPanel[], showReferences: boolean): HTMLElement {
  const row = el("div", { class: "strip" });
  for (const p of panels) {
    const cell = el("div", { class: "cell" });
    cell.appendChild(drawPanel(showReferences ? p.reference : p.pixels));
    cell.appendChild(el("div", { class: "label" }, p.alpha.toFixed(2)));
    row.appendChild(cell);
  }
  return row;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";
  const app = new ExplorerApp(new ApiClient(baseUrl));

  const root = document.getElementById("app")!;
  const controls = el("div", { class: "controls" });
  const banner = el("div", { class: "banner", hidden: "hidden" });
  const liveBox = el("div", { class: "live" });
  const stripBox = el("div", { class: "stripbox" });
  const compareBox = el("div", { class: "compare" });
  root.append(banner, controls, liveBox, stripBox, compareBox);

  await app.init();
  const meta = app.meta!;

  const instruction = el("select");
  for (const name of meta.instructions) instruction.appendChild(el("option", { value: name }, name));
  const variant = el("select");
  for (const v of meta.variants) variant.appendChild(el("option", { value: v }, v));
  variant.value = app.controls.variant;
  const scheduler = el("select");
  for (const s of meta.schedulers) scheduler.appendChild(el("option", { value: s }, s));
  const w = el("input", { type: "number", step: "0.5", min: "0", value: String(app.controls.w) });
  const caseSeed = el("input", { type: "number", value: "0" });
  const slider = el("input", { type: "range", min: "0", max: "1", step: "0.01", value: "0.5" });
  const compareBtn = el("button", {}, "compare variants");
  const refToggle = el("button", {}, "toggle references");

  const labelled = (text: string, node: HTMLElement) => {
    const box = el("label", {}, text + " ");
    box.appendChild(node);
    return box;
  };
  controls.append(
    labelled("instruction", instruction), labelled("variant", variant),
    labelled("scheduler", scheduler), labelled("w", w),
    labelled("case", caseSeed), labelled("strength", slider),
    compareBtn, refToggle,
  );

  instruction.onchange = () => { app.controls.instruction = instruction.value; void app.refreshStrip(); };
  variant.onchange = () => { app.controls.variant = variant.value; void app.refreshStrip(); };
  scheduler.onchange = () => { app.controls.scheduler = scheduler.value; void app.refreshStrip(); };
  w.onchange = () => { app.controls.w = Number(w.value); void app.refreshStrip(); };
  caseSeed.onchange = () => { app.controls.caseSeed = Number(caseSeed.value); void app.refreshStrip(); };
  slider.oninput = () => app.onSliderInput(Number(slider.value));
  slider.onchange = () => void app.refreshStrip();
  compareBtn.onclick = () => void app.compareVariants();
  refToggle.onclick = () => app.toggleReferences();

  app.onChange = () => {
    banner.hidden = !app.error;
    banner.textContent = app.error ?? "";
    const busy = app.inFlight > 0;
    compareBtn.disabled = busy;

    liveBox.replaceChildren();
    if (app.live) {
      for (const [name, pix] of [["source", app.live.source],
                                 [`alpha=${app.live.alpha.toFixed(2)}`, app.live.current],
                                 ["full edit", app.live.full]] as const) {
        const cell = el("div", { class: "cell" });
        cell.appendChild(drawPanel(pix));
        cell.appendChild(el("div", { class: "label" }, name));
        liveBox.appendChild(cell);
      }
    }

    stripBox.replaceChildren();
    if (app.strip) {
      stripBox.appendChild(el("div", { class: "rowtitle" },
        app.strip.showReferences ? "ground-truth references" : "sweep"));
      stripBox.appendChild(stripRow(app.strip.panels, app.strip.showReferences));
      stripBox.appendChild(metricChips(app.strip.metrics));
    }

    compareBox.replaceChildren();
    if (app.compare) {
      for (const row of app.compare) {
        const box = el("div", { class: "comparerow" });
        box.appendChild(el("div", { class: "rowtitle" }, row.variant));
        if (row.failure) {
          box.appendChild(el("div", { class: "failure" }, row.failure));
        } else if (row.panels) {
          box.appendChild(stripRow(row.panels, false));
          box.appendChild(metricChips(row.metrics ?? null));
        }
        compareBox.appendChild(box);
      }
    }
  };

  void app.refreshStrip();
}

window.addEventListener("load", () => void boot());
