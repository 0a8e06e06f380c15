/** DOM wiring: grouped segment sliders, presets, canvas viewport, offline banner. */

import { ApiClient, Meta } from "./api.js";
import { debounce } from "./debounce.js";
import {
  defaultEncoding,
  groupValueFromSegment,
  segmentFromGroupValue,
} from "./encoding.js";
import { Camera, renderMesh } from "./renderer.js";
import { UiState } from "./state.js";

const DEBOUNCE_MS = 50;
const HEALTH_POLL_MS = 3000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

export async function boot(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  let meta: Meta;
  try {
    meta = await api.meta();
  } catch {
    root.appendChild(el("div", { class: "banner offline" }, "service offline"));
    return;
  }
  const state = new UiState(meta);
  state.values = defaultEncoding(meta);

  const banner = el("div", { class: "banner offline", hidden: "hidden" }, "service offline");
  const canvas = el("canvas", { width: "720", height: "540", class: "viewport" });
  const ctx = canvas.getContext("2d")!;
  const controls = el("div", { class: "controls" });
  root.append(banner, canvas, controls);

  const camera: Camera = { yaw: 0.7, pitch: 0.4, zoom: 1.0 };
  let lastVertices: number[][] | null = null;

  const redraw = () => {
    if (lastVertices) renderMesh(ctx, lastVertices, meta.faces, camera);
  };

  let dragging = false;
  canvas.addEventListener("mousedown", () => (dragging = true));
  window.addEventListener("mouseup", () => (dragging = false));
  canvas.addEventListener("mousemove", (ev) => {
    if (!dragging) return;
    camera.yaw += ev.movementX * 0.01;
    camera.pitch = Math.max(-1.4, Math.min(1.4, camera.pitch + ev.movementY * 0.01));
    redraw();
  });

  const requestReconstruct = debounce(async () => {
    try {
      const result = await api.reconstruct(state.values, meta);
      lastVertices = result.vertices;
      state.setOnline(true);
      redraw();
    } catch (err) {
      if ((err as Error).name === "AbortError") return; // superseded by a newer edit
      state.setOnline(false);
    }
  }, DEBOUNCE_MS);

  // --- sliders grouped by segment, expandable per-dimension view
  const dimSliders: HTMLInputElement[] = [];
  for (const seg of meta.layout) {
    const box = el("fieldset", { class: "segment" });
    box.appendChild(el("legend", {}, seg.label));

    const group = el("input", {
      type: "range", min: "0", max: "1", step: "0.001",
      class: "group-slider", "data-segment": seg.label,
    });
    group.value = String(groupValueFromSegment(seg, state.values, meta.min, meta.max));
    group.addEventListener("input", () => {
      const segValues = segmentFromGroupValue(seg, Number(group.value), meta.min, meta.max);
      const next = state.values.slice();
      for (let i = 0; i < seg.length; i++) next[seg.offset + i] = segValues[i];
      state.setValues(next);
    });
    box.appendChild(group);

    const details = el("details");
    details.appendChild(el("summary", {}, `${seg.length} dimensions`));
    for (let i = 0; i < seg.length; i++) {
      const idx = seg.offset + i;
      const dim = el("input", {
        type: "range",
        min: String(meta.min[idx]),
        max: String(meta.max[idx]),
        step: String((meta.max[idx] - meta.min[idx]) / 1000 || 1e-6),
        "data-dim": String(idx),
      });
      dim.value = String(state.values[idx]);
      dim.addEventListener("input", () => state.setDimension(idx, Number(dim.value)));
      dimSliders.push(dim);
      const row = el("label", { class: "dim" }, `${seg.label}[${i}] `);
      row.appendChild(dim);
      details.appendChild(row);
    }
    box.appendChild(details);
    controls.appendChild(box);
  }

  // --- presets and blending
  const presets = el("fieldset", { class: "presets" });
  presets.appendChild(el("legend", {}, "presets"));
  const saveA = el("button", {}, "save A");
  const saveB = el("button", {}, "save B");
  saveA.addEventListener("click", () => state.storePreset("A"));
  saveB.addEventListener("click", () => state.storePreset("B"));
  const blend = el("input", { type: "range", min: "0", max: "1", step: "0.01", value: "0" });
  const scope = el("select", {});
  scope.append(
    el("option", { value: "" }, "all segments"),
    ...meta.layout.map((s) => el("option", { value: s.label }, `${s.label} only`)),
  );
  blend.addEventListener("input", () => {
    if (!state.presetA || !state.presetB) return;
    const labels = scope.value ? [scope.value] : undefined;
    state.interpolatePresets(Number(blend.value), labels);
  });
  const swapButtons = meta.layout.map((s) => {
    const btn = el("button", {}, `take ${s.label} from B`);
    btn.addEventListener("click", () => state.swapPresetSegment(s.label));
    return btn;
  });
  presets.append(saveA, saveB, el("span", {}, " blend "), blend, scope, ...swapButtons);
  controls.appendChild(presets);

  state.subscribe(() => {
    banner.hidden = state.online;
    for (const dim of dimSliders) {
      const idx = Number(dim.dataset.dim);
      dim.value = String(state.values[idx]);
    }
    requestReconstruct();
  });

  setInterval(async () => state.setOnline(await api.health()), HEALTH_POLL_MS);
  requestReconstruct();
  requestReconstruct.flush();
}

declare global {
  interface Window {
    SPECTRAFORGE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const base = window.SPECTRAFORGE_URL ?? "http://127.0.0.1:8000";
  void boot(document.getElementById("app")!, base);
}
