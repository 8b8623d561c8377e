/**
 * Browser entry point: wires pointer, sliders, and buttons to the client
 * and renders each server reply.
 *
 * Input model:
 *   - the pointer moves the hand cursor; gaze follows it unless Shift is
 *     held, which parks the gaze reticle so hand and gaze can separate
 *   - mouse wheel or the depth slider moves the hand along its ray
 *   - the span slider opens the fingers; Space or the pinch button closes
 *     them into a pinch
 *   - the left-hand checkbox adds a mirrored static left hand and the A
 *     key pinches it, enough to drive the two-handed technique
 *
 * The page sends one frame per tick and draws the returned state; every
 * mode decision on screen originates from the server.
 */

import { PlaygroundClient } from "./client.js";
import type { ConfigPatch, ConfigRecord, HandRecord, StateRecord } from "./protocol.js";
import { TECHNIQUES } from "./protocol.js";
import {
  buildFrame,
  fixedCamera,
  nextTimestamp,
  synthesizeHand,
} from "./scene.js";
import type { PointerState } from "./scene.js";
import { drawScene, planeMapping } from "./render.js";

const FRAME_INTERVAL_MS = 1000 / 90;

// must match the server's default object: diameter from a 14 degree
// angular size at 2 m depth
const BASE_DIAMETER_M =
  2 * 2.0 * Math.tan(((14.0 / 2) * Math.PI) / 180);

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) throw new Error(`missing element #${id}`);
  return found as T;
}

const canvas = element<HTMLCanvasElement>("scene");
const context = canvas.getContext("2d");
if (context === null) throw new Error("2d canvas unsupported");
const ctx = context;

const banner = element<HTMLDivElement>("banner");
const techniqueSelect = element<HTMLSelectElement>("technique");
const depthSlider = element<HTMLInputElement>("depth");
const spanSlider = element<HTMLInputElement>("span");
const pinchButton = element<HTMLButtonElement>("pinch");
const leftHandToggle = element<HTMLInputElement>("left-hand");
const readout = element<HTMLPreElement>("readout");

for (const name of TECHNIQUES) {
  const option = document.createElement("option");
  option.value = name;
  option.textContent = name;
  techniqueSelect.append(option);
}

const camera = fixedCamera();
const pointer: PointerState = {
  u: 0.4,
  v: 0.1,
  depthM: 0.5,
  spanM: 0.05,
  pinching: false,
  gazeU: 0.4,
  gazeV: 0.1,
};
let gazeParked = false;
let leftPinching = false;
let lastState: StateRecord | null = null;
let config: ConfigRecord | null = null;
let lastT: number | null = null;
let client: PlaygroundClient | null = null;

function wsUrl(): string {
  const port = new URLSearchParams(location.search).get("port") ?? "8765";
  return `ws://127.0.0.1:${port}`;
}

function setBanner(text: string | null): void {
  banner.textContent = text ?? "";
  banner.style.display = text === null ? "none" : "block";
}

function connect(technique: string): void {
  client?.bye().catch(() => {});
  lastState = null;
  lastT = null;
  client = new PlaygroundClient(wsUrl(), {
    technique,
    callbacks: {
      onState: (message) => {
        lastState = message.state;
      },
      onConfig: (received) => {
        config = received;
        syncThresholdInputs(received);
      },
      onStatus: (status, detail) => {
        if (status === "connected") {
          setBanner(detail === "resumed" ? null : null);
        } else if (status === "reconnecting") {
          setBanner("connection lost, trying to resume the session");
        } else if (status === "closed") {
          setBanner("disconnected");
        } else {
          setBanner("connecting");
        }
      },
      onServerError: (code, message) => {
        console.warn(`server ${code} error: ${message}`);
      },
    },
  });
  client.connect().catch((error: unknown) => {
    setBanner(`connection failed: ${String(error)}`);
  });
}

// -- pointer and keyboard -----------------------------------------------------

canvas.addEventListener("pointermove", (event) => {
  const rect = canvas.getBoundingClientRect();
  const half = config?.display_half_extent ?? [1.5696855771174902, 1.5696855771174902];
  const map = planeMapping(canvas.width, canvas.height, half);
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  pointer.u = (x - canvas.width / 2) / map.pxPerUnit;
  pointer.v = (canvas.height / 2 - y) / map.pxPerUnit;
  if (!gazeParked) {
    pointer.gazeU = pointer.u;
    pointer.gazeV = pointer.v;
  }
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const next = pointer.depthM * (event.deltaY < 0 ? 1.05 : 1 / 1.05);
  pointer.depthM = Math.min(1.5, Math.max(0.15, next));
  depthSlider.value = pointer.depthM.toFixed(2);
});

window.addEventListener("keydown", (event) => {
  if (event.key === "Shift") gazeParked = true;
  if (event.code === "Space") {
    event.preventDefault();
    pointer.pinching = true;
  }
  if (event.key === "a" || event.key === "A") leftPinching = true;
});

window.addEventListener("keyup", (event) => {
  if (event.key === "Shift") gazeParked = false;
  if (event.code === "Space") pointer.pinching = false;
  if (event.key === "a" || event.key === "A") leftPinching = false;
});

pinchButton.addEventListener("pointerdown", () => {
  pointer.pinching = true;
});
pinchButton.addEventListener("pointerup", () => {
  pointer.pinching = false;
});
pinchButton.addEventListener("pointerleave", () => {
  pointer.pinching = false;
});

depthSlider.addEventListener("input", () => {
  pointer.depthM = Number(depthSlider.value);
});
spanSlider.addEventListener("input", () => {
  pointer.spanM = Number(spanSlider.value);
});
techniqueSelect.addEventListener("change", () => {
  connect(techniqueSelect.value);
});

// -- threshold controls -------------------------------------------------------

interface ThresholdControl {
  id: string;
  patch(value: number): ConfigPatch;
  read(config: ConfigRecord): number;
}

const THRESHOLD_CONTROLS: ThresholdControl[] = [
  {
    id: "overlap-view",
    patch: (value) => ({ alignment: { overlap_view_threshold: value } }),
    read: (c) => c.alignment.overlap_view_threshold,
  },
  {
    id: "overlap-object",
    patch: (value) => ({ alignment: { overlap_object_threshold: value } }),
    read: (c) => c.alignment.overlap_object_threshold,
  },
  {
    id: "mode-in",
    patch: (value) => ({ alignment: { dispersion_mode_in: value } }),
    read: (c) => c.alignment.dispersion_mode_in,
  },
  {
    id: "mode-out",
    patch: (value) => ({ alignment: { dispersion_mode_out: value } }),
    read: (c) => c.alignment.dispersion_mode_out,
  },
  {
    id: "exit-factor",
    patch: (value) => ({ alignment: { overlap_exit_factor: value } }),
    read: (c) => c.alignment.overlap_exit_factor,
  },
  {
    id: "pinch-onset",
    patch: (value) => ({ pinch: { onset_span_m: value } }),
    read: (c) => c.pinch.onset_span_m,
  },
  {
    id: "pinch-release",
    patch: (value) => ({ pinch: { release_span_m: value } }),
    read: (c) => c.pinch.release_span_m,
  },
];

let syncingInputs = false;

function syncThresholdInputs(record: ConfigRecord): void {
  syncingInputs = true;
  for (const control of THRESHOLD_CONTROLS) {
    element<HTMLInputElement>(control.id).value = String(control.read(record));
  }
  syncingInputs = false;
}

for (const control of THRESHOLD_CONTROLS) {
  element<HTMLInputElement>(control.id).addEventListener("change", () => {
    if (syncingInputs || client === null) return;
    const value = Number(element<HTMLInputElement>(control.id).value);
    if (!Number.isFinite(value)) return;
    client.patchConfig(control.patch(value)).catch(() => {});
  });
}

// -- frame loop ---------------------------------------------------------------

function currentLeftHand(): HandRecord | null {
  if (!leftHandToggle.checked) return null;
  // static mirrored hand, close enough to act as the second pinch
  return synthesizeHand(-pointer.u, pointer.v, pointer.depthM, 0.05, leftPinching);
}

function tick(): void {
  if (client === null || client.status !== "connected") {
    render(currentLeftHand());
    return;
  }
  lastT = nextTimestamp(lastT, performance.now() / 1000);
  const leftHand = currentLeftHand();
  const frame = buildFrame(camera, lastT, pointer, leftHand);
  client.sendFrame(frame).catch(() => {});
  render(leftHand);
}

function render(leftHand: HandRecord | null): void {
  const half = config?.display_half_extent ?? [1.5696855771174902, 1.5696855771174902];
  drawScene(ctx, canvas.width, canvas.height, {
    state: lastState,
    pointer,
    rightHand: synthesizeHand(
      pointer.u,
      pointer.v,
      pointer.depthM,
      pointer.spanM,
      pointer.pinching,
    ),
    leftHand,
    halfExtent: half,
    baseDiameterM: BASE_DIAMETER_M,
  });
  updateReadout();
}

function formatValue(value: number | null): string {
  return value === null ? "-" : value.toFixed(3);
}

function updateReadout(): void {
  const state = lastState;
  const grace = client?.reconnectSecondsLeft;
  if (grace !== null && grace !== undefined) {
    setBanner(
      `connection lost, trying to resume (${grace.toFixed(0)}s left)`,
    );
  }
  if (state === null) {
    readout.textContent = "no state yet";
    return;
  }
  readout.textContent = [
    `mode        ${state.mode}`,
    `outline     ${state.outline}`,
    `gazed       ${state.gazed}`,
    `aligned     ${state.aligned}`,
    `view ratio  ${formatValue(state.view_ratio)}`,
    `obj ratio   ${formatValue(state.object_ratio)}`,
    `dispersion  ${formatValue(state.dispersion_deg)} deg`,
    `control     ${formatValue(state.control_value)}`,
    `scale       ${state.object_scale.toFixed(3)}`,
  ].join("\n");
}

setInterval(tick, FRAME_INTERVAL_MS);
techniqueSelect.value = "PTZArea";
connect("PTZArea");
