/**
 * Conformance of the live playground path against recorded-trace replay.
 *
 * Each scenario synthesizes frames with the app's own scene code, streams
 * them to the server, and also writes them to a trace file replayed by the
 * CLI. Every frame is serialized exactly once and that text is reused for
 * both paths, so the two pipelines parse identical numbers; the reported
 * state timelines must then match frame for frame, value for value.
 *
 * The three scenarios are the canonical interactions: sliding the hand
 * onto the gazed object until the overlap alignment turns the outline
 * yellow, pinching at high dispersion to grab and drag the object with an
 * orange outline, and widening the finger span after alignment to double
 * the displayed scale.
 */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type {
  FrameRecord,
  ModeEventRecord,
  StateRecord,
} from "../src/protocol.js";
import { buildFrame, fixedCamera } from "../src/scene.js";
import type { PointerState } from "../src/scene.js";
import { execFileAsync, makeClient, PYTHON, startServer } from "./helpers.js";
import type { ServerHandle } from "./helpers.js";

let server: ServerHandle;
let workDir: string;

beforeAll(async () => {
  server = await startServer();
  workDir = mkdtempSync(join(tmpdir(), "playground-conformance-"));
});

afterAll(async () => {
  await server.stop();
});

const cam = fixedCamera();
const FRAME_RATE = 90;

// mirrors the server's default session object so replay places it identically
const TRIAL_SPEC = {
  target_direction: "up",
  target_scale: 1.5,
  object_depth_m: 2.0,
  target_offset_deg: 35.0,
  object_diameter_deg: 14.0,
  snap_radius_m: 0.15,
  scale_tolerance_m: 0.1,
};

interface TimelineEntry {
  t: number;
  state: StateRecord;
  events: ModeEventRecord[];
}

function ramp(from: number, to: number, step: number, steps: number): number {
  return from + ((to - from) * step) / (steps - 1);
}

function basePointer(): PointerState {
  return {
    u: 0,
    v: 0,
    depthM: 0.5,
    spanM: 0.05,
    pinching: false,
    gazeU: 0,
    gazeV: 0,
  };
}

/** Hand slides in from the left and settles on the gazed object. */
function overlapScenario(): FrameRecord[] {
  const frames: FrameRecord[] = [];
  const pointer = basePointer();
  pointer.depthM = 0.45;
  pointer.spanM = 0.06;
  for (let i = 0; i < 120; i += 1) {
    if (i < 10) pointer.u = -0.8;
    else if (i < 80) pointer.u = ramp(-0.8, 0, i - 10, 70);
    else pointer.u = 0;
    frames.push(buildFrame(cam, i / FRAME_RATE, pointer));
  }
  return frames;
}

// 30 degrees off the gaze ray: tan(30 deg) on the display plane
const DISPERSED_U = Math.tan((30 * Math.PI) / 180);

/** Pinch away from the object, drag it, release. */
function translationScenario(): FrameRecord[] {
  const frames: FrameRecord[] = [];
  const pointer = basePointer();
  pointer.u = DISPERSED_U;
  for (let i = 0; i < 120; i += 1) {
    pointer.pinching = i >= 20 && i < 90;
    if (i >= 25 && i < 70) pointer.u = ramp(DISPERSED_U, 0.35, i - 25, 45);
    else if (i >= 70) pointer.u = 0.35;
    frames.push(buildFrame(cam, i / FRAME_RATE, pointer));
  }
  return frames;
}

/** Align by dispersion, then widen the span to twice its starting value. */
function spanScenario(): FrameRecord[] {
  const frames: FrameRecord[] = [];
  const pointer = basePointer();
  pointer.u = 0.05;
  for (let i = 0; i < 140; i += 1) {
    if (i < 25) pointer.spanM = 0.05;
    else if (i < 85) pointer.spanM = ramp(0.05, 0.1, i - 25, 60);
    else pointer.spanM = 0.1;
    frames.push(buildFrame(cam, i / FRAME_RATE, pointer));
  }
  return frames;
}

async function streamLive(
  technique: string,
  frameTexts: string[],
): Promise<TimelineEntry[]> {
  const client = makeClient(server.url, { technique });
  await client.connect();
  const timeline: TimelineEntry[] = [];
  for (const text of frameTexts) {
    const reply = await client.sendFrameText(
      `{"type":"frame","version":1,"frame":${text}}`,
    );
    if (reply.type !== "state") {
      throw new Error(`server rejected a frame: ${JSON.stringify(reply)}`);
    }
    timeline.push({ t: reply.t, state: reply.state, events: reply.events });
  }
  await client.bye();
  return timeline;
}

async function replayTrace(
  technique: string,
  frameTexts: string[],
): Promise<{ timeline: TimelineEntry[]; final: Record<string, unknown> }> {
  const header = JSON.stringify({
    schema_version: 1,
    frame_rate_hz: FRAME_RATE,
    seed: 0,
    technique,
    trial_spec: TRIAL_SPEC,
  });
  const path = join(workDir, `${technique}.jsonl`);
  writeFileSync(path, [header, ...frameTexts].join("\n") + "\n");
  const { stdout } = await execFileAsync(
    PYTHON,
    ["-m", "gazescale.cli", "replay", "--jsonl", path],
    { maxBuffer: 64 * 1024 * 1024 },
  );
  const lines = stdout.trim().split("\n").map((line) => JSON.parse(line));
  const final = lines.at(-1) as Record<string, unknown>;
  return { timeline: lines.slice(0, -1) as TimelineEntry[], final };
}

async function runBothPaths(
  technique: string,
  frames: FrameRecord[],
): Promise<TimelineEntry[]> {
  const frameTexts = frames.map((frame) => JSON.stringify(frame));
  const live = await streamLive(technique, frameTexts);
  const replayed = await replayTrace(technique, frameTexts);

  expect(replayed.timeline).toHaveLength(frames.length);
  expect(live).toHaveLength(frames.length);
  for (let i = 0; i < frames.length; i += 1) {
    expect(live[i]!.t, `frame ${i} timestamp`).toBe(replayed.timeline[i]!.t);
    expect(live[i]!.state, `frame ${i} state`).toStrictEqual(
      replayed.timeline[i]!.state,
    );
    expect(live[i]!.events, `frame ${i} events`).toStrictEqual(
      replayed.timeline[i]!.events,
    );
  }
  expect(replayed.final).toHaveProperty("key");
  expect(replayed.final).toHaveProperty("result");
  return live;
}

function eventKinds(timeline: TimelineEntry[]): string[] {
  return timeline.flatMap((entry) => entry.events.map((event) => event.kind));
}

describe("playground conformance with trace replay", () => {
  it("overlap alignment: outline turns yellow as coverage crosses the threshold", async () => {
    const timeline = await runBothPaths("PTZArea", overlapScenario());

    const first = timeline[0]!.state;
    expect(first.gazed).toBe(true);
    expect(first.outline).toBe("White");
    expect(first.mode).toBe("Idle");

    const entry = timeline.findIndex((e) => e.state.mode === "Scaling");
    expect(entry).toBeGreaterThan(0);
    const atEntry = timeline[entry]!.state;
    expect(atEntry.outline).toBe("Yellow");
    expect(atEntry.view_ratio).not.toBeNull();
    expect(atEntry.view_ratio!).toBeGreaterThanOrEqual(0.25);
    const before = timeline[entry - 1]!.state;
    expect(before.view_ratio === null || before.view_ratio < 0.25).toBe(true);

    // alignment holds for the rest of the slide and the settle
    for (const e of timeline.slice(entry)) {
      expect(e.state.mode).toBe("Scaling");
      expect(e.state.outline).toBe("Yellow");
    }
    expect(eventKinds(timeline)).toContain("ModeInScaling");
    expect(eventKinds(timeline)).not.toContain("ModeOut");
    console.log(
      `[SECONDARY] conformance PTZArea overlap: PASS ` +
        `(mode-in at frame ${entry}, view_ratio ${atEntry.view_ratio!.toFixed(3)})`,
    );
  }, 120_000);

  it("pinch at high dispersion: orange outline and the object follows the hand", async () => {
    const timeline = await runBothPaths("PTZAngle", translationScenario());

    // parked phase: gazed but far outside the dispersion band
    const parked = timeline[19]!.state;
    expect(parked.outline).toBe("White");
    expect(parked.dispersion_deg).not.toBeNull();
    expect(parked.dispersion_deg!).toBeCloseTo(30, 1);
    expect(parked.aligned).toBe(false);

    const grabIndex = timeline.findIndex((e) =>
      e.events.some((event) => event.kind === "ModeInTranslation"),
    );
    expect(grabIndex).toBeGreaterThanOrEqual(20);
    const grabbed = timeline[grabIndex]!.state;
    expect(grabbed.mode).toBe("Translation");
    expect(grabbed.outline).toBe("Orange");
    expect(grabbed.dispersion_deg!).toBeCloseTo(30, 0);

    const startCenter = timeline[0]!.state.object_center;
    const settled = timeline[88]!.state;
    const draggedX = settled.object_center[0] - startCenter[0];
    // hand moved (0.35 - tan 30 deg) * 0.5 m along x; the object followed
    expect(draggedX).toBeCloseTo((0.35 - DISPERSED_U) * 0.5, 2);
    expect(settled.object_center[1]).toBeCloseTo(startCenter[1], 6);

    const kinds = eventKinds(timeline);
    expect(kinds).toContain("ObjectMoved");
    expect(kinds).not.toContain("ModeInScaling");
    const out = timeline
      .flatMap((e) => e.events)
      .find((event) => event.kind === "ModeOut");
    expect(out).toBeDefined();
    expect(out!.from_mode).toBe("Translation");
    const last = timeline.at(-1)!.state;
    expect(last.mode).toBe("Idle");
    expect(last.outline).toBe("White");
    console.log(
      `[SECONDARY] conformance PTZAngle translation: PASS ` +
        `(grab at frame ${grabIndex}, drag ${draggedX.toFixed(3)} m)`,
    );
  }, 120_000);

  it("span widening after alignment doubles the displayed scale", async () => {
    const timeline = await runBothPaths("PTZSpan", spanScenario());

    // dispersion is tiny from the first frame, so scaling engages at once
    const first = timeline[0]!.state;
    expect(first.mode).toBe("Scaling");
    expect(first.outline).toBe("Yellow");
    expect(first.dispersion_deg!).toBeLessThan(15);

    const settledBefore = timeline[24]!.state;
    expect(settledBefore.object_scale).toBeCloseTo(1.0, 3);
    expect(settledBefore.control_value!).toBeCloseTo(0.05, 3);

    const final = timeline.at(-1)!.state;
    expect(final.mode).toBe("Scaling");
    expect(final.control_value!).toBeCloseTo(0.1, 3);
    expect(final.object_scale).toBeCloseTo(2.0, 3);

    expect(eventKinds(timeline)).toContain("ScaleChanged");
    expect(eventKinds(timeline)).not.toContain("ModeOut");
    console.log(
      `[SECONDARY] conformance PTZSpan doubling: PASS ` +
        `(scale ${settledBefore.object_scale.toFixed(4)} -> ` +
        `${final.object_scale.toFixed(4)})`,
    );
  }, 120_000);
});
