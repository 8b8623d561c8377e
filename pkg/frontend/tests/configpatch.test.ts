/**
 * Config patch round-trips over the live protocol.
 *
 * Every threshold field the playground exposes is patched on a fresh
 * session and the acknowledged config must equal the default config with
 * exactly that one leaf changed, bit for bit. A second read-back confirms
 * the patch stuck.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type { ConfigPatch, ConfigRecord } from "../src/protocol.js";
import { makeClient, startServer } from "./helpers.js";
import type { ServerHandle } from "./helpers.js";

let server: ServerHandle;

beforeAll(async () => {
  server = await startServer();
});

afterAll(async () => {
  await server.stop();
});

async function fetchDefaults(): Promise<ConfigRecord> {
  const client = makeClient(server.url);
  await client.connect();
  const reply = await client.getConfig();
  await client.bye();
  if (reply.type !== "config") throw new Error("config read failed");
  return reply.config;
}

interface ThresholdCase {
  name: string;
  patch: ConfigPatch;
  apply(config: ConfigRecord): void;
}

// values stay inside each field's validity range while changing every one
const THRESHOLD_CASES: ThresholdCase[] = [
  {
    name: "alignment.overlap_view_threshold",
    patch: { alignment: { overlap_view_threshold: 0.21875 } },
    apply: (c) => {
      c.alignment.overlap_view_threshold = 0.21875;
    },
  },
  {
    name: "alignment.overlap_object_threshold",
    patch: { alignment: { overlap_object_threshold: 0.13125 } },
    apply: (c) => {
      c.alignment.overlap_object_threshold = 0.13125;
    },
  },
  {
    name: "alignment.dispersion_mode_in",
    patch: { alignment: { dispersion_mode_in: 13.125 } },
    apply: (c) => {
      c.alignment.dispersion_mode_in = 13.125;
    },
  },
  {
    name: "alignment.dispersion_mode_out",
    patch: { alignment: { dispersion_mode_out: 21.25 } },
    apply: (c) => {
      c.alignment.dispersion_mode_out = 21.25;
    },
  },
  {
    name: "alignment.overlap_exit_factor",
    patch: { alignment: { overlap_exit_factor: 0.7875 } },
    apply: (c) => {
      c.alignment.overlap_exit_factor = 0.7875;
    },
  },
  {
    name: "pinch.onset_span_m",
    patch: { pinch: { onset_span_m: 0.0175 } },
    apply: (c) => {
      c.pinch.onset_span_m = 0.0175;
    },
  },
  {
    name: "pinch.release_span_m",
    patch: { pinch: { release_span_m: 0.02625 } },
    apply: (c) => {
      c.pinch.release_span_m = 0.02625;
    },
  },
  {
    name: "gaze_tolerance_deg",
    patch: { gaze_tolerance_deg: 1.3125 },
    apply: (c) => {
      c.gaze_tolerance_deg = 1.3125;
    },
  },
  {
    name: "scaling_loss_timeout_s",
    patch: { scaling_loss_timeout_s: 0.175 },
    apply: (c) => {
      c.scaling_loss_timeout_s = 0.175;
    },
  },
  {
    name: "clamps.Angle",
    patch: { clamps: { Angle: [3.0, 35.0] } },
    apply: (c) => {
      c.clamps.Angle = [3.0, 35.0];
    },
  },
  {
    name: "clamps.Area",
    patch: { clamps: { Area: [0.001, 0.875] } },
    apply: (c) => {
      c.clamps.Area = [0.001, 0.875];
    },
  },
  {
    name: "clamps.BimanualDistance",
    patch: { clamps: { BimanualDistance: [0.01, 0.7] } },
    apply: (c) => {
      c.clamps.BimanualDistance = [0.01, 0.7];
    },
  },
  {
    name: "clamps.Depth",
    patch: { clamps: { Depth: [0.1, 0.4375] } },
    apply: (c) => {
      c.clamps.Depth = [0.1, 0.4375];
    },
  },
  {
    name: "clamps.Span",
    patch: { clamps: { Span: [0.01, 0.13125] } },
    apply: (c) => {
      c.clamps.Span = [0.01, 0.13125];
    },
  },
];

describe("config defaults", () => {
  it("serves the documented default thresholds", async () => {
    const config = await fetchDefaults();
    expect(config.alignment).toStrictEqual({
      overlap_view_threshold: 0.25,
      overlap_object_threshold: 0.15,
      dispersion_mode_in: 15.0,
      dispersion_mode_out: 17.0,
      overlap_exit_factor: 0.9,
    });
    expect(config.pinch).toStrictEqual({
      onset_span_m: 0.02,
      release_span_m: 0.03,
    });
    expect(config.clamps.Span).toStrictEqual([0.01, 0.15]);
    expect(config.gaze_tolerance_deg).toBe(1.5);
  });
});

describe("threshold field round trips", () => {
  it.each(THRESHOLD_CASES)(
    "patches $name and reads back exactly that change",
    async ({ patch, apply }) => {
      const defaults = await fetchDefaults();
      const expected = structuredClone(defaults);
      apply(expected);

      const client = makeClient(server.url);
      await client.connect();
      const ack = await client.patchConfig(patch);
      expect(ack.type).toBe("config_ack");
      if (ack.type === "config_ack") {
        expect(ack.config).toStrictEqual(expected);
      }
      // a separate read sees the same stored config
      const reread = await client.getConfig();
      if (reread.type === "config") {
        expect(reread.config).toStrictEqual(expected);
      } else {
        throw new Error("config read failed after patch");
      }
      await client.bye();
    },
  );

  it("applies a combined patch across groups in one message", async () => {
    const defaults = await fetchDefaults();
    const expected = structuredClone(defaults);
    expected.alignment.dispersion_mode_in = 10.5;
    expected.alignment.dispersion_mode_out = 12.25;
    expected.pinch.onset_span_m = 0.0175;
    expected.clamps.Span = [0.02, 0.12];

    const client = makeClient(server.url);
    await client.connect();
    const ack = await client.patchConfig({
      alignment: { dispersion_mode_in: 10.5, dispersion_mode_out: 12.25 },
      pinch: { onset_span_m: 0.0175 },
      clamps: { Span: [0.02, 0.12] },
    });
    expect(ack.type).toBe("config_ack");
    if (ack.type === "config_ack") {
      expect(ack.config).toStrictEqual(expected);
    }
    await client.bye();
  });

  it("rejects an invalid patch and keeps the config unchanged", async () => {
    const defaults = await fetchDefaults();
    const client = makeClient(server.url);
    await client.connect();
    const reply = await client.patchConfig({
      // mode-in must stay below mode-out (17 by default)
      alignment: { dispersion_mode_in: 30.0 },
    });
    expect(reply.type).toBe("error");
    if (reply.type === "error") {
      expect(reply.code).toBe("parse");
    }
    const after = await client.getConfig();
    if (after.type === "config") {
      expect(after.config).toStrictEqual(defaults);
    } else {
      throw new Error("config read failed after rejected patch");
    }
    await client.bye();
  });
});
