/**
 * Wire types for the playground websocket protocol.
 *
 * Every message carries `version`; the server rejects anything else. The
 * client performs no interaction logic: it sends raw tracking frames and
 * renders whatever state the server reports back. Guards here validate
 * incoming messages so a malformed server reply fails loudly instead of
 * corrupting the view.
 */

export const PROTOCOL_VERSION = 1;

export type Vec3 = [number, number, number];

export interface HandRecord {
  thumb: Vec3;
  index: Vec3;
  pos: Vec3;
}

export interface FrameRecord {
  t: number;
  head: { origin: Vec3; forward: Vec3; up: Vec3 };
  eye_l: Vec3;
  eye_r: Vec3;
  gaze: { origin: Vec3; dir: Vec3 };
  hand_l: HandRecord | null;
  hand_r: HandRecord | null;
}

export interface StateRecord {
  mode: string;
  aligned: boolean;
  outline: string;
  gazed: boolean;
  view_ratio: number | null;
  object_ratio: number | null;
  dispersion_deg: number | null;
  control_value: number | null;
  object_center: Vec3;
  object_scale: number;
}

export interface ModeEventRecord {
  kind: string;
  t: number;
  from_mode?: string;
  value?: number;
}

export interface AlignmentConfigRecord {
  overlap_view_threshold: number;
  overlap_object_threshold: number;
  dispersion_mode_in: number;
  dispersion_mode_out: number;
  overlap_exit_factor: number;
}

export interface ConfigRecord {
  alignment: AlignmentConfigRecord;
  filter: { min_cutoff: number; beta: number; d_cutoff: number };
  filter_gaze: boolean;
  clamps: Record<string, [number, number]>;
  pinch: { onset_span_m: number; release_span_m: number };
  frame_rate_hz: number;
  display_half_extent: [number, number];
  dominant_hand: string;
  gaze_tolerance_deg: number;
  depth_inverted: boolean;
  scaling_loss_timeout_s: number;
}

/** Subset of config fields a patch may change; nested groups merge key by key. */
export interface ConfigPatch {
  alignment?: Partial<AlignmentConfigRecord>;
  filter?: Partial<{ min_cutoff: number; beta: number; d_cutoff: number }>;
  filter_gaze?: boolean;
  clamps?: Record<string, [number, number]>;
  pinch?: Partial<{ onset_span_m: number; release_span_m: number }>;
  frame_rate_hz?: number;
  display_half_extent?: [number, number];
  dominant_hand?: string;
  gaze_tolerance_deg?: number;
  depth_inverted?: boolean;
  scaling_loss_timeout_s?: number;
}

export interface HelloAckMessage {
  type: "hello_ack";
  version: number;
  session: string;
  technique: string;
  resumed: boolean;
  config: ConfigRecord;
}

export interface StateMessage {
  type: "state";
  version: number;
  t: number;
  state: StateRecord;
  events: ModeEventRecord[];
}

export interface ConfigAckMessage {
  type: "config_ack";
  version: number;
  config: ConfigRecord;
}

export interface ConfigMessage {
  type: "config";
  version: number;
  config: ConfigRecord;
}

export interface ByeAckMessage {
  type: "bye_ack";
  version: number;
}

export interface ErrorMessage {
  type: "error";
  version: number;
  code: "parse" | "state";
  message: string;
}

export type ServerMessage =
  | HelloAckMessage
  | StateMessage
  | ConfigAckMessage
  | ConfigMessage
  | ByeAckMessage
  | ErrorMessage;

export class ProtocolError extends Error {}

export const TECHNIQUES = [
  "PTZArea",
  "PTZAngle",
  "PTZSpan",
  "PushPullDepth",
  "Bimanual",
] as const;

export type TechniqueName = (typeof TECHNIQUES)[number];

// -- outgoing messages -----------------------------------------------------

export function helloMessage(technique?: string, session?: string): string {
  const message: Record<string, unknown> = {
    type: "hello",
    version: PROTOCOL_VERSION,
  };
  if (technique !== undefined) message.technique = technique;
  if (session !== undefined) message.session = session;
  return JSON.stringify(message);
}

export function frameMessage(frame: FrameRecord): string {
  return JSON.stringify({ type: "frame", version: PROTOCOL_VERSION, frame });
}

export function configPatchMessage(patch: ConfigPatch): string {
  return JSON.stringify({
    type: "config_patch",
    version: PROTOCOL_VERSION,
    patch,
  });
}

export function getConfigMessage(): string {
  return JSON.stringify({ type: "get_config", version: PROTOCOL_VERSION });
}

export function byeMessage(): string {
  return JSON.stringify({ type: "bye", version: PROTOCOL_VERSION });
}

// -- incoming message guards -------------------------------------------------

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isVec3(value: unknown): value is Vec3 {
  return (
    Array.isArray(value) &&
    value.length === 3 &&
    value.every((part) => typeof part === "number")
  );
}

function isNumberOrNull(value: unknown): value is number | null {
  return value === null || typeof value === "number";
}

export function isStateRecord(value: unknown): value is StateRecord {
  if (!isObject(value)) return false;
  return (
    typeof value.mode === "string" &&
    typeof value.aligned === "boolean" &&
    typeof value.outline === "string" &&
    typeof value.gazed === "boolean" &&
    isNumberOrNull(value.view_ratio) &&
    isNumberOrNull(value.object_ratio) &&
    isNumberOrNull(value.dispersion_deg) &&
    isNumberOrNull(value.control_value) &&
    isVec3(value.object_center) &&
    typeof value.object_scale === "number"
  );
}

function isModeEventRecord(value: unknown): value is ModeEventRecord {
  if (!isObject(value)) return false;
  if (typeof value.kind !== "string" || typeof value.t !== "number") {
    return false;
  }
  if ("from_mode" in value && typeof value.from_mode !== "string") return false;
  if ("value" in value && typeof value.value !== "number") return false;
  return true;
}

function isConfigRecord(value: unknown): value is ConfigRecord {
  if (!isObject(value)) return false;
  const alignment = value.alignment;
  if (!isObject(alignment)) return false;
  for (const key of [
    "overlap_view_threshold",
    "overlap_object_threshold",
    "dispersion_mode_in",
    "dispersion_mode_out",
    "overlap_exit_factor",
  ]) {
    if (typeof alignment[key] !== "number") return false;
  }
  const pinch = value.pinch;
  if (!isObject(pinch)) return false;
  if (
    typeof pinch.onset_span_m !== "number" ||
    typeof pinch.release_span_m !== "number"
  ) {
    return false;
  }
  if (!isObject(value.clamps)) return false;
  for (const range of Object.values(value.clamps)) {
    if (
      !Array.isArray(range) ||
      range.length !== 2 ||
      typeof range[0] !== "number" ||
      typeof range[1] !== "number"
    ) {
      return false;
    }
  }
  return (
    typeof value.frame_rate_hz === "number" &&
    typeof value.dominant_hand === "string" &&
    typeof value.gaze_tolerance_deg === "number"
  );
}

/** Parse one server frame; throws ProtocolError on anything off-contract. */
export function parseServerMessage(raw: unknown): ServerMessage {
  if (typeof raw !== "string") {
    throw new ProtocolError("server sent a non-text frame");
  }
  let message: unknown;
  try {
    message = JSON.parse(raw);
  } catch (exc) {
    throw new ProtocolError(`server sent invalid JSON: ${String(exc)}`);
  }
  if (!isObject(message) || typeof message.type !== "string") {
    throw new ProtocolError("server message must be an object with a type");
  }
  if (message.version !== PROTOCOL_VERSION) {
    throw new ProtocolError(
      `server protocol version ${String(message.version)}, ` +
        `expected ${PROTOCOL_VERSION}`,
    );
  }
  switch (message.type) {
    case "hello_ack":
      if (
        typeof message.session !== "string" ||
        typeof message.technique !== "string" ||
        typeof message.resumed !== "boolean" ||
        !isConfigRecord(message.config)
      ) {
        throw new ProtocolError("malformed hello_ack");
      }
      return message as unknown as HelloAckMessage;
    case "state":
      if (
        typeof message.t !== "number" ||
        !isStateRecord(message.state) ||
        !Array.isArray(message.events) ||
        !message.events.every(isModeEventRecord)
      ) {
        throw new ProtocolError("malformed state message");
      }
      return message as unknown as StateMessage;
    case "config_ack":
    case "config":
      if (!isConfigRecord(message.config)) {
        throw new ProtocolError(`malformed ${message.type} message`);
      }
      return message as unknown as ConfigAckMessage | ConfigMessage;
    case "bye_ack":
      return message as unknown as ByeAckMessage;
    case "error":
      if (
        (message.code !== "parse" && message.code !== "state") ||
        typeof message.message !== "string"
      ) {
        throw new ProtocolError("malformed error message");
      }
      return message as unknown as ErrorMessage;
    default:
      throw new ProtocolError(`unknown server message type ${message.type}`);
  }
}
