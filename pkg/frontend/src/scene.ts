/**
 * Synthesizes tracking frames from 2D pointer input.
 *
 * The virtual camera never moves: head at the origin looking down +z with
 * +y up, eyes split along +x. Pointer position maps to a point on the
 * display plane at z = 1; the hand sits on that ray at a chosen depth, and
 * the gaze ray goes through its own (usually identical) plane point. All
 * interaction logic lives on the server; this module only fabricates
 * plausible geometry for it to consume.
 */

import type { FrameRecord, HandRecord, Vec3 } from "./protocol.js";

export const IPD_M = 0.064;

/** Palm-to-fingertip distance of the synthetic hand. */
export const FINGER_LENGTH_M = 0.08;

/** Thumb-index separation while the pinch button is held. */
export const PINCH_SPAN_M = 0.012;

export interface Camera {
  origin: Vec3;
  forward: Vec3;
  up: Vec3;
  right: Vec3;
  eyeL: Vec3;
  eyeR: Vec3;
}

export function fixedCamera(): Camera {
  const half = IPD_M / 2;
  return {
    origin: [0, 0, 0],
    forward: [0, 0, 1],
    up: [0, 1, 0],
    right: [1, 0, 0],
    eyeL: [-half, 0, 0],
    eyeR: [half, 0, 0],
  };
}

/** Everything the UI controls; u/v are display-plane coordinates at z = 1. */
export interface PointerState {
  u: number;
  v: number;
  depthM: number;
  spanM: number;
  pinching: boolean;
  gazeU: number;
  gazeV: number;
}

function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

function scaled(v: Vec3, factor: number): Vec3 {
  return [v[0] * factor, v[1] * factor, v[2] * factor];
}

function added(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function normalized(v: Vec3): Vec3 {
  const length = norm(v);
  if (length === 0) throw new Error("cannot normalize a zero vector");
  return scaled(v, 1 / length);
}

// Fingers extend forward from the palm point and split along a diagonal,
// so the two tips differ in x, y, and z at once: their stereoscopic
// projection then spans a real rectangle instead of a degenerate line.
const SPLIT_AXIS: Vec3 = [Math.SQRT1_2, Math.SQRT1_2, 0];

/**
 * Place a hand on the pointer ray.
 *
 * The palm sits at depth `depthM`; thumb and index extend FINGER_LENGTH_M
 * from it, opened just enough that their separation equals the requested
 * span (or the pinch span while pinching). The opening angle at the palm
 * is then 2*asin(span / (2*length)), which drives the angle control.
 */
export function synthesizeHand(
  u: number,
  v: number,
  depthM: number,
  spanM: number,
  pinching: boolean,
): HandRecord {
  const pos: Vec3 = [u * depthM, v * depthM, depthM];
  const span = pinching ? PINCH_SPAN_M : spanM;
  const ratio = Math.min(span / (2 * FINGER_LENGTH_M), 1);
  const halfAngle = Math.asin(ratio);
  const along = FINGER_LENGTH_M * Math.cos(halfAngle);
  const across = FINGER_LENGTH_M * Math.sin(halfAngle);
  const forward: Vec3 = [0, 0, along];
  const split = scaled(SPLIT_AXIS, across);
  return {
    thumb: added(pos, added(forward, scaled(split, -1))),
    index: added(pos, added(forward, split)),
    pos,
  };
}

/** Assemble the full frame record the server expects. */
export function buildFrame(
  cam: Camera,
  t: number,
  pointer: PointerState,
  leftHand: HandRecord | null = null,
): FrameRecord {
  return {
    t,
    head: { origin: cam.origin, forward: cam.forward, up: cam.up },
    eye_l: cam.eyeL,
    eye_r: cam.eyeR,
    gaze: {
      origin: cam.origin,
      dir: normalized([pointer.gazeU, pointer.gazeV, 1]),
    },
    hand_l: leftHand,
    hand_r: synthesizeHand(
      pointer.u,
      pointer.v,
      pointer.depthM,
      pointer.spanM,
      pointer.pinching,
    ),
  };
}

/** Strictly increasing timestamps even if the clock stalls or jumps back. */
export function nextTimestamp(previous: number | null, now: number): number {
  if (previous === null) return now;
  return now > previous ? now : previous + 1e-4;
}

// -- projection for rendering ------------------------------------------------

/** Central projection from the head origin onto the display plane z = 1. */
export function projectPoint(p: Vec3): { u: number; v: number } | null {
  if (p[2] <= 1e-9) return null;
  return { u: p[0] / p[2], v: p[1] / p[2] };
}

export interface ProjectedCircle {
  u: number;
  v: number;
  radius: number;
}

/** Approximate screen footprint of a sphere, for drawing only. */
export function projectSphere(
  center: Vec3,
  worldRadius: number,
): ProjectedCircle | null {
  const point = projectPoint(center);
  if (point === null) return null;
  return { ...point, radius: worldRadius / center[2] };
}
