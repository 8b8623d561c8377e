/**
 * Canvas renderer for the playground.
 *
 * Draws only what the server reports: the outline color comes straight
 * from the state record, never from client-side reasoning about modes.
 * World geometry is projected onto the display plane at z = 1 and that
 * plane is mapped to the canvas.
 */

import type { HandRecord, StateRecord, Vec3 } from "./protocol.js";
import { projectPoint, projectSphere } from "./scene.js";
import type { PointerState } from "./scene.js";

export interface SceneView {
  state: StateRecord | null;
  pointer: PointerState;
  /** The hand record just sent to the server, drawn as-is. */
  rightHand: HandRecord;
  leftHand: HandRecord | null;
  /** Half extent of the display plane, from the server config. */
  halfExtent: [number, number];
  /** World diameter of the object at scale 1. */
  baseDiameterM: number;
}

const OUTLINE_COLORS: Record<string, string> = {
  None: "rgba(160, 160, 160, 0.35)",
  White: "#f2f2f2",
  Yellow: "#f5c211",
  Orange: "#e66100",
};

export interface Mapping {
  toX(u: number): number;
  toY(v: number): number;
  pxPerUnit: number;
}

export function planeMapping(
  width: number,
  height: number,
  half: [number, number],
): Mapping {
  const pxPerUnit = Math.min(width / (2 * half[0]), height / (2 * half[1]));
  return {
    toX: (u) => width / 2 + u * pxPerUnit,
    toY: (v) => height / 2 - v * pxPerUnit,
    pxPerUnit,
  };
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  map: Mapping,
  half: [number, number],
): void {
  ctx.fillStyle = "#14161a";
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = "rgba(255, 255, 255, 0.06)";
  ctx.lineWidth = 1;
  const step = 0.25;
  for (let u = -Math.ceil(half[0] / step) * step; u <= half[0]; u += step) {
    ctx.beginPath();
    ctx.moveTo(map.toX(u), 0);
    ctx.lineTo(map.toX(u), height);
    ctx.stroke();
  }
  for (let v = -Math.ceil(half[1] / step) * step; v <= half[1]; v += step) {
    ctx.beginPath();
    ctx.moveTo(0, map.toY(v));
    ctx.lineTo(width, map.toY(v));
    ctx.stroke();
  }
  // display window boundary
  ctx.strokeStyle = "rgba(255, 255, 255, 0.25)";
  ctx.strokeRect(
    map.toX(-half[0]),
    map.toY(half[1]),
    2 * half[0] * map.pxPerUnit,
    2 * half[1] * map.pxPerUnit,
  );
}

function drawObject(
  ctx: CanvasRenderingContext2D,
  map: Mapping,
  state: StateRecord,
  baseDiameterM: number,
): void {
  const center = state.object_center;
  const radius = (baseDiameterM / 2) * state.object_scale;
  const circle = projectSphere(center, radius);
  if (circle === null) return;
  const x = map.toX(circle.u);
  const y = map.toY(circle.v);
  const r = circle.radius * map.pxPerUnit;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, Math.PI * 2);
  ctx.fillStyle = "rgba(90, 140, 220, 0.30)";
  ctx.fill();
  ctx.lineWidth = state.outline === "None" ? 1.5 : 3;
  ctx.strokeStyle = OUTLINE_COLORS[state.outline] ?? "#f2f2f2";
  ctx.stroke();
}

function drawHand(
  ctx: CanvasRenderingContext2D,
  map: Mapping,
  hand: HandRecord,
  color: string,
): void {
  const points: Array<{ p: Vec3; r: number }> = [
    { p: hand.thumb, r: 4 },
    { p: hand.index, r: 4 },
    { p: hand.pos, r: 6 },
  ];
  const thumb = projectPoint(hand.thumb);
  const index = projectPoint(hand.index);
  if (thumb !== null && index !== null) {
    ctx.beginPath();
    ctx.moveTo(map.toX(thumb.u), map.toY(thumb.v));
    ctx.lineTo(map.toX(index.u), map.toY(index.v));
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.stroke();
  }
  for (const { p, r } of points) {
    const point = projectPoint(p);
    if (point === null) continue;
    ctx.beginPath();
    ctx.arc(map.toX(point.u), map.toY(point.v), r, 0, Math.PI * 2);
    ctx.fillStyle = color;
    ctx.fill();
  }
}

function drawGaze(
  ctx: CanvasRenderingContext2D,
  map: Mapping,
  pointer: PointerState,
): void {
  const x = map.toX(pointer.gazeU);
  const y = map.toY(pointer.gazeV);
  ctx.strokeStyle = "rgba(120, 220, 160, 0.9)";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.arc(x, y, 9, 0, Math.PI * 2);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(x - 14, y);
  ctx.lineTo(x + 14, y);
  ctx.moveTo(x, y - 14);
  ctx.lineTo(x, y + 14);
  ctx.stroke();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  view: SceneView,
): void {
  const map = planeMapping(width, height, view.halfExtent);
  drawGrid(ctx, width, height, map, view.halfExtent);
  if (view.state !== null) {
    drawObject(ctx, map, view.state, view.baseDiameterM);
  }
  drawHand(
    ctx,
    map,
    view.rightHand,
    view.pointer.pinching ? "#e66100" : "#d8d8d8",
  );
  if (view.leftHand !== null) {
    drawHand(ctx, map, view.leftHand, "#9a86c8");
  }
  drawGaze(ctx, map, view.pointer);
}
