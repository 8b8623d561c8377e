"""Input frames, trial parameters, and trace file I/O.

A trace is a JSON Lines file, UTF-8, one record per line.  The first line
is a header record carrying the schema version, frame rate, seed, technique
hint, and trial parameters; every following line is one input frame.  All
numbers are serialized with round-trip-exact float formatting, so saving a
loaded trace reproduces the file byte for byte.

Unknown keys are rejected everywhere except inside the free-form "plan"
header field, which holds generator annotations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional

from .errors import ParseError, SchemaVersionMismatch
from .geometry import Ray, Vec3, ViewFrame
from .records import as_vec3_list, canonical_dumps, check_keys, get_number
from .techniques import Technique

SCHEMA_VERSION = 1

DIRECTIONS = ("up", "down", "left", "right")
CANONICAL_SCALES = (0.4, 0.67, 1.5, 2.5)


@dataclass(frozen=True)
class Hand:
    """Tracked points of one hand, in world meters."""

    thumb_tip: Vec3
    index_tip: Vec3
    pos: Vec3


@dataclass(frozen=True)
class Frame:
    """One sample of head, gaze, and hand tracking."""

    t: float
    head: ViewFrame
    gaze: Ray
    hand_l: Optional[Hand] = None
    hand_r: Optional[Hand] = None

    def hand(self, side: str) -> Optional[Hand]:
        if side == "left":
            return self.hand_l
        if side == "right":
            return self.hand_r
        raise ValueError(f"unknown hand side: {side!r}")

    def with_hand(self, side: str, hand: Optional[Hand]) -> "Frame":
        if side == "left":
            return replace(self, hand_l=hand)
        if side == "right":
            return replace(self, hand_r=hand)
        raise ValueError(f"unknown hand side: {side!r}")


@dataclass(frozen=True)
class TrialSpec:
    """Geometry and success criteria of one translate-then-scale trial."""

    target_direction: str = "up"
    target_scale: float = 1.5
    object_depth_m: float = 2.0
    target_offset_deg: float = 35.0
    object_diameter_deg: float = 14.0
    snap_radius_m: float = 0.15
    scale_tolerance_m: float = 0.1

    def __post_init__(self):
        if self.target_direction not in DIRECTIONS:
            raise ValueError(f"target_direction must be one of {DIRECTIONS}")
        for name in ("target_scale", "object_depth_m", "target_offset_deg",
                     "object_diameter_deg", "snap_radius_m",
                     "scale_tolerance_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.target_offset_deg >= 90.0:
            raise ValueError("target_offset_deg must be below 90")

    @property
    def base_diameter_m(self) -> float:
        """World diameter at scale 1, from the angular size at trial depth."""
        half = math.radians(self.object_diameter_deg / 2.0)
        return 2.0 * self.object_depth_m * math.tan(half)

    def start_center(self, head: ViewFrame) -> Vec3:
        return head.origin + head.forward * self.object_depth_m

    def target_center(self, head: ViewFrame) -> Vec3:
        axis = {
            "up": head.up,
            "down": head.up * -1.0,
            "left": head.right * -1.0,
            "right": head.right,
        }[self.target_direction]
        angle = math.radians(self.target_offset_deg)
        direction = head.forward * math.cos(angle) + axis * math.sin(angle)
        return head.origin + direction * self.object_depth_m

    def to_record(self) -> dict[str, Any]:
        return {
            "target_direction": self.target_direction,
            "target_scale": float(self.target_scale),
            "object_depth_m": float(self.object_depth_m),
            "target_offset_deg": float(self.target_offset_deg),
            "object_diameter_deg": float(self.object_diameter_deg),
            "snap_radius_m": float(self.snap_radius_m),
            "scale_tolerance_m": float(self.scale_tolerance_m),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any], line: int = 0) -> "TrialSpec":
        keys = ("target_direction", "target_scale", "object_depth_m",
                "target_offset_deg", "object_diameter_deg", "snap_radius_m",
                "scale_tolerance_m")
        check_keys(record, keys, "trial_spec", line)
        direction = record.get("target_direction", "up")
        if not isinstance(direction, str):
            raise ParseError("trial_spec: target_direction must be a string",
                             line=line)
        values = {key: get_number(record, key, "trial_spec", line)
                  for key in keys[1:] if key in record}
        try:
            return cls(target_direction=direction, **values)
        except ValueError as exc:
            raise ParseError(f"trial_spec: {exc}", line=line) from exc


@dataclass(frozen=True)
class ActorParams:
    """Synthetic operator model parameters."""

    movement_duration_s: float = 1.2
    gaze_latency_s: float = 0.1
    positional_noise_sd_m: float = 0.0
    tremor_frequency_hz: float = 9.0
    tremor_amplitude_m: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("movement_duration_s", "gaze_latency_s",
                     "positional_noise_sd_m", "tremor_frequency_hz",
                     "tremor_amplitude_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.movement_duration_s == 0:
            raise ValueError("movement_duration_s must be positive")

    def to_record(self) -> dict[str, Any]:
        return {
            "movement_duration_s": float(self.movement_duration_s),
            "gaze_latency_s": float(self.gaze_latency_s),
            "positional_noise_sd_m": float(self.positional_noise_sd_m),
            "tremor_frequency_hz": float(self.tremor_frequency_hz),
            "tremor_amplitude_m": float(self.tremor_amplitude_m),
            "seed": int(self.seed),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any], line: int = 0) -> "ActorParams":
        keys = ("movement_duration_s", "gaze_latency_s",
                "positional_noise_sd_m", "tremor_frequency_hz",
                "tremor_amplitude_m", "seed")
        check_keys(record, keys, "actor", line)
        values: dict[str, Any] = {key: get_number(record, key, "actor", line)
                                  for key in keys[:-1] if key in record}
        if "seed" in record:
            seed = record["seed"]
            if isinstance(seed, bool) or not isinstance(seed, int):
                raise ParseError("actor: seed must be an integer", line=line)
            values["seed"] = seed
        try:
            return cls(**values)
        except ValueError as exc:
            raise ParseError(f"actor: {exc}", line=line) from exc


@dataclass
class Trace:
    """An ordered frame sequence plus the header metadata."""

    frame_rate_hz: float = 90.0
    seed: int = 0
    technique: Optional[str] = None
    trial_spec: Optional[TrialSpec] = None
    actor: Optional[ActorParams] = None
    plan: Optional[dict[str, Any]] = None
    frames: list[Frame] = field(default_factory=list)

    def __iter__(self) -> Iterator[Frame]:
        return iter(self.frames)

    def __len__(self) -> int:
        return len(self.frames)

    def validate(self) -> None:
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        if self.technique is not None:
            Technique.parse(self.technique)
        if not self.frames:
            raise ValueError("trace has no frames")
        last = None
        for frame in self.frames:
            if last is not None and frame.t <= last:
                raise ValueError(f"timestamps must increase: {frame.t} after {last}")
            last = frame.t


def _vec3_record(v: Vec3) -> list[float]:
    return [float(v.x), float(v.y), float(v.z)]


def _hand_record(hand: Optional[Hand]) -> Optional[dict[str, Any]]:
    if hand is None:
        return None
    return {
        "thumb": _vec3_record(hand.thumb_tip),
        "index": _vec3_record(hand.index_tip),
        "pos": _vec3_record(hand.pos),
    }


def frame_to_record(frame: Frame) -> dict[str, Any]:
    return {
        "t": float(frame.t),
        "head": {
            "origin": _vec3_record(frame.head.origin),
            "forward": _vec3_record(frame.head.forward),
            "up": _vec3_record(frame.head.up),
        },
        "eye_l": _vec3_record(frame.head.eye_left),
        "eye_r": _vec3_record(frame.head.eye_right),
        "gaze": {
            "origin": _vec3_record(frame.gaze.origin),
            "dir": _vec3_record(frame.gaze.direction),
        },
        "hand_l": _hand_record(frame.hand_l),
        "hand_r": _hand_record(frame.hand_r),
    }


def header_to_record(trace: Trace) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "frame_rate_hz": float(trace.frame_rate_hz),
        "seed": int(trace.seed),
        "technique": trace.technique,
        "trial_spec": trace.trial_spec.to_record() if trace.trial_spec else None,
        "actor": trace.actor.to_record() if trace.actor else None,
        "plan": trace.plan,
    }


def _vec3_from(value: Any, context: str, line: int) -> Vec3:
    x, y, z = as_vec3_list(value, context, line)
    return Vec3(x, y, z)


def _hand_from(value: Any, context: str, line: int) -> Optional[Hand]:
    if value is None:
        return None
    check_keys(value, ("thumb", "index", "pos"), context, line)
    for key in ("thumb", "index", "pos"):
        if key not in value:
            raise ParseError(f"{context}: missing key {key}", line=line)
    return Hand(
        thumb_tip=_vec3_from(value["thumb"], f"{context}.thumb", line),
        index_tip=_vec3_from(value["index"], f"{context}.index", line),
        pos=_vec3_from(value["pos"], f"{context}.pos", line),
    )


def frame_from_record(record: Mapping[str, Any], line: int = 0) -> Frame:
    keys = ("t", "head", "eye_l", "eye_r", "gaze", "hand_l", "hand_r")
    check_keys(record, keys, "frame", line)
    for key in keys:
        if key not in record:
            raise ParseError(f"frame: missing key {key}", line=line)
    t = get_number(record, "t", "frame", line)

    head = record["head"]
    check_keys(head, ("origin", "forward", "up"), "frame.head", line)
    for key in ("origin", "forward", "up"):
        if key not in head:
            raise ParseError(f"frame.head: missing key {key}", line=line)
    origin = _vec3_from(head["origin"], "frame.head.origin", line)
    forward = _vec3_from(head["forward"], "frame.head.forward", line)
    up = _vec3_from(head["up"], "frame.head.up", line)
    right = up.cross(forward)
    if right.norm() < 1e-9 or forward.norm() < 1e-9:
        raise ParseError("frame.head: forward and up must span a basis",
                         line=line)

    gaze = record["gaze"]
    check_keys(gaze, ("origin", "dir"), "frame.gaze", line)
    for key in ("origin", "dir"):
        if key not in gaze:
            raise ParseError(f"frame.gaze: missing key {key}", line=line)
    gaze_dir = _vec3_from(gaze["dir"], "frame.gaze.dir", line)
    if gaze_dir.norm() < 1e-9:
        raise ParseError("frame.gaze: dir must be nonzero", line=line)

    view = ViewFrame(
        origin=origin, forward=forward, up=up, right=right.normalized(),
        eye_left=_vec3_from(record["eye_l"], "frame.eye_l", line),
        eye_right=_vec3_from(record["eye_r"], "frame.eye_r", line),
    )
    return Frame(
        t=t, head=view,
        gaze=Ray(origin=_vec3_from(gaze["origin"], "frame.gaze.origin", line),
                 direction=gaze_dir),
        hand_l=_hand_from(record["hand_l"], "frame.hand_l", line),
        hand_r=_hand_from(record["hand_r"], "frame.hand_r", line),
    )


def header_from_record(record: Mapping[str, Any], line: int = 1) -> Trace:
    keys = ("schema_version", "frame_rate_hz", "seed", "technique",
            "trial_spec", "actor", "plan")
    check_keys(record, keys, "header", line)
    if "schema_version" not in record:
        raise ParseError("header: missing schema_version", line=line)
    version = record["schema_version"]
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}",
            line=line)
    frame_rate = get_number(record, "frame_rate_hz", "header", line) \
        if "frame_rate_hz" in record else 90.0
    if frame_rate <= 0:
        raise ParseError("header: frame_rate_hz must be positive", line=line)
    seed = record.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ParseError("header: seed must be an integer", line=line)

    technique = record.get("technique")
    if technique is not None:
        if not isinstance(technique, str):
            raise ParseError("header: technique must be a string", line=line)
        try:
            Technique.parse(technique)
        except ValueError as exc:
            raise ParseError(f"header: {exc}", line=line) from exc

    spec_record = record.get("trial_spec")
    trial_spec = None if spec_record is None else TrialSpec.from_record(
        spec_record, line)
    actor_record = record.get("actor")
    actor = None if actor_record is None else ActorParams.from_record(
        actor_record, line)
    plan = record.get("plan")
    if plan is not None and not isinstance(plan, dict):
        raise ParseError("header: plan must be an object", line=line)

    return Trace(frame_rate_hz=frame_rate, seed=seed, technique=technique,
                 trial_spec=trial_spec, actor=actor, plan=plan)


def dumps_trace(trace: Trace) -> str:
    trace.validate()
    lines = [canonical_dumps(header_to_record(trace))]
    lines.extend(canonical_dumps(frame_to_record(frame)) for frame in trace.frames)
    return "\n".join(lines) + "\n"


def loads_trace(text: str) -> Trace:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty trace file", line=1)

    def parse_line(raw: str, number: int) -> Any:
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid record: {exc.msg}", line=number) from exc

    trace = header_from_record(parse_line(lines[0], 1), line=1)
    last_t = None
    for index, raw in enumerate(lines[1:], start=2):
        frame = frame_from_record(parse_line(raw, index), line=index)
        if last_t is not None and frame.t <= last_t:
            raise ParseError(
                f"timestamps must increase: {frame.t} after {last_t}",
                line=index)
        last_t = frame.t
        trace.frames.append(frame)
    if not trace.frames:
        raise ParseError("trace has no frames", line=1)
    return trace


def save_trace(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(dumps_trace(trace), encoding="utf-8")


def load_trace(path: str | Path) -> Trace:
    return loads_trace(Path(path).read_text(encoding="utf-8"))
