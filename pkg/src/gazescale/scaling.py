"""Control-parameter extraction, clamping, and the scaling ratio.

The object scale during a scaling session is s_t = s_0 * (I_t / I_0) with
both inputs clamped to the technique's range. Push-Pull depth is mapped
inversely by default so pulling the hand closer grows the object.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import KindMismatch, MissingTrackingData
from .techniques import Technique


class ControlKind(Enum):
    AREA = "Area"
    ANGLE = "Angle"
    SPAN = "Span"
    DEPTH = "Depth"
    BIMANUAL_DISTANCE = "BimanualDistance"


CONTROL_KIND_FOR = {
    Technique.PTZ_AREA: ControlKind.AREA,
    Technique.PTZ_ANGLE: ControlKind.ANGLE,
    Technique.PTZ_SPAN: ControlKind.SPAN,
    Technique.PUSH_PULL_DEPTH: ControlKind.DEPTH,
    Technique.BIMANUAL: ControlKind.BIMANUAL_DISTANCE,
}


@dataclass(frozen=True)
class ControlInput:
    kind: ControlKind
    value: float


@dataclass(frozen=True)
class ClampRange:
    min: float
    max: float

    def __post_init__(self):
        if not (0.0 < self.min < self.max):
            raise ValueError(f"clamp range needs 0 < min < max, got [{self.min}, {self.max}]")

    def clamp(self, value: float) -> float:
        return min(max(value, self.min), self.max)


@dataclass(frozen=True)
class ScalingSession:
    s_0: float
    i_0: ControlInput


@dataclass(frozen=True)
class ControlMeasures:
    """Per-frame geometry quantities a technique may consume; None = untracked."""

    view_area_fraction: Optional[float] = None
    finger_angle_deg: Optional[float] = None
    span_m: Optional[float] = None
    hand_depth_m: Optional[float] = None
    pinch_distance_m: Optional[float] = None


def extract_input(technique: Technique, measures: ControlMeasures,
                  depth_range: Optional[ClampRange] = None,
                  depth_inverted: bool = True) -> ControlInput:
    """Pick the technique's control value out of the frame measures.

    Depth is remapped to (min + max) - clamp(depth) when inverted, so the
    value grows as the hand comes toward the head; the midpoint of the
    clamp range is the fixed point of that mapping.
    """
    kind = CONTROL_KIND_FOR[technique]
    raw = {
        ControlKind.AREA: measures.view_area_fraction,
        ControlKind.ANGLE: measures.finger_angle_deg,
        ControlKind.SPAN: measures.span_m,
        ControlKind.DEPTH: measures.hand_depth_m,
        ControlKind.BIMANUAL_DISTANCE: measures.pinch_distance_m,
    }[kind]
    if raw is None:
        raise MissingTrackingData(f"{technique.value} requires {kind.value} this frame")
    if kind is ControlKind.DEPTH and depth_inverted:
        if depth_range is None:
            raise ValueError("inverted depth extraction needs the clamp range")
        raw = (depth_range.min + depth_range.max) - depth_range.clamp(raw)
    return ControlInput(kind, raw)


def clamp_input(input: ControlInput, range: ClampRange) -> ControlInput:
    return ControlInput(input.kind, range.clamp(input.value))


def begin_session(s_0: float, i_0_raw: ControlInput, range: ClampRange) -> ScalingSession:
    if s_0 <= 0.0:
        raise ValueError(f"session needs a positive starting scale, got {s_0}")
    return ScalingSession(s_0, clamp_input(i_0_raw, range))


def scale_at(session: ScalingSession, i_t_raw: ControlInput, range: ClampRange) -> float:
    if i_t_raw.kind is not session.i_0.kind:
        raise KindMismatch(
            f"session is {session.i_0.kind.value}, got {i_t_raw.kind.value}")
    i_t = clamp_input(i_t_raw, range)
    return session.s_0 * (i_t.value / session.i_0.value)
