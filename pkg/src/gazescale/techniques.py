"""Technique, mode, and outline vocabulary shared across modules."""

from __future__ import annotations

from enum import Enum


class Technique(Enum):
    PTZ_AREA = "PTZArea"
    PTZ_ANGLE = "PTZAngle"
    PTZ_SPAN = "PTZSpan"
    PUSH_PULL_DEPTH = "PushPullDepth"
    BIMANUAL = "Bimanual"

    @classmethod
    def parse(cls, name: str) -> "Technique":
        for t in cls:
            if t.value == name:
                return t
        raise ValueError(f"unknown technique {name!r}; expected one of "
                         f"{[t.value for t in cls]}")


class Mode(Enum):
    IDLE = "Idle"
    TRANSLATION = "Translation"
    SCALING = "Scaling"


class Outline(Enum):
    NONE = "None"
    WHITE = "White"
    ORANGE = "Orange"
    YELLOW = "Yellow"


# Unimanual techniques read the dominant hand only; Bimanual needs both
# while scaling.
UNIMANUAL = (
    Technique.PTZ_AREA,
    Technique.PTZ_ANGLE,
    Technique.PTZ_SPAN,
    Technique.PUSH_PULL_DEPTH,
)
