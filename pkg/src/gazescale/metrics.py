"""Trial scoring: replay a trace through the engine and grade the protocol.

A trial has two phases. Phase 1 (translation) lasts until the object first
comes within the snap radius of the target; from that frame on the runner
pins the object to the target center. Phase 2 (scaling) starts at the frame
after the snap and ends at the first ModeOut from Scaling, which freezes the
final scale; later re-entries are ignored. A ModeIn of the wrong kind inside
a phase is a mode-switch error. Timing fields are differences of frame
timestamps, so they are multiples of the frame period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .config import EngineConfig
from .errors import EmptyInput
from .state_machine import (EventKind, InteractionEngine, Mode, ModeEvent,
                            SceneObject)
from .techniques import Technique
from .geometry import Vec3
from .trace import Frame, Trace, TrialSpec


class TrialRunner:
    """Steps an engine over trial frames, applying the snap-and-hold rule.

    The object and target are placed from the first frame's head pose and
    stay fixed in world space for the rest of the trial.
    """

    def __init__(self, technique: Technique, spec: TrialSpec,
                 config: Optional[EngineConfig] = None):
        self.technique = technique
        self.spec = spec
        self.config = config if config is not None else EngineConfig()
        self.engine: Optional[InteractionEngine] = None
        self.start_center: Optional[Vec3] = None
        self.target_center: Optional[Vec3] = None
        self.snapped = False
        self.snap_t: Optional[float] = None

    def step(self, frame: Frame) -> list[ModeEvent]:
        if self.engine is None:
            self.start_center = self.spec.start_center(frame.head)
            self.target_center = self.spec.target_center(frame.head)
            obj = SceneObject(center=self.start_center, scale=1.0,
                              base_diameter=self.spec.base_diameter_m)
            self.engine = InteractionEngine(self.technique, self.config, obj)
        events = self.engine.step(frame)
        if not self.snapped:
            offset = self.engine.object.center - self.target_center
            if offset.norm() <= self.spec.snap_radius_m:
                self.snapped = True
                self.snap_t = frame.t
        if self.snapped and self.engine.object.center != self.target_center:
            self.engine.relocate_object(self.target_center)
        return events

    @property
    def target_diameter_m(self) -> float:
        return self.spec.base_diameter_m * self.spec.target_scale


@dataclass(frozen=True)
class TrialKey:
    """Condition labels a trial was run under."""

    technique: str
    target_scale: float
    target_direction: str

    @staticmethod
    def from_trace(trace: Trace) -> "TrialKey":
        if trace.technique is None or trace.trial_spec is None:
            raise ValueError("trace header lacks technique or trial spec")
        return TrialKey(trace.technique, trace.trial_spec.target_scale,
                        trace.trial_spec.target_direction)

    def to_record(self) -> dict:
        return {"technique": self.technique,
                "target_scale": self.target_scale,
                "target_direction": self.target_direction}


@dataclass(frozen=True)
class TrialResult:
    """Scores for one trial; timing fields are None when never reached."""

    mode_in_error_translation: int
    mode_in_error_scaling: int
    overall_mode_switch_error: int
    scaling_error: int
    mode_in_time_translation_ms: Optional[float]
    mode_in_time_scaling_ms: Optional[float]
    mode_out_time_scaling_ms: Optional[float]
    scale_difference: Optional[float]
    completed: bool

    def to_record(self) -> dict:
        return {
            "mode_in_error_translation": self.mode_in_error_translation,
            "mode_in_error_scaling": self.mode_in_error_scaling,
            "overall_mode_switch_error": self.overall_mode_switch_error,
            "scaling_error": self.scaling_error,
            "mode_in_time_translation_ms": self.mode_in_time_translation_ms,
            "mode_in_time_scaling_ms": self.mode_in_time_scaling_ms,
            "mode_out_time_scaling_ms": self.mode_out_time_scaling_ms,
            "scale_difference": self.scale_difference,
            "completed": self.completed,
        }


def evaluate_trial(trace: Trace, technique: Optional[Technique] = None,
                   spec: Optional[TrialSpec] = None,
                   config: Optional[EngineConfig] = None) -> TrialResult:
    """Replays the trace and scores it against the trial protocol."""
    if technique is None:
        if trace.technique is None:
            raise ValueError("trace header names no technique")
        technique = Technique.parse(trace.technique)
    if spec is None:
        spec = trace.trial_spec
        if spec is None:
            raise ValueError("trace header carries no trial spec")
    runner = TrialRunner(technique, spec, config)
    tol = spec.scale_tolerance_m
    target_diameter = runner.target_diameter_m

    phase2_start: Optional[float] = None
    err_translation = 0
    err_scaling = 0
    first_mode_in_translation: Optional[float] = None
    last_mode_out_phase1: Optional[float] = None
    mode_in_scaling_t: Optional[float] = None
    last_mode_out_phase2: Optional[float] = None
    session_open = False
    first_tol_t: Optional[float] = None
    finalize_t: Optional[float] = None
    final_scale: Optional[float] = None
    phase1_start: Optional[float] = None

    for frame in trace:
        # Phase 2 begins at the first frame after the one where snap landed.
        if phase2_start is None and runner.snapped:
            phase2_start = frame.t
        events = runner.step(frame)
        if phase1_start is None:
            phase1_start = frame.t
        in_phase2 = phase2_start is not None
        for event in events:
            if event.kind is EventKind.MODE_IN_TRANSLATION:
                if in_phase2:
                    err_scaling = 1
                elif first_mode_in_translation is None:
                    first_mode_in_translation = event.t
            elif event.kind is EventKind.MODE_IN_SCALING:
                if not in_phase2:
                    err_translation = 1
                elif mode_in_scaling_t is None:
                    mode_in_scaling_t = event.t
                    session_open = True
            elif event.kind is EventKind.MODE_OUT:
                if not in_phase2:
                    last_mode_out_phase1 = event.t
                elif event.from_mode is Mode.SCALING:
                    finalize_t = event.t
                    final_scale = runner.engine.object.scale
                elif mode_in_scaling_t is None:
                    last_mode_out_phase2 = event.t
        if finalize_t is not None:
            break
        if session_open and first_tol_t is None:
            diameter = runner.engine.object.diameter
            if abs(diameter - target_diameter) < tol:
                first_tol_t = frame.t

    completed = runner.snapped and finalize_t is not None

    time_in_translation = None
    if first_mode_in_translation is not None and phase1_start is not None:
        ref = phase1_start
        if last_mode_out_phase1 is not None \
                and last_mode_out_phase1 < first_mode_in_translation:
            ref = max(ref, last_mode_out_phase1)
        time_in_translation = (first_mode_in_translation - ref) * 1000.0

    time_in_scaling = None
    if mode_in_scaling_t is not None:
        ref = phase2_start
        if last_mode_out_phase2 is not None:
            ref = max(ref, last_mode_out_phase2)
        time_in_scaling = (mode_in_scaling_t - ref) * 1000.0

    time_out_scaling = None
    if finalize_t is not None and first_tol_t is not None:
        time_out_scaling = (finalize_t - first_tol_t) * 1000.0

    scale_difference = None
    in_tolerance = False
    if final_scale is not None:
        scale_difference = abs(final_scale - spec.target_scale)
        diameter_difference = abs(final_scale * spec.base_diameter_m
                                  - target_diameter)
        in_tolerance = diameter_difference < tol
    scaling_error = 0 if (completed and in_tolerance) else 1
    overall = 1 if (err_translation or err_scaling) else 0

    return TrialResult(
        mode_in_error_translation=err_translation,
        mode_in_error_scaling=err_scaling,
        overall_mode_switch_error=overall,
        scaling_error=scaling_error,
        mode_in_time_translation_ms=time_in_translation,
        mode_in_time_scaling_ms=time_in_scaling,
        mode_out_time_scaling_ms=time_out_scaling,
        scale_difference=scale_difference,
        completed=completed,
    )


@dataclass(frozen=True)
class AggregateRow:
    """Per-condition means; error rates are percentages."""

    key: TrialKey
    n: int
    mode_in_error_translation_pct: float
    mode_in_error_scaling_pct: float
    overall_mode_switch_error_pct: float
    scaling_error_pct: float
    mean_mode_in_time_translation_ms: Optional[float]
    mean_mode_in_time_scaling_ms: Optional[float]
    mean_mode_out_time_scaling_ms: Optional[float]
    mean_scale_difference: Optional[float]
    completed_pct: float

    def to_record(self) -> dict:
        record = self.key.to_record()
        record.update({
            "n": self.n,
            "mode_in_error_translation_pct": self.mode_in_error_translation_pct,
            "mode_in_error_scaling_pct": self.mode_in_error_scaling_pct,
            "overall_mode_switch_error_pct": self.overall_mode_switch_error_pct,
            "scaling_error_pct": self.scaling_error_pct,
            "mean_mode_in_time_translation_ms":
                self.mean_mode_in_time_translation_ms,
            "mean_mode_in_time_scaling_ms": self.mean_mode_in_time_scaling_ms,
            "mean_mode_out_time_scaling_ms":
                self.mean_mode_out_time_scaling_ms,
            "mean_scale_difference": self.mean_scale_difference,
            "completed_pct": self.completed_pct,
        })
        return record


def _mean(values: list[float]) -> Optional[float]:
    # Sorting before summation makes the result independent of input order.
    if not values:
        return None
    return math.fsum(sorted(values)) / len(values)


def aggregate(pairs: Iterable[tuple[TrialKey, TrialResult]]) \
        -> list[AggregateRow]:
    """Groups results by condition; raises EmptyInput on no results."""
    groups: dict[TrialKey, list[TrialResult]] = {}
    for key, result in pairs:
        groups.setdefault(key, []).append(result)
    if not groups:
        raise EmptyInput("no trial results to aggregate")
    rows = []
    for key in sorted(groups, key=lambda k: (k.technique, k.target_scale,
                                             k.target_direction)):
        results = groups[key]
        n = len(results)
        def pct(field: str) -> float:
            return _mean([float(getattr(r, field)) for r in results]) * 100.0
        def mean_of(field: str) -> Optional[float]:
            return _mean([getattr(r, field) for r in results
                          if getattr(r, field) is not None])
        rows.append(AggregateRow(
            key=key,
            n=n,
            mode_in_error_translation_pct=pct("mode_in_error_translation"),
            mode_in_error_scaling_pct=pct("mode_in_error_scaling"),
            overall_mode_switch_error_pct=pct("overall_mode_switch_error"),
            scaling_error_pct=pct("scaling_error"),
            mean_mode_in_time_translation_ms=
                mean_of("mode_in_time_translation_ms"),
            mean_mode_in_time_scaling_ms=mean_of("mode_in_time_scaling_ms"),
            mean_mode_out_time_scaling_ms=mean_of("mode_out_time_scaling_ms"),
            mean_scale_difference=mean_of("scale_difference"),
            completed_pct=pct("completed"),
        ))
    return rows


_COLUMNS = ("technique", "scale", "dir", "n", "errT%", "errS%", "err%",
            "scaleErr%", "tIn ms", "sIn ms", "sOut ms", "dScale", "done%")


def _cell(value, width: int, precision: int = 1) -> str:
    if value is None:
        return "-".rjust(width)
    if isinstance(value, float):
        return f"{value:.{precision}f}".rjust(width)
    return str(value).rjust(width)


def format_report(rows: list[AggregateRow]) -> str:
    """Renders aggregate rows as a fixed-width text table."""
    widths = (14, 6, 6, 4, 6, 6, 6, 9, 8, 8, 8, 8, 6)
    header = "  ".join(name.rjust(w) for name, w in zip(_COLUMNS, widths))
    lines = [header, "-" * len(header)]
    for row in rows:
        cells = (
            row.key.technique.rjust(widths[0]),
            _cell(row.key.target_scale, widths[1], 2),
            row.key.target_direction.rjust(widths[2]),
            _cell(row.n, widths[3]),
            _cell(row.mode_in_error_translation_pct, widths[4]),
            _cell(row.mode_in_error_scaling_pct, widths[5]),
            _cell(row.overall_mode_switch_error_pct, widths[6]),
            _cell(row.scaling_error_pct, widths[7]),
            _cell(row.mean_mode_in_time_translation_ms, widths[8]),
            _cell(row.mean_mode_in_time_scaling_ms, widths[9]),
            _cell(row.mean_mode_out_time_scaling_ms, widths[10]),
            _cell(row.mean_scale_difference, widths[11], 4),
            _cell(row.completed_pct, widths[12]),
        )
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"
