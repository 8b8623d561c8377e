"""Per-technique interaction automaton: Idle, Translation, Scaling.

The engine consumes one tracking frame at a time and runs a fixed pipeline:
filter the hand points, evaluate alignment, evaluate pinches, resolve mode
transitions, then apply the active mode's manipulation.  Alignment is
checked before pinches so that a pinch landing on the same frame as an
alignment onset enters Scaling, not Translation.

Mode rules by technique:

* PTZArea, PTZAngle, PTZSpan: alignment in Idle enters Scaling (overlap
  strategy for Area, gaze-hand dispersion for Angle and Span); losing the
  alignment leaves Scaling.  A pinch with gaze on the object while NOT
  aligned enters Translation; releasing it returns to Idle.  A drag never
  converts to Scaling directly: the hand must pass through Idle.
* PushPullDepth: pinch onset while dispersion-aligned enters Scaling, pinch
  onset while not aligned enters Translation, release leaves either mode.
* Bimanual: a single pinch with gaze on the object enters Translation; a
  second pinch joins into Scaling; releasing either pinch leaves Scaling.

Losing tracking of a load-bearing hand freezes the automaton for the frame,
except in Scaling where a loss longer than the configured timeout forces a
mode-out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .alignment import AlignmentState, eval_dispersion, eval_overlap_hysteresis
from .config import EngineConfig
from .errors import (DegenerateRegion, DegenerateVector, MissingTrackingData,
                     NonMonotonicTimestamp, PointBehindViewPlane,
                     SphereEnclosesViewer)
from .geometry import (Ray, Sphere, Vec3, angular_dispersion, finger_angle,
                       gaze_hits_sphere, hand_depth, overlap_ratios,
                       project_sphere, span, stereoscopic_view_rect)
from .one_euro import PointFilter
from .scaling import (CONTROL_KIND_FOR, ControlInput, ControlKind,
                      ControlMeasures, ScalingSession, begin_session,
                      extract_input, scale_at)
from .techniques import Mode, Outline, Technique
from .trace import Frame, Hand

SIDES = ("left", "right")
PTZ_FAMILY = (Technique.PTZ_AREA, Technique.PTZ_ANGLE, Technique.PTZ_SPAN)
DISPERSION_ALIGNED = (Technique.PTZ_ANGLE, Technique.PTZ_SPAN,
                      Technique.PUSH_PULL_DEPTH)


@dataclass(frozen=True)
class SceneObject:
    """The manipulated sphere: world center, scale factor, base size."""

    center: Vec3
    scale: float = 1.0
    base_diameter: float = 0.5

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.base_diameter <= 0:
            raise ValueError("base_diameter must be positive")

    @property
    def radius(self) -> float:
        return self.scale * self.base_diameter / 2.0

    @property
    def diameter(self) -> float:
        return self.scale * self.base_diameter

    def sphere(self) -> Sphere:
        return Sphere(self.center, self.radius)


class EventKind(Enum):
    MODE_IN_TRANSLATION = "ModeInTranslation"
    MODE_IN_SCALING = "ModeInScaling"
    MODE_OUT = "ModeOut"
    SCALE_CHANGED = "ScaleChanged"
    OBJECT_MOVED = "ObjectMoved"
    TRACKING_LOSS = "TrackingLoss"


@dataclass(frozen=True)
class ModeEvent:
    kind: EventKind
    t: float
    from_mode: Optional[Mode] = None
    value: Optional[float] = None

    def to_record(self) -> dict:
        record: dict = {"kind": self.kind.value, "t": float(self.t)}
        if self.from_mode is not None:
            record["from_mode"] = self.from_mode.value
        if self.value is not None:
            record["value"] = float(self.value)
        return record


@dataclass(frozen=True)
class PinchState:
    pinching: bool = False
    pinch_point: Optional[Vec3] = None


def pinch_detect(thumb_tip: Vec3, index_tip: Vec3, prev: PinchState,
                 onset_span_m: float = 0.02,
                 release_span_m: float = 0.03) -> PinchState:
    """Hysteretic pinch test on the thumb-index span.

    A pinch starts when the span drops below the onset threshold and holds
    until the span exceeds the release threshold.
    """
    width = span(thumb_tip, index_tip)
    if prev.pinching:
        pinching = width <= release_span_m
    else:
        pinching = width < onset_span_m
    if not pinching:
        return PinchState()
    return PinchState(True, (thumb_tip + index_tip) * 0.5)


@dataclass(frozen=True)
class InteractionState:
    """Externally visible automaton state for one frame."""

    mode: Mode
    alignment: AlignmentState
    session: Optional[ScalingSession]
    grab_offset: Optional[Vec3]
    outline: Outline


class InteractionEngine:
    """One interaction session: a technique, a config, and one object."""

    def __init__(self, technique: Technique, config: EngineConfig,
                 scene_object: SceneObject):
        self.technique = technique
        self.config = config
        self._object = scene_object
        self._mode = Mode.IDLE
        self._alignment = AlignmentState()
        self._session: Optional[ScalingSession] = None
        self._grab_offset: Optional[Vec3] = None
        self._grab_side: Optional[str] = None
        self._outline = Outline.NONE
        self._pinch = {side: PinchState() for side in SIDES}
        self._filters = {side: {"thumb": PointFilter(config.filter_params),
                                "index": PointFilter(config.filter_params),
                                "pos": PointFilter(config.filter_params)}
                         for side in SIDES}
        self._gaze_filters = {"origin": PointFilter(config.filter_params),
                              "dir": PointFilter(config.filter_params)}
        self._last_t: Optional[float] = None
        self._loss_since: Optional[float] = None
        self._gazed = False
        self._measures = ControlMeasures()
        self._view_ratio: Optional[float] = None
        self._object_ratio: Optional[float] = None
        self._dispersion: Optional[float] = None
        self._control_value: Optional[float] = None

    # -- observers ---------------------------------------------------------

    @property
    def mode(self) -> Mode:
        return self._mode

    @property
    def outline(self) -> Outline:
        return self._outline

    @property
    def object(self) -> SceneObject:
        return self._object

    @property
    def session(self) -> Optional[ScalingSession]:
        return self._session

    @property
    def gazed(self) -> bool:
        return self._gazed

    @property
    def dispersion_deg(self) -> Optional[float]:
        return self._dispersion

    @property
    def control_value(self) -> Optional[float]:
        return self._control_value

    @property
    def state(self) -> InteractionState:
        return InteractionState(mode=self._mode, alignment=self._alignment,
                                session=self._session,
                                grab_offset=self._grab_offset,
                                outline=self._outline)

    def aligned(self) -> bool:
        """Technique-effective alignment, gaze condition included."""
        if self.technique is Technique.PTZ_AREA:
            return self._alignment.aligned
        if self.technique is Technique.BIMANUAL:
            return False
        return self._alignment.aligned and self._gazed

    def state_record(self) -> dict:
        """JSON-ready snapshot consumed by replay output and the server."""
        center = self._object.center
        return {
            "mode": self._mode.value,
            "aligned": self.aligned(),
            "outline": self._outline.value,
            "gazed": self._gazed,
            "view_ratio": self._view_ratio,
            "object_ratio": self._object_ratio,
            "dispersion_deg": self._dispersion,
            "control_value": self._control_value,
            "object_center": [center.x, center.y, center.z],
            "object_scale": self._object.scale,
        }

    def relocate_object(self, center: Vec3) -> None:
        """Harness override used by the trial runner's snap rule."""
        self._object = replace(self._object, center=center)

    # -- stepping ----------------------------------------------------------

    def step(self, frame: Frame) -> list[ModeEvent]:
        if self._last_t is not None and frame.t <= self._last_t:
            raise NonMonotonicTimestamp(
                f"frame at t={frame.t} after t={self._last_t}")
        self._last_t = frame.t
        events: list[ModeEvent] = []

        hands = self._update_filters(frame)
        gaze = self._filtered_gaze(frame)
        self._gazed = gaze_hits_sphere(gaze, self._object.sphere(),
                                       self.config.gaze_tolerance_deg)

        if self._handle_loss(frame.t, hands, events):
            self._outline = self._outline_for()
            return events

        self._compute_measures(frame, hands, gaze)
        self._update_alignment()
        onsets, releases = self._update_pinches(hands)
        self._resolve_transitions(frame.t, onsets, releases, events)
        self._apply_manipulation(frame.t, events)
        self._outline = self._outline_for()
        return events

    # -- pipeline stages ----------------------------------------------------

    def _update_filters(self, frame: Frame) -> dict[str, Optional[Hand]]:
        hands: dict[str, Optional[Hand]] = {}
        for side in SIDES:
            raw = frame.hand(side)
            bank = self._filters[side]
            if raw is None:
                hands[side] = None
                # refilter from scratch on reacquire; stale derivatives
                # from before the gap would spike the cutoff
                for point_filter in bank.values():
                    point_filter.reset()
                continue
            hands[side] = Hand(
                thumb_tip=bank["thumb"].push(raw.thumb_tip, frame.t),
                index_tip=bank["index"].push(raw.index_tip, frame.t),
                pos=bank["pos"].push(raw.pos, frame.t),
            )
        return hands

    def _filtered_gaze(self, frame: Frame) -> Ray:
        if not self.config.filter_gaze:
            return frame.gaze
        origin = self._gaze_filters["origin"].push(frame.gaze.origin, frame.t)
        direction = self._gaze_filters["dir"].push(frame.gaze.direction, frame.t)
        if direction.norm() < 1e-9:
            return Ray(origin, frame.gaze.direction)
        return Ray(origin, direction.normalized())

    def _required_sides(self) -> tuple[str, ...]:
        if self._mode is Mode.TRANSLATION:
            return (self._grab_side,)
        if self._mode is Mode.SCALING:
            if self.technique is Technique.BIMANUAL:
                return SIDES
            return (self.config.dominant_hand,)
        return ()

    def _handle_loss(self, t: float, hands: dict, events: list) -> bool:
        missing = [side for side in self._required_sides()
                   if hands[side] is None]
        if not missing:
            self._loss_since = None
            return False
        events.append(ModeEvent(EventKind.TRACKING_LOSS, t))
        if self._mode is Mode.SCALING:
            if self._loss_since is None:
                self._loss_since = t
            elif t - self._loss_since > self.config.scaling_loss_timeout_s:
                self._exit_mode(t, events)
                self._loss_since = None
        return True

    def _compute_measures(self, frame: Frame, hands: dict, gaze: Ray) -> None:
        hand = hands[self.config.dominant_hand]
        view_fraction = angle = width = depth = pinch_distance = None
        self._view_ratio = self._object_ratio = self._dispersion = None

        if hand is not None:
            width = span(hand.thumb_tip, hand.index_tip)
            depth = hand_depth(frame.head, hand.pos)
            try:
                angle = finger_angle(hand.pos, hand.thumb_tip, hand.index_tip)
            except DegenerateVector:
                pass
            try:
                self._dispersion = angular_dispersion(gaze, hand.pos)
            except DegenerateVector:
                pass
            if self.technique is Technique.PTZ_AREA:
                try:
                    rect = stereoscopic_view_rect(hand.thumb_tip,
                                                  hand.index_tip, frame.head)
                    view_fraction = rect.area / self.config.display_window_area
                    disc = project_sphere(self._object.sphere(), frame.head)
                    self._view_ratio, self._object_ratio = overlap_ratios(
                        rect, disc)
                except (PointBehindViewPlane, SphereEnclosesViewer,
                        DegenerateRegion):
                    view_fraction = None
                    self._view_ratio = self._object_ratio = None

        if hands["left"] is not None and hands["right"] is not None:
            mid_l = (hands["left"].thumb_tip + hands["left"].index_tip) * 0.5
            mid_r = (hands["right"].thumb_tip + hands["right"].index_tip) * 0.5
            pinch_distance = (mid_l - mid_r).norm()

        self._measures = ControlMeasures(
            view_area_fraction=view_fraction, finger_angle_deg=angle,
            span_m=width, hand_depth_m=depth, pinch_distance_m=pinch_distance)
        try:
            self._control_value = extract_input(
                self.technique, self._measures,
                depth_range=self.config.clamp_for(ControlKind.DEPTH),
                depth_inverted=self.config.depth_inverted).value
        except MissingTrackingData:
            self._control_value = None

    def _update_alignment(self) -> None:
        cfg = self.config.alignment
        if self.technique is Technique.PTZ_AREA:
            if self._view_ratio is None or self._object_ratio is None:
                self._alignment = AlignmentState()
            else:
                _, self._alignment = eval_overlap_hysteresis(
                    self._view_ratio, self._object_ratio, self._gazed,
                    self._alignment, cfg)
        elif self.technique in DISPERSION_ALIGNED:
            if self._dispersion is None:
                self._alignment = AlignmentState()
            else:
                _, self._alignment = eval_dispersion(self._dispersion,
                                                     self._alignment, cfg)
        else:
            self._alignment = AlignmentState()

    def _update_pinches(self, hands: dict) -> tuple[dict, dict]:
        onsets = {}
        releases = {}
        for side in SIDES:
            prev = self._pinch[side]
            hand = hands[side]
            if hand is None:
                new = PinchState()
            else:
                new = pinch_detect(hand.thumb_tip, hand.index_tip, prev,
                                   self.config.pinch_onset_span_m,
                                   self.config.pinch_release_span_m)
            onsets[side] = new.pinching and not prev.pinching
            releases[side] = prev.pinching and not new.pinching
            self._pinch[side] = new
        return onsets, releases

    def _resolve_transitions(self, t: float, onsets: dict, releases: dict,
                             events: list) -> None:
        if self._mode is Mode.IDLE:
            self._transitions_from_idle(t, onsets, events)
        elif self._mode is Mode.TRANSLATION:
            self._transitions_from_translation(t, onsets, releases, events)
        elif self._mode is Mode.SCALING:
            self._transitions_from_scaling(t, releases, events)

    def _transitions_from_idle(self, t: float, onsets: dict,
                               events: list) -> None:
        dominant = self.config.dominant_hand
        if self.technique is Technique.BIMANUAL:
            pinched = {side: self._pinch[side].pinching for side in SIDES}
            onset = onsets["left"] or onsets["right"]
            if not (onset and self._gazed):
                return
            if pinched["left"] and pinched["right"]:
                self._enter_scaling(t, events)
            else:
                side = "left" if onsets["left"] else "right"
                self._enter_translation(t, side, events)
            return
        if self.technique in PTZ_FAMILY:
            if self.aligned():
                self._enter_scaling(t, events)
            elif onsets[dominant] and self._gazed:
                self._enter_translation(t, dominant, events)
            return
        # PushPullDepth: the pinch is the trigger, alignment disambiguates
        if onsets[dominant]:
            if self.aligned():
                self._enter_scaling(t, events)
            elif self._gazed:
                self._enter_translation(t, dominant, events)

    def _transitions_from_translation(self, t: float, onsets: dict,
                                      releases: dict, events: list) -> None:
        grab = self._grab_side
        if self.technique is Technique.BIMANUAL:
            other = "left" if grab == "right" else "right"
            if (onsets[other] and self._pinch[grab].pinching
                    and self._gazed):
                self._exit_mode(t, events)
                self._enter_scaling(t, events)
                return
        if releases[grab]:
            self._exit_mode(t, events)

    def _transitions_from_scaling(self, t: float, releases: dict,
                                  events: list) -> None:
        dominant = self.config.dominant_hand
        if self.technique is Technique.BIMANUAL:
            if not (self._pinch["left"].pinching
                    and self._pinch["right"].pinching):
                self._exit_mode(t, events)
        elif self.technique is Technique.PUSH_PULL_DEPTH:
            if not self._pinch[dominant].pinching:
                self._exit_mode(t, events)
        else:
            if not self.aligned():
                self._exit_mode(t, events)

    def _enter_scaling(self, t: float, events: list) -> None:
        if self._control_value is None:
            return
        kind = CONTROL_KIND_FOR[self.technique]
        self._session = begin_session(self._object.scale,
                                      ControlInput(kind, self._control_value),
                                      self.config.clamp_for(kind))
        self._mode = Mode.SCALING
        events.append(ModeEvent(EventKind.MODE_IN_SCALING, t))

    def _enter_translation(self, t: float, side: str, events: list) -> None:
        pinch_point = self._pinch[side].pinch_point
        self._grab_side = side
        self._grab_offset = self._object.center - pinch_point
        self._mode = Mode.TRANSLATION
        events.append(ModeEvent(EventKind.MODE_IN_TRANSLATION, t))

    def _exit_mode(self, t: float, events: list) -> None:
        events.append(ModeEvent(EventKind.MODE_OUT, t, from_mode=self._mode))
        self._mode = Mode.IDLE
        self._session = None
        self._grab_offset = None
        self._grab_side = None

    def _apply_manipulation(self, t: float, events: list) -> None:
        if self._mode is Mode.TRANSLATION:
            pinch_point = self._pinch[self._grab_side].pinch_point
            center = pinch_point + self._grab_offset
            if center != self._object.center:
                self._object = replace(self._object, center=center)
                events.append(ModeEvent(EventKind.OBJECT_MOVED, t))
        elif self._mode is Mode.SCALING and self._control_value is not None:
            kind = CONTROL_KIND_FOR[self.technique]
            scale = scale_at(self._session,
                             ControlInput(kind, self._control_value),
                             self.config.clamp_for(kind))
            if scale != self._object.scale:
                self._object = replace(self._object, scale=scale)
                events.append(ModeEvent(EventKind.SCALE_CHANGED, t,
                                        value=scale))

    def _outline_for(self) -> Outline:
        if self._mode is Mode.SCALING:
            return Outline.YELLOW
        if self._mode is Mode.TRANSLATION:
            return Outline.ORANGE
        if self._gazed:
            return Outline.WHITE
        return Outline.NONE
