"""Scripted trial performer: drives the engine with synthetic tracking.

The performer plays a fixed choreography against a live engine and records
the frames it produced: grab the object, drag it onto the target, release,
set up the technique's scaling gesture, scale to the requested factor, hold
until the filters settle, and withdraw. Hand paths use minimum-jerk easing.
Gaze follows scripted points of interest with a fixed latency. Optional
Gaussian jitter and sinusoidal tremor overlay the recorded hand points.

Phase boundaries are stamped into the trace plan as phase_<name>_t entries
so downstream checks can reason about what the performer intended when.
"""

from __future__ import annotations

import math
import random
from typing import Callable, Optional

from .config import EngineConfig
from .errors import InfeasibleTarget
from .geometry import Ray, Vec3, ViewFrame, stereoscopic_view_rect
from .metrics import TrialRunner
from .scaling import CONTROL_KIND_FOR, ControlKind
from .techniques import Mode, Technique
from .trace import ActorParams, Frame, Hand, Trace, TrialSpec

OPEN_SPAN_M = 0.05
CLOSED_SPAN_M = 0.012
ANGLE_ARM_M = 0.12
AREA_POSE_DEPTH_M = 0.35
REACH_M = 0.5

# Starting inputs the performer adopts per control kind; depth picks the
# geometric mean start so the end value stays inside the clamp symmetrically.
SPAN_START_M = 0.08
ANGLE_START_DEG = 12.0
AREA_START_FRACTION = 0.02
BIMANUAL_START_M = 0.3

_Rels = tuple[Vec3, Vec3]
_Pose = Callable[[float], tuple[Optional[Hand], Optional[Hand], Vec3]]


def _ease(u: float) -> float:
    # Minimum-jerk position profile; zero velocity at both ends.
    u = min(max(u, 0.0), 1.0)
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def _lerp(a: float, b: float, s: float) -> float:
    return a + (b - a) * s


def _lerp_vec(a: Vec3, b: Vec3, s: float) -> Vec3:
    return a + (b - a) * s


def _lerp_rels(a: _Rels, b: _Rels, s: float) -> _Rels:
    return (_lerp_vec(a[0], b[0], s), _lerp_vec(a[1], b[1], s))


def _offset_axis(direction: str, head: ViewFrame) -> Vec3:
    return {
        "up": head.up,
        "down": head.up * -1.0,
        "left": head.right * -1.0,
        "right": head.right,
    }[direction]


def planned_inputs(technique: Technique, spec: TrialSpec,
                   config: EngineConfig) -> tuple[float, float]:
    """Start and end control values the performer aims for.

    Raises InfeasibleTarget when the end value cannot sit inside the
    technique's clamp range, in which case no gesture can reach the target.
    """
    kind = CONTROL_KIND_FOR[technique]
    clamp = config.clamp_for(kind)
    target = spec.target_scale
    if kind is ControlKind.SPAN:
        i_0 = SPAN_START_M
    elif kind is ControlKind.ANGLE:
        i_0 = ANGLE_START_DEG
    elif kind is ControlKind.AREA:
        i_0 = AREA_START_FRACTION
    elif kind is ControlKind.DEPTH:
        i_0 = math.sqrt(clamp.min * clamp.max / target)
    else:
        i_0 = BIMANUAL_START_M
    i_t = i_0 * target
    if not (clamp.min <= i_0 <= clamp.max and clamp.min <= i_t <= clamp.max):
        raise InfeasibleTarget(technique.value, target, i_0, i_t,
                               clamp.min, clamp.max)
    return i_0, i_t


def synthesize_trial(spec: TrialSpec, actor: ActorParams,
                     technique: Technique,
                     config: Optional[EngineConfig] = None) -> Trace:
    """Performs one trial and returns the recorded trace."""
    if config is None:
        config = EngineConfig()
    return _Performer(spec, actor, technique, config).run()


class _Performer:
    def __init__(self, spec: TrialSpec, actor: ActorParams,
                 technique: Technique, config: EngineConfig):
        self.spec = spec
        self.actor = actor
        self.technique = technique
        self.config = config
        self.kind = CONTROL_KIND_FOR[technique]
        self.i_0, self.i_target = planned_inputs(technique, spec, config)
        self.dt = 1.0 / config.frame_rate_hz
        self.rng = random.Random(actor.seed)
        self.runner = TrialRunner(technique, spec, config)
        self.frames: list[Frame] = []
        self.intents: list[tuple[float, Vec3]] = []
        self.plan: dict = {}

        head = ViewFrame.facing(Vec3(0.0, 0.0, 0.0), Vec3(0.0, 0.0, 1.0),
                                Vec3(0.0, 1.0, 0.0))
        self.head = head
        self.c_start = spec.start_center(head)
        self.c_target = spec.target_center(head)
        d_hat = _offset_axis(spec.target_direction, head)
        self.w_hat = d_hat.cross(head.forward)
        self.g_hat = (self.c_target - head.origin).normalized()
        self.v_hat = self.g_hat.cross(self.w_hat)
        # Fingertips for the area gesture split along a diagonal of the
        # constant-depth plane: with both tips at equal depth, sliding the
        # hand in that plane translates all four projections at one rate,
        # so the rect area holds exactly still while approaching and
        # withdrawing.
        p_hat = head.forward.cross(self.w_hat)
        self.a_hat = (self.w_hat + p_hat).normalized()

        # Grab station: well off the gaze ray so no alignment can form while
        # pinching and dragging, with enough forward depth that the drag
        # (which shifts the hand by the full object displacement) never
        # brings the fingers behind the eyes.
        self.h_0 = d_hat * -0.35 + self.w_hat * 0.25 + head.forward * 0.55
        self.p_end = self.h_0 + (self.c_target - self.c_start)

        g_depth = self.g_hat.dot(head.forward)
        if self.kind is ControlKind.AREA:
            self.a_end = self.g_hat * (AREA_POSE_DEPTH_M / g_depth)
        elif self.kind is ControlKind.DEPTH:
            clamp = config.clamp_for(self.kind)
            flip = clamp.min + clamp.max
            self.a_end = self.g_hat * ((flip - self.i_0) / g_depth)
            self.p_far = self.g_hat * ((flip - self.i_target) / g_depth)
        else:
            self.a_end = self.g_hat * REACH_M
        self.a_start = self.a_end + self.w_hat * 0.32

        if self.kind is ControlKind.AREA:
            self.w_0 = self._solve_area_width(self.i_0)
            self.w_t = self._solve_area_width(self.i_target)
        if self.kind is ControlKind.BIMANUAL_DISTANCE:
            self.m_center = head.forward * 0.45 + self.v_hat * -0.15
            self.pos_l = self.m_center + self.w_hat * (-self.i_0 / 2.0)
            self.pos_r = self.m_center + self.w_hat * (self.i_0 / 2.0)
            self.c_off = self.g_hat * 2.0 + self.w_hat * 0.8

        # Tremor pose is drawn up front so it does not depend on amplitude.
        self.tremor_phase = {side: self.rng.uniform(0.0, 2.0 * math.pi)
                             for side in ("left", "right")}
        self.tremor_axis = {side: self._random_unit() for side in ("left", "right")}

    # -- low-level sampling --------------------------------------------------

    def _random_unit(self) -> Vec3:
        while True:
            v = Vec3(self.rng.gauss(0.0, 1.0), self.rng.gauss(0.0, 1.0),
                     self.rng.gauss(0.0, 1.0))
            if v.norm() > 1e-6:
                return v.normalized()

    def _mode(self) -> Mode:
        if self.runner.engine is None:
            return Mode.IDLE
        return self.runner.engine.mode

    def _live_center(self) -> Vec3:
        if self.runner.engine is None:
            return self.c_start
        return self.runner.engine.object.center

    def _intent_at(self, when: float) -> Vec3:
        for t, point in reversed(self.intents):
            if t <= when:
                return point
        return self.intents[0][1]

    def _jitter(self, hand: Optional[Hand], side: str, t: float) \
            -> Optional[Hand]:
        if hand is None:
            return None
        sd = self.actor.positional_noise_sd_m
        amp = self.actor.tremor_amplitude_m
        if sd == 0.0 and amp == 0.0:
            return hand
        shake = Vec3(0.0, 0.0, 0.0)
        if amp > 0.0:
            wobble = amp * math.sin(
                2.0 * math.pi * self.actor.tremor_frequency_hz * t
                + self.tremor_phase[side])
            shake = self.tremor_axis[side] * wobble
        def move(p: Vec3) -> Vec3:
            if sd > 0.0:
                p = p + Vec3(self.rng.gauss(0.0, sd), self.rng.gauss(0.0, sd),
                             self.rng.gauss(0.0, sd))
            return p + shake
        return Hand(thumb_tip=move(hand.thumb_tip),
                    index_tip=move(hand.index_tip), pos=move(hand.pos))

    def _emit(self, hand_l: Optional[Hand], hand_r: Optional[Hand],
              intent: Vec3) -> None:
        t = len(self.frames) * self.dt
        self.intents.append((t, intent))
        point = self._intent_at(t - self.actor.gaze_latency_s)
        gaze = Ray(self.head.origin,
                   (point - self.head.origin).normalized())
        frame = Frame(t=t, head=self.head, gaze=gaze,
                      hand_l=self._jitter(hand_l, "left", t),
                      hand_r=self._jitter(hand_r, "right", t))
        self.frames.append(frame)
        self.runner.step(frame)

    def _play(self, name: str, duration: float, pose: _Pose,
              until: Optional[Callable[[], bool]] = None,
              grace: float = 0.0) -> None:
        self.plan[f"phase_{name}_t"] = len(self.frames) * self.dt
        steps = max(1, round(duration / self.dt))
        for k in range(1, steps + 1):
            self._emit(*pose(_ease(k / steps)))
        if until is not None:
            held = pose(1.0)
            for _ in range(int(round(grace / self.dt))):
                if until():
                    break
                self._emit(*held)

    # -- hand construction ---------------------------------------------------

    def _hand(self, pos: Vec3, rels: _Rels) -> Hand:
        return Hand(thumb_tip=pos + rels[0], index_tip=pos + rels[1], pos=pos)

    def _rel_split(self, sep: float) -> _Rels:
        return (self.v_hat * (sep / 2.0), self.v_hat * (-sep / 2.0))

    def _rel_angle(self, angle_deg: float) -> _Rels:
        half = math.radians(angle_deg) / 2.0
        along = self.g_hat * (math.cos(half) * ANGLE_ARM_M)
        across = self.v_hat * (math.sin(half) * ANGLE_ARM_M)
        return (along + across, along - across)

    def _rel_area(self, width: float) -> _Rels:
        return (self.a_hat * (width / 2.0), self.a_hat * (-width / 2.0))

    def _area_fraction(self, width: float) -> float:
        rels = self._rel_area(width)
        rect = stereoscopic_view_rect(self.a_end + rels[0],
                                      self.a_end + rels[1], self.head)
        return rect.area / self.config.display_window_area

    def _solve_area_width(self, fraction: float) -> float:
        lo, hi = 1e-6, 0.2
        while self._area_fraction(hi) < fraction:
            hi *= 2.0
            if hi > 64.0:
                raise ValueError("view fraction out of reach for any width")
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if mid in (lo, hi):
                break
            if self._area_fraction(mid) < fraction:
                lo = mid
            else:
                hi = mid
        return hi

    # -- choreography ----------------------------------------------------------

    def run(self) -> Trace:
        self.plan.update({
            "control_kind": self.kind.value,
            "i_0": self.i_0,
            "i_target": self.i_target,
            "scale_target": self.spec.target_scale,
        })
        self._translate_phase()
        if self.kind is ControlKind.BIMANUAL_DISTANCE:
            self._scale_bimanual()
        elif self.kind is ControlKind.DEPTH:
            self._scale_push_pull()
        else:
            self._scale_ptz()
        self.plan["phase_end_t"] = len(self.frames) * self.dt
        return Trace(frame_rate_hz=self.config.frame_rate_hz,
                     seed=self.actor.seed, technique=self.technique.value,
                     trial_spec=self.spec, actor=self.actor, plan=self.plan,
                     frames=self.frames)

    def _translate_phase(self) -> None:
        rel_open = self._rel_split(OPEN_SPAN_M)
        rel_closed = self._rel_split(CLOSED_SPAN_M)
        h_0, p_end = self.h_0, self.p_end
        self._play("settle", 0.35, lambda s: (None, None, self.c_start))
        self._play("appear", 0.45,
                   lambda s: (None, self._hand(h_0, rel_open), self.c_start))
        self._play("grab", 0.12,
                   lambda s: (None, self._hand(
                       h_0, _lerp_rels(rel_open, rel_closed, s)), self.c_start),
                   until=lambda: self._mode() is Mode.TRANSLATION, grace=0.25)
        self._play("drag", self.actor.movement_duration_s,
                   lambda s: (None, self._hand(_lerp_vec(h_0, p_end, s),
                                               rel_closed),
                              self._live_center()))
        self._play("place", 0.3,
                   lambda s: (None, self._hand(p_end, rel_closed),
                              self.c_target))
        self._play("release", 0.12,
                   lambda s: (None, self._hand(
                       p_end, _lerp_rels(rel_closed, rel_open, s)),
                       self.c_target),
                   until=lambda: self._mode() is Mode.IDLE, grace=0.25)

    def _scale_ptz(self) -> None:
        rel_stage_from = self._rel_split(OPEN_SPAN_M)
        if self.kind is ControlKind.SPAN:
            rel_preset = self._rel_split(self.i_0)
            gesture_rels = lambda s: self._rel_split(
                _lerp(self.i_0, self.i_target, s))
        elif self.kind is ControlKind.ANGLE:
            rel_preset = self._rel_angle(self.i_0)
            gesture_rels = lambda s: self._rel_angle(
                _lerp(self.i_0, self.i_target, s))
        else:
            rel_preset = self._rel_area(self.w_0)
            gesture_rels = lambda s: self._rel_area(_lerp(self.w_0, self.w_t, s))
        p_end, a_start, a_end = self.p_end, self.a_start, self.a_end
        target = self.c_target
        self._play("stage", 0.6,
                   lambda s: (None, self._hand(
                       _lerp_vec(p_end, a_start, s),
                       _lerp_rels(rel_stage_from, rel_preset, s)), target))
        self._play("prime", 0.45,
                   lambda s: (None, self._hand(a_start, rel_preset), target))
        self._play("approach", 0.5,
                   lambda s: (None, self._hand(_lerp_vec(a_start, a_end, s),
                                               rel_preset), target),
                   until=lambda: self._mode() is Mode.SCALING, grace=0.6)
        self._play("ready", 0.25,
                   lambda s: (None, self._hand(a_end, rel_preset), target))
        self._play("gesture", 0.8,
                   lambda s: (None, self._hand(a_end, gesture_rels(s)), target))
        rel_final = gesture_rels(1.0)
        self._play("hold", 1.2,
                   lambda s: (None, self._hand(a_end, rel_final), target))
        # Withdrawing at a fixed tip geometry keeps the control value frozen
        # through mode-out: span and angle ride along rigidly, and the slide
        # keeps hand depth constant so the projected rect area cannot change.
        span_exit = 0.45 if self.kind is ControlKind.AREA else 0.32
        away = a_end + self.w_hat * span_exit
        self._play("exit", 0.4,
                   lambda s: (None, self._hand(_lerp_vec(a_end, away, s),
                                               rel_final), target),
                   until=lambda: self._mode() is Mode.IDLE, grace=0.35)
        self._play("pad", 0.3,
                   lambda s: (None, self._hand(away, rel_final), target))

    def _scale_push_pull(self) -> None:
        rel_open = self._rel_split(OPEN_SPAN_M)
        rel_closed = self._rel_split(CLOSED_SPAN_M)
        p_end, a_start, a_end, p_far = (self.p_end, self.a_start, self.a_end,
                                        self.p_far)
        target = self.c_target
        self._play("stage", 0.6,
                   lambda s: (None, self._hand(_lerp_vec(p_end, a_start, s),
                                               rel_open), target))
        self._play("prime", 0.45,
                   lambda s: (None, self._hand(a_start, rel_open), target))
        self._play("approach", 0.5,
                   lambda s: (None, self._hand(_lerp_vec(a_start, a_end, s),
                                               rel_open), target))
        self._play("trigger", 0.12,
                   lambda s: (None, self._hand(
                       a_end, _lerp_rels(rel_open, rel_closed, s)), target),
                   until=lambda: self._mode() is Mode.SCALING, grace=0.25)
        self._play("ready", 0.25,
                   lambda s: (None, self._hand(a_end, rel_closed), target))
        self._play("gesture", 0.8,
                   lambda s: (None, self._hand(_lerp_vec(a_end, p_far, s),
                                               rel_closed), target))
        self._play("hold", 1.2,
                   lambda s: (None, self._hand(p_far, rel_closed), target))
        # Opening the pinch in place releases the mode without moving the
        # hand, so the captured depth (and the scale) stays put.
        self._play("exit", 0.4,
                   lambda s: (None, self._hand(
                       p_far, _lerp_rels(rel_closed, rel_open, s)), target),
                   until=lambda: self._mode() is Mode.IDLE, grace=0.35)
        self._play("pad", 0.3,
                   lambda s: (None, self._hand(p_far, rel_open), target))

    def _scale_bimanual(self) -> None:
        rel_open = self._rel_split(OPEN_SPAN_M)
        rel_closed = self._rel_split(CLOSED_SPAN_M)
        p_end, pos_l, pos_r = self.p_end, self.pos_l, self.pos_r
        m_center, w_hat = self.m_center, self.w_hat
        target, c_off = self.c_target, self.c_off
        half_target = self.i_target / 2.0
        self._play("stage", 0.6,
                   lambda s: (self._hand(pos_l, rel_open),
                              self._hand(_lerp_vec(p_end, pos_r, s), rel_open),
                              target))
        self._play("prime", 0.45,
                   lambda s: (self._hand(pos_l, rel_open),
                              self._hand(pos_r, rel_open), target))
        # The off-hand pinch closes while gaze rests away from the object, so
        # a lone pinch cannot read as a translation grab; gaze returns before
        # the dominant pinch lands, which is what starts the scaling mode.
        self._play("avert", 0.2,
                   lambda s: (self._hand(pos_l, rel_open),
                              self._hand(pos_r, rel_open), c_off))
        self._play("closeleft", 0.15,
                   lambda s: (self._hand(pos_l, _lerp_rels(rel_open,
                                                           rel_closed, s)),
                              self._hand(pos_r, rel_open), c_off))
        self._play("regaze", 0.3,
                   lambda s: (self._hand(pos_l, rel_closed),
                              self._hand(pos_r, rel_open), target))
        self._play("trigger", 0.12,
                   lambda s: (self._hand(pos_l, rel_closed),
                              self._hand(pos_r, _lerp_rels(rel_open,
                                                           rel_closed, s)),
                              target),
                   until=lambda: self._mode() is Mode.SCALING, grace=0.25)
        self._play("ready", 0.25,
                   lambda s: (self._hand(pos_l, rel_closed),
                              self._hand(pos_r, rel_closed), target))
        def spread(s: float) -> tuple[Optional[Hand], Optional[Hand], Vec3]:
            off = _lerp(self.i_0 / 2.0, half_target, s)
            return (self._hand(m_center + w_hat * -off, rel_closed),
                    self._hand(m_center + w_hat * off, rel_closed), target)
        self._play("gesture", 0.8, spread)
        self._play("hold", 1.2, lambda s: spread(1.0))
        end_l = m_center + w_hat * -half_target
        end_r = m_center + w_hat * half_target
        self._play("exit", 0.4,
                   lambda s: (self._hand(end_l, _lerp_rels(rel_closed,
                                                           rel_open, s)),
                              self._hand(end_r, _lerp_rels(rel_closed,
                                                           rel_open, s)),
                              target),
                   until=lambda: self._mode() is Mode.IDLE, grace=0.35)
        self._play("pad", 0.3,
                   lambda s: (self._hand(end_l, rel_open),
                              self._hand(end_r, rel_open), target))
