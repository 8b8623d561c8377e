import pytest
from hypothesis import given, settings, strategies as st

from gazescale.errors import KindMismatch, MissingTrackingData
from gazescale.scaling import (
    ClampRange,
    ControlInput,
    ControlKind,
    ControlMeasures,
    ScalingSession,
    begin_session,
    clamp_input,
    extract_input,
    scale_at,
)
from gazescale.techniques import Technique

SPAN_RANGE = ClampRange(0.01, 0.15)
DEPTH_RANGE = ClampRange(0.1, 0.5)
ANGLE_RANGE = ClampRange(3.0, 40.0)


class TestExtractInput:
    def test_span_passthrough(self):
        m = ControlMeasures(span_m=0.08)
        got = extract_input(Technique.PTZ_SPAN, m)
        assert got == ControlInput(ControlKind.SPAN, 0.08)

    def test_angle_passthrough(self):
        m = ControlMeasures(finger_angle_deg=12.0)
        assert extract_input(Technique.PTZ_ANGLE, m) == ControlInput(ControlKind.ANGLE, 12.0)

    def test_area_passthrough(self):
        m = ControlMeasures(view_area_fraction=0.02)
        assert extract_input(Technique.PTZ_AREA, m) == ControlInput(ControlKind.AREA, 0.02)

    def test_depth_midpoint_fixed_under_inversion(self):
        # (0.1 + 0.5) - 0.3 = 0.3: the midpoint maps to itself.
        m = ControlMeasures(hand_depth_m=0.3)
        got = extract_input(Technique.PUSH_PULL_DEPTH, m, depth_range=DEPTH_RANGE)
        assert got == ControlInput(ControlKind.DEPTH, pytest.approx(0.3))

    def test_depth_inversion_pull_closer_raises_value(self):
        closer = extract_input(
            Technique.PUSH_PULL_DEPTH, ControlMeasures(hand_depth_m=0.15),
            depth_range=DEPTH_RANGE)
        farther = extract_input(
            Technique.PUSH_PULL_DEPTH, ControlMeasures(hand_depth_m=0.45),
            depth_range=DEPTH_RANGE)
        assert closer.value == pytest.approx(0.45)
        assert farther.value == pytest.approx(0.15)
        assert closer.value > farther.value

    def test_depth_direct_mode(self):
        got = extract_input(
            Technique.PUSH_PULL_DEPTH, ControlMeasures(hand_depth_m=0.15),
            depth_range=DEPTH_RANGE, depth_inverted=False)
        assert got.value == 0.15

    def test_depth_inversion_clamps_first(self):
        # Hands beyond the far clamp invert to the near clamp value.
        got = extract_input(
            Technique.PUSH_PULL_DEPTH, ControlMeasures(hand_depth_m=0.9),
            depth_range=DEPTH_RANGE)
        assert got.value == pytest.approx(0.1)

    def test_bimanual_distance(self):
        m = ControlMeasures(pinch_distance_m=0.4)
        got = extract_input(Technique.BIMANUAL, m)
        assert got == ControlInput(ControlKind.BIMANUAL_DISTANCE, 0.4)

    def test_missing_measure_raises(self):
        with pytest.raises(MissingTrackingData):
            extract_input(Technique.PTZ_SPAN, ControlMeasures())
        with pytest.raises(MissingTrackingData):
            extract_input(Technique.BIMANUAL, ControlMeasures(span_m=0.1))
        with pytest.raises(MissingTrackingData):
            extract_input(Technique.PUSH_PULL_DEPTH, ControlMeasures(),
                          depth_range=DEPTH_RANGE)


class TestClamp:
    def test_span_ceiling(self):
        got = clamp_input(ControlInput(ControlKind.SPAN, 0.20), SPAN_RANGE)
        assert got.value == 0.15

    def test_depth_floor(self):
        got = clamp_input(ControlInput(ControlKind.DEPTH, 0.05), DEPTH_RANGE)
        assert got.value == 0.1

    def test_in_range_identity(self):
        got = clamp_input(ControlInput(ControlKind.ANGLE, 20.0), ANGLE_RANGE)
        assert got.value == 20.0

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            ClampRange(0.0, 1.0)
        with pytest.raises(ValueError):
            ClampRange(0.5, 0.5)
        with pytest.raises(ValueError):
            ClampRange(0.5, 0.2)


class TestSession:
    def test_begin_plain(self):
        s = begin_session(1.0, ControlInput(ControlKind.SPAN, 0.05), SPAN_RANGE)
        assert s == ScalingSession(1.0, ControlInput(ControlKind.SPAN, 0.05))

    def test_begin_clamps_floor(self):
        s = begin_session(2.0, ControlInput(ControlKind.DEPTH, 0.05), DEPTH_RANGE)
        assert s.i_0.value == 0.1

    def test_begin_clamps_ceiling(self):
        s = begin_session(0.4, ControlInput(ControlKind.ANGLE, 50.0), ANGLE_RANGE)
        assert s.i_0.value == 40.0

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError):
            begin_session(0.0, ControlInput(ControlKind.SPAN, 0.05), SPAN_RANGE)


class TestScaleAt:
    def test_identity_exact(self):
        s = begin_session(1.37, ControlInput(ControlKind.SPAN, 0.083), SPAN_RANGE)
        got = scale_at(s, ControlInput(ControlKind.SPAN, 0.083), SPAN_RANGE)
        assert abs(got - 1.37) <= 1e-12

    def test_span_doubling(self):
        s = begin_session(1.0, ControlInput(ControlKind.SPAN, 0.05), SPAN_RANGE)
        assert scale_at(s, ControlInput(ControlKind.SPAN, 0.10), SPAN_RANGE) == \
            pytest.approx(2.0, rel=1e-12)

    def test_clamp_then_ratio(self):
        s = begin_session(1.0, ControlInput(ControlKind.DEPTH, 0.25), DEPTH_RANGE)
        assert scale_at(s, ControlInput(ControlKind.DEPTH, 0.6), DEPTH_RANGE) == \
            pytest.approx(2.0, rel=1e-12)

    def test_kind_mismatch(self):
        s = begin_session(1.0, ControlInput(ControlKind.SPAN, 0.05), SPAN_RANGE)
        with pytest.raises(KindMismatch):
            scale_at(s, ControlInput(ControlKind.ANGLE, 10.0), ANGLE_RANGE)

    def test_saturation_beyond_clamp(self):
        s = begin_session(1.0, ControlInput(ControlKind.SPAN, 0.05), SPAN_RANGE)
        at_max = scale_at(s, ControlInput(ControlKind.SPAN, 0.15), SPAN_RANGE)
        beyond = scale_at(s, ControlInput(ControlKind.SPAN, 0.40), SPAN_RANGE)
        assert beyond == at_max

    @given(
        s0=st.floats(0.1, 10),
        i0=st.floats(0.011, 0.149), it=st.floats(0.011, 0.149),
        iu=st.floats(0.011, 0.149),
    )
    @settings(max_examples=300)
    def test_composition(self, s0, i0, it, iu):
        # Chaining a session restart at (s_t, I_t) equals the direct ratio.
        first = begin_session(s0, ControlInput(ControlKind.SPAN, i0), SPAN_RANGE)
        s_t = scale_at(first, ControlInput(ControlKind.SPAN, it), SPAN_RANGE)
        second = begin_session(s_t, ControlInput(ControlKind.SPAN, it), SPAN_RANGE)
        chained = scale_at(second, ControlInput(ControlKind.SPAN, iu), SPAN_RANGE)
        direct = scale_at(first, ControlInput(ControlKind.SPAN, iu), SPAN_RANGE)
        assert chained == pytest.approx(direct, rel=1e-9)

    @given(
        i0=st.floats(0.011, 0.149),
        a=st.floats(0.011, 0.149), b=st.floats(0.011, 0.149),
    )
    @settings(max_examples=300)
    def test_monotone_in_input(self, i0, a, b):
        s = begin_session(1.0, ControlInput(ControlKind.SPAN, i0), SPAN_RANGE)
        lo, hi = min(a, b), max(a, b)
        s_lo = scale_at(s, ControlInput(ControlKind.SPAN, lo), SPAN_RANGE)
        s_hi = scale_at(s, ControlInput(ControlKind.SPAN, hi), SPAN_RANGE)
        if hi > lo:
            assert s_hi > s_lo
        else:
            assert s_hi == s_lo

    def test_pull_closer_scales_up_end_to_end(self):
        # Inverted extraction then the ratio: moving the hand from 0.3 m to
        # 0.2 m of depth grows the object.
        start = extract_input(Technique.PUSH_PULL_DEPTH,
                              ControlMeasures(hand_depth_m=0.3),
                              depth_range=DEPTH_RANGE)
        s = begin_session(1.0, start, DEPTH_RANGE)
        closer = extract_input(Technique.PUSH_PULL_DEPTH,
                               ControlMeasures(hand_depth_m=0.2),
                               depth_range=DEPTH_RANGE)
        assert scale_at(s, closer, DEPTH_RANGE) == pytest.approx(0.4 / 0.3, rel=1e-12)
