"""Engine configuration with serialization.

All tunable constants of the interaction engine live here: alignment
thresholds, filter parameters, per-control clamp ranges, pinch hysteresis
spans, and scene constants such as the display window extent.  The defaults
are the reference values the rest of the package is tested against.

Config files are JSON objects mirroring :meth:`EngineConfig.to_record`.
Files may be partial: missing keys keep their defaults, unknown keys are
rejected.  The same merge rule powers live config patches in the playground
server.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from .alignment import AlignmentConfig
from .errors import ParseError
from .one_euro import FilterParams
from .scaling import ClampRange, ControlKind

# Half-extent of the square display window on the unit-distance view plane.
# Corresponds to a 115 degree field of view in each axis.
DISPLAY_HALF_EXTENT = math.tan(math.radians(57.5))


def _default_clamps() -> dict[ControlKind, ClampRange]:
    return {
        ControlKind.AREA: ClampRange(0.001, 1.0),
        ControlKind.ANGLE: ClampRange(3.0, 40.0),
        ControlKind.SPAN: ClampRange(0.01, 0.15),
        ControlKind.DEPTH: ClampRange(0.1, 0.5),
        ControlKind.BIMANUAL_DISTANCE: ClampRange(0.01, 0.8),
    }


@dataclass(frozen=True)
class EngineConfig:
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    filter_params: FilterParams = field(default_factory=FilterParams)
    filter_gaze: bool = False
    clamps: Mapping[ControlKind, ClampRange] = field(default_factory=_default_clamps)
    pinch_onset_span_m: float = 0.02
    pinch_release_span_m: float = 0.03
    frame_rate_hz: float = 90.0
    display_half_extent_u: float = DISPLAY_HALF_EXTENT
    display_half_extent_v: float = DISPLAY_HALF_EXTENT
    dominant_hand: str = "right"
    gaze_tolerance_deg: float = 1.5
    depth_inverted: bool = True
    scaling_loss_timeout_s: float = 0.2

    def __post_init__(self):
        if self.pinch_onset_span_m >= self.pinch_release_span_m:
            raise ValueError("pinch onset span must be below the release span")
        if self.frame_rate_hz <= 0:
            raise ValueError("frame rate must be positive")
        if self.display_half_extent_u <= 0 or self.display_half_extent_v <= 0:
            raise ValueError("display extents must be positive")
        if self.dominant_hand not in ("left", "right"):
            raise ValueError("dominant_hand must be 'left' or 'right'")
        if self.gaze_tolerance_deg < 0:
            raise ValueError("gaze tolerance must be nonnegative")
        if self.scaling_loss_timeout_s <= 0:
            raise ValueError("scaling loss timeout must be positive")
        missing = [kind.value for kind in ControlKind if kind not in self.clamps]
        if missing:
            raise ValueError(f"clamps missing control kind(s): {missing}")

    def clamp_for(self, kind: ControlKind) -> ClampRange:
        return self.clamps[kind]

    @property
    def display_window_area(self) -> float:
        return 4.0 * self.display_half_extent_u * self.display_half_extent_v

    def to_record(self) -> dict[str, Any]:
        return {
            "alignment": {
                "overlap_view_threshold": self.alignment.overlap_view_threshold,
                "overlap_object_threshold": self.alignment.overlap_object_threshold,
                "dispersion_mode_in": self.alignment.dispersion_mode_in,
                "dispersion_mode_out": self.alignment.dispersion_mode_out,
                "overlap_exit_factor": self.alignment.overlap_exit_factor,
            },
            "filter": {
                "min_cutoff": self.filter_params.min_cutoff,
                "beta": self.filter_params.beta,
                "d_cutoff": self.filter_params.d_cutoff,
            },
            "filter_gaze": self.filter_gaze,
            "clamps": {kind.value: [rng.min, rng.max]
                       for kind, rng in sorted(self.clamps.items(),
                                               key=lambda item: item[0].value)},
            "pinch": {
                "onset_span_m": self.pinch_onset_span_m,
                "release_span_m": self.pinch_release_span_m,
            },
            "frame_rate_hz": self.frame_rate_hz,
            "display_half_extent": [self.display_half_extent_u,
                                    self.display_half_extent_v],
            "dominant_hand": self.dominant_hand,
            "gaze_tolerance_deg": self.gaze_tolerance_deg,
            "depth_inverted": self.depth_inverted,
            "scaling_loss_timeout_s": self.scaling_loss_timeout_s,
        }

    def patched(self, record: Mapping[str, Any]) -> "EngineConfig":
        """Return a copy with the fields present in record replaced.

        Nested groups merge key by key, so a patch may change a single
        threshold without restating its siblings.  Raises ParseError on
        unknown keys and ValueError on values that violate invariants.
        """
        return _merge(self, record)

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "EngineConfig":
        return cls().patched(record)


_TOP_KEYS = ("alignment", "filter", "filter_gaze", "clamps", "pinch",
             "frame_rate_hz", "display_half_extent", "dominant_hand",
             "gaze_tolerance_deg", "depth_inverted", "scaling_loss_timeout_s")
_ALIGNMENT_KEYS = ("overlap_view_threshold", "overlap_object_threshold",
                   "dispersion_mode_in", "dispersion_mode_out",
                   "overlap_exit_factor")
_FILTER_KEYS = ("min_cutoff", "beta", "d_cutoff")
_PINCH_KEYS = ("onset_span_m", "release_span_m")


def _number(record: Mapping[str, Any], key: str, context: str) -> float:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{context}: {key} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{context}: {key} must be finite")
    return value


def _boolean(record: Mapping[str, Any], key: str, context: str) -> bool:
    value = record[key]
    if not isinstance(value, bool):
        raise ParseError(f"{context}: {key} must be a boolean")
    return value


def _check_keys(record: Any, allowed: tuple[str, ...], context: str) -> None:
    if not isinstance(record, Mapping):
        raise ParseError(f"{context}: expected an object")
    unknown = set(record) - set(allowed)
    if unknown:
        raise ParseError(f"{context}: unknown key(s): "
                         + ", ".join(sorted(unknown)))


def _merge(base: EngineConfig, record: Mapping[str, Any]) -> EngineConfig:
    _check_keys(record, _TOP_KEYS, "config")
    try:
        return _apply(base, record)
    except ValueError as exc:
        raise ParseError(f"config: {exc}") from exc


def _apply(base: EngineConfig, record: Mapping[str, Any]) -> EngineConfig:
    changes: dict[str, Any] = {}

    if "alignment" in record:
        sub = record["alignment"]
        _check_keys(sub, _ALIGNMENT_KEYS, "config alignment")
        values = {key: _number(sub, key, "config alignment") for key in sub}
        changes["alignment"] = replace(base.alignment, **values)
    if "filter" in record:
        sub = record["filter"]
        _check_keys(sub, _FILTER_KEYS, "config filter")
        values = {key: _number(sub, key, "config filter") for key in sub}
        changes["filter_params"] = replace(base.filter_params, **values)
    if "filter_gaze" in record:
        changes["filter_gaze"] = _boolean(record, "filter_gaze", "config")
    if "clamps" in record:
        sub = record["clamps"]
        _check_keys(sub, tuple(kind.value for kind in ControlKind),
                    "config clamps")
        clamps = dict(base.clamps)
        for name, bounds in sub.items():
            if (not isinstance(bounds, (list, tuple)) or len(bounds) != 2
                    or any(isinstance(b, bool) or not isinstance(b, (int, float))
                           for b in bounds)):
                raise ParseError(f"config clamps: {name} must be [min, max]")
            clamps[ControlKind(name)] = ClampRange(float(bounds[0]),
                                                   float(bounds[1]))
        changes["clamps"] = clamps
    if "pinch" in record:
        sub = record["pinch"]
        _check_keys(sub, _PINCH_KEYS, "config pinch")
        if "onset_span_m" in sub:
            changes["pinch_onset_span_m"] = _number(sub, "onset_span_m",
                                                    "config pinch")
        if "release_span_m" in sub:
            changes["pinch_release_span_m"] = _number(sub, "release_span_m",
                                                      "config pinch")
    if "frame_rate_hz" in record:
        changes["frame_rate_hz"] = _number(record, "frame_rate_hz", "config")
    if "display_half_extent" in record:
        extent = record["display_half_extent"]
        if (not isinstance(extent, (list, tuple)) or len(extent) != 2
                or any(isinstance(e, bool) or not isinstance(e, (int, float))
                       for e in extent)):
            raise ParseError("config: display_half_extent must be [u, v]")
        changes["display_half_extent_u"] = float(extent[0])
        changes["display_half_extent_v"] = float(extent[1])
    if "dominant_hand" in record:
        value = record["dominant_hand"]
        if not isinstance(value, str):
            raise ParseError("config: dominant_hand must be a string")
        changes["dominant_hand"] = value
    if "gaze_tolerance_deg" in record:
        changes["gaze_tolerance_deg"] = _number(record, "gaze_tolerance_deg",
                                                "config")
    if "depth_inverted" in record:
        changes["depth_inverted"] = _boolean(record, "depth_inverted", "config")
    if "scaling_loss_timeout_s" in record:
        changes["scaling_loss_timeout_s"] = _number(
            record, "scaling_loss_timeout_s", "config")

    return replace(base, **changes)


def load_config(path: str | Path) -> EngineConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config {path}: {exc}") from exc
    if not isinstance(record, dict):
        raise ParseError(f"config {path}: expected a JSON object")
    return EngineConfig.from_record(record)


def save_config(config: EngineConfig, path: str | Path) -> None:
    text = json.dumps(config.to_record(), indent=2, ensure_ascii=False,
                      allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")
