"""Per-frame aligned/not-aligned decisions with hysteresis.

Two strategies: overlap (view rect vs object disc, gated by gaze) and
angular dispersion (gaze-to-hand angle). Both carry a one-bit memory so the
enter and exit thresholds can differ without chattering.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AlignmentConfig:
    overlap_view_threshold: float = 0.25
    overlap_object_threshold: float = 0.15
    dispersion_mode_in: float = 15.0
    dispersion_mode_out: float = 17.0
    overlap_exit_factor: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.overlap_view_threshold <= 1.0):
            raise ValueError("overlap_view_threshold must be in (0, 1]")
        if not (0.0 < self.overlap_object_threshold <= 1.0):
            raise ValueError("overlap_object_threshold must be in (0, 1]")
        if not (0.0 < self.dispersion_mode_in < 180.0):
            raise ValueError("dispersion_mode_in must be in (0, 180)")
        if self.dispersion_mode_out <= self.dispersion_mode_in:
            raise ValueError("dispersion_mode_out must exceed dispersion_mode_in")
        if not (0.0 < self.overlap_exit_factor <= 1.0):
            raise ValueError("overlap_exit_factor must be in (0, 1]")


@dataclass(frozen=True)
class AlignmentState:
    aligned: bool = False


def eval_overlap(view_covered: float, object_covered: float, gazed: bool,
                 cfg: AlignmentConfig) -> bool:
    """Mode-in overlap rule: gazed and either coverage at or above threshold."""
    return bool(gazed and (view_covered >= cfg.overlap_view_threshold
                           or object_covered >= cfg.overlap_object_threshold))


def eval_overlap_hysteresis(view_covered: float, object_covered: float, gazed: bool,
                            state: AlignmentState, cfg: AlignmentConfig) -> tuple:
    """Stateful overlap alignment.

    Entry uses the full thresholds; once aligned, the thresholds shrink by
    overlap_exit_factor so exit requires both ratios to fall below the
    reduced values. Losing gaze exits immediately.
    """
    if state.aligned:
        aligned = bool(gazed and (
            view_covered >= cfg.overlap_view_threshold * cfg.overlap_exit_factor
            or object_covered >= cfg.overlap_object_threshold * cfg.overlap_exit_factor))
    else:
        aligned = eval_overlap(view_covered, object_covered, gazed, cfg)
    return aligned, AlignmentState(aligned)


def eval_dispersion(dispersion: float, state: AlignmentState,
                    cfg: AlignmentConfig) -> tuple:
    """Stateful dispersion alignment.

    Enter strictly below mode-in; once aligned, stay while at or below
    mode-out. The open band between the thresholds never flips the flag.
    """
    if state.aligned:
        aligned = dispersion <= cfg.dispersion_mode_out
    else:
        aligned = dispersion < cfg.dispersion_mode_in
    return aligned, AlignmentState(aligned)
