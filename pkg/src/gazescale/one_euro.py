"""One Euro filter: adaptive first-order low-pass for tracked points.

The cutoff rises with the smoothed derivative (min_cutoff + beta * |dx|),
so slow motion gets heavy smoothing and fast motion stays responsive. State
threads through pure functions; thin stateful wrappers sit on top for the
engine's per-point channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import NonMonotonicTimestamp
from .geometry import Vec3


@dataclass(frozen=True)
class FilterParams:
    min_cutoff: float = 1.0
    beta: float = 90.0
    d_cutoff: float = 1.0


@dataclass(frozen=True)
class FilterState:
    t: float
    value: float
    derivative: float


def _smoothing_factor(t_e: float, cutoff: float) -> float:
    r = 2.0 * math.pi * cutoff * t_e
    return r / (r + 1.0)


def filter_scalar(
    state: Optional[FilterState], value: float, t: float, params: FilterParams
) -> tuple:
    """Advance one sample; returns (filtered value, next state).

    A None state initializes on this sample and passes it through.
    """
    if state is None:
        return value, FilterState(t=t, value=value, derivative=0.0)
    t_e = t - state.t
    if t_e <= 0.0:
        raise NonMonotonicTimestamp(f"sample at t={t:g} after t={state.t:g}")
    a_d = _smoothing_factor(t_e, params.d_cutoff)
    dx = (value - state.value) / t_e
    dx_hat = a_d * dx + (1.0 - a_d) * state.derivative
    cutoff = params.min_cutoff + params.beta * abs(dx_hat)
    a = _smoothing_factor(t_e, cutoff)
    x_hat = a * value + (1.0 - a) * state.value
    return x_hat, FilterState(t=t, value=x_hat, derivative=dx_hat)


def filter_vec3(
    state: Optional[tuple], value: Vec3, t: float, params: FilterParams
) -> tuple:
    """Filter a point with an independent scalar channel per axis."""
    sx, sy, sz = state if state is not None else (None, None, None)
    x, sx = filter_scalar(sx, value.x, t, params)
    y, sy = filter_scalar(sy, value.y, t, params)
    z, sz = filter_scalar(sz, value.z, t, params)
    return Vec3(x, y, z), (sx, sy, sz)


class ScalarFilter:
    def __init__(self, params: FilterParams):
        self.params = params
        self._state: Optional[FilterState] = None

    def push(self, value: float, t: float) -> float:
        out, self._state = filter_scalar(self._state, value, t, self.params)
        return out

    def reset(self) -> None:
        self._state = None


class PointFilter:
    def __init__(self, params: FilterParams):
        self.params = params
        self._state: Optional[tuple] = None

    def push(self, value: Vec3, t: float) -> Vec3:
        out, self._state = filter_vec3(self._state, value, t, self.params)
        return out

    def reset(self) -> None:
        self._state = None
