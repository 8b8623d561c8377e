"""View-space geometry for gaze, hands, and a spherical object.

Conventions: positions in meters, angles in degrees at the API boundary.
A ViewFrame carries an orthonormal right/up/forward basis; projections land
on the plane one meter along forward from the projecting eye, so view
coordinates (u, v) are tangents of visual angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    DegenerateRegion,
    DegenerateVector,
    PointBehindViewPlane,
    SphereEnclosesViewer,
)

_EPS = 1e-9


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    __rmul__ = __mul__

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n <= _EPS:
            raise DegenerateVector(f"cannot normalize near-zero vector {self}")
        return Vec3(self.x / n, self.y / n, self.z / n)


@dataclass(frozen=True)
class Point2D:
    u: float
    v: float


@dataclass(frozen=True)
class Rect2D:
    u_min: float
    v_min: float
    u_max: float
    v_max: float

    @property
    def area(self) -> float:
        return max(0.0, self.u_max - self.u_min) * max(0.0, self.v_max - self.v_min)


@dataclass(frozen=True)
class Disc2D:
    center: Point2D
    radius: float


@dataclass(frozen=True)
class Sphere:
    center: Vec3
    radius: float


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3


@dataclass(frozen=True)
class ViewFrame:
    """Head pose plus eye positions, with an orthonormal basis."""

    origin: Vec3
    forward: Vec3
    up: Vec3
    right: Vec3
    eye_left: Vec3
    eye_right: Vec3

    @staticmethod
    def facing(origin: Vec3, forward: Vec3, up: Vec3, ipd: float = 0.064) -> "ViewFrame":
        """Build a frame from a forward/up pair, eyes split by ipd along right."""
        f = forward.normalized()
        r = up.cross(f).normalized()
        u = f.cross(r)
        half = ipd / 2.0
        return ViewFrame(
            origin=origin, forward=f, up=u, right=r,
            eye_left=origin - r * half, eye_right=origin + r * half,
        )

    def cyclopean(self) -> Vec3:
        return (self.eye_left + self.eye_right) * 0.5


def project_point(p: Vec3, frame: ViewFrame, eye: Vec3) -> Point2D:
    """Perspective-project p from eye onto the unit-distance view plane."""
    d = p - eye
    depth = d.dot(frame.forward)
    if depth <= _EPS:
        raise PointBehindViewPlane(f"point at eye depth {depth:g}")
    return Point2D(d.dot(frame.right) / depth, d.dot(frame.up) / depth)


def stereoscopic_view_rect(thumb: Vec3, index: Vec3, frame: ViewFrame) -> Rect2D:
    """Axis-aligned bounds of both fingertips as seen from both eyes.

    Four projections total; the eye disparity gives the rect width even when
    the tips coincide.
    """
    us = []
    vs = []
    for p in (thumb, index):
        for eye in (frame.eye_left, frame.eye_right):
            q = project_point(p, frame, eye)
            us.append(q.u)
            vs.append(q.v)
    return Rect2D(min(us), min(vs), max(us), max(vs))


def project_sphere(s: Sphere, frame: ViewFrame) -> Disc2D:
    """Project a sphere from the cyclopean eye to its silhouette disc.

    The silhouette of a sphere at forward distance d with radius r, seen
    through the unit-distance plane, is a disc of radius r / sqrt(d^2 - r^2)
    about the projected center. Requires the whole silhouette in front of the
    view plane (d > r).
    """
    origin = frame.cyclopean()
    d = s.center - origin
    if d.norm() <= s.radius + _EPS:
        raise SphereEnclosesViewer(
            f"viewer within sphere radius {s.radius:g} of center")
    d_fwd = d.dot(frame.forward)
    if d_fwd <= s.radius + _EPS:
        raise PointBehindViewPlane(
            f"sphere silhouette crosses the view plane (forward distance {d_fwd:g})")
    center = Point2D(d.dot(frame.right) / d_fwd, d.dot(frame.up) / d_fwd)
    return Disc2D(center, s.radius / math.sqrt(d_fwd * d_fwd - s.radius * s.radius))


@lru_cache(maxsize=8)
def _unit_ngon(n: int) -> tuple:
    # Regular n-gon scaled so its area equals the unit disc's. The circumradius
    # factor sqrt(2*pi / (n*sin(2*pi/n))) trades inscribed-polygon bias for a
    # zero-mean boundary error.
    k = math.sqrt(2.0 * math.pi / (n * math.sin(2.0 * math.pi / n)))
    return tuple(
        (k * math.cos(2.0 * math.pi * i / n), k * math.sin(2.0 * math.pi * i / n))
        for i in range(n)
    )


def _clip_axis(points, axis, bound, keep_less):
    # One Sutherland-Hodgman pass against an axis-aligned half-plane.
    out = []
    m = len(points)
    for i in range(m):
        cur = points[i]
        nxt = points[(i + 1) % m]
        cur_in = (cur[axis] <= bound) if keep_less else (cur[axis] >= bound)
        nxt_in = (nxt[axis] <= bound) if keep_less else (nxt[axis] >= bound)
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            t = (bound - cur[axis]) / (nxt[axis] - cur[axis])
            out.append((
                cur[0] + t * (nxt[0] - cur[0]),
                cur[1] + t * (nxt[1] - cur[1]),
            ))
    return out


def _polygon_area(points) -> float:
    total = 0.0
    m = len(points)
    for i in range(m):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % m]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2.0


def disc_rect_intersection_area(rect: Rect2D, disc: Disc2D, n_segments: int = 64) -> float:
    """Area of rect-disc intersection via an equal-area polygon clip."""
    if rect.area <= 0.0 or disc.radius <= 0.0:
        return 0.0
    # Fast reject when the disc's bounding square misses the rect.
    r = disc.radius * 1.001
    if (disc.center.u + r < rect.u_min or disc.center.u - r > rect.u_max
            or disc.center.v + r < rect.v_min or disc.center.v - r > rect.v_max):
        return 0.0
    points = [
        (disc.center.u + disc.radius * cx, disc.center.v + disc.radius * cy)
        for cx, cy in _unit_ngon(n_segments)
    ]
    for axis, bound, keep_less in (
        (0, rect.u_min, False),
        (0, rect.u_max, True),
        (1, rect.v_min, False),
        (1, rect.v_max, True),
    ):
        points = _clip_axis(points, axis, bound, keep_less)
        if len(points) < 3:
            return 0.0
    return _polygon_area(points)


def overlap_ratios(rect: Rect2D, disc: Disc2D, n_segments: int = 64) -> tuple:
    """(view_covered, object_covered): intersection over rect and disc areas."""
    disc_area = math.pi * disc.radius * disc.radius
    if rect.area <= 0.0 or disc_area <= 0.0:
        raise DegenerateRegion("overlap ratios need a rect and a disc with area")
    inter = disc_rect_intersection_area(rect, disc, n_segments)
    return min(1.0, inter / rect.area), min(1.0, inter / disc_area)


def _angle_deg(a: Vec3, b: Vec3) -> float:
    # atan2 of cross/dot magnitudes is stable near 0 and 180 degrees.
    return math.degrees(math.atan2(a.cross(b).norm(), a.dot(b)))


def angular_dispersion(gaze: Ray, hand_pos: Vec3) -> float:
    """Angle in degrees between the gaze ray and origin-to-hand direction."""
    offset = hand_pos - gaze.origin
    if offset.norm() <= _EPS or gaze.direction.norm() <= _EPS:
        raise DegenerateVector("hand coincides with gaze origin")
    return _angle_deg(gaze.direction, offset)


def finger_angle(origin: Vec3, thumb: Vec3, index: Vec3) -> float:
    """Angle in degrees subtended at origin by the two fingertips."""
    a = thumb - origin
    b = index - origin
    if a.norm() <= _EPS or b.norm() <= _EPS:
        raise DegenerateVector("fingertip coincides with the gaze origin")
    return _angle_deg(a, b)


def span(thumb: Vec3, index: Vec3) -> float:
    """Euclidean thumb-index distance in meters."""
    return (thumb - index).norm()


def hand_depth(frame: ViewFrame, hand_pos: Vec3) -> float:
    """Forward-axis distance of the hand from the head, clamped to >= 0."""
    return max(0.0, (hand_pos - frame.origin).dot(frame.forward))


def gaze_hits_sphere(gaze: Ray, s: Sphere, tolerance_deg: float = 1.5) -> bool:
    """Ray-sphere test with the sphere's angular radius inflated by tolerance."""
    offset = s.center - gaze.origin
    dist = offset.norm()
    if dist <= s.radius:
        return True
    half_angle = math.degrees(math.asin(s.radius / dist))
    return _angle_deg(gaze.direction, offset) <= half_angle + tolerance_deg + 1e-12
