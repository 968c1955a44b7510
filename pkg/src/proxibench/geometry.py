"""SE(3) poses, axis-aligned 3D boxes, ground-plane angles, and the 8-way
direction taxonomy.

Conventions (normative for the whole toolkit):

* World frame is right-handed with +Z up; the ground plane is z = 0.
* Camera forward defaults to the world direction of the camera frame's +Z
  axis (third rotation column); other datasets can select a different axis
  through :class:`ForwardAxis`.
* Signed ground-plane angles are measured from the projected forward axis to
  the projected target direction, positive counterclockwise seen from above,
  which puts positive angles on the wearer's left. Range is (-180, 180].
* The eight discrete directions cover 45-degree half-open sectors; the sector
  table is exported as :data:`SECTOR_TABLE`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateForward, DegenerateTarget, OrthonormalityViolation

# Tolerances for rotation matrix validation. Construction is strict; composed
# results get the looser bound, drifting past it signals corrupt input.
ORTHONORMAL_ATOL = 1e-9
COMPOSE_ATOL = 1e-6

# Minimum usable norm of a ground-plane projection.
BEV_EPS = 1e-6


@dataclass(frozen=True)
class Vec3:
    """Point or direction in meters; frame given by context."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite Vec3 components: {self!r}")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))


class ForwardAxis(Enum):
    """Which camera-frame axis points forward, per dataset convention."""

    PLUS_Z = "+z"
    PLUS_X = "+x"
    PLUS_Y = "+y"
    MINUS_Z = "-z"

    def local_vector(self) -> np.ndarray:
        return {
            ForwardAxis.PLUS_Z: np.array([0.0, 0.0, 1.0]),
            ForwardAxis.PLUS_X: np.array([1.0, 0.0, 0.0]),
            ForwardAxis.PLUS_Y: np.array([0.0, 1.0, 0.0]),
            ForwardAxis.MINUS_Z: np.array([0.0, 0.0, -1.0]),
        }[self]


DEFAULT_FORWARD = ForwardAxis.PLUS_Z


def _check_rotation(rotation: np.ndarray, atol: float) -> None:
    drift = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if drift >= atol:
        raise OrthonormalityViolation(f"R^T R deviates from I by {drift:.3e} (tol {atol:.1e})")
    det = float(np.linalg.det(rotation))
    if abs(det - 1.0) >= atol:
        raise OrthonormalityViolation(f"det(R) = {det!r} outside [1-{atol:.1e}, 1+{atol:.1e}]")


class RigidTransform:
    """SE(3) transform: rotation (3x3, row-major) plus translation.

    Maps local coordinates to parent coordinates via ``R v + t``. Rotation is
    validated as orthonormal with determinant +1 at construction.
    """

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation, translation: Vec3, _atol: float = ORTHONORMAL_ATOL):
        rot = np.asarray(rotation, dtype=np.float64).reshape(3, 3).copy()
        _check_rotation(rot, _atol)
        rot.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", translation)

    def __setattr__(self, name, value):
        raise AttributeError("RigidTransform is immutable")

    def __repr__(self):
        return f"RigidTransform(rotation={self.rotation.tolist()}, translation={self.translation})"

    def __eq__(self, other):
        if not isinstance(other, RigidTransform):
            return NotImplemented
        return bool(np.array_equal(self.rotation, other.rotation)) and self.translation == other.translation

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), Vec3(0.0, 0.0, 0.0))

    @staticmethod
    def from_yaw_deg(yaw_deg: float, translation: Vec3 = Vec3(0.0, 0.0, 0.0)) -> "RigidTransform":
        """Rotation about world +Z by ``yaw_deg`` (counterclockwise from above)."""
        r = math.radians(yaw_deg)
        c, s = math.cos(r), math.sin(r)
        return RigidTransform([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], translation)

    def apply(self, v: Vec3) -> Vec3:
        return Vec3.from_array(self.rotation @ v.as_array()) + self.translation

    def rotate(self, v: Vec3) -> Vec3:
        return Vec3.from_array(self.rotation @ v.as_array())

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, Vec3.from_array(-(rt @ self.translation.as_array())))

    def forward_world(self, forward: ForwardAxis = DEFAULT_FORWARD) -> Vec3:
        return Vec3.from_array(self.rotation @ forward.local_vector())


def compose(outer: RigidTransform, inner: RigidTransform) -> RigidTransform:
    """SE(3) composition ``outer . inner`` (apply inner first)."""
    rot = outer.rotation @ inner.rotation
    t = Vec3.from_array(outer.rotation @ inner.translation.as_array()) + outer.translation
    return RigidTransform(rot, t, _atol=COMPOSE_ATOL)


def camera_center(pose: RigidTransform) -> Vec3:
    """World position of the camera: the translation of its camera-to-world pose."""
    return pose.translation


@dataclass(frozen=True)
class Box3D:
    """Axis-aligned box in the world frame."""

    min_corner: Vec3
    max_corner: Vec3
    object_id: str = ""

    def __post_init__(self):
        lo, hi = self.min_corner, self.max_corner
        if not (lo.x <= hi.x and lo.y <= hi.y and lo.z <= hi.z):
            raise ValueError(f"box corners out of order: {lo} !<= {hi}")

    def contains(self, p: Vec3) -> bool:
        lo, hi = self.min_corner, self.max_corner
        return lo.x <= p.x <= hi.x and lo.y <= p.y <= hi.y and lo.z <= p.z <= hi.z


def box_center(box: Box3D) -> Vec3:
    """Componentwise midpoint of the two corners."""
    lo, hi = box.min_corner, box.max_corner
    return Vec3(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), 0.5 * (lo.z + hi.z))


@dataclass(frozen=True)
class SignedAngle:
    """Angle in degrees, normalized to (-180, 180]."""

    degrees: float

    def __post_init__(self):
        if not (-180.0 < self.degrees <= 180.0):
            raise ValueError(f"angle {self.degrees} outside (-180, 180]")

    @staticmethod
    def normalized(degrees: float) -> "SignedAngle":
        d = math.fmod(degrees, 360.0)
        if d > 180.0:
            d -= 360.0
        elif d <= -180.0:
            d += 360.0
        return SignedAngle(d)


class Direction8(Enum):
    """Eight canonical egocentric directions on a cyclic ring.

    Ring index runs counterclockwise (toward the wearer's left) starting at
    FRONT, matching the sign convention of :func:`bev_signed_angle`.
    """

    FRONT = 0
    FRONT_LEFT = 1
    LEFT = 2
    BACK_LEFT = 3
    BACK = 4
    BACK_RIGHT = 5
    RIGHT = 6
    FRONT_RIGHT = 7

    @property
    def ring_index(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return _DIRECTION_LABELS[self]

    @property
    def letter(self) -> str:
        """Single-letter wire code used by the chain answer format."""
        return _DIRECTION_LETTERS[self]

    @staticmethod
    def from_label(label: str) -> "Direction8":
        return _LABEL_TO_DIRECTION[label]

    @staticmethod
    def from_letter(letter: str) -> "Direction8":
        return _LETTER_TO_DIRECTION[letter]

    def ring_distance(self, other: "Direction8") -> int:
        d = abs(self.value - other.value)
        return min(d, 8 - d)

    def neighbors(self) -> tuple["Direction8", "Direction8"]:
        """The two adjacent directions on the ring."""
        return Direction8((self.value - 1) % 8), Direction8((self.value + 1) % 8)


_DIRECTION_LABELS = {
    Direction8.FRONT: "front",
    Direction8.FRONT_LEFT: "front-left",
    Direction8.LEFT: "left",
    Direction8.BACK_LEFT: "back-left",
    Direction8.BACK: "back",
    Direction8.BACK_RIGHT: "back-right",
    Direction8.RIGHT: "right",
    Direction8.FRONT_RIGHT: "front-right",
}
_LABEL_TO_DIRECTION = {v: k for k, v in _DIRECTION_LABELS.items()}

# Chain wire format: A=right, B=left, C=front, D=back, E=front-right,
# F=front-left, G=back-left, H=back-right.
_DIRECTION_LETTERS = {
    Direction8.RIGHT: "A",
    Direction8.LEFT: "B",
    Direction8.FRONT: "C",
    Direction8.BACK: "D",
    Direction8.FRONT_RIGHT: "E",
    Direction8.FRONT_LEFT: "F",
    Direction8.BACK_LEFT: "G",
    Direction8.BACK_RIGHT: "H",
}
_LETTER_TO_DIRECTION = {v: k for k, v in _DIRECTION_LETTERS.items()}

# Half-open 45-degree sectors, (lo, hi, direction); BACK wraps across 180.
SECTOR_TABLE = (
    (-22.5, 22.5, Direction8.FRONT),
    (22.5, 67.5, Direction8.FRONT_LEFT),
    (67.5, 112.5, Direction8.LEFT),
    (112.5, 157.5, Direction8.BACK_LEFT),
    (157.5, -157.5, Direction8.BACK),
    (-157.5, -112.5, Direction8.BACK_RIGHT),
    (-112.5, -67.5, Direction8.RIGHT),
    (-67.5, -22.5, Direction8.FRONT_RIGHT),
)

_RING = (
    Direction8.FRONT,
    Direction8.FRONT_LEFT,
    Direction8.LEFT,
    Direction8.BACK_LEFT,
    Direction8.BACK,
    Direction8.BACK_RIGHT,
    Direction8.RIGHT,
    Direction8.FRONT_RIGHT,
)


def discretize_direction(angle: SignedAngle) -> Direction8:
    """Map a signed ground-plane angle onto its 45-degree sector."""
    idx = int(math.floor((angle.degrees + 22.5) / 45.0)) % 8
    return _RING[idx]


def bev_project(v: Vec3) -> tuple[float, float]:
    """Drop the z component; no renormalization."""
    return (v.x, v.y)


def bev_signed_angle_of_vector(
    pose: RigidTransform, v: Vec3, forward: ForwardAxis = DEFAULT_FORWARD
) -> SignedAngle:
    """Signed ground-plane angle from the pose's forward axis to ``v``.

    ``v`` is a world-frame displacement, not a position. Positive angles are
    counterclockwise from above (wearer's left).
    """
    fx, fy = bev_project(pose.forward_world(forward))
    if math.hypot(fx, fy) < BEV_EPS:
        raise DegenerateForward("camera forward axis is vertical in BEV")
    tx, ty = bev_project(v)
    if math.hypot(tx, ty) < BEV_EPS:
        raise DegenerateTarget("target direction vanishes in BEV")
    cross = fx * ty - fy * tx
    dot = fx * tx + fy * ty
    return SignedAngle.normalized(math.degrees(math.atan2(cross, dot)))


def bev_signed_angle(
    pose: RigidTransform, target: Vec3, forward: ForwardAxis = DEFAULT_FORWARD
) -> SignedAngle:
    """Signed ground-plane angle from the camera's forward axis to ``target``."""
    try:
        return bev_signed_angle_of_vector(pose, target - camera_center(pose), forward)
    except DegenerateTarget:
        raise DegenerateTarget("target coincides with the camera position in BEV") from None


def euclidean_distance(a: Vec3, b: Vec3) -> float:
    """Straight-line distance in meters."""
    return (a - b).norm()
