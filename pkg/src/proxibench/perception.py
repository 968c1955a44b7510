"""Gaze, fixation, interaction, and visibility analysis over scene streams.

Gaze arrives as unit rays in the device frame and is lifted to world rays with
the device pose. Fixations are dispersion-threshold windows; interactions fire
on object speed or hand-in-box containment; visibility is a field-of-view cone
with a range cap and no occlusion handling.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

from .errors import DegenerateForward, DegenerateTarget, InsufficientSamples
from .geometry import (
    Box3D,
    Direction8,
    ForwardAxis,
    RigidTransform,
    SignedAngle,
    Vec3,
    bev_project,
    bev_signed_angle,
    bev_signed_angle_of_vector,
    box_center,
    camera_center,
    discretize_direction,
    euclidean_distance,
)

UNIT_ATOL = 1e-6

DEFAULT_DISPERSION_DEG = 2.0
DEFAULT_MIN_FIXATION_S = 0.3
DEFAULT_SPEED_THRESHOLD = 0.05
DEFAULT_VELOCITY_WINDOW_S = 0.5
DEFAULT_HALF_ANGLE_DEG = 75.0
DEFAULT_MAX_RANGE_M = 8.0
HAND_JOINTS = ("left_hand", "right_hand")


class InteractionKind(Enum):
    AFFORD = "afford"
    PLACE = "place"
    ACTION = "action"


class InteractionEvidence(Enum):
    VELOCITY = "velocity"
    HAND_CONTAINMENT = "hand_containment"
    KEYSTEP_ANNOTATION = "keystep_annotation"


class BoxFace(Enum):
    """Which bounding plane a ray entered, or Interior for an inside origin."""

    MINUS_X = "-x"
    PLUS_X = "+x"
    MINUS_Y = "-y"
    PLUS_Y = "+y"
    MINUS_Z = "-z"
    PLUS_Z = "+z"
    INTERIOR = "interior"


@dataclass(frozen=True)
class GazeSample:
    timestamp: float
    ray_dir_device: Vec3
    depth: Optional[float] = None

    def __post_init__(self):
        n = self.ray_dir_device.norm()
        if not (1.0 - UNIT_ATOL <= n <= 1.0 + UNIT_ATOL):
            raise ValueError("gaze direction must be a unit vector, |d|={}".format(n))
        if self.depth is not None and not self.depth > 0:
            raise ValueError("gaze depth must be positive when present")


@dataclass(frozen=True)
class SkeletonSample:
    timestamp: float
    joints: Mapping[str, Vec3]

    def __post_init__(self):
        for name, p in self.joints.items():
            if not all(math.isfinite(v) for v in (p.x, p.y, p.z)):
                raise ValueError("joint {!r} has a non-finite position".format(name))


@dataclass(frozen=True)
class InteractionEvent:
    object_id: str
    onset_timestamp: float
    kind: InteractionKind
    evidence: InteractionEvidence


@dataclass(frozen=True)
class FixationEvent:
    start: float
    end: float
    object_id: Optional[str] = None
    hit_point: Optional[Vec3] = None

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("fixation must have positive duration")

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Ray:
    origin: Vec3
    direction: Vec3  # unit length


@dataclass(frozen=True)
class RayHit:
    t: float
    point: Vec3
    face: BoxFace


def gaze_ray_world(sample: GazeSample, device_pose: RigidTransform) -> Ray:
    """Lift a device-frame gaze direction into a world-frame ray.

    The ray starts at the device position and is the rotated (then
    renormalized) gaze direction; it is unrelated to the camera forward axis.
    """
    d = device_pose.rotate(sample.ray_dir_device).normalized()
    return Ray(origin=device_pose.translation, direction=d)


def ray_box_intersect(ray: Ray, box: Box3D) -> Optional[RayHit]:
    """First boundary crossing of a forward ray with a box (slab test).

    Returns the smallest t >= 0 entry point and the face it pierces; an
    origin already inside the box reports t=0 with the Interior face. Returns
    None on a miss.
    """
    o = (ray.origin.x, ray.origin.y, ray.origin.z)
    d = (ray.direction.x, ray.direction.y, ray.direction.z)
    lo = (box.min_corner.x, box.min_corner.y, box.min_corner.z)
    hi = (box.max_corner.x, box.max_corner.y, box.max_corner.z)
    entry_faces = (
        (BoxFace.MINUS_X, BoxFace.PLUS_X),
        (BoxFace.MINUS_Y, BoxFace.PLUS_Y),
        (BoxFace.MINUS_Z, BoxFace.PLUS_Z),
    )

    t_enter = -math.inf
    t_exit = math.inf
    enter_face: Optional[BoxFace] = None
    for axis in range(3):
        if d[axis] == 0.0:
            if not (lo[axis] <= o[axis] <= hi[axis]):
                return None
            continue
        t1 = (lo[axis] - o[axis]) / d[axis]
        t2 = (hi[axis] - o[axis]) / d[axis]
        face = entry_faces[axis][0] if d[axis] > 0 else entry_faces[axis][1]
        if t1 > t2:
            t1, t2 = t2, t1
        if t1 > t_enter:
            t_enter = t1
            enter_face = face
        t_exit = min(t_exit, t2)
    if t_enter > t_exit or t_exit < 0.0:
        return None
    if t_enter < 0.0:
        return RayHit(0.0, ray.origin, BoxFace.INTERIOR)
    p = Vec3(
        o[0] + t_enter * d[0],
        o[1] + t_enter * d[1],
        o[2] + t_enter * d[2],
    )
    assert enter_face is not None
    return RayHit(t_enter, p, enter_face)


def resolve_fixated_object(
    ray: Ray,
    boxes: Mapping[str, Box3D],
    visible: Callable[[str], bool] = lambda _oid: True,
) -> Optional[tuple[str, Vec3]]:
    """The nearest box the gaze ray hits, among boxes passing the predicate.

    Ties in hit distance keep the earliest box in mapping order.
    """
    best: Optional[tuple[float, str, Vec3]] = None
    for oid, box in boxes.items():
        if not visible(oid):
            continue
        hit = ray_box_intersect(ray, box)
        if hit is None:
            continue
        if best is None or hit.t < best[0]:
            best = (hit.t, oid, hit.point)
    if best is None:
        return None
    return best[1], best[2]


def _angular_spread_deg(dirs: Sequence[Vec3], candidate: Vec3) -> float:
    worst = 0.0
    for d in dirs:
        dot = max(-1.0, min(1.0, d.dot(candidate)))
        worst = max(worst, math.degrees(math.acos(dot)))
    return worst


def detect_fixations(
    gaze: Sequence[GazeSample],
    poses: Sequence[tuple[float, RigidTransform]],
    dispersion_deg: float = DEFAULT_DISPERSION_DEG,
    min_duration: float = DEFAULT_MIN_FIXATION_S,
) -> list[FixationEvent]:
    """Dispersion-threshold fixation detection on world-frame gaze.

    Grows each window greedily while the maximum pairwise angle between gaze
    directions stays within ``dispersion_deg``; windows lasting at least
    ``min_duration`` become events. Poses are matched to gaze samples by
    nearest timestamp. Raises InsufficientSamples when the stream is shorter
    than the minimum duration.
    """
    if len(gaze) < 2 or gaze[-1].timestamp - gaze[0].timestamp < min_duration:
        raise InsufficientSamples(
            "gaze stream shorter than the {} s minimum fixation".format(min_duration)
        )
    pose_ts = [t for t, _ in poses]
    if not pose_ts:
        raise InsufficientSamples("empty pose stream")

    def pose_at(t: float) -> RigidTransform:
        i = bisect.bisect_left(pose_ts, t)
        if i == 0:
            return poses[0][1]
        if i == len(pose_ts):
            return poses[-1][1]
        before, after = pose_ts[i - 1], pose_ts[i]
        return poses[i - 1][1] if t - before <= after - t else poses[i][1]

    world_dirs = [gaze_ray_world(s, pose_at(s.timestamp)).direction for s in gaze]
    times = [s.timestamp for s in gaze]

    events: list[FixationEvent] = []
    i = 0
    n = len(gaze)
    while i < n:
        window = [world_dirs[i]]
        j = i
        while j + 1 < n:
            spread = _angular_spread_deg(window, world_dirs[j + 1])
            if spread > dispersion_deg:
                break
            window.append(world_dirs[j + 1])
            j += 1
        if times[j] - times[i] >= min_duration:
            events.append(FixationEvent(start=times[i], end=times[j]))
            i = j + 1
        else:
            i += 1
    return events


def detect_interaction(
    object_id: str,
    track: Sequence[tuple[float, Vec3]],
    skeletons: Sequence[SkeletonSample],
    boxes: Sequence[Box3D],
    kind: InteractionKind = InteractionKind.AFFORD,
    speed_threshold: float = DEFAULT_SPEED_THRESHOLD,
    velocity_window: float = DEFAULT_VELOCITY_WINDOW_S,
    hand_joints: Sequence[str] = HAND_JOINTS,
) -> Optional[InteractionEvent]:
    """First moment an object is being interacted with, if any.

    Two triggers: (1) the object's average speed over a trailing window —
    endpoint displacement divided by elapsed time — strictly exceeds
    ``speed_threshold``; (2) a hand joint lies inside the object's box.
    ``boxes`` gives the box per track frame; skeleton samples use the box of
    the nearest track timestamp. The earlier trigger wins; a tie reports the
    velocity evidence.
    """
    if len(track) < 2:
        raise InsufficientSamples("object track needs at least two samples")
    if len(boxes) != len(track):
        raise ValueError("need exactly one box per track sample")
    times = [t for t, _ in track]

    velocity_onset: Optional[float] = None
    for j in range(1, len(track)):
        tj, pj = track[j]
        cutoff = tj - velocity_window
        i = bisect.bisect_right(times, cutoff) - 1
        if i < 0:
            continue  # no full trailing window yet
        ti, pi = track[i]
        if tj <= ti:
            continue
        speed = euclidean_distance(pi, pj) / (tj - ti)
        if speed > speed_threshold:
            velocity_onset = tj
            break

    hand_onset: Optional[float] = None
    for sample in sorted(skeletons, key=lambda s: s.timestamp):
        k = bisect.bisect_left(times, sample.timestamp)
        if k == len(times):
            k -= 1
        elif k > 0 and sample.timestamp - times[k - 1] < times[k] - sample.timestamp:
            k -= 1
        box = boxes[k]
        for joint in hand_joints:
            p = sample.joints.get(joint)
            if p is not None and box.contains(p):
                hand_onset = sample.timestamp
                break
        if hand_onset is not None:
            break

    if velocity_onset is None and hand_onset is None:
        return None
    if hand_onset is None or (velocity_onset is not None and velocity_onset <= hand_onset):
        return InteractionEvent(
            object_id, velocity_onset, kind, InteractionEvidence.VELOCITY
        )
    return InteractionEvent(
        object_id, hand_onset, kind, InteractionEvidence.HAND_CONTAINMENT
    )


def is_visible(
    pose: RigidTransform,
    target: Vec3,
    half_angle: float = DEFAULT_HALF_ANGLE_DEG,
    max_range: float = DEFAULT_MAX_RANGE_M,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> bool:
    """Field-of-view test: within the forward cone and within range.

    Uses the full 3D angle between the camera forward axis and the target
    bearing; there is no occlusion handling.
    """
    if not 0.0 < half_angle < 180.0:
        raise ValueError("half_angle must be in (0, 180)")
    if not max_range > 0.0:
        raise ValueError("max_range must be positive")
    center = camera_center(pose)
    rel = target - center
    dist = rel.norm()
    if dist < 1e-9:
        raise DegenerateTarget("target coincides with the camera center")
    if dist > max_range:
        return False
    fwd = pose.forward_world(forward)
    dot = max(-1.0, min(1.0, fwd.dot(rel) / dist))
    return math.degrees(math.acos(dot)) <= half_angle


def afford_answer(
    pose: RigidTransform,
    box: Box3D,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> tuple[Direction8, float]:
    """Direction and straight-line distance from the wearer to an object."""
    center = box_center(box)
    angle = bev_signed_angle(pose, center, forward)
    return discretize_direction(angle), euclidean_distance(camera_center(pose), center)


def place_answer(
    pose: RigidTransform,
    center_now: Vec3,
    center_future: Vec3,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> Direction8:
    """Egocentric direction an object is about to move in.

    The displacement between the object's current and future centers is
    expressed in the wearer's current frame and discretized.
    """
    disp = center_future - center_now
    angle = bev_signed_angle_of_vector(pose, disp, forward)
    return discretize_direction(angle)


def action_answer(
    pose_now: RigidTransform,
    pose_future: RigidTransform,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> SignedAngle:
    """Signed turn the wearer is about to make, projected onto the ground.

    Positive angles are counterclockwise (a left turn) seen from above.
    """
    fx0, fy0 = bev_project(pose_now.forward_world(forward))
    fx1, fy1 = bev_project(pose_future.forward_world(forward))
    if math.hypot(fx0, fy0) < 1e-6 or math.hypot(fx1, fy1) < 1e-6:
        raise DegenerateForward("a forward axis is vertical in the turn computation")
    cross = fx0 * fy1 - fy0 * fx1
    dot = fx0 * fx1 + fy0 * fy1
    return SignedAngle.normalized(math.degrees(math.atan2(cross, dot)))
