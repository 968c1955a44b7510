"""Deterministic scripted scene generation.

A recipe scripts the wearer's ground track, where they look, where their
hands are, how objects move, and which keysteps are annotated, all as
piecewise-linear timelines. ``synthesize`` compiles a recipe onto a uniform
30 Hz frame grid (both endpoints included) into a :class:`SceneStream`
whose serialized bytes are stable across runs. ``default_recipes`` bundles
five scripted scenes that together exercise every benchmark category.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidRecipe
from .geometry import Box3D, RigidTransform, Vec3
from .perception import GazeSample, SkeletonSample
from .schema import Frame, KeystepAnnotation, ObjectTrack, SceneStream

SCENE_RATE_HZ = 30.0

_IDENTITY = RigidTransform.identity()


@dataclass(frozen=True)
class Waypoint:
    """A timed 2D position on the ground plane."""

    t: float
    x: float
    y: float


@dataclass(frozen=True)
class ObjectScript:
    """One scene object: a named axis-aligned box following a timed path."""

    object_id: str
    name: str
    path: tuple[Waypoint, ...]
    half_extents: tuple[float, float, float] = (0.2, 0.2, 0.2)
    z: float = 0.0


@dataclass(frozen=True)
class GazeScript:
    """During [start, end] the wearer looks at an object or a fixed point."""

    start: float
    end: float
    target_object_id: Optional[str] = None
    target_point: Optional[Vec3] = None

    def __post_init__(self):
        if not self.end > self.start:
            raise InvalidRecipe("gaze window must have positive duration")
        if (self.target_object_id is None) == (self.target_point is None):
            raise InvalidRecipe(
                "gaze script needs exactly one of object id or fixed point"
            )


@dataclass(frozen=True)
class HandScript:
    """During [start, end] a hand joint rides on an object (plus an offset)."""

    joint: str
    start: float
    end: float
    target_object_id: str
    offset: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not self.end > self.start:
            raise InvalidRecipe("hand window must have positive duration")


@dataclass(frozen=True)
class SceneRecipe:
    """Full script for one synthetic scene."""

    name: str
    duration: float
    wearer_path: tuple[Waypoint, ...]
    objects: tuple[ObjectScript, ...] = ()
    gaze: tuple[GazeScript, ...] = ()
    hands: tuple[HandScript, ...] = ()
    keysteps: tuple[KeystepAnnotation, ...] = ()
    facing: tuple[Waypoint, ...] = ()
    fps: float = SCENE_RATE_HZ


def _check_path(path: Sequence[Waypoint], what: str, duration: float) -> None:
    if not path:
        raise InvalidRecipe("{} needs at least one waypoint".format(what))
    ts = [w.t for w in path]
    if ts != sorted(ts) or len(set(ts)) != len(ts):
        raise InvalidRecipe("{} waypoints must be strictly increasing in time".format(what))
    if ts[0] < 0.0 or ts[-1] > duration + 1e-9:
        raise InvalidRecipe("{} waypoints must lie within [0, duration]".format(what))


def validate_recipe(recipe: SceneRecipe) -> None:
    """Raise InvalidRecipe on any inconsistency in the script."""
    if not recipe.name:
        raise InvalidRecipe("recipe name must be non-empty")
    if not recipe.duration > 0.0:
        raise InvalidRecipe("recipe duration must be positive")
    if not recipe.fps > 0.0:
        raise InvalidRecipe("recipe fps must be positive")
    _check_path(recipe.wearer_path, "wearer path", recipe.duration)
    if recipe.facing:
        _check_path(recipe.facing, "facing track", recipe.duration)
    ids = [o.object_id for o in recipe.objects]
    if len(set(ids)) != len(ids):
        raise InvalidRecipe("duplicate object id in recipe")
    known = set(ids)
    for obj in recipe.objects:
        _check_path(obj.path, "object {} path".format(obj.object_id), recipe.duration)
        if any(h <= 0.0 for h in obj.half_extents):
            raise InvalidRecipe(
                "object {} half extents must be positive".format(obj.object_id)
            )
    for g in recipe.gaze:
        if g.target_object_id is not None and g.target_object_id not in known:
            raise InvalidRecipe(
                "gaze script references unknown object {!r}".format(g.target_object_id)
            )
    per_joint: dict[str, list[HandScript]] = {}
    for h in recipe.hands:
        if h.target_object_id not in known:
            raise InvalidRecipe(
                "hand script references unknown object {!r}".format(h.target_object_id)
            )
        per_joint.setdefault(h.joint, []).append(h)
    for joint, scripts in per_joint.items():
        scripts.sort(key=lambda s: s.start)
        for a, b in zip(scripts, scripts[1:]):
            if b.start < a.end:
                raise InvalidRecipe(
                    "overlapping hand scripts for joint {!r}".format(joint)
                )
    for ks in recipe.keysteps:
        if ks.start < 0.0 or ks.end > recipe.duration + 1e-9:
            raise InvalidRecipe(
                "keystep {!r} extends outside the scene duration".format(ks.text)
            )


def _interp_xy(path: Sequence[Waypoint], t: float) -> tuple[float, float]:
    """Piecewise-linear position along a waypoint path, clamped at the ends."""
    if t <= path[0].t:
        return (path[0].x, path[0].y)
    if t >= path[-1].t:
        return (path[-1].x, path[-1].y)
    ts = [w.t for w in path]
    i = bisect.bisect_right(ts, t)
    a, b = path[i - 1], path[i]
    u = (t - a.t) / (b.t - a.t)
    return (a.x + u * (b.x - a.x), a.y + u * (b.y - a.y))


def _heading_track(path: Sequence[Waypoint]) -> list[tuple[float, float]]:
    """(segment start time, yaw) for every non-degenerate segment, in order."""
    headings: list[tuple[float, float]] = []
    for a, b in zip(path, path[1:]):
        dx, dy = b.x - a.x, b.y - a.y
        if math.hypot(dx, dy) > 1e-9:
            headings.append((a.t, math.atan2(dy, dx)))
    return headings


def _yaw_at(
    recipe: SceneRecipe,
    headings: Sequence[tuple[float, float]],
    t: float,
    x: float,
    y: float,
) -> float:
    if recipe.facing:
        fx, fy = _interp_xy(recipe.facing, t)
        if math.hypot(fx - x, fy - y) > 1e-9:
            return math.atan2(fy - y, fx - x)
    if not headings:
        return 0.0
    i = bisect.bisect_right([h[0] for h in headings], t)
    return headings[max(i - 1, 0)][1]


def _pose(x: float, y: float, yaw: float) -> RigidTransform:
    """Upright pose whose camera +Z axis is the planar heading.

    Rotation columns are (right, down, forward) so +Y points at the floor.
    """
    rot = np.array(
        [
            [math.sin(yaw), 0.0, math.cos(yaw)],
            [-math.cos(yaw), 0.0, math.sin(yaw)],
            [0.0, -1.0, 0.0],
        ]
    )
    return RigidTransform(rot, Vec3(x, y, 0.0))


def _object_center(obj: ObjectScript, t: float) -> Vec3:
    x, y = _interp_xy(obj.path, t)
    return Vec3(x, y, obj.z)


def _box_at(obj: ObjectScript, t: float) -> Box3D:
    c = _object_center(obj, t)
    hx, hy, hz = obj.half_extents
    return Box3D(
        Vec3(c.x - hx, c.y - hy, c.z - hz),
        Vec3(c.x + hx, c.y + hy, c.z + hz),
        obj.object_id,
    )


def _active_script(scripts, t: float):
    for s in scripts:
        if s.start <= t <= s.end:
            return s
    return None


def _gaze_dir_device(pose: RigidTransform, target: Vec3) -> Vec3:
    rel = target - pose.translation
    local = pose.rotation.T @ rel.as_array()
    n = float(np.linalg.norm(local))
    if n < 1e-9:
        return Vec3(0.0, 0.0, 1.0)
    return Vec3(local[0] / n, local[1] / n, local[2] / n)


def synthesize(recipe: SceneRecipe, stream_id: Optional[str] = None) -> SceneStream:
    """Compile a recipe into a scene stream on a uniform frame grid."""
    validate_recipe(recipe)
    by_id = {o.object_id: o for o in recipe.objects}
    headings = _heading_track(recipe.wearer_path)
    n_frames = int(round(recipe.duration * recipe.fps)) + 1

    frames = []
    for i in range(n_frames):
        t = i / recipe.fps
        x, y = _interp_xy(recipe.wearer_path, t)
        yaw = _yaw_at(recipe, headings, t, x, y)
        pose = _pose(x, y, yaw)

        g = _active_script(recipe.gaze, t)
        if g is None:
            gaze_dir = Vec3(0.0, 0.0, 1.0)
        else:
            target = (
                g.target_point
                if g.target_point is not None
                else _object_center(by_id[g.target_object_id], t)
            )
            gaze_dir = _gaze_dir_device(pose, target)

        fwd = pose.forward_world()
        right = Vec3(
            float(pose.rotation[0, 0]),
            float(pose.rotation[1, 0]),
            float(pose.rotation[2, 0]),
        )
        joints = {}
        for joint, side in (("left_hand", -1.0), ("right_hand", 1.0)):
            script = _active_script(
                [h for h in recipe.hands if h.joint == joint], t
            )
            if script is None:
                joints[joint] = (
                    pose.translation + fwd.scaled(0.3) + right.scaled(0.2 * side)
                )
            else:
                joints[joint] = (
                    _object_center(by_id[script.target_object_id], t)
                    + script.offset
                )

        frames.append(
            Frame(
                timestamp=t,
                device_pose=pose,
                camera_offset=_IDENTITY,
                gaze=GazeSample(t, gaze_dir),
                skeleton=SkeletonSample(t, joints),
            )
        )

    tracks = {}
    for obj in recipe.objects:
        boxes = tuple(_box_at(obj, i / recipe.fps) for i in range(n_frames))
        tracks[obj.object_id] = ObjectTrack(obj.object_id, obj.name, boxes)

    return SceneStream(
        stream_id=stream_id or recipe.name,
        frames=tuple(frames),
        objects=tracks,
        keysteps=tuple(sorted(recipe.keysteps, key=lambda k: (k.start, k.end))),
    )


def _static(oid, name, x, y, half=(0.2, 0.2, 0.2), z=0.0):
    return ObjectScript(oid, name, (Waypoint(0.0, x, y),), half, z)


def _kitchen_walk(rng: random.Random) -> SceneRecipe:
    """Walk across the room, glance at a far appliance, then walk back.

    On the way out the far objects are in view; on the way back they fall
    behind the wearer, which is what navigation questions need: a goal that
    was seen earlier but is hidden at the end of the window.
    """
    kettle_x = 6.0 + rng.uniform(-0.2, 0.2)
    return SceneRecipe(
        name="kitchen-walk",
        duration=8.0,
        wearer_path=(
            Waypoint(0.0, 0.0, 0.0),
            Waypoint(5.0, 4.0, 0.0),
            Waypoint(8.0, 1.0, 0.0),
        ),
        objects=(
            _static("counter", "kitchen counter", 2.0, 1.6, (1.0, 0.4, 0.5)),
            _static("island", "kitchen island", 3.0, -1.8, (0.8, 0.6, 0.5)),
            _static("kettle", "electric kettle", kettle_x, 0.5),
            _static("bin", "recycling bin", 7.0, -2.0, (0.3, 0.3, 0.4)),
        ),
        gaze=(GazeScript(5.2, 7.8, target_object_id="kettle"),),
    )


def _gaze_study(rng: random.Random) -> SceneRecipe:
    """Stand still and dwell on nearby tableware, one object at a time."""
    cup_y = 1.2 + rng.uniform(-0.1, 0.1)
    return SceneRecipe(
        name="gaze-study",
        duration=8.0,
        wearer_path=(Waypoint(0.0, 0.0, 0.0),),
        facing=(Waypoint(0.0, 2.0, 0.0),),
        objects=(
            _static("cup", "coffee cup", 2.0, cup_y),
            _static("plate", "dinner plate", 2.5, -0.8),
        ),
        gaze=(
            GazeScript(1.0, 2.2, target_object_id="plate"),
            GazeScript(4.0, 6.5, target_object_id="cup"),
        ),
    )


def _object_move(rng: random.Random) -> SceneRecipe:
    """Watch a tray slide across the table while a hand pushes it."""
    end_y = 1.0 + rng.uniform(-0.1, 0.1)
    tray = ObjectScript(
        "tray",
        "serving tray",
        (
            Waypoint(0.0, 1.5, -0.5),
            Waypoint(4.0, 1.5, -0.5),
            Waypoint(6.0, 1.5, end_y),
            Waypoint(8.0, 1.5, end_y),
        ),
        (0.25, 0.25, 0.1),
    )
    return SceneRecipe(
        name="object-move",
        duration=8.0,
        wearer_path=(Waypoint(0.0, 0.0, 0.0),),
        facing=(Waypoint(0.0, 2.0, 0.0),),
        objects=(tray, _static("pitcher", "water pitcher", 2.2, 0.4)),
        gaze=(GazeScript(3.0, 7.0, target_object_id="tray"),),
        hands=(HandScript("right_hand", 4.0, 6.0, "tray"),),
    )


def _turn_and_grab(rng: random.Random) -> SceneRecipe:
    """Face forward, then swing right to grab a jar off the side shelf."""
    jar_y = -2.0 + rng.uniform(-0.1, 0.1)
    return SceneRecipe(
        name="turn-and-grab",
        duration=10.0,
        wearer_path=(Waypoint(0.0, 0.0, 0.0),),
        facing=(
            Waypoint(0.0, 2.0, 0.0),
            Waypoint(6.0, 2.0, 0.0),
            Waypoint(7.0, 0.0, -2.0),
            Waypoint(10.0, 0.0, -2.0),
        ),
        objects=(
            _static("jar", "glass jar", 0.0, jar_y),
            _static("towel", "dish towel", 1.0, 1.0),
            _static("sponge", "kitchen sponge", 1.5, -0.5),
            _static("stove", "stove top", 0.8, -1.5, (0.5, 0.4, 0.3)),
        ),
        gaze=(GazeScript(0.5, 5.5, target_point=Vec3(2.0, 0.0, 0.0)),),
        hands=(
            HandScript("right_hand", 1.0, 2.0, "towel"),
            HandScript("right_hand", 2.5, 3.5, "sponge"),
            HandScript("right_hand", 6.0, 8.5, "jar"),
            HandScript("right_hand", 8.8, 9.6, "stove"),
        ),
        keysteps=(
            KeystepAnnotation(1.0, 2.0, "pick up the dish towel", ("right_hand",)),
            KeystepAnnotation(2.5, 3.5, "wipe down the sponge holder", ("right_hand",)),
            KeystepAnnotation(6.0, 8.5, "grab the glass jar from the shelf", ("right_hand",)),
            KeystepAnnotation(8.8, 9.6, "set the jar down on the stove", ("right_hand",)),
        ),
    )


def _cooking_steps(rng: random.Random) -> SceneRecipe:
    """Work through eight stations around the kitchen in a fixed order."""
    jitter = rng.uniform(-0.05, 0.05)
    stations = [
        ("fetch a saucepan from the rack", 2.0 + jitter, 0.0),
        ("fill the saucepan at the sink", 3.0, 1.0),
        ("set the pan on the burner", 3.5, -0.5),
        ("chop the onions on the board", 2.5, -1.5),
        ("scrape the onions into the pan", 1.0, -1.0),
        ("stir in the tomato paste", 0.5, 0.5),
        ("season the sauce from the spice tin", 1.5, 1.5),
        ("plate the finished pasta", 3.0, 2.0),
    ]
    spans = [
        (1.0, 3.0),
        (4.5, 6.5),
        (8.0, 10.0),
        (12.0, 14.0),
        (15.0, 17.0),
        (18.0, 20.0),
        (21.0, 23.0),
        (24.5, 26.5),
    ]
    objects = []
    hands = []
    keysteps = []
    for i, ((text, x, y), (s, e)) in enumerate(zip(stations, spans)):
        oid = "station{}".format(i)
        objects.append(_static(oid, "station {}".format(i), x, y, (0.1, 0.1, 0.1)))
        hands.append(HandScript("right_hand", s, e, oid))
        keysteps.append(KeystepAnnotation(s, e, text, ("right_hand",)))
    return SceneRecipe(
        name="cooking-steps",
        duration=30.0,
        wearer_path=(Waypoint(0.0, 0.0, 0.0),),
        facing=(Waypoint(0.0, 2.0, 0.0),),
        objects=tuple(objects),
        hands=tuple(hands),
        keysteps=tuple(keysteps),
    )


def default_recipes(seed: int = 0) -> list[SceneRecipe]:
    """Five scripted scenes covering every benchmark category.

    The same seed always yields byte-identical scenes; different seeds
    jitter object placement.
    """
    rng = random.Random(str(seed))
    return [
        _kitchen_walk(rng),
        _gaze_study(rng),
        _object_move(rng),
        _turn_and_grab(rng),
        _cooking_steps(rng),
    ]
