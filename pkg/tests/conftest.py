"""Shared test helpers."""

import math

import numpy as np

from proxibench.geometry import Box3D, RigidTransform, Vec3
from proxibench.perception import GazeSample, SkeletonSample
from proxibench.schema import Frame, ObjectTrack, SceneStream


def yaw_pose(x, y, yaw_deg, z=0.0):
    """Pose at (x, y, z) whose +Z camera axis points along yaw in the plane.

    Columns are (right, down, forward) for an upright wearer, so the camera
    +Z column is the planar heading and +Y points at the floor.
    """
    psi = math.radians(yaw_deg)
    rot = np.array(
        [
            [math.sin(psi), 0.0, math.cos(psi)],
            [-math.cos(psi), 0.0, math.sin(psi)],
            [0.0, -1.0, 0.0],
        ]
    )
    return RigidTransform(rot, Vec3(x, y, z))


def cube_at(x, y, z=0.0, half=0.2):
    return Box3D(Vec3(x - half, y - half, z - half), Vec3(x + half, y + half, z + half))


def make_stream(
    n_frames,
    fps=30.0,
    pose_fn=None,
    gaze_fn=None,
    joints_fn=None,
    objects=None,
    keysteps=(),
    stream_id="s0",
):
    """Build a SceneStream on a uniform frame grid from per-frame callables.

    ``pose_fn(i, t)`` yields the device pose (camera offset stays identity),
    ``gaze_fn(i, t)`` a device-frame unit ray, ``joints_fn(i, t)`` the joint
    map, and ``objects`` maps object_id -> (name, box_fn(i, t)).
    """
    identity = RigidTransform.identity()
    frames = []
    for i in range(n_frames):
        t = i / fps
        pose = pose_fn(i, t) if pose_fn else yaw_pose(0.0, 0.0, 0.0)
        direction = gaze_fn(i, t) if gaze_fn else Vec3(0.0, 0.0, 1.0)
        joints = (
            joints_fn(i, t)
            if joints_fn
            else {"left_hand": Vec3(0.0, 0.0, 0.0), "right_hand": Vec3(0.3, 0.0, 0.0)}
        )
        frames.append(
            Frame(
                timestamp=t,
                device_pose=pose,
                camera_offset=identity,
                gaze=GazeSample(t, direction),
                skeleton=SkeletonSample(t, joints),
            )
        )
    tracks = {}
    for oid, (name, box_fn) in (objects or {}).items():
        boxes = tuple(box_fn(i, i / fps) for i in range(n_frames))
        tracks[oid] = ObjectTrack(oid, name, boxes)
    return SceneStream(
        stream_id=stream_id,
        frames=tuple(frames),
        objects=tracks,
        keysteps=tuple(keysteps),
    )
