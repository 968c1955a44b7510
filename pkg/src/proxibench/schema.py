"""Scene stream model and its line-delimited metadata serialization.

A stream is a fixed 30ish-Hz frame grid (device pose, camera offset, gaze,
skeleton per frame), per-object box tracks aligned to that grid, and keystep
annotations. Files are JSON-lines with a leading comment line; every record
carries a ``type`` discriminator and is validated against the bundled JSON
schema plus semantic checks (monotone timestamps, orthonormal poses, aligned
track lengths) that name the offending frame or object.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Optional

import jsonschema
import numpy as np

from .errors import NonMonotoneTimestamps, OrthonormalityViolation, SchemaViolation
from .geometry import Box3D, RigidTransform, Vec3, box_center, compose
from .perception import GazeSample, SkeletonSample

STREAM_HEADER_COMMENT = "# proxibench scene stream v1"


@dataclass(frozen=True)
class Frame:
    """One time slice: where the device is and what the wearer senses."""

    timestamp: float
    device_pose: RigidTransform  # world-from-device
    camera_offset: RigidTransform  # device-from-camera
    gaze: GazeSample
    skeleton: SkeletonSample

    def camera_pose(self) -> RigidTransform:
        """World-from-camera pose (device pose composed with the offset)."""
        return compose(self.device_pose, self.camera_offset)


@dataclass(frozen=True)
class ObjectTrack:
    object_id: str
    name: str
    boxes: tuple[Box3D, ...]  # one per frame


@dataclass(frozen=True)
class KeystepAnnotation:
    start: float
    end: float
    text: str
    hands: tuple[str, ...] = ("left_hand", "right_hand")

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("keystep interval must have positive duration")
        if not self.text:
            raise ValueError("keystep text must be non-empty")


@dataclass(frozen=True)
class SceneStream:
    stream_id: str
    frames: tuple[Frame, ...]
    objects: Mapping[str, ObjectTrack] = field(default_factory=dict)
    keysteps: tuple[KeystepAnnotation, ...] = ()

    @property
    def timestamps(self) -> tuple[float, ...]:
        return tuple(f.timestamp for f in self.frames)

    @property
    def frame_period(self) -> float:
        if len(self.frames) < 2:
            return 0.0
        ts = self.timestamps
        return (ts[-1] - ts[0]) / (len(ts) - 1)

    def index_at_or_before(self, t: float) -> int:
        """Index of the last frame with timestamp <= t; -1 if none."""
        idx = -1
        for i, f in enumerate(self.frames):
            if f.timestamp <= t:
                idx = i
            else:
                break
        return idx

    def last_index_before(self, t: float) -> int:
        """Index of the last frame with timestamp strictly < t; -1 if none."""
        idx = -1
        for i, f in enumerate(self.frames):
            if f.timestamp < t:
                idx = i
            else:
                break
        return idx

    def indices_in(self, start: float, end: float) -> list[int]:
        """Frame indices with start <= timestamp < end."""
        return [
            i for i, f in enumerate(self.frames) if start <= f.timestamp < end
        ]

    def boxes_at(self, frame_index: int) -> dict[str, Box3D]:
        return {
            oid: track.boxes[frame_index] for oid, track in self.objects.items()
        }

    def object_center(self, object_id: str, frame_index: int) -> Vec3:
        return box_center(self.objects[object_id].boxes[frame_index])


def _pose_to_json(pose: RigidTransform) -> dict:
    return {
        "rotation": [[float(v) for v in row] for row in pose.rotation],
        "translation": [pose.translation.x, pose.translation.y, pose.translation.z],
    }


def _vec_to_json(v: Vec3) -> list[float]:
    return [v.x, v.y, v.z]


def stream_to_records(stream: SceneStream) -> Iterable[dict]:
    yield {
        "type": "header",
        "stream_id": stream.stream_id,
        "frame_count": len(stream.frames),
    }
    for f in stream.frames:
        yield {
            "type": "frame",
            "t": f.timestamp,
            "device_pose": _pose_to_json(f.device_pose),
            "camera_offset": _pose_to_json(f.camera_offset),
            "gaze": {
                "direction": _vec_to_json(f.gaze.ray_dir_device),
                "depth": f.gaze.depth,
            },
            "skeleton": {
                "joints": {
                    name: _vec_to_json(p) for name, p in f.skeleton.joints.items()
                }
            },
        }
    for track in stream.objects.values():
        yield {
            "type": "object",
            "object_id": track.object_id,
            "name": track.name,
            "boxes": [
                [_vec_to_json(b.min_corner), _vec_to_json(b.max_corner)]
                for b in track.boxes
            ],
        }
    for k in stream.keysteps:
        yield {
            "type": "keystep",
            "start": k.start,
            "end": k.end,
            "text": k.text,
            "hands": list(k.hands),
        }


def write_stream(stream: SceneStream, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(STREAM_HEADER_COMMENT + "\n")
        for record in stream_to_records(stream):
            fh.write(json.dumps(record, separators=(", ", ": ")) + "\n")


def stream_digest(stream: SceneStream) -> str:
    """Stable content hash of the serialized stream."""
    h = hashlib.sha256()
    for record in stream_to_records(stream):
        h.update(json.dumps(record, separators=(",", ":")).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@lru_cache(maxsize=None)
def _record_schema() -> dict:
    text = (
        resources.files("proxibench") / "schemas" / "scene_stream.schema.json"
    ).read_text(encoding="utf-8")
    return json.loads(text)


def _validate_record(record: dict, line_no: int) -> None:
    try:
        jsonschema.validate(record, _record_schema())
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(
            "line {}: {}".format(line_no, exc.message)
        ) from exc


def _pose_from_json(obj: dict, where: str) -> RigidTransform:
    rot = np.asarray(obj["rotation"], dtype=np.float64)
    t = obj["translation"]
    try:
        return RigidTransform(rot, Vec3(float(t[0]), float(t[1]), float(t[2])))
    except OrthonormalityViolation as exc:
        raise SchemaViolation("{}: {}".format(where, exc)) from exc


def read_stream(path) -> SceneStream:
    """Parse and validate a scene stream file.

    Raises SchemaViolation with the offending line/frame/object named, and
    NonMonotoneTimestamps when the frame grid is not strictly increasing.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation("line {}: not valid JSON".format(line_no)) from exc
            _validate_record(record, line_no)
            records.append((line_no, record))

    if not records or records[0][1]["type"] != "header":
        raise SchemaViolation("first record must be the stream header")
    header = records[0][1]

    frames: list[Frame] = []
    objects: dict[str, ObjectTrack] = {}
    keysteps: list[KeystepAnnotation] = []
    for line_no, record in records[1:]:
        kind = record["type"]
        if kind == "header":
            raise SchemaViolation("line {}: duplicate header".format(line_no))
        if kind == "frame":
            idx = len(frames)
            where = "frame {}".format(idx)
            t = float(record["t"])
            device_pose = _pose_from_json(record["device_pose"], where + " device_pose")
            camera_offset = _pose_from_json(record["camera_offset"], where + " camera_offset")
            g = record["gaze"]
            try:
                gaze = GazeSample(
                    t,
                    Vec3(*[float(v) for v in g["direction"]]),
                    None if g.get("depth") is None else float(g["depth"]),
                )
                skeleton = SkeletonSample(
                    t,
                    {
                        name: Vec3(*[float(v) for v in p])
                        for name, p in record["skeleton"]["joints"].items()
                    },
                )
            except ValueError as exc:
                raise SchemaViolation("{}: {}".format(where, exc)) from exc
            frames.append(Frame(t, device_pose, camera_offset, gaze, skeleton))
        elif kind == "object":
            oid = record["object_id"]
            if oid in objects:
                raise SchemaViolation("object {}: duplicate track".format(oid))
            boxes = []
            for i, (lo, hi) in enumerate(record["boxes"]):
                try:
                    boxes.append(
                        Box3D(
                            Vec3(*[float(v) for v in lo]),
                            Vec3(*[float(v) for v in hi]),
                        )
                    )
                except ValueError as exc:
                    raise SchemaViolation(
                        "object {} frame {}: {}".format(oid, i, exc)
                    ) from exc
            objects[oid] = ObjectTrack(oid, record["name"], tuple(boxes))
        elif kind == "keystep":
            try:
                keysteps.append(
                    KeystepAnnotation(
                        float(record["start"]),
                        float(record["end"]),
                        record["text"],
                        tuple(record.get("hands", ("left_hand", "right_hand"))),
                    )
                )
            except ValueError as exc:
                raise SchemaViolation("keystep: {}".format(exc)) from exc
        else:  # pragma: no cover - schema blocks unknown types
            raise SchemaViolation("line {}: unknown record type {!r}".format(line_no, kind))

    if len(frames) != header["frame_count"]:
        raise SchemaViolation(
            "header claims {} frames, file has {}".format(
                header["frame_count"], len(frames)
            )
        )
    for i in range(1, len(frames)):
        if not frames[i].timestamp > frames[i - 1].timestamp:
            raise NonMonotoneTimestamps(
                "frame {} timestamp {} does not increase past frame {} ({})".format(
                    i, frames[i].timestamp, i - 1, frames[i - 1].timestamp
                )
            )
    for oid, track in objects.items():
        if len(track.boxes) != len(frames):
            raise SchemaViolation(
                "object {}: {} boxes for {} frames".format(
                    oid, len(track.boxes), len(frames)
                )
            )
    for k in keysteps:
        if frames and not (
            frames[0].timestamp <= k.start and k.end <= frames[-1].timestamp + 1e-9
        ):
            raise SchemaViolation(
                "keystep [{}, {}] outside the frame grid".format(k.start, k.end)
            )

    return SceneStream(
        stream_id=header["stream_id"],
        frames=tuple(frames),
        objects=objects,
        keysteps=tuple(keysteps),
    )
