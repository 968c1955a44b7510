"""Selecting the observable segment of a stream for each question family.

Forecasting questions (next fixation, next interaction) get the fixed-length
window ending just before the anchor event. Search questions get the latest
window whose goal was seen earlier but is out of view at the final frame.
Chain questions get the densest keystep neighborhood that leaves one step of
goal evidence behind the final frame and 3-5 steps ahead of it.

Clip windows are half-open ``[start, end)``: the final observable frame x_T is
the last frame strictly before ``end``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

from .errors import (
    InsufficientHistory,
    NoValidWindow,
    TooFewKeysteps,
)
from .geometry import ForwardAxis, box_center
from .perception import (
    DEFAULT_HALF_ANGLE_DEG,
    DEFAULT_MAX_RANGE_M,
    FixationEvent,
    InteractionEvent,
    is_visible,
)
from .schema import KeystepAnnotation, SceneStream

CHAIN_MIN_FUTURE = 3
CHAIN_MAX_FUTURE = 5


class Category(Enum):
    INTENTION = "intention"
    EXPLORATION = "exploration"
    EXPLOITATION = "exploitation"
    CHAIN_OF_ACTIONS = "chain_of_actions"


@dataclass(frozen=True)
class AnchorEvent:
    timestamp: float
    kind: str  # "fixation" | "interaction" | "goal_hidden" | "keystep"


@dataclass(frozen=True)
class ClipSpec:
    stream_id: str
    start: float
    end: float  # exclusive
    category: Category
    anchor: AnchorEvent
    goal_object_id: Optional[str] = None

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError("clip must satisfy start < end")

    @property
    def duration(self) -> float:
        return self.end - self.start


def last_observed_index(stream: SceneStream, clip: ClipSpec) -> int:
    """Index of x_T: the last stream frame strictly inside the clip."""
    idx = stream.last_index_before(clip.end)
    if idx < 0 or stream.frames[idx].timestamp < clip.start:
        raise NoValidWindow("clip [{}, {}) contains no frames".format(clip.start, clip.end))
    return idx


def sample_forecasting_clip(
    stream: SceneStream,
    event: Union[FixationEvent, InteractionEvent],
    lead: float,
    category: Category,
    goal_object_id: Optional[str] = None,
) -> ClipSpec:
    """The ``lead`` seconds of context ending just before an anchor event.

    The event's onset is excluded, so the final observable frame strictly
    precedes the event. Raises InsufficientHistory when the stream starts
    too late to supply the full lead.
    """
    if isinstance(event, FixationEvent):
        onset = event.start
        kind = "fixation"
        goal = goal_object_id if goal_object_id is not None else event.object_id
    else:
        onset = event.onset_timestamp
        kind = "interaction"
        goal = goal_object_id if goal_object_id is not None else event.object_id
    start = onset - lead
    if not stream.frames or start < stream.frames[0].timestamp - 1e-9:
        raise InsufficientHistory(
            "event at {} s needs {} s of context".format(onset, lead)
        )
    return ClipSpec(
        stream_id=stream.stream_id,
        start=start,
        end=onset,
        category=category,
        anchor=AnchorEvent(onset, kind),
        goal_object_id=goal,
    )


def sample_planning_clip(
    stream: SceneStream,
    goal_object_id: str,
    half_angle: float = DEFAULT_HALF_ANGLE_DEG,
    max_range: float = DEFAULT_MAX_RANGE_M,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
    min_len: float = 2.0,
    max_len: float = 60.0,
) -> ClipSpec:
    """Latest window where the goal was seen earlier but is hidden at x_T.

    Scans candidate final frames from the end of the stream backwards; a
    frame qualifies when the goal fails the visibility test there but passes
    it at some strictly earlier frame of the window. Raises NoValidWindow
    when the goal is always or never visible in any admissible window.
    """
    if goal_object_id not in stream.objects:
        raise NoValidWindow("stream has no object {!r}".format(goal_object_id))
    n = len(stream.frames)
    if n < 2:
        raise NoValidWindow("stream too short")
    period = stream.frame_period
    ts = stream.timestamps
    visible = []
    for i, frame in enumerate(stream.frames):
        center = box_center(stream.objects[goal_object_id].boxes[i])
        visible.append(
            is_visible(frame.camera_pose(), center, half_angle, max_range, forward)
        )

    for e in range(n - 1, 0, -1):
        if visible[e]:
            continue
        end_t = ts[e] + period
        start_t = max(ts[0], end_t - max_len)
        if end_t - start_t < min_len - 1e-9:
            continue
        earlier = [
            i for i in range(e) if ts[i] >= start_t - 1e-9 and visible[i]
        ]
        if not earlier:
            continue
        return ClipSpec(
            stream_id=stream.stream_id,
            start=start_t,
            end=end_t,
            category=Category.EXPLORATION,
            anchor=AnchorEvent(ts[e], "goal_hidden"),
            goal_object_id=goal_object_id,
        )
    raise NoValidWindow(
        "no window has {!r} visible earlier but hidden at the final frame".format(
            goal_object_id
        )
    )


@dataclass(frozen=True)
class ChainClipPlan:
    """A chain window: which keysteps are evidence and which are the future."""

    clip: ClipSpec
    past_indices: tuple[int, ...]
    future_indices: tuple[int, ...]
    density_per_min: float

    @property
    def k(self) -> int:
        return len(self.future_indices)


def sample_chain_clip(
    stream: SceneStream,
    keysteps: Optional[Sequence[KeystepAnnotation]] = None,
) -> ChainClipPlan:
    """Densest placement leaving >= 1 past keystep and 3-5 future keysteps.

    Every (past-count, boundary, future-count) placement is scored by
    keysteps per minute across its span; the best density wins, then the
    larger step count, then the earlier boundary. The clip ends at the first
    future keystep's onset, so x_T strictly precedes the predicted chain.
    Raises TooFewKeysteps below the 1 + 3 minimum.
    """
    steps = sorted(
        stream.keysteps if keysteps is None else keysteps,
        key=lambda s: (s.start, s.end),
    )
    n = len(steps)
    if n < 1 + CHAIN_MIN_FUTURE:
        raise TooFewKeysteps(
            "need at least {} keysteps, have {}".format(1 + CHAIN_MIN_FUTURE, n)
        )

    best = None  # (density, total, -boundary, placement)
    for boundary in range(1, n - CHAIN_MIN_FUTURE + 1):
        for k in range(CHAIN_MIN_FUTURE, min(CHAIN_MAX_FUTURE, n - boundary) + 1):
            for past in range(1, boundary + 1):
                first = boundary - past
                last = boundary + k - 1
                span = steps[last].end - steps[first].start
                if span <= 0:
                    continue
                if steps[first].start >= steps[boundary].start:
                    continue  # clip would be empty
                total = past + k
                density = total / (span / 60.0)
                key = (density, total, -boundary)
                if best is None or key > best[0]:
                    best = (key, (first, boundary, k))
    if best is None:
        raise TooFewKeysteps("keysteps overlap too much to place a boundary")

    (density, _total, _), (first, boundary, k) = best
    clip = ClipSpec(
        stream_id=stream.stream_id,
        start=steps[first].start,
        end=steps[boundary].start,
        category=Category.CHAIN_OF_ACTIONS,
        anchor=AnchorEvent(steps[boundary].start, "keystep"),
    )
    return ChainClipPlan(
        clip=clip,
        past_indices=tuple(range(first, boundary)),
        future_indices=tuple(range(boundary, boundary + k)),
        density_per_min=density,
    )
