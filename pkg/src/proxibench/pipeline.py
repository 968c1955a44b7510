"""End-to-end item generation: scene streams in, benchmark items out.

For each stream the pipeline runs the perception detectors, samples a clip
per anchor event, measures the answer with the geometry tools, and forges
the result into a five-option item (or a chain item). Every item carries a
provenance block naming the stream, the anchor, and the designated frames,
which is enough for :func:`replay_item` to recompute the payload from
scratch and confirm it matches bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .chains import (
    ChainGroundTruth,
    Keystep,
    OrderingGenerator,
    build_candidate_set,
    enumerate_valid_chains,
    extract_keysteps,
    relabel_chains,
)
from .clips import (
    AnchorEvent,
    Category,
    ChainClipPlan,
    ClipSpec,
    last_observed_index,
    sample_chain_clip,
    sample_forecasting_clip,
    sample_planning_clip,
)
from .config import RunConfig
from .errors import ProxibenchError, ReplayMismatch
from .forge import (
    ChainQAItem,
    ProximityKind,
    QAItem,
    TaskOutput,
    angle_bins,
    bin_angle,
    bin_distance,
    distance_bins,
    forge_task_items,
)
from .geometry import (
    Direction8,
    ForwardAxis,
    RigidTransform,
    SignedAngle,
    Vec3,
    bev_signed_angle,
    camera_center,
    discretize_direction,
    euclidean_distance,
)
from .occupancy import build_occupancy, find_path, path_to_steps
from .perception import (
    InteractionEvent,
    action_answer,
    afford_answer,
    detect_fixations,
    detect_interaction,
    gaze_ray_world,
    place_answer,
    resolve_fixated_object,
)
from .schema import SceneStream, stream_digest

DEFAULT_CHAIN_GOAL = "carry out the remaining steps of the activity"


@dataclass(frozen=True)
class SkipRecord:
    """One anchor that could not become an item, and why."""

    stream_id: str
    category: str
    reason: str


@dataclass
class GenerationResult:
    items: list = field(default_factory=list)
    skips: list = field(default_factory=list)

    def by_category(self) -> dict:
        counts: dict = {}
        for item in self.items:
            counts[item.category.value] = counts.get(item.category.value, 0) + 1
        return counts


def _forward(config: RunConfig) -> ForwardAxis:
    return ForwardAxis(config.forward_axis)


def _pose_at(stream: SceneStream, index: int) -> RigidTransform:
    return stream.frames[index].camera_pose()


def _skip(result, stream_id: str, category: Category, exc: Exception) -> None:
    result.skips.append(
        SkipRecord(stream_id, category.value, "{}: {}".format(type(exc).__name__, exc))
    )


def _nearest_object_id(stream: SceneStream, point: Vec3, index: int) -> Optional[str]:
    best = None
    for oid in stream.objects:
        d = euclidean_distance(stream.object_center(oid, index), point)
        if best is None or d < best[0]:
            best = (d, oid)
    return None if best is None else best[1]


def _object_name(stream: SceneStream, oid: Optional[str]) -> str:
    if oid is not None and oid in stream.objects:
        return stream.objects[oid].name
    return "object"


def _provenance(
    stream: SceneStream,
    clip: ClipSpec,
    x_t: int,
    *,
    object_id: Optional[str] = None,
    future_index: Optional[int] = None,
    tool: str = "",
) -> dict:
    return {
        "stream_id": stream.stream_id,
        "stream_digest": stream_digest(stream),
        "anchor_kind": clip.anchor.kind,
        "anchor_t": clip.anchor.timestamp,
        "object_id": object_id,
        "x_t_index": x_t,
        "future_index": future_index,
        "tool": tool,
    }


def _resolved_fixations(stream: SceneStream, config: RunConfig) -> list:
    """Fixation events paired with the object each one lands on."""
    events = detect_fixations(
        [f.gaze for f in stream.frames],
        [(f.timestamp, f.device_pose) for f in stream.frames],
        config.dispersion_deg,
        config.min_fixation_s,
    )
    resolved = []
    for event in events:
        idx = stream.index_at_or_before(event.start)
        if idx < 0:
            continue
        frame = stream.frames[idx]
        ray = gaze_ray_world(frame.gaze, frame.device_pose)
        hit = resolve_fixated_object(ray, stream.boxes_at(idx))
        if hit is not None:
            resolved.append((event, hit[0], idx))
    return resolved


def _intention_outputs(stream, config, result) -> list:
    outputs = []
    try:
        resolved = _resolved_fixations(stream, config)
    except ProxibenchError as exc:
        _skip(result, stream.stream_id, Category.INTENTION, exc)
        return outputs
    fwd = _forward(config)
    for n, (event, oid, onset_idx) in enumerate(resolved):
        try:
            clip = sample_forecasting_clip(
                stream, event, config.forecasting_lead, Category.INTENTION, oid
            )
            x_t = last_observed_index(stream, clip)
            pose = _pose_at(stream, x_t)
            angle = bev_signed_angle(pose, stream.object_center(oid, onset_idx), fwd)
        except ProxibenchError as exc:
            _skip(result, stream.stream_id, Category.INTENTION, exc)
            continue
        name = _object_name(stream, oid)
        for kind, payload in (
            (ProximityKind.APPROXIMATE, angle),
            (ProximityKind.RELATIVE, discretize_direction(angle)),
        ):
            outputs.append(
                TaskOutput(
                    item_id="{}/intention/{}/{}".format(
                        stream.stream_id, kind.value, n
                    ),
                    category=Category.INTENTION,
                    proximity_kind=kind,
                    clip=clip,
                    payload=payload,
                    object_name=name,
                    provenance=_provenance(
                        stream,
                        clip,
                        x_t,
                        object_id=oid,
                        future_index=onset_idx,
                        tool="bev_signed_angle",
                    ),
                )
            )
    return outputs


def _exploration_outputs(stream, config, result) -> list:
    outputs = []
    fwd = _forward(config)
    for n, oid in enumerate(sorted(stream.objects)):
        try:
            clip = sample_planning_clip(
                stream,
                oid,
                config.half_angle_deg,
                config.max_range_m,
                fwd,
                config.min_clip_len,
                config.max_clip_len,
            )
            x_t = last_observed_index(stream, clip)
            pose = _pose_at(stream, x_t)
            grid = build_occupancy(
                list(stream.boxes_at(x_t).values()),
                config.resolution,
                config.margin_cells,
            )
            start = camera_center(pose)
            goal = stream.object_center(oid, x_t)
            path = find_path(
                grid, (start.x, start.y), (goal.x, goal.y), config.turn_penalty
            )
            steps = path_to_steps(path, pose, fwd)
            if not steps:
                raise ProxibenchError("start and goal share a grid cell")
        except ProxibenchError as exc:
            _skip(result, stream.stream_id, Category.EXPLORATION, exc)
            continue
        name = _object_name(stream, oid)
        variant = config.exploration_approx_payload
        approx = (
            steps[0].distance if variant == "first_step" else path.distance_m
        )
        prov = _provenance(
            stream, clip, x_t, object_id=oid, tool="find_path"
        )
        outputs.append(
            TaskOutput(
                item_id="{}/exploration/approximate/{}".format(stream.stream_id, n),
                category=Category.EXPLORATION,
                proximity_kind=ProximityKind.APPROXIMATE,
                clip=clip,
                payload=approx,
                object_name=name,
                variant=variant,
                provenance=prov,
            )
        )
        outputs.append(
            TaskOutput(
                item_id="{}/exploration/relative/{}".format(stream.stream_id, n),
                category=Category.EXPLORATION,
                proximity_kind=ProximityKind.RELATIVE,
                clip=clip,
                payload=steps[0].direction,
                object_name=name,
                provenance=prov,
            )
        )
    return outputs


def _interaction_events(stream: SceneStream, config: RunConfig) -> list:
    events = []
    skeletons = [f.skeleton for f in stream.frames]
    for oid, track_obj in stream.objects.items():
        track = [
            (f.timestamp, stream.object_center(oid, i))
            for i, f in enumerate(stream.frames)
        ]
        try:
            event = detect_interaction(
                oid,
                track,
                skeletons,
                list(track_obj.boxes),
                speed_threshold=config.speed_threshold,
                velocity_window=config.velocity_window_s,
            )
        except ProxibenchError:
            continue
        if event is not None:
            events.append(event)
    events.sort(key=lambda e: (e.onset_timestamp, e.object_id))
    return events


def _exploitation_outputs(stream, config, result) -> list:
    outputs = []
    fwd = _forward(config)
    last = len(stream.frames) - 1

    for n, event in enumerate(_interaction_events(stream, config)):
        oid = event.object_id
        try:
            clip = sample_forecasting_clip(
                stream, event, config.forecasting_lead, Category.EXPLOITATION, oid
            )
            x_t = last_observed_index(stream, clip)
            pose = _pose_at(stream, x_t)
            onset_idx = stream.index_at_or_before(event.onset_timestamp)
            direction, distance = afford_answer(
                pose, stream.objects[oid].boxes[onset_idx], fwd
            )
        except ProxibenchError as exc:
            _skip(result, stream.stream_id, Category.EXPLOITATION, exc)
            continue
        name = _object_name(stream, oid)
        prov = _provenance(
            stream, clip, x_t, object_id=oid, future_index=onset_idx, tool="afford"
        )
        outputs.append(
            TaskOutput(
                item_id="{}/exploitation/approximate/afford/{}".format(
                    stream.stream_id, n
                ),
                category=Category.EXPLOITATION,
                proximity_kind=ProximityKind.APPROXIMATE,
                clip=clip,
                payload=distance,
                object_name=name,
                variant="afford",
                provenance=prov,
            )
        )
        outputs.append(
            TaskOutput(
                item_id="{}/exploitation/relative/afford/{}".format(
                    stream.stream_id, n
                ),
                category=Category.EXPLOITATION,
                proximity_kind=ProximityKind.RELATIVE,
                clip=clip,
                payload=direction,
                object_name=name,
                variant="afford",
                provenance=prov,
            )
        )
        try:
            moved = place_answer(
                pose,
                stream.object_center(oid, onset_idx),
                stream.object_center(oid, last),
                fwd,
            )
        except ProxibenchError as exc:
            _skip(result, stream.stream_id, Category.EXPLOITATION, exc)
            continue
        outputs.append(
            TaskOutput(
                item_id="{}/exploitation/relative/place/{}".format(
                    stream.stream_id, n
                ),
                category=Category.EXPLOITATION,
                proximity_kind=ProximityKind.RELATIVE,
                clip=clip,
                payload=moved,
                object_name=name,
                variant="place",
                provenance=_provenance(
                    stream, clip, x_t, object_id=oid, future_index=last, tool="place"
                ),
            )
        )

    for n, ks in enumerate(stream.keysteps):
        start = ks.start - config.forecasting_lead
        if start < stream.frames[0].timestamp - 1e-9:
            _skip(
                result,
                stream.stream_id,
                Category.EXPLOITATION,
                ProxibenchError(
                    "keystep at {} lacks {} s of history".format(
                        ks.start, config.forecasting_lead
                    )
                ),
            )
            continue
        mid_idx = stream.index_at_or_before((ks.start + ks.end) / 2.0)
        try:
            clip = ClipSpec(
                stream.stream_id,
                start,
                ks.start,
                Category.EXPLOITATION,
                AnchorEvent(ks.start, "keystep"),
            )
            x_t = last_observed_index(stream, clip)
            turn = action_answer(
                _pose_at(stream, x_t), _pose_at(stream, mid_idx), fwd
            )
            located = extract_keysteps(stream, ks.start, ks.end)
            oid = _nearest_object_id(stream, located[0].location, mid_idx)
        except ProxibenchError as exc:
            _skip(result, stream.stream_id, Category.EXPLOITATION, exc)
            continue
        outputs.append(
            TaskOutput(
                item_id="{}/exploitation/approximate/action/{}".format(
                    stream.stream_id, n
                ),
                category=Category.EXPLOITATION,
                proximity_kind=ProximityKind.APPROXIMATE,
                clip=clip,
                payload=turn,
                object_name=_object_name(stream, oid),
                variant="action",
                provenance=_provenance(
                    stream,
                    clip,
                    x_t,
                    object_id=oid,
                    future_index=mid_idx,
                    tool="action",
                ),
            )
        )
    return outputs


def _chain_pool(
    stream: SceneStream,
    future_texts: set,
    others: Sequence[SceneStream],
) -> tuple[list, list]:
    """Distractor keysteps: same-stream leftovers plus other streams' steps."""
    pool: list[Keystep] = []
    sources: list[str] = []
    for src in [stream, *others]:
        if not src.keysteps:
            continue
        lo = min(k.start for k in src.keysteps)
        hi = max(k.end for k in src.keysteps)
        try:
            steps = extract_keysteps(src, lo - 1e-9, hi + 1e-9)
        except ProxibenchError:
            continue
        kept = [s for s in steps if s.text not in future_texts]
        if kept:
            pool.extend(kept)
            sources.append(src.stream_id)
    return pool, sources


def _chain_outputs(
    stream,
    config,
    result,
    others: Sequence[SceneStream],
    goal_text: str,
    generator: Optional[OrderingGenerator],
) -> list:
    fwd = _forward(config)
    try:
        plan: ChainClipPlan = sample_chain_clip(stream)
        anns = sorted(stream.keysteps, key=lambda s: (s.start, s.end))
        future = [anns[i] for i in plan.future_indices]
        true_steps = extract_keysteps(
            stream, future[0].start, future[-1].end + 1e-9
        )
        if len(true_steps) != plan.k:
            raise ProxibenchError(
                "extracted {} keysteps where the plan expects {}".format(
                    len(true_steps), plan.k
                )
            )
        x_t = last_observed_index(stream, plan.clip)
        pose = _pose_at(stream, x_t)
        valid = enumerate_valid_chains(
            true_steps, pose, generator=generator, goal_text=goal_text, forward=fwd
        )
        pool, sources = _chain_pool(
            stream, {s.text for s in true_steps}, others
        )
        seed = "{}|{}".format(config.seed, stream.stream_id)
        candidates, id_map = build_candidate_set(true_steps, pool, seed)
        chains = relabel_chains(valid, id_map)
    except ProxibenchError as exc:
        _skip(result, stream.stream_id, Category.CHAIN_OF_ACTIONS, exc)
        return []
    return [
        TaskOutput(
            item_id="{}/chain_of_actions/0".format(stream.stream_id),
            category=Category.CHAIN_OF_ACTIONS,
            proximity_kind=None,
            clip=plan.clip,
            payload=ChainGroundTruth(goal_text, candidates, chains),
            provenance={
                "stream_id": stream.stream_id,
                "stream_digest": stream_digest(stream),
                "anchor_kind": plan.clip.anchor.kind,
                "anchor_t": plan.clip.anchor.timestamp,
                "x_t_index": x_t,
                "future_indices": list(plan.future_indices),
                "pool_stream_ids": sources,
                "seed": seed,
                "goal_text": goal_text,
                "tool": "chain",
            },
        )
    ]


def run_generation(
    streams: Sequence[SceneStream],
    config: Optional[RunConfig] = None,
    chain_goals: Optional[Mapping[str, str]] = None,
    generator: Optional[OrderingGenerator] = None,
) -> GenerationResult:
    """Generate every item each stream supports; log what was skipped.

    Streams are processed in the given order and every stage is seeded from
    the config, so two runs over the same inputs produce identical files.
    """
    config = config or RunConfig()
    chain_goals = dict(chain_goals or {})
    wanted = set(config.categories)
    result = GenerationResult()
    outputs = []
    for i, stream in enumerate(streams):
        others = [s for j, s in enumerate(streams) if j != i]
        if Category.INTENTION.value in wanted:
            outputs.extend(_intention_outputs(stream, config, result))
        if Category.EXPLORATION.value in wanted:
            outputs.extend(_exploration_outputs(stream, config, result))
        if Category.EXPLOITATION.value in wanted:
            outputs.extend(_exploitation_outputs(stream, config, result))
        if Category.CHAIN_OF_ACTIONS.value in wanted:
            outputs.extend(
                _chain_outputs(
                    stream,
                    config,
                    result,
                    others,
                    chain_goals.get(stream.stream_id, DEFAULT_CHAIN_GOAL),
                    generator,
                )
            )
    items, forge_skips = forge_task_items(
        outputs,
        seed=config.seed,
        dist_bins=distance_bins(config.distance_bin_edges),
        turn_bins=angle_bins(
            config.angle_none_deg, config.angle_slight_deg, config.angle_moderate_deg
        ),
    )
    for item_id, reason in forge_skips:
        result.skips.append(SkipRecord(item_id.split("/")[0], "forge", reason))
    result.items = items
    return result


def _replay_mcq_payload(item: QAItem, stream: SceneStream, config: RunConfig):
    """Recompute the measured value behind an item from its provenance."""
    prov = item.provenance
    fwd = _forward(config)
    x_t = prov["x_t_index"]
    pose = _pose_at(stream, x_t)
    tool = prov["tool"]
    oid = prov.get("object_id")
    if tool == "bev_signed_angle":
        angle = bev_signed_angle(
            pose, stream.object_center(oid, prov["future_index"]), fwd
        )
        if item.proximity_kind is ProximityKind.RELATIVE:
            return discretize_direction(angle)
        return angle
    if tool == "find_path":
        grid = build_occupancy(
            list(stream.boxes_at(x_t).values()),
            config.resolution,
            config.margin_cells,
        )
        start = camera_center(pose)
        goal = stream.object_center(oid, x_t)
        path = find_path(
            grid, (start.x, start.y), (goal.x, goal.y), config.turn_penalty
        )
        steps = path_to_steps(path, pose, fwd)
        if item.proximity_kind is ProximityKind.RELATIVE:
            return steps[0].direction
        if config.exploration_approx_payload == "first_step":
            return steps[0].distance
        return path.distance_m
    if tool == "afford":
        direction, distance = afford_answer(
            pose, stream.objects[oid].boxes[prov["future_index"]], fwd
        )
        if item.proximity_kind is ProximityKind.RELATIVE:
            return direction
        return distance
    if tool == "place":
        onset_idx = stream.index_at_or_before(prov["anchor_t"])
        return place_answer(
            pose,
            stream.object_center(oid, onset_idx),
            stream.object_center(oid, prov["future_index"]),
            fwd,
        )
    if tool == "action":
        return action_answer(pose, _pose_at(stream, prov["future_index"]), fwd)
    raise ReplayMismatch("unknown provenance tool {!r}".format(tool))


def replay_item(
    item,
    streams: Mapping[str, SceneStream],
    config: Optional[RunConfig] = None,
    generator: Optional[OrderingGenerator] = None,
) -> None:
    """Re-run an item's recorded tool chain and demand the same answer.

    Raises ReplayMismatch when the stream is missing, its content hash has
    drifted, or the recomputed payload disagrees with the stored one.
    """
    config = config or RunConfig()
    prov = item.provenance
    sid = prov.get("stream_id")
    if sid not in streams:
        raise ReplayMismatch("provenance references unknown stream {!r}".format(sid))
    stream = streams[sid]
    if stream_digest(stream) != prov.get("stream_digest"):
        raise ReplayMismatch("stream {!r} content differs from provenance".format(sid))

    if isinstance(item, ChainQAItem):
        _replay_chain(item, stream, streams, config, generator)
        return

    payload = _replay_mcq_payload(item, stream, config)
    if isinstance(payload, SignedAngle):
        payload = bin_angle(
            payload,
            angle_bins(
                config.angle_none_deg,
                config.angle_slight_deg,
                config.angle_moderate_deg,
            ),
        )
    elif isinstance(payload, (float, int)) and not isinstance(payload, Direction8):
        payload = bin_distance(
            float(payload), distance_bins(config.distance_bin_edges)
        )
    if payload != item.answer_payload:
        raise ReplayMismatch(
            "recomputed payload {!r} != stored {!r}".format(
                payload, item.answer_payload
            )
        )


def _replay_chain(item, stream, streams, config, generator) -> None:
    prov = item.provenance
    fwd = _forward(config)
    anns = sorted(stream.keysteps, key=lambda s: (s.start, s.end))
    future = [anns[i] for i in prov["future_indices"]]
    true_steps = extract_keysteps(stream, future[0].start, future[-1].end + 1e-9)
    pose = _pose_at(stream, prov["x_t_index"])
    valid = enumerate_valid_chains(
        true_steps,
        pose,
        generator=generator,
        goal_text=prov["goal_text"],
        forward=fwd,
    )
    others = [
        streams[sid]
        for sid in prov["pool_stream_ids"]
        if sid != stream.stream_id and sid in streams
    ]
    missing = [
        sid for sid in prov["pool_stream_ids"]
        if sid != stream.stream_id and sid not in streams
    ]
    if missing:
        raise ReplayMismatch("pool streams {} not supplied".format(missing))
    pool, _ = _chain_pool(stream, {s.text for s in true_steps}, others)
    candidates, id_map = build_candidate_set(true_steps, pool, prov["seed"])
    chains = relabel_chains(valid, id_map)
    got = (tuple(candidates), tuple(chains))
    want = (item.ground_truth.candidate_set, item.ground_truth.valid_chains)
    if got != want:
        raise ReplayMismatch("recomputed chain ground truth differs")
