"""Gaze rays, fixations, interactions, visibility, and interaction answers."""

import math

import numpy as np
import pytest

from conftest import yaw_pose
from proxibench import oracles
from proxibench.errors import DegenerateForward, DegenerateTarget, InsufficientSamples
from proxibench.geometry import (
    Box3D,
    Direction8,
    RigidTransform,
    Vec3,
    compose,
)
from proxibench.perception import (
    BoxFace,
    FixationEvent,
    GazeSample,
    InteractionEvidence,
    InteractionKind,
    Ray,
    SkeletonSample,
    action_answer,
    afford_answer,
    detect_fixations,
    detect_interaction,
    gaze_ray_world,
    is_visible,
    place_answer,
    ray_box_intersect,
    resolve_fixated_object,
)

FPS = 30.0


def planar_dir(deg):
    return Vec3(math.cos(math.radians(deg)), math.sin(math.radians(deg)), 0.0)


class TestGazeRay:
    def test_identity_pose(self):
        s = GazeSample(0.0, Vec3(0, 0, 1))
        ray = gaze_ray_world(s, RigidTransform.identity())
        assert ray.origin == Vec3(0, 0, 0)
        assert ray.direction == Vec3(0, 0, 1)

    def test_rotation_applies(self):
        s = GazeSample(0.0, Vec3(0, 0, 1))
        pose = yaw_pose(0.0, 0.0, 90.0)  # camera +Z column points along +Y
        ray = gaze_ray_world(s, pose)
        assert ray.direction.x == pytest.approx(0.0, abs=1e-12)
        assert ray.direction.y == pytest.approx(1.0, abs=1e-12)
        assert ray.direction.z == pytest.approx(0.0, abs=1e-12)

    def test_origin_is_device_position(self):
        s = GazeSample(0.0, Vec3(1, 0, 0))
        pose = RigidTransform(np.eye(3), Vec3(1, 2, 3))
        assert gaze_ray_world(s, pose).origin == Vec3(1, 2, 3)

    def test_rejects_non_unit_direction(self):
        with pytest.raises(ValueError):
            GazeSample(0.0, Vec3(0, 0, 2))

    def test_rejects_non_positive_depth(self):
        with pytest.raises(ValueError):
            GazeSample(0.0, Vec3(0, 0, 1), depth=0.0)


class TestRayBox:
    def test_axis_aligned_hit(self):
        ray = Ray(Vec3(0, 0, 0), Vec3(1, 0, 0))
        box = Box3D(Vec3(2, -1, -1), Vec3(3, 1, 1))
        hit = ray_box_intersect(ray, box)
        assert hit is not None
        assert hit.t == pytest.approx(2.0, abs=1e-12)
        assert hit.point == Vec3(2, 0, 0)
        assert hit.face is BoxFace.MINUS_X

    def test_miss(self):
        ray = Ray(Vec3(0, 0, 0), Vec3(0, 0, 1))
        box = Box3D(Vec3(2, -1, -1), Vec3(3, 1, 1))
        assert ray_box_intersect(ray, box) is None

    def test_origin_inside_reports_interior(self):
        ray = Ray(Vec3(2.5, 0, 0), Vec3(1, 0, 0))
        box = Box3D(Vec3(2, -1, -1), Vec3(3, 1, 1))
        hit = ray_box_intersect(ray, box)
        assert hit is not None
        assert hit.t == 0.0
        assert hit.face is BoxFace.INTERIOR
        assert hit.point == ray.origin

    def test_behind_ray_misses(self):
        ray = Ray(Vec3(5, 0, 0), Vec3(1, 0, 0))
        box = Box3D(Vec3(2, -1, -1), Vec3(3, 1, 1))
        assert ray_box_intersect(ray, box) is None

    def test_matches_marching_oracle(self):
        rng = np.random.default_rng(42)
        hits = 0
        for _ in range(200):
            lo = rng.uniform(-2.0, 2.0, size=3)
            size = rng.uniform(0.01, 1.5, size=3)
            box = Box3D(Vec3(*lo), Vec3(*(lo + size)))
            origin = Vec3(*rng.uniform(-4.0, 4.0, size=3))
            aim = lo + rng.uniform(0.0, 1.0, size=3) * size
            d = Vec3(*(aim - np.array([origin.x, origin.y, origin.z])))
            if d.norm() < 1e-6:
                continue
            ray = Ray(origin, d.normalized())
            got = ray_box_intersect(ray, box)
            want = oracles.ray_march_hit(origin, d, box, step=1e-4, max_t=15.0)
            if want is None:
                assert got is None
                continue
            hits += 1
            assert got is not None
            t_want, face_want = want
            assert abs(got.t - t_want) <= 1e-3
            assert got.face.value == face_want
        assert hits > 150  # the sampler aims at the box, so most rays hit


class TestResolveFixation:
    def setup_method(self):
        self.near = Box3D(Vec3(2, -0.5, -0.5), Vec3(3, 0.5, 0.5))
        self.far = Box3D(Vec3(5, -0.5, -0.5), Vec3(6, 0.5, 0.5))
        self.ray = Ray(Vec3(0, 0, 0), Vec3(1, 0, 0))

    def test_nearest_visible_wins(self):
        got = resolve_fixated_object(self.ray, {"near": self.near, "far": self.far})
        assert got is not None and got[0] == "near"

    def test_invisible_near_falls_back_to_far(self):
        got = resolve_fixated_object(
            self.ray,
            {"near": self.near, "far": self.far},
            visible=lambda oid: oid != "near",
        )
        assert got is not None and got[0] == "far"
        assert got[1].x == pytest.approx(5.0, abs=1e-12)

    def test_no_intersection_returns_none(self):
        up = Ray(Vec3(0, 0, 0), Vec3(0, 0, 1))
        assert resolve_fixated_object(up, {"near": self.near}) is None

    def test_minimal_t_property_against_filter_and_min(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            boxes = {}
            for i in range(6):
                lo = rng.uniform(-3, 3, size=3)
                size = rng.uniform(0.2, 1.0, size=3)
                boxes["o{}".format(i)] = Box3D(Vec3(*lo), Vec3(*(lo + size)))
            visible_set = {oid for oid in boxes if rng.random() > 0.3}
            ray = Ray(
                Vec3(*rng.uniform(-4, 4, size=3)),
                Vec3(*rng.normal(size=3)).normalized(),
            )
            got = resolve_fixated_object(ray, boxes, visible=lambda o: o in visible_set)
            toks = []
            for oid, box in boxes.items():
                if oid not in visible_set:
                    continue
                hit = ray_box_intersect(ray, box)
                if hit is not None:
                    toks.append((hit.t, oid))
            if not toks:
                assert got is None
            else:
                assert got is not None
                assert got[0] == min(toks)[1]


def constant_gaze(deg, t0, t1):
    out = []
    k = int(round(t0 * FPS))
    while k / FPS <= t1 + 1e-9:
        if k / FPS >= t0 - 1e-9:
            out.append(GazeSample(k / FPS, planar_dir(deg)))
        k += 1
    return out


def fixation_windows_oracle(dirs, times, dispersion_deg, min_duration):
    """Greedy maximal windows recomputed with full pairwise dispersion."""

    def spread(i, j):
        worst = 0.0
        for a in range(i, j + 1):
            for b in range(a + 1, j + 1):
                dot = max(-1.0, min(1.0, dirs[a].dot(dirs[b])))
                worst = max(worst, math.degrees(math.acos(dot)))
        return worst

    events = []
    i, n = 0, len(dirs)
    while i < n:
        j = i
        while j + 1 < n and spread(i, j + 1) <= dispersion_deg:
            j += 1
        if times[j] - times[i] >= min_duration:
            events.append((times[i], times[j]))
            i = j + 1
        else:
            i += 1
    return events


class TestFixations:
    poses = [(0.0, RigidTransform.identity())]

    def test_constant_gaze_yields_one_fixation(self):
        gaze = constant_gaze(0.0, 0.0, 0.4)
        events = detect_fixations(gaze, self.poses)
        assert len(events) == 1
        assert events[0].start == pytest.approx(0.0)
        assert events[0].end == pytest.approx(0.4, abs=1e-6)
        assert events[0].duration >= 0.3

    def test_sweeping_gaze_yields_none(self):
        gaze = [
            GazeSample(k / FPS, planar_dir(30.0 * k / 12.0)) for k in range(13)
        ]
        assert detect_fixations(gaze, self.poses) == []

    def test_two_windows_with_saccade(self):
        gaze = (
            [GazeSample(k / FPS, planar_dir(0.0)) for k in range(13)]
            + [GazeSample(13 / FPS, planar_dir(15.0)), GazeSample(14 / FPS, planar_dir(30.0))]
            + [GazeSample(k / FPS, planar_dir(45.0)) for k in range(15, 28)]
        )
        events = detect_fixations(gaze, self.poses)
        assert len(events) == 2
        assert events[0].start == pytest.approx(0.0)
        assert events[0].end == pytest.approx(12 / FPS)
        assert events[1].start == pytest.approx(15 / FPS)
        assert events[1].end == pytest.approx(27 / FPS)

    def test_matches_exhaustive_window_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            # Piecewise-stable random gaze: stable spells with saccades between.
            angles = []
            t = 0
            level = rng.uniform(0, 360)
            while len(angles) < 60:
                run = int(rng.integers(3, 15))
                angles.extend([level + rng.uniform(-0.4, 0.4) for _ in range(run)])
                level += rng.uniform(15, 90)
                t += 1
            gaze = [GazeSample(k / FPS, planar_dir(a)) for k, a in enumerate(angles[:60])]
            events = detect_fixations(gaze, self.poses)
            dirs = [gaze_ray_world(s, RigidTransform.identity()).direction for s in gaze]
            want = fixation_windows_oracle(
                dirs, [s.timestamp for s in gaze], 2.0, 0.3
            )
            assert [(e.start, e.end) for e in events] == want
            # Disjoint, sorted, each window long enough.
            for a, b in zip(events, events[1:]):
                assert a.end < b.start
            assert all(e.duration >= 0.3 for e in events)

    def test_short_stream_raises(self):
        gaze = constant_gaze(0.0, 0.0, 0.2)
        with pytest.raises(InsufficientSamples):
            detect_fixations(gaze, self.poses)

    def test_pose_stream_rotation_cancels_for_fixed_world_target(self):
        # The wearer turns while the gaze stays locked on a world point:
        # device-frame directions change, world-frame dispersion stays zero.
        target = Vec3(2.0, 2.0, 0.0)
        gaze, poses = [], []
        for k in range(13):
            t = k / FPS
            pose = yaw_pose(0.0, 0.0, 10.0 * k)
            rel = target - pose.translation
            device_dir = pose.inverse().rotate(rel).normalized()
            gaze.append(GazeSample(t, device_dir))
            poses.append((t, pose))
        events = detect_fixations(gaze, poses)
        assert len(events) == 1


class TestInteractions:
    box = Box3D(Vec3(0, 0, 0), Vec3(1, 1, 1))

    @staticmethod
    def track_from_positions(positions, dt=1.0 / FPS):
        return [(k * dt, p) for k, p in enumerate(positions)]

    def test_fast_object_triggers_velocity(self):
        track = [(0.0, Vec3(0.5, 0.5, 0.5)), (1.0, Vec3(0.6, 0.5, 0.5))]
        event = detect_interaction("cup", track, [], [self.box, self.box])
        assert event is not None
        assert event.evidence is InteractionEvidence.VELOCITY
        assert event.onset_timestamp == 1.0
        assert event.object_id == "cup"

    def test_slow_object_no_event(self):
        track = [(0.0, Vec3(0.5, 0.5, 0.5)), (1.0, Vec3(0.52, 0.5, 0.5))]
        assert detect_interaction("cup", track, [], [self.box, self.box]) is None

    def test_steady_speed_fires_at_window_end(self):
        n = 31
        track = [
            (k / FPS, Vec3(0.5 + 0.10 * k / FPS, 0.5, 0.5)) for k in range(n)
        ]
        event = detect_interaction("cup", track, [], [self.box] * n)
        assert event is not None
        assert event.evidence is InteractionEvidence.VELOCITY
        assert event.onset_timestamp == pytest.approx(0.5, abs=1.5 / FPS)

    def test_hand_containment(self):
        n = 121
        track = [(k / FPS, Vec3(0.5, 0.5, 0.5)) for k in range(n)]
        skeletons = [
            SkeletonSample(3.0, {"left_hand": Vec3(5, 5, 5)}),
            SkeletonSample(3.2, {"left_hand": Vec3(0.5, 0.5, 0.5)}),
        ]
        event = detect_interaction("cup", track, skeletons, [self.box] * n)
        assert event is not None
        assert event.evidence is InteractionEvidence.HAND_CONTAINMENT
        assert event.onset_timestamp == 3.2

    def test_velocity_wins_tie(self):
        track = [(0.0, Vec3(0.5, 0.5, 0.5)), (1.0, Vec3(0.7, 0.5, 0.5))]
        skeletons = [SkeletonSample(1.0, {"right_hand": Vec3(0.5, 0.5, 0.5)})]
        event = detect_interaction("cup", track, skeletons, [self.box, self.box])
        assert event is not None
        assert event.evidence is InteractionEvidence.VELOCITY

    def test_kind_passthrough(self):
        track = [(0.0, Vec3(0.5, 0.5, 0.5)), (1.0, Vec3(0.7, 0.5, 0.5))]
        event = detect_interaction(
            "cup", track, [], [self.box, self.box], kind=InteractionKind.PLACE
        )
        assert event is not None and event.kind is InteractionKind.PLACE

    def test_never_fires_below_threshold_without_hands(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = 40
            pos = [Vec3(0.5, 0.5, 0.5)]
            for _ in range(n - 1):
                step = rng.normal(size=3)
                step = step / np.linalg.norm(step) * rng.uniform(0, 0.049 / FPS)
                prev = pos[-1]
                pos.append(Vec3(prev.x + step[0], prev.y + step[1], prev.z + step[2]))
            track = self.track_from_positions(pos)
            skeletons = [
                SkeletonSample(k / FPS, {"left_hand": Vec3(9, 9, 9)}) for k in range(n)
            ]
            big_box = Box3D(Vec3(-1, -1, -1), Vec3(2, 2, 2))
            assert (
                detect_interaction("cup", track, skeletons, [big_box] * n) is None
            )

    def test_too_few_samples(self):
        with pytest.raises(InsufficientSamples):
            detect_interaction("cup", [(0.0, Vec3(0, 0, 0))], [], [self.box])


class TestVisibility:
    def test_dead_ahead_visible(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        assert is_visible(pose, Vec3(0.0, 2.0, 0.0), 75.0, 8.0)

    def test_behind_not_visible(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        assert not is_visible(pose, Vec3(0.0, -2.0, 0.0), 75.0, 8.0)

    def test_76_degrees_off_axis_not_visible(self):
        pose = yaw_pose(0.0, 0.0, 0.0)  # facing +X
        t = Vec3(2.0 * math.cos(math.radians(76)), 2.0 * math.sin(math.radians(76)), 0.0)
        assert not is_visible(pose, t, 75.0, 8.0)
        t_in = Vec3(2.0 * math.cos(math.radians(74)), 2.0 * math.sin(math.radians(74)), 0.0)
        assert is_visible(pose, t_in, 75.0, 8.0)

    def test_out_of_range_not_visible(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        assert not is_visible(pose, Vec3(0.0, 9.0, 0.0), 75.0, 8.0)

    def test_degenerate_target_raises(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        with pytest.raises(DegenerateTarget):
            is_visible(pose, Vec3(0.0, 0.0, 0.0), 75.0, 8.0)

    def test_invalid_parameters(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        with pytest.raises(ValueError):
            is_visible(pose, Vec3(1, 1, 0), 0.0, 8.0)
        with pytest.raises(ValueError):
            is_visible(pose, Vec3(1, 1, 0), 75.0, 0.0)

    def test_yaw_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            yaw0 = rng.uniform(0, 360)
            pose = yaw_pose(rng.uniform(-2, 2), rng.uniform(-2, 2), yaw0, z=1.5)
            target = Vec3(*rng.uniform(-6, 6, size=2), rng.uniform(0, 2))
            extra = rng.uniform(0, 360)
            spin = RigidTransform.from_yaw_deg(extra)
            pose2 = compose(spin, pose)
            target2 = spin.apply(target)
            try:
                a = is_visible(pose, target, 75.0, 8.0)
                b = is_visible(pose2, target2, 75.0, 8.0)
            except DegenerateTarget:
                continue
            assert a == b


class TestInteractionAnswers:
    def test_afford_dead_ahead(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        box = Box3D(Vec3(-0.25, 1.75, -0.25), Vec3(0.25, 2.25, 0.25))
        direction, dist = afford_answer(pose, box)
        assert direction is Direction8.FRONT
        assert dist == 2.0

    def test_afford_uses_full_3d_distance(self):
        pose = yaw_pose(0.0, 0.0, 90.0)
        box = Box3D(Vec3(-0.25, 2.75, 3.75), Vec3(0.25, 3.25, 4.25))
        direction, dist = afford_answer(pose, box)
        assert direction is Direction8.FRONT
        assert dist == pytest.approx(5.0, abs=1e-12)  # 3-4-5 triangle

    def test_place_front_left(self):
        pose = yaw_pose(0.0, 0.0, 90.0)  # facing +Y; left is -X
        now = Vec3(-1.0, 2.0, 0.5)
        future = Vec3(-1.5, 2.5, 0.5)  # +0.5 forward, +0.5 left
        assert place_answer(pose, now, future) is Direction8.FRONT_LEFT

    def test_action_right_turn_is_negative(self):
        pose_now = yaw_pose(0.0, 0.0, 90.0)
        pose_future = yaw_pose(0.0, 0.0, 0.0)
        angle = action_answer(pose_now, pose_future)
        assert angle.degrees == pytest.approx(-90.0, abs=1e-9)

    def test_action_left_turn_is_positive(self):
        angle = action_answer(yaw_pose(0, 0, 10.0), yaw_pose(0, 0, 55.0))
        assert angle.degrees == pytest.approx(45.0, abs=1e-9)

    def test_action_degenerate_forward(self):
        down = RigidTransform(
            np.array([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]),
            Vec3(0, 0, 1.5),
        )
        with pytest.raises(DegenerateForward):
            action_answer(yaw_pose(0, 0, 0), down)
