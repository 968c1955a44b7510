"""Scripted scene generation tests."""

import math

import pytest

from proxibench.chains import extract_keysteps
from proxibench.errors import InvalidRecipe
from proxibench.geometry import Vec3
from proxibench.perception import (
    InteractionEvidence,
    action_answer,
    detect_fixations,
    gaze_ray_world,
    resolve_fixated_object,
)
from proxibench.schema import (
    KeystepAnnotation,
    read_stream,
    stream_digest,
    write_stream,
)
from proxibench.synth import (
    GazeScript,
    HandScript,
    ObjectScript,
    SceneRecipe,
    Waypoint,
    default_recipes,
    synthesize,
)


def walk_recipe(duration=4.0, **kwargs):
    defaults = dict(
        name="walk",
        duration=duration,
        wearer_path=(Waypoint(0.0, 0.0, 0.0), Waypoint(duration, duration, 0.0)),
    )
    defaults.update(kwargs)
    return SceneRecipe(**defaults)


class TestValidation:
    def test_minimal_recipe_passes(self):
        synthesize(walk_recipe())

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(name=""),
            dict(duration=0.0),
            dict(wearer_path=()),
            dict(wearer_path=(Waypoint(2.0, 0.0, 0.0), Waypoint(1.0, 1.0, 0.0))),
            dict(wearer_path=(Waypoint(0.0, 0.0, 0.0), Waypoint(9.0, 1.0, 0.0))),
            dict(fps=0.0),
            dict(keysteps=(KeystepAnnotation(1.0, 9.0, "too long"),)),
        ],
    )
    def test_bad_scripts_rejected(self, kwargs):
        with pytest.raises(InvalidRecipe):
            synthesize(walk_recipe(**kwargs))

    def test_duplicate_object_ids_rejected(self):
        obj = ObjectScript("a", "thing", (Waypoint(0.0, 1.0, 1.0),))
        with pytest.raises(InvalidRecipe):
            synthesize(walk_recipe(objects=(obj, obj)))

    def test_zero_half_extent_rejected(self):
        obj = ObjectScript(
            "a", "thing", (Waypoint(0.0, 1.0, 1.0),), (0.2, 0.0, 0.2)
        )
        with pytest.raises(InvalidRecipe):
            synthesize(walk_recipe(objects=(obj,)))

    def test_gaze_at_unknown_object_rejected(self):
        with pytest.raises(InvalidRecipe):
            synthesize(
                walk_recipe(gaze=(GazeScript(0.0, 1.0, target_object_id="ghost"),))
            )

    def test_gaze_needs_exactly_one_target(self):
        with pytest.raises(InvalidRecipe):
            GazeScript(0.0, 1.0)
        with pytest.raises(InvalidRecipe):
            GazeScript(
                0.0, 1.0, target_object_id="a", target_point=Vec3(1.0, 0.0, 0.0)
            )

    def test_hand_on_unknown_object_rejected(self):
        with pytest.raises(InvalidRecipe):
            synthesize(
                walk_recipe(hands=(HandScript("right_hand", 0.0, 1.0, "ghost"),))
            )

    def test_overlapping_hand_scripts_rejected(self):
        obj = ObjectScript("a", "thing", (Waypoint(0.0, 1.0, 1.0),))
        hands = (
            HandScript("right_hand", 0.0, 2.0, "a"),
            HandScript("right_hand", 1.5, 3.0, "a"),
        )
        with pytest.raises(InvalidRecipe):
            synthesize(walk_recipe(objects=(obj,), hands=hands))


class TestFrameGrid:
    def test_four_seconds_gives_121_frames(self):
        stream = synthesize(walk_recipe(duration=4.0))
        assert len(stream.frames) == 121
        assert stream.frames[0].timestamp == 0.0
        assert stream.frames[-1].timestamp == pytest.approx(4.0)
        assert stream.frame_period == pytest.approx(1.0 / 30.0)

    def test_tracks_cover_every_frame(self):
        obj = ObjectScript("a", "thing", (Waypoint(0.0, 1.0, 1.0),))
        stream = synthesize(walk_recipe(objects=(obj,)))
        assert len(stream.objects["a"].boxes) == len(stream.frames)


class TestPoses:
    def test_yaw_faces_travel_direction(self):
        stream = synthesize(walk_recipe())  # walks along +x
        fwd = stream.frames[30].device_pose.forward_world()
        assert (fwd.x, fwd.y, fwd.z) == pytest.approx((1.0, 0.0, 0.0))

    def test_yaw_follows_a_bend_in_the_path(self):
        path = (
            Waypoint(0.0, 0.0, 0.0),
            Waypoint(2.0, 2.0, 0.0),
            Waypoint(4.0, 2.0, 2.0),
        )
        stream = synthesize(walk_recipe(wearer_path=path))
        early = stream.frames[30].device_pose.forward_world()
        late = stream.frames[90].device_pose.forward_world()
        assert (early.x, early.y) == pytest.approx((1.0, 0.0))
        assert (late.x, late.y) == pytest.approx((0.0, 1.0))

    def test_heading_persists_after_stopping(self):
        path = (Waypoint(0.0, 0.0, 0.0), Waypoint(2.0, 0.0, 2.0))
        stream = synthesize(walk_recipe(wearer_path=path))
        fwd = stream.frames[-1].device_pose.forward_world()  # t=4, stopped
        assert (fwd.x, fwd.y) == pytest.approx((0.0, 1.0))

    def test_facing_track_overrides_heading(self):
        recipe = walk_recipe(
            wearer_path=(Waypoint(0.0, 0.0, 0.0),),
            facing=(Waypoint(0.0, 0.0, -2.0),),
        )
        fwd = synthesize(recipe).frames[0].device_pose.forward_world()
        assert (fwd.x, fwd.y) == pytest.approx((0.0, -1.0))

    def test_camera_down_axis_points_at_floor(self):
        stream = synthesize(walk_recipe())
        rot = stream.frames[10].device_pose.rotation
        assert tuple(rot[:, 1]) == pytest.approx((0.0, 0.0, -1.0))


class TestSensors:
    def test_scripted_gaze_resolves_to_the_object(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["gaze-study"])
        frame = stream.frames[150]  # t=5, inside the cup dwell
        ray = gaze_ray_world(frame.gaze, frame.device_pose)
        hit = resolve_fixated_object(ray, stream.boxes_at(150))
        assert hit is not None and hit[0] == "cup"

    def test_dwell_produces_a_fixation_event(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["gaze-study"])
        events = detect_fixations(
            [f.gaze for f in stream.frames],
            [(f.timestamp, f.device_pose) for f in stream.frames],
        )
        overlapping = [e for e in events if e.start < 6.5 and e.end > 4.0]
        assert overlapping and max(e.duration for e in overlapping) >= 0.4

    def test_default_gaze_is_straight_ahead(self):
        stream = synthesize(walk_recipe())
        g = stream.frames[0].gaze.ray_dir_device
        assert (g.x, g.y, g.z) == (0.0, 0.0, 1.0)

    def test_scripted_hand_rides_the_object(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["object-move"])
        i = stream.indices_in(5.0, 5.01)[0]
        hand = stream.frames[i].skeleton.joints["right_hand"]
        assert stream.objects["tray"].boxes[i].contains(hand)

    def test_interaction_fires_near_the_scripted_motion_start(self):
        from proxibench.perception import detect_interaction

        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["object-move"])
        track = [
            (f.timestamp, stream.object_center("tray", i))
            for i, f in enumerate(stream.frames)
        ]
        event = detect_interaction(
            "tray",
            track,
            [f.skeleton for f in stream.frames],
            list(stream.objects["tray"].boxes),
        )
        assert event is not None
        assert 4.0 <= event.onset_timestamp <= 4.5

    def test_velocity_evidence_without_skeletons(self):
        from proxibench.perception import detect_interaction

        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["object-move"])
        track = [
            (f.timestamp, stream.object_center("tray", i))
            for i, f in enumerate(stream.frames)
        ]
        event = detect_interaction(
            "tray", track, [], list(stream.objects["tray"].boxes)
        )
        assert event is not None
        assert event.evidence is InteractionEvidence.VELOCITY
        assert 4.0 <= event.onset_timestamp <= 4.5


class TestDefaultRecipes:
    def test_five_recipes_with_stable_names(self):
        names = [r.name for r in default_recipes(0)]
        assert names == [
            "kitchen-walk",
            "gaze-study",
            "object-move",
            "turn-and-grab",
            "cooking-steps",
        ]

    def test_same_seed_is_byte_identical(self):
        digests_a = [stream_digest(synthesize(r)) for r in default_recipes(7)]
        digests_b = [stream_digest(synthesize(r)) for r in default_recipes(7)]
        assert digests_a == digests_b

    def test_different_seeds_differ(self):
        a = [stream_digest(synthesize(r)) for r in default_recipes(0)]
        b = [stream_digest(synthesize(r)) for r in default_recipes(1)]
        assert a != b

    def test_round_trip_through_the_file_format(self, tmp_path):
        for recipe in default_recipes(0):
            stream = synthesize(recipe)
            path = tmp_path / "{}.jsonl".format(recipe.name)
            write_stream(stream, path)
            loaded = read_stream(path)
            assert stream_digest(loaded) == stream_digest(stream)

    def test_turn_recipe_turns_right_ninety_degrees(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["turn-and-grab"])
        before = stream.frames[stream.index_at_or_before(5.5)].device_pose
        after = stream.frames[stream.index_at_or_before(8.0)].device_pose
        turn = action_answer(before, after)
        assert turn.degrees == pytest.approx(-90.0, abs=1.0)

    def test_cooking_steps_extract_with_station_locations(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["cooking-steps"])
        steps = extract_keysteps(stream, 0.0, stream.frames[-1].timestamp + 1.0)
        assert len(steps) == 8
        for step, obj in zip(steps, stream.objects.values()):
            center = stream.object_center(obj.object_id, 0)
            assert math.hypot(
                step.location.x - center.x, step.location.y - center.y
            ) < 1e-6

    def test_keysteps_sorted_by_onset(self):
        recipes = {r.name: r for r in default_recipes(0)}
        stream = synthesize(recipes["turn-and-grab"])
        starts = [k.start for k in stream.keysteps]
        assert starts == sorted(starts)
        assert len(stream.keysteps) == 4
