"""Generation pipeline tests: streams to items, provenance, and replay."""

import dataclasses

import pytest

from proxibench.chains import SwapProposalGenerator
from proxibench.clips import Category
from proxibench.config import RunConfig
from proxibench.errors import ReplayMismatch
from proxibench.forge import ChainQAItem, ProximityKind, write_items
from proxibench.geometry import Direction8
from proxibench.pipeline import (
    GenerationResult,
    run_generation,
    replay_item,
)
from proxibench.synth import default_recipes, synthesize


@pytest.fixture(scope="module")
def streams():
    return [synthesize(r) for r in default_recipes(0)]


@pytest.fixture(scope="module")
def generated(streams):
    return run_generation(streams, RunConfig())


@pytest.fixture(scope="module")
def stream_map(streams):
    return {s.stream_id: s for s in streams}


def items_of(result, category, kind=None, variant=None):
    out = []
    for item in result.items:
        if item.category is not category:
            continue
        if kind is not None and item.proximity_kind is not kind:
            continue
        if variant is not None and variant not in item.id:
            continue
        out.append(item)
    return out


class TestCoverage:
    def test_every_category_is_represented(self, generated):
        counts = generated.by_category()
        for cat in Category:
            assert counts.get(cat.value, 0) >= 1, cat

    def test_both_kinds_of_every_mcq_category(self, generated):
        for cat in (Category.INTENTION, Category.EXPLORATION, Category.EXPLOITATION):
            for kind in (ProximityKind.APPROXIMATE, ProximityKind.RELATIVE):
                assert items_of(generated, cat, kind), (cat, kind)

    def test_item_ids_are_unique(self, generated):
        ids = [i.id for i in generated.items]
        assert len(set(ids)) == len(ids)

    def test_skip_log_names_the_expected_dead_ends(self, generated):
        reasons = [
            (s.stream_id, s.category, s.reason.split(":")[0]) for s in generated.skips
        ]
        assert ("gaze-study", "exploration", "NoValidWindow") in reasons
        assert ("gaze-study", "intention", "InsufficientHistory") in reasons
        assert ("kitchen-walk", "chain_of_actions", "TooFewKeysteps") in reasons

    def test_category_filter_config(self, streams):
        result = run_generation(streams, RunConfig(categories=("intention",)))
        assert result.items
        assert all(i.category is Category.INTENTION for i in result.items)

    def test_empty_input_is_an_empty_result(self):
        result = run_generation([], RunConfig())
        assert isinstance(result, GenerationResult)
        assert result.items == [] and result.skips == []


class TestMeasuredAnswers:
    def test_fixated_cup_sits_front_left(self, generated):
        item = next(
            i
            for i in items_of(generated, Category.INTENTION, ProximityKind.RELATIVE)
            if i.id.startswith("gaze-study/")
        )
        assert item.answer_payload is Direction8.FRONT_LEFT
        assert item.provenance["object_id"] == "cup"

    def test_head_turn_to_cup_is_a_left_turn(self, generated):
        item = next(
            i
            for i in items_of(generated, Category.INTENTION, ProximityKind.APPROXIMATE)
            if i.id.startswith("gaze-study/")
        )
        assert "left turn" in item.answer_payload.label

    def test_tray_slides_to_the_wearers_left(self, generated):
        item = next(
            i
            for i in items_of(
                generated, Category.EXPLOITATION, ProximityKind.RELATIVE, "place"
            )
            if i.id.startswith("object-move/")
        )
        assert item.answer_payload is Direction8.LEFT

    def test_tray_afford_distance_bin(self, generated):
        item = next(
            i
            for i in items_of(
                generated, Category.EXPLOITATION, ProximityKind.APPROXIMATE, "afford"
            )
            if i.id.startswith("object-move/")
        )
        assert item.answer_payload.label == "1–2 m"

    def test_jar_grab_turns_sharply_right(self, generated):
        item = next(
            i
            for i in items_of(
                generated, Category.EXPLOITATION, ProximityKind.APPROXIMATE, "action"
            )
            if i.id.startswith("turn-and-grab/") and "glass jar" in i.question
        )
        assert item.answer_payload.label == "sharp right turn"

    def test_jar_sits_to_the_right_before_the_turn(self, generated):
        item = next(
            i
            for i in items_of(
                generated, Category.EXPLOITATION, ProximityKind.RELATIVE, "afford"
            )
            if i.id.startswith("turn-and-grab/") and i.provenance["object_id"] == "jar"
        )
        assert item.answer_payload is Direction8.RIGHT

    def test_exploration_goal_behind_the_returning_wearer(self, generated):
        items = [
            i
            for i in items_of(generated, Category.EXPLORATION, ProximityKind.RELATIVE)
            if i.id.startswith("kitchen-walk/")
        ]
        kettle = next(i for i in items if i.provenance["object_id"] == "kettle")
        assert kettle.answer_payload in (
            Direction8.BACK,
            Direction8.BACK_LEFT,
            Direction8.BACK_RIGHT,
        )


class TestChains:
    def test_two_chain_items(self, generated):
        chains = items_of(generated, Category.CHAIN_OF_ACTIONS)
        assert sorted(i.id.split("/")[0] for i in chains) == [
            "cooking-steps",
            "turn-and-grab",
        ]

    def test_cooking_chain_picks_the_densest_window(self, generated):
        item = next(
            i
            for i in items_of(generated, Category.CHAIN_OF_ACTIONS)
            if i.id.startswith("cooking-steps/")
        )
        assert item.k == 3
        assert (item.clip.start, item.clip.end) == (12.0, 15.0)
        texts = {s.id: s.text for s in item.candidate_set}
        chain = item.ground_truth.valid_chains[0]
        assert [texts[n] for n in chain.node_ids] == [
            "scrape the onions into the pan",
            "stir in the tomato paste",
            "season the sauce from the spice tin",
        ]
        assert chain.edge_letters == ("B", "F")

    def test_chain_candidates_are_ten_distinct_texts(self, generated):
        for item in items_of(generated, Category.CHAIN_OF_ACTIONS):
            texts = [s.text for s in item.candidate_set]
            assert len(texts) == 10 and len(set(texts)) == 10
            assert [s.id for s in item.candidate_set] == list(range(1, 11))

    def test_chain_goal_text_override(self, streams):
        result = run_generation(
            streams,
            RunConfig(categories=("chain_of_actions",)),
            chain_goals={"cooking-steps": "cook and plate the pasta"},
        )
        goals = {i.id.split("/")[0]: i.goal_text for i in result.items}
        assert goals["cooking-steps"] == "cook and plate the pasta"
        assert goals["turn-and-grab"] != "cook and plate the pasta"

    def test_swap_generator_grows_the_chain_set(self, streams, stream_map):
        gen = SwapProposalGenerator(((1, 2),))
        result = run_generation(
            streams, RunConfig(categories=("chain_of_actions",)), generator=gen
        )
        item = next(
            i for i in result.items if i.id.startswith("cooking-steps/")
        )
        assert len(item.ground_truth.valid_chains) == 2
        replay_item(item, stream_map, RunConfig(), generator=gen)
        with pytest.raises(ReplayMismatch):
            replay_item(item, stream_map, RunConfig())


class TestDeterminism:
    def test_two_runs_are_byte_identical(self, tmp_path):
        paths = []
        for run in range(2):
            streams = [synthesize(r) for r in default_recipes(0)]
            result = run_generation(streams, RunConfig())
            path = tmp_path / "items-{}.jsonl".format(run)
            write_items(result.items, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_different_seed_changes_the_items(self, streams):
        a = run_generation(streams, RunConfig(seed=0))
        b = run_generation(streams, RunConfig(seed=99))
        flipped = [
            (x.answer_label, y.answer_label)
            for x, y in zip(a.items, b.items)
            if
            not isinstance(x, ChainQAItem)
        ]
        assert any(xa != ya for xa, ya in flipped)


class TestReplay:
    def test_every_item_replays_clean(self, generated, stream_map):
        for item in generated.items:
            replay_item(item, stream_map, RunConfig())

    def test_tampered_payload_is_caught(self, generated, stream_map):
        item = next(
            i
            for i in generated.items
            if not isinstance(i, ChainQAItem)
            and isinstance(i.answer_payload, Direction8)
        )
        ring = list(Direction8)
        other = ring[(ring.index(item.answer_payload) + 4) % 8]
        bad = dataclasses.replace(item, answer_payload=other)
        with pytest.raises(ReplayMismatch):
            replay_item(bad, stream_map, RunConfig())

    def test_missing_stream_is_caught(self, generated):
        with pytest.raises(ReplayMismatch):
            replay_item(generated.items[0], {}, RunConfig())

    def test_drifted_stream_content_is_caught(self, generated):
        drifted = {
            s.stream_id: s
            for s in (synthesize(r) for r in default_recipes(5))
        }
        with pytest.raises(ReplayMismatch):
            replay_item(generated.items[0], drifted, RunConfig())

    def test_chain_items_replay_clean(self, generated, stream_map):
        chains = [i for i in generated.items if isinstance(i, ChainQAItem)]
        assert chains
        for item in chains:
            replay_item(item, stream_map, RunConfig())
