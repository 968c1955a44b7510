"""Turning measured answers into five-way multiple-choice items.

Raw tool outputs (an angle, a distance, a compass direction, a chain answer
key) become benchmark items here: continuous values fall into human-readable
bins, four hard-negative distractors join the correct option, and a seeded
shuffle assigns the A-E labels. Items serialize to a line-delimited file and
parse back unchanged.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .chains import ActionChain, ChainGroundTruth, Keystep
from .clips import AnchorEvent, Category, ClipSpec
from .errors import DistractorSpaceTooSmall, SchemaViolation
from .geometry import Direction8, SignedAngle, Vec3

ITEMS_HEADER_COMMENT = "# proxibench benchmark items v1"
OPTION_LABELS = ("A", "B", "C", "D", "E")


class ProximityKind(Enum):
    APPROXIMATE = "approximate"
    RELATIVE = "relative"


@dataclass(frozen=True)
class DistanceBin:
    """Human-readable distance interval [lo, hi); hi None = open-ended."""

    label: str
    lo: float
    hi: Optional[float]

    def contains(self, d: float) -> bool:
        return d >= self.lo and (self.hi is None or d < self.hi)


@dataclass(frozen=True)
class AngleBin:
    """Turn-magnitude interval [lo, hi) degrees; the side lives in the label."""

    label: str
    lo: float
    hi: float


def _fmt(x: float) -> str:
    return "{:g}".format(x)


def distance_bins(edges: Sequence[float] = (0.0, 0.5, 1.0, 2.0, 4.0)) -> tuple[DistanceBin, ...]:
    """Build the distance partition from ascending edges; top bin open-ended."""
    out = [DistanceBin("under {} m".format(_fmt(edges[1])), edges[0], edges[1])]
    for lo, hi in zip(edges[1:], edges[2:]):
        out.append(DistanceBin("{}–{} m".format(_fmt(lo), _fmt(hi)), lo, hi))
    out.append(DistanceBin("over {} m".format(_fmt(edges[-1])), edges[-1], None))
    return tuple(out)


def angle_bins(
    none_deg: float = 10.0, slight_deg: float = 30.0, moderate_deg: float = 90.0
) -> tuple[AngleBin, ...]:
    """Seven turn bins, ordered sharp-left .. none .. sharp-right."""
    spans = [
        ("slight", none_deg, slight_deg),
        ("moderate", slight_deg, moderate_deg),
        ("sharp", moderate_deg, 180.0),
    ]
    left = [AngleBin("{} left turn".format(n), lo, hi) for n, lo, hi in spans]
    right = [AngleBin("{} right turn".format(n), lo, hi) for n, lo, hi in spans]
    return tuple(
        list(reversed(left)) + [AngleBin("roughly none", 0.0, none_deg)] + right
    )


def bin_distance(d: float, bins: Sequence[DistanceBin] = distance_bins()) -> DistanceBin:
    if d < 0:
        raise ValueError("distance must be non-negative")
    for b in bins:
        if b.contains(d):
            return b
    raise ValueError("no bin covers {}".format(d))  # pragma: no cover


def bin_angle(theta: SignedAngle, bins: Sequence[AngleBin] = angle_bins()) -> AngleBin:
    """Map a signed turn onto its magnitude bin; the sign picks the side.

    A straight-behind turn (exactly 180 degrees) counts as a left turn,
    matching the positive sign convention.
    """
    deg = theta.degrees if isinstance(theta, SignedAngle) else SignedAngle(theta).degrees
    mag = abs(deg)
    side = "left" if deg > 0 else "right"
    for b in bins:
        if b.label == "roughly none":
            if mag < b.hi:
                return b
        elif side in b.label and b.lo <= mag and (mag < b.hi or b.hi == 180.0):
            return b
    raise ValueError("no bin covers {}".format(deg))  # pragma: no cover


Payload = Union[Direction8, DistanceBin, AngleBin, str]


@dataclass(frozen=True)
class QAItem:
    id: str
    category: Category
    proximity_kind: ProximityKind
    clip: ClipSpec
    question: str
    options: dict  # label -> option text
    answer_label: str
    answer_payload: Payload
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if tuple(sorted(self.options)) != OPTION_LABELS:
            raise ValueError("options must be labeled A-E")
        texts = {t.strip().casefold() for t in self.options.values()}
        if len(texts) != len(OPTION_LABELS):
            raise ValueError("option texts must be pairwise distinct")
        if self.answer_label not in self.options:
            raise ValueError("answer label must be one of the options")


@dataclass(frozen=True)
class ChainQAItem:
    id: str
    clip: ClipSpec
    goal_text: str
    ground_truth: ChainGroundTruth
    provenance: dict = field(default_factory=dict)

    @property
    def category(self) -> Category:
        return Category.CHAIN_OF_ACTIONS

    @property
    def candidate_set(self) -> tuple[Keystep, ...]:
        return self.ground_truth.candidate_set

    @property
    def k(self) -> int:
        return self.ground_truth.k


_RING_PREFERENCE = (2, 3, 4, 1)  # ring distances, most-preferred first


def _direction_distractors(answer: Direction8) -> list[Direction8]:
    ranked = sorted(
        (d for d in Direction8 if d is not answer),
        key=lambda d: (
            _RING_PREFERENCE.index(answer.ring_distance(d)),
            d.value,
        ),
    )
    return ranked[:4]


def _bin_distractors(answer, bins) -> list:
    if len(bins) < 5:
        raise DistractorSpaceTooSmall(
            "only {} bins configured; need 5 options".format(len(bins))
        )
    idx = list(bins).index(answer)
    ranked = sorted(
        (i for i in range(len(bins)) if i != idx),
        key=lambda i: (abs(i - idx), i),
    )
    return [bins[i] for i in ranked[:4]]


def payload_text(payload: Payload) -> str:
    if isinstance(payload, Direction8):
        return payload.label
    if isinstance(payload, (DistanceBin, AngleBin)):
        return payload.label
    return str(payload)


_TEMPLATES = {
    ("intention", "approximate", ""): (
        "How should the wearer turn their head to bring the {name} directly in front of them?"
    ),
    ("intention", "relative", ""): (
        "Relative to the wearer's current heading, in which direction is the object they will look at next?"
    ),
    ("exploration", "approximate", "first_step"): (
        "How far is the first step of the walking path toward the {name}?"
    ),
    ("exploration", "approximate", "path_length"): (
        "How long is the shortest walking path from the wearer to the {name}?"
    ),
    ("exploration", "relative", ""): (
        "Relative to the wearer's current heading, in which direction is the first step of the walking path toward the {name}?"
    ),
    ("exploitation", "approximate", "afford"): (
        "How far from the wearer is the {name} they are about to interact with?"
    ),
    ("exploitation", "approximate", "action"): (
        "How should the wearer turn their body to carry out the next action involving the {name}?"
    ),
    ("exploitation", "relative", "afford"): (
        "Relative to the wearer's current heading, in which direction is the {name} they are about to interact with?"
    ),
    ("exploitation", "relative", "place"): (
        "Relative to the wearer's current heading, in which direction will the wearer move the {name}?"
    ),
}


def question_text(category: Category, kind: ProximityKind, variant: str, name: str) -> str:
    key = (category.value, kind.value, variant)
    if key not in _TEMPLATES:
        raise ValueError("no question template for {}".format(key))
    return _TEMPLATES[key].format(name=name)


def forge_mcq(
    category: Category,
    kind: ProximityKind,
    payload: Payload,
    *,
    item_id: str,
    clip: ClipSpec,
    seed,
    object_name: str = "object",
    variant: str = "",
    provenance: Optional[dict] = None,
    dist_bins: Sequence[DistanceBin] = distance_bins(),
    turn_bins: Sequence[AngleBin] = angle_bins(),
) -> QAItem:
    """Wrap one correct payload in a five-option item.

    Distractors stay inside the payload's own domain: compass answers prefer
    ring distance two (then three, four, and only then neighbours); binned
    answers take the nearest other bins. Option labels come from a shuffle
    seeded by ``seed`` and the item id, so reruns reproduce the same item.
    """
    if isinstance(payload, Direction8):
        distractors = _direction_distractors(payload)
    elif isinstance(payload, DistanceBin):
        distractors = _bin_distractors(payload, dist_bins)
    elif isinstance(payload, AngleBin):
        distractors = _bin_distractors(payload, turn_bins)
    else:
        raise DistractorSpaceTooSmall(
            "no distractor domain for payload {!r}".format(payload)
        )

    rng = random.Random("{}|{}".format(seed, item_id))
    texts = [payload_text(payload)] + [payload_text(d) for d in distractors]
    order = list(range(5))
    rng.shuffle(order)
    options = {}
    answer_label = ""
    for label, src in zip(OPTION_LABELS, order):
        options[label] = texts[src]
        if src == 0:
            answer_label = label
    return QAItem(
        id=item_id,
        category=category,
        proximity_kind=kind,
        clip=clip,
        question=question_text(category, kind, variant, object_name),
        options=options,
        answer_label=answer_label,
        answer_payload=payload,
        provenance=provenance or {},
    )


@dataclass(frozen=True)
class TaskOutput:
    """One measured answer plus the context needed to phrase it."""

    item_id: str
    category: Category
    proximity_kind: Optional[ProximityKind]
    clip: ClipSpec
    payload: object  # SignedAngle | float meters | Direction8 | ChainGroundTruth
    object_name: str = "object"
    variant: str = ""
    provenance: dict = field(default_factory=dict)


def forge_task_items(
    outputs: Iterable[TaskOutput],
    seed=0,
    dist_bins: Sequence[DistanceBin] = distance_bins(),
    turn_bins: Sequence[AngleBin] = angle_bins(),
) -> tuple[list, list]:
    """Forge every output into an item; collect per-output failures.

    Angles fall into turn bins, distances into range bins, directions stay
    as they are, and chain answer keys become ChainQAItems. Returns
    (items, skips) where each skip is (item_id, reason).
    """
    items = []
    skips = []
    for out in outputs:
        try:
            if isinstance(out.payload, ChainGroundTruth):
                items.append(
                    ChainQAItem(
                        id=out.item_id,
                        clip=out.clip,
                        goal_text=out.payload.goal_text,
                        ground_truth=out.payload,
                        provenance=out.provenance,
                    )
                )
                continue
            payload = out.payload
            if isinstance(payload, SignedAngle):
                payload = bin_angle(payload, turn_bins)
            elif isinstance(payload, (int, float)):
                payload = bin_distance(float(payload), dist_bins)
            elif not isinstance(payload, Direction8):
                raise ValueError("cannot forge payload {!r}".format(payload))
            items.append(
                forge_mcq(
                    out.category,
                    out.proximity_kind,
                    payload,
                    item_id=out.item_id,
                    clip=out.clip,
                    seed=seed,
                    object_name=out.object_name,
                    variant=out.variant,
                    provenance=out.provenance,
                )
            )
        except Exception as exc:
            skips.append((out.item_id, "{}: {}".format(type(exc).__name__, exc)))
    return items, skips


# --- serialization ---------------------------------------------------------


def clip_to_json(clip: ClipSpec) -> dict:
    return {
        "stream_id": clip.stream_id,
        "start": clip.start,
        "end": clip.end,
        "category": clip.category.value,
        "anchor": {"timestamp": clip.anchor.timestamp, "kind": clip.anchor.kind},
        "goal_object_id": clip.goal_object_id,
    }


def clip_from_json(data: dict) -> ClipSpec:
    return ClipSpec(
        stream_id=data["stream_id"],
        start=float(data["start"]),
        end=float(data["end"]),
        category=Category(data["category"]),
        anchor=AnchorEvent(
            float(data["anchor"]["timestamp"]), data["anchor"]["kind"]
        ),
        goal_object_id=data.get("goal_object_id"),
    )


def payload_to_json(payload: Payload) -> dict:
    if isinstance(payload, Direction8):
        return {"type": "direction", "value": payload.name.lower()}
    if isinstance(payload, DistanceBin):
        return {
            "type": "distance_bin",
            "label": payload.label,
            "lo": payload.lo,
            "hi": payload.hi,
        }
    if isinstance(payload, AngleBin):
        return {
            "type": "angle_bin",
            "label": payload.label,
            "lo": payload.lo,
            "hi": payload.hi,
        }
    return {"type": "object", "id": str(payload)}


def payload_from_json(data: dict) -> Payload:
    kind = data["type"]
    if kind == "direction":
        return Direction8[data["value"].upper()]
    if kind == "distance_bin":
        hi = data["hi"]
        return DistanceBin(data["label"], float(data["lo"]), None if hi is None else float(hi))
    if kind == "angle_bin":
        return AngleBin(data["label"], float(data["lo"]), float(data["hi"]))
    if kind == "object":
        return data["id"]
    raise SchemaViolation("unknown payload type {!r}".format(kind))


def _keystep_to_json(step: Keystep) -> dict:
    return {
        "id": step.id,
        "text": step.text,
        "start": step.start,
        "end": step.end,
        "location": [step.location.x, step.location.y, step.location.z],
    }


def _keystep_from_json(data: dict) -> Keystep:
    loc = data["location"]
    return Keystep(
        int(data["id"]),
        data["text"],
        float(data["start"]),
        float(data["end"]),
        Vec3(float(loc[0]), float(loc[1]), float(loc[2])),
    )


def item_to_record(item: Union[QAItem, ChainQAItem]) -> dict:
    if isinstance(item, ChainQAItem):
        return {
            "id": item.id,
            "category": item.category.value,
            "clip": clip_to_json(item.clip),
            "goal": item.goal_text,
            "candidates": [_keystep_to_json(s) for s in item.candidate_set],
            "k": item.k,
            "valid_chains": [
                [list(c.node_ids), list(c.edge_letters)]
                for c in item.ground_truth.valid_chains
            ],
            "provenance": item.provenance,
        }
    return {
        "id": item.id,
        "category": item.category.value,
        "proximity_kind": item.proximity_kind.value,
        "question": item.question,
        "options": dict(sorted(item.options.items())),
        "answer_label": item.answer_label,
        "answer_payload": payload_to_json(item.answer_payload),
        "clip": clip_to_json(item.clip),
        "provenance": item.provenance,
    }


def item_from_record(record: dict) -> Union[QAItem, ChainQAItem]:
    if record["category"] == Category.CHAIN_OF_ACTIONS.value:
        candidates = tuple(_keystep_from_json(s) for s in record["candidates"])
        chains = tuple(
            ActionChain(
                tuple(int(n) for n in nodes),
                tuple(Direction8.from_letter(letter) for letter in letters),
            )
            for nodes, letters in record["valid_chains"]
        )
        gt = ChainGroundTruth(record["goal"], candidates, chains)
        if gt.k != record["k"]:
            raise SchemaViolation(
                "item {}: k={} but chains walk {} steps".format(
                    record["id"], record["k"], gt.k
                )
            )
        return ChainQAItem(
            id=record["id"],
            clip=clip_from_json(record["clip"]),
            goal_text=record["goal"],
            ground_truth=gt,
            provenance=record.get("provenance", {}),
        )
    return QAItem(
        id=record["id"],
        category=Category(record["category"]),
        proximity_kind=ProximityKind(record["proximity_kind"]),
        clip=clip_from_json(record["clip"]),
        question=record["question"],
        options=dict(record["options"]),
        answer_label=record["answer_label"],
        answer_payload=payload_from_json(record["answer_payload"]),
        provenance=record.get("provenance", {}),
    )


def write_items(items: Sequence[Union[QAItem, ChainQAItem]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ITEMS_HEADER_COMMENT + "\n")
        for item in items:
            fh.write(json.dumps(item_to_record(item), ensure_ascii=False) + "\n")


def read_items(path) -> list:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(
                    "line {}: not valid JSON".format(line_no)
                ) from exc
            try:
                items.append(item_from_record(record))
            except (KeyError, ValueError) as exc:
                raise SchemaViolation("line {}: {}".format(line_no, exc)) from exc
    return items
