"""Keystep chains: locating steps in space and building answer sets.

A chain question asks which future keysteps follow the observed clip and in
what spatial order. This module extracts located keysteps from annotations
(hand-skeleton averaging), turns consecutive step locations into compass
directions relative to the final observed pose, enumerates the admissible
step orderings, and packs a 10-candidate answer set around the true steps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from .errors import (
    ConstraintConflict,
    DegenerateTarget,
    MissingLocation,
    PoolExhausted,
    ZeroDisplacement,
)
from .geometry import (
    Direction8,
    ForwardAxis,
    RigidTransform,
    Vec3,
    bev_signed_angle_of_vector,
    discretize_direction,
)
from .schema import SceneStream

COINCIDENT_ATOL = 1e-6  # meters; below this, step locations count as the same
MIN_CHAIN_STEPS = 3
MAX_CHAIN_STEPS = 5
MAX_VALID_CHAINS = 3
CANDIDATE_SET_SIZE = 10


@dataclass(frozen=True)
class Keystep:
    """An annotated action with a resolved 3D location."""

    id: int
    text: str
    start: float
    end: float
    location: Vec3


@dataclass(frozen=True)
class ActionChain:
    """An ordered walk over keystep ids with a compass direction per hop."""

    node_ids: tuple[int, ...]
    edges: tuple[Direction8, ...]

    def __post_init__(self):
        if len(self.node_ids) != len(set(self.node_ids)):
            raise ValueError("chain nodes must be distinct")
        if len(self.edges) != len(self.node_ids) - 1:
            raise ValueError(
                "{} nodes need {} edges, got {}".format(
                    len(self.node_ids), len(self.node_ids) - 1, len(self.edges)
                )
            )

    @property
    def edge_letters(self) -> tuple[str, ...]:
        return tuple(d.letter for d in self.edges)


@dataclass(frozen=True)
class ChainGroundTruth:
    """The answer key: candidate steps plus every accepted ordering."""

    goal_text: str
    candidate_set: tuple[Keystep, ...]
    valid_chains: tuple[ActionChain, ...]

    def __post_init__(self):
        if len(self.candidate_set) != CANDIDATE_SET_SIZE:
            raise ValueError("candidate set must hold exactly 10 steps")
        texts = {s.text for s in self.candidate_set}
        if len(texts) != CANDIDATE_SET_SIZE:
            raise ValueError("candidate texts must be distinct")
        if not 1 <= len(self.valid_chains) <= MAX_VALID_CHAINS:
            raise ValueError("need 1-3 valid chains")
        ids = {s.id for s in self.candidate_set}
        node_sets = {frozenset(c.node_ids) for c in self.valid_chains}
        if len(node_sets) != 1 or not node_sets.pop() <= ids:
            raise ValueError("every chain must walk the same candidate subset")

    @property
    def k(self) -> int:
        return len(self.valid_chains[0].node_ids)


def extract_keysteps(
    stream: SceneStream,
    start: float,
    end: float,
    first_id: int = 1,
) -> tuple[Keystep, ...]:
    """Keysteps overlapping [start, end), onset-ordered and located in 3D.

    A step's location is the mean over its annotated interval of the mean
    position of the hands it involves. Raises MissingLocation when no frame
    carries any involved hand during the step.
    """
    chosen = sorted(
        (k for k in stream.keysteps if k.start < end and k.end > start),
        key=lambda k: (k.start, k.end),
    )
    out = []
    for offset, ann in enumerate(chosen):
        total = Vec3(0.0, 0.0, 0.0)
        count = 0
        for i in stream.indices_in(ann.start, ann.end):
            frame = stream.frames[i]
            hands = [
                frame.skeleton.joints[h]
                for h in ann.hands
                if h in frame.skeleton.joints
            ]
            if not hands:
                continue
            centroid = Vec3(0.0, 0.0, 0.0)
            for p in hands:
                centroid = centroid + p
            total = total + centroid.scaled(1.0 / len(hands))
            count += 1
        if count == 0:
            raise MissingLocation(
                "keystep {!r} has no skeleton samples in [{}, {})".format(
                    ann.text, ann.start, ann.end
                )
            )
        out.append(
            Keystep(
                id=first_id + offset,
                text=ann.text,
                start=ann.start,
                end=ann.end,
                location=total.scaled(1.0 / count),
            )
        )
    return tuple(out)


def edge_directions(
    steps: Sequence[Keystep],
    reference_pose: RigidTransform,
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> tuple[Direction8, ...]:
    """Compass direction of each hop between consecutive step locations.

    Displacements are read in the reference pose's bird's-eye frame.
    Raises ZeroDisplacement when consecutive locations coincide (or differ
    only in height, which leaves the heading undefined).
    """
    if len(steps) < 2:
        raise ValueError("need at least two steps for an edge")
    out = []
    for a, b in zip(steps, steps[1:]):
        disp = b.location - a.location
        if disp.norm() <= COINCIDENT_ATOL:
            raise ZeroDisplacement(
                "steps {!r} and {!r} share a location".format(a.text, b.text)
            )
        try:
            angle = bev_signed_angle_of_vector(reference_pose, disp, forward)
        except DegenerateTarget as exc:
            raise ZeroDisplacement(
                "hop {!r} -> {!r} is vertical; heading undefined".format(
                    a.text, b.text
                )
            ) from exc
        out.append(discretize_direction(angle))
    return tuple(out)


class OrderingGenerator(Protocol):
    """Boundary for proposing alternate step orders for the same goal."""

    def propose(
        self,
        goal_text: str,
        step_texts: Sequence[str],
        order_constraints: Sequence[tuple[int, int]],
    ) -> Sequence[Sequence[int]]: ...


class SwapProposalGenerator:
    """Deterministic default: swap exactly the pairs flagged order-free.

    ``swappable_pairs`` hold annotated-order positions whose steps may trade
    places; every proposal is the annotated order with one pair swapped.
    """

    def __init__(self, swappable_pairs: Sequence[tuple[int, int]] = ()):
        self.swappable_pairs = tuple(
            tuple(sorted(p)) for p in swappable_pairs
        )

    def propose(self, goal_text, step_texts, order_constraints):
        base = list(range(len(step_texts)))
        proposals = []
        for i, j in sorted(set(self.swappable_pairs)):
            if not 0 <= i < j < len(base):
                continue
            order = list(base)
            order[i], order[j] = order[j], order[i]
            proposals.append(order)
        return proposals


def _satisfies(order: Sequence[int], constraints) -> bool:
    position = {step: rank for rank, step in enumerate(order)}
    return all(position[a] < position[b] for a, b in constraints)


def enumerate_valid_chains(
    true_steps: Sequence[Keystep],
    reference_pose: RigidTransform,
    order_constraints: Sequence[tuple[int, int]] = (),
    generator: Optional[OrderingGenerator] = None,
    goal_text: str = "",
    forward: ForwardAxis = ForwardAxis.PLUS_Z,
) -> tuple[ActionChain, ...]:
    """All accepted orderings of the true steps, annotated order first.

    ``order_constraints`` are pairs of annotated-order positions (a, b)
    demanding step a stay ahead of step b. The generator proposes alternate
    orders; proposals that break a constraint, repeat an ordering, or fail
    to permute every step are dropped, and the result is clamped to three
    chains. Raises ConstraintConflict when the annotated order itself breaks
    a constraint.
    """
    k = len(true_steps)
    if not MIN_CHAIN_STEPS <= k <= MAX_CHAIN_STEPS:
        raise ValueError("chains take 3-5 steps, got {}".format(k))
    constraints = [(int(a), int(b)) for a, b in order_constraints]
    for a, b in constraints:
        if not (0 <= a < k and 0 <= b < k):
            raise ConstraintConflict(
                "constraint ({}, {}) names a missing step".format(a, b)
            )
        if a >= b:
            raise ConstraintConflict(
                "annotated order puts step {} after step {}".format(a, b)
            )

    orderings = [tuple(range(k))]
    if generator is not None:
        proposals = generator.propose(
            goal_text, [s.text for s in true_steps], constraints
        )
        for raw in proposals:
            order = tuple(int(i) for i in raw)
            if sorted(order) != list(range(k)):
                continue
            if order in orderings or not _satisfies(order, constraints):
                continue
            orderings.append(order)
    orderings = orderings[:MAX_VALID_CHAINS]

    chains = []
    for order in orderings:
        walk = [true_steps[i] for i in order]
        try:
            edges = edge_directions(walk, reference_pose, forward)
        except ZeroDisplacement:
            if order == tuple(range(k)):
                raise
            continue
        chains.append(ActionChain(tuple(s.id for s in walk), edges))
    return tuple(chains)


def build_candidate_set(
    true_steps: Sequence[Keystep],
    distractor_pool: Sequence[Keystep],
    seed,
) -> tuple[tuple[Keystep, ...], dict[int, int]]:
    """True steps plus pool distractors, shuffled and renumbered 1..10.

    Distractors are drawn from the pool after dropping entries that repeat a
    true step's text (or another pool entry's). Returns the candidates and
    the id relabeling for the true steps. Raises PoolExhausted when the pool
    cannot fill the set.
    """
    texts = {s.text for s in true_steps}
    if len(texts) != len(true_steps):
        raise ValueError("true step texts must be distinct")
    pool = []
    seen = set(texts)
    for cand in distractor_pool:
        if cand.text in seen:
            continue
        seen.add(cand.text)
        pool.append(cand)
    need = CANDIDATE_SET_SIZE - len(true_steps)
    if len(pool) < need:
        raise PoolExhausted(
            "need {} distractors, pool offers {}".format(need, len(pool))
        )
    rng = random.Random(str(seed))
    chosen = rng.sample(pool, need)
    combined = list(true_steps) + chosen
    rng.shuffle(combined)
    id_map = {}
    candidates = []
    for new_id, step in enumerate(combined, start=1):
        if step in true_steps:
            id_map[step.id] = new_id
        candidates.append(
            Keystep(new_id, step.text, step.start, step.end, step.location)
        )
    return tuple(candidates), id_map


def relabel_chains(
    chains: Sequence[ActionChain], id_map: dict[int, int]
) -> tuple[ActionChain, ...]:
    """Rewrite chain node ids through the candidate-set relabeling."""
    return tuple(
        ActionChain(tuple(id_map[i] for i in c.node_ids), c.edges) for c in chains
    )
