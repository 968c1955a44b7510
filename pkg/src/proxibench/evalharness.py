"""Prompt rendering, response parsing, scoring, and report aggregation.

Multiple-choice items render to an eight-frame prompt whose required reply
ends in an angle-bracketed letter; chain items render to a two-list reply
format. Parsing takes the last well-formed occurrence so chain-of-thought
text can mention options freely. Scoring produces one record per item and
aggregates to category-level percentages.
"""

from __future__ import annotations

import json
import re
import urllib.request
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Protocol, Sequence, Union

from .errors import EmptySet, LengthMismatch, ParseFailure, UnknownItem, UnsupportedK
from .forge import OPTION_LABELS, ChainQAItem, QAItem
from .geometry import Direction8

PROMPT_FRAME_COUNT = 8
MCQ_ANSWER_ANCHOR = "The correct answer is <>"
STREAM_RATE_HZ = 30.0

_COUNT_WORDS = {3: "three", 4: "four", 5: "five"}

DIRECTION_LEGEND_EQUALS = (
    "A = right, B = left, C = front, D = back, "
    "E = front-right, F = front-left, G = back-left, H = back-right."
)
DIRECTION_LEGEND_COLONS = (
    "A: right, B: left, C: front, D: back, "
    "E: front-right, F: front-left, G: back-left, H: back-right."
)

_CHAIN_EXAMPLES = {
    3: ('[[8, 7, 3], ["F", "A"]]', '[[10, 7, 9], ["E", "B"]]'),
    4: ('[[8, 7, 3, 9], ["F", "A", "H"]]', '[[10, 7, 9, 8], ["E", "B", "A"]]'),
    5: (
        '[[8, 7, 3, 4, 5], ["F", "A", "E", "B"]]',
        '[[10, 7, 9, 6, 8], ["E", "B", "D", "C"]]',
    ),
}


class ExpectedFormat(Enum):
    MCQ_BRACKET = "mcq_bracket"
    CHAIN_NESTED = "chain_nested"


@dataclass(frozen=True)
class PromptBundle:
    item_id: str
    system_text: str
    user_text: str
    frame_refs: tuple[str, ...]
    expected_format: ExpectedFormat

    def __post_init__(self):
        if len(self.frame_refs) != PROMPT_FRAME_COUNT:
            raise ValueError("prompts carry exactly 8 frame references")


@dataclass(frozen=True)
class ParsedResponse:
    raw_text: str
    mcq_label: Optional[str] = None
    chain: Optional[tuple[tuple[int, ...], tuple[str, ...]]] = None

    def __post_init__(self):
        if self.mcq_label is not None and self.chain is not None:
            raise ValueError("a response is either a letter or a chain, not both")


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    category: str
    proximity_kind: Optional[str] = None
    correct: Optional[bool] = None
    act_correct: Optional[bool] = None
    rel_s: Optional[float] = None
    rel_l: Optional[float] = None
    parse_failed: bool = False

    def __post_init__(self):
        if (self.rel_s is not None or self.rel_l is not None) and not self.act_correct:
            raise ValueError("relation scores exist only for matched chains")


def chain_format_line(k: int) -> str:
    """The nested two-list reply shape for a k-step chain, e.g. k=3 ->
    ``[[k1, k2, k3], [d12, d23]]``."""
    if k not in _COUNT_WORDS:
        raise UnsupportedK("chain prompts cover k in {3, 4, 5}, got " + repr(k))
    nodes = ", ".join("k{}".format(i + 1) for i in range(k))
    dirs = ", ".join("d{}{}".format(i + 1, i + 2) for i in range(k - 1))
    return "[[{}], [{}]]".format(nodes, dirs)


def frame_reference_indices(n_frames: int, count: int = PROMPT_FRAME_COUNT) -> list[int]:
    """Floor-spaced uniform sampling: index i maps to floor(i * N / count)."""
    if n_frames < 1:
        raise ValueError("need at least one frame")
    return [i * n_frames // count for i in range(count)]


def _frame_block() -> str:
    return "\n".join("[Frame {}]".format(i + 1) for i in range(PROMPT_FRAME_COUNT))


_MCQ_SYSTEM = (
    "You are an expert in spatial reasoning over first-person video.\n"
    "You will see eight frames from a head-mounted camera in time order; the "
    "last frame is the current moment.\n"
    "Directions (front, back, left, right, and their diagonals) are always "
    "meant from the camera wearer's own viewpoint, and mentions of the person "
    "refer to the wearer.\n"
    "Weigh the question against the frames and pick the single best option."
)

_MCQ_SYSTEM_COT_SUFFIX = (
    "\nFinish with one line reading exactly: The correct answer is <>.\n"
    "Example:\n"
    "(Reasoning...)\n"
    "The correct answer is <B>"
)

_MCQ_USER_CLOSING = (
    "Choose the most appropriate option. Enclose the chosen option letter in "
    "angle brackets (<>)."
)

_MCQ_USER_CLOSING_COT = (
    "Think step by step.\n"
    "Choose the most appropriate option and enclose its letter in angle "
    "brackets (<>).\n"
    "End your answer with the line: The correct answer is <>."
)


def _frame_refs(item: Union[QAItem, ChainQAItem], clip_frame_count: Optional[int]) -> tuple[str, ...]:
    n = clip_frame_count
    if n is None:
        n = max(1, int(round(item.clip.duration * STREAM_RATE_HZ)))
    return tuple(
        "{}@{}".format(item.clip.stream_id, idx)
        for idx in frame_reference_indices(n)
    )


def _render_mcq(item: QAItem, with_cot: bool, clip_frame_count: Optional[int]) -> PromptBundle:
    system_text = _MCQ_SYSTEM + (_MCQ_SYSTEM_COT_SUFFIX if with_cot else "")
    option_lines = "\n".join(
        "{}. {}".format(label, item.options[label]) for label in OPTION_LABELS
    )
    user_text = "{}\n\nQuestion: {}\n\n{}\n\n{}".format(
        _frame_block(),
        item.question,
        option_lines,
        _MCQ_USER_CLOSING_COT if with_cot else _MCQ_USER_CLOSING,
    )
    return PromptBundle(
        item_id=item.id,
        system_text=system_text,
        user_text=user_text,
        frame_refs=_frame_refs(item, clip_frame_count),
        expected_format=ExpectedFormat.MCQ_BRACKET,
    )


def _render_chain(item: ChainQAItem, clip_frame_count: Optional[int]) -> PromptBundle:
    k = item.k
    fmt = chain_format_line(k)
    ex1, ex2 = _CHAIN_EXAMPLES[k]
    system_text = (
        "You are an expert in continuous action planning and egocentric "
        "spatial reasoning.\n"
        "You will receive:\n"
        "(1) a short first-person video segment of eight evenly sampled "
        "frames, where the last frame is the current observation;\n"
        "(2) a high-level task goal to accomplish;\n"
        "(3) a set of 10 candidate keysteps, each with an integer id;\n"
        "(4) a discrete set of 8 egocentric directions relative to the last "
        "frame:\n"
        "{legend}\n"
        "Regard yourself as the camera wearer and judge all motion relative "
        "to your viewpoint in the last frame: moving away from you is C "
        "(front), moving toward you is D (back), left/right follow your "
        "viewpoint, and diagonals are E/F/G/H.\n"
        "Your task:\n"
        "1) Pick exactly {word} keysteps from the candidates, ordered to "
        "accomplish the goal, and return their ids as the first list.\n"
        "2) For each transition between consecutive keysteps, give the "
        "egocentric movement direction letter; return these as the second "
        "list.\n"
        "After your reasoning, output only the final answer in the following "
        "format (two lists, no extra text):\n"
        "{fmt}\n"
        "Example outputs:\n"
        "{ex1}\n"
        "{ex2}"
    ).format(legend=DIRECTION_LEGEND_EQUALS, word=_COUNT_WORDS[k], fmt=fmt, ex1=ex1, ex2=ex2)
    candidates = "\n".join(
        "{}: {}".format(s.id, s.text)
        for s in sorted(item.candidate_set, key=lambda s: s.id)
    )
    user_text = (
        "{frames}\n\n"
        "Goal: {goal}\n\n"
        "Candidate keysteps (id: description, total = 10):\n"
        "{candidates}\n\n"
        "Egocentric direction candidates (relative to the last frame):\n"
        "{legend}\n\n"
        "Analyze the video segment and the task goal, then give your final "
        "answer directly in the format: {fmt}."
    ).format(
        frames=_frame_block(),
        goal=item.goal_text,
        candidates=candidates,
        legend=DIRECTION_LEGEND_COLONS,
        fmt=fmt,
    )
    return PromptBundle(
        item_id=item.id,
        system_text=system_text,
        user_text=user_text,
        frame_refs=_frame_refs(item, clip_frame_count),
        expected_format=ExpectedFormat.CHAIN_NESTED,
    )


def render_prompt(
    item: Union[QAItem, ChainQAItem],
    with_cot: bool = False,
    clip_frame_count: Optional[int] = None,
) -> PromptBundle:
    """Build the model-facing prompt for one item.

    ``clip_frame_count`` is the number of frames in the clip; when omitted
    it is derived from the clip duration at the 30 Hz stream rate. Chain
    items outside k in {3,4,5} raise UnsupportedK.
    """
    if isinstance(item, ChainQAItem):
        if item.k not in _COUNT_WORDS:
            raise UnsupportedK("no template for k={}".format(item.k))
        return _render_chain(item, clip_frame_count)
    return _render_mcq(item, with_cot, clip_frame_count)


# --- parsing ---------------------------------------------------------------

_MCQ_RE = re.compile(r"<\s*([A-E])\s*>")
_NESTED_RE = re.compile(r"\[\s*\[([^\[\]]*)\]\s*,\s*\[([^\[\]]*)\]\s*\]")
_QUOTES = "\"'“”‘’`"
_LETTER_SET = frozenset(d.letter for d in Direction8)


def parse_mcq(raw: str) -> str:
    """The last angle-bracketed option letter in the response."""
    matches = _MCQ_RE.findall(raw)
    if not matches:
        raise ParseFailure("no <letter> found in response")
    return matches[-1]


def _parse_node_list(text: str) -> Optional[tuple[int, ...]]:
    nodes = []
    for token in text.split(","):
        token = token.strip()
        if not token or not re.fullmatch(r"[+-]?\d+", token):
            return None
        nodes.append(int(token))
    return tuple(nodes)


def _parse_dir_list(text: str) -> Optional[tuple[str, ...]]:
    dirs = []
    for token in text.split(","):
        token = token.strip().strip(_QUOTES).strip()
        if token not in _LETTER_SET:
            return None
        dirs.append(token)
    return tuple(dirs)


def parse_chain(raw: str, k: int) -> tuple[tuple[int, ...], tuple[str, ...]]:
    """The last well-formed two-list answer: k node ids and k-1 letters.

    Letters may be bare or wrapped in straight or curly quotes. A well-formed
    pair with the wrong lengths raises LengthMismatch; duplicate or
    out-of-range node ids, or no well-formed pair at all, raise ParseFailure.
    """
    candidate = None
    for match in _NESTED_RE.finditer(raw):
        nodes = _parse_node_list(match.group(1))
        dirs = _parse_dir_list(match.group(2))
        if nodes is not None and dirs is not None:
            candidate = (nodes, dirs)
    if candidate is None:
        raise ParseFailure("no well-formed [[nodes], [directions]] answer found")
    nodes, dirs = candidate
    if len(nodes) != k or len(dirs) != k - 1:
        raise LengthMismatch(
            "expected {} nodes and {} directions, got {} and {}".format(
                k, k - 1, len(nodes), len(dirs)
            )
        )
    if len(set(nodes)) != len(nodes):
        raise ParseFailure("node ids repeat: {}".format(list(nodes)))
    if not all(1 <= n <= 10 for n in nodes):
        raise ParseFailure("node ids must lie in 1..10: {}".format(list(nodes)))
    return nodes, dirs


def parse_response(raw: str, expected: ExpectedFormat, k: Optional[int] = None) -> ParsedResponse:
    if expected is ExpectedFormat.MCQ_BRACKET:
        return ParsedResponse(raw, mcq_label=parse_mcq(raw))
    return ParsedResponse(raw, chain=parse_chain(raw, k))


# --- scoring ---------------------------------------------------------------


def score_mcq_response(item: QAItem, raw: str) -> EvalRecord:
    try:
        label = parse_mcq(raw)
    except ParseFailure:
        return EvalRecord(
            item_id=item.id,
            category=item.category.value,
            proximity_kind=item.proximity_kind.value,
            correct=False,
            parse_failed=True,
        )
    return EvalRecord(
        item_id=item.id,
        category=item.category.value,
        proximity_kind=item.proximity_kind.value,
        correct=label == item.answer_label,
    )


def _edge_agreement(
    predicted: Sequence[str], expected: Sequence[Direction8]
) -> tuple[int, int]:
    exact = 0
    loose = 0
    for got, want in zip(predicted, expected):
        distance = want.ring_distance(Direction8.from_letter(got))
        if distance == 0:
            exact += 1
        if distance <= 1:
            loose += 1
    return exact, loose


def score_chain_response(item: ChainQAItem, raw: str) -> EvalRecord:
    """Compare a chain reply against every accepted ordering.

    The node sequence must exactly equal one ground-truth chain's sequence;
    among several node matches the edge scores keep the best strict fraction
    (then the best loose fraction).
    """
    base = dict(item_id=item.id, category=item.category.value)
    try:
        nodes, dirs = parse_chain(raw, item.k)
    except ParseFailure:
        return EvalRecord(act_correct=False, parse_failed=True, **base)
    best: Optional[tuple[float, float]] = None
    for chain in item.ground_truth.valid_chains:
        if chain.node_ids != nodes:
            continue
        exact, loose = _edge_agreement(dirs, chain.edges)
        scores = (exact / (item.k - 1), loose / (item.k - 1))
        if best is None or scores > best:
            best = scores
    if best is None:
        return EvalRecord(act_correct=False, **base)
    return EvalRecord(act_correct=True, rel_s=best[0], rel_l=best[1], **base)


def score_item(item: Union[QAItem, ChainQAItem], raw: str) -> EvalRecord:
    if isinstance(item, ChainQAItem):
        return score_chain_response(item, raw)
    return score_mcq_response(item, raw)


def score_mcq(records: Iterable[EvalRecord]) -> float:
    """Fraction of MCQ records answered correctly; parse failures count
    against the model."""
    records = [r for r in records if r.correct is not None]
    if not records:
        raise EmptySet("no multiple-choice records to score")
    return sum(1 for r in records if r.correct) / len(records)


# --- model clients ---------------------------------------------------------


class ModelClient(Protocol):
    def __call__(self, bundle: PromptBundle) -> str: ...


class ReplayClient:
    """Serves canned responses from a JSON-lines file keyed by item id.

    Each line reads {"item_id": ..., "response": ...}; comment lines starting
    with '#' are ignored.
    """

    def __init__(self, path):
        self.responses = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                record = json.loads(line)
                self.responses[record["item_id"]] = record["response"]

    def __call__(self, bundle: PromptBundle) -> str:
        if bundle.item_id not in self.responses:
            raise UnknownItem(
                "no canned response for item {!r}".format(bundle.item_id)
            )
        return self.responses[bundle.item_id]


class HttpClient:
    """POSTs the prompt to a generation endpoint and returns its text.

    The endpoint receives {"item_id", "system_text", "user_text",
    "frame_refs"} and must answer {"response": "..."}.
    """

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def __call__(self, bundle: PromptBundle) -> str:
        payload = json.dumps(
            {
                "item_id": bundle.item_id,
                "system_text": bundle.system_text,
                "user_text": bundle.user_text,
                "frame_refs": list(bundle.frame_refs),
            }
        ).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint,
            data=payload,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request, timeout=self.timeout) as response:
            return json.loads(response.read().decode("utf-8"))["response"]


def evaluate_items(
    items: Sequence[Union[QAItem, ChainQAItem]],
    client: ModelClient,
    with_cot: bool = False,
) -> list[EvalRecord]:
    if not items:
        raise EmptySet("no items to evaluate")
    records = []
    for item in items:
        bundle = render_prompt(item, with_cot=with_cot)
        records.append(score_item(item, client(bundle)))
    return records


# --- aggregation -----------------------------------------------------------


def _pct(values: Sequence[float]) -> float:
    return round(100.0 * sum(values) / len(values), 2)


def aggregate(records: Sequence[EvalRecord]) -> dict:
    """Group records into the report table: per category/kind accuracy for
    MCQs, and Act-Acc plus strict/loose relation accuracy for chains.

    Percentages carry two decimals; metrics with no supporting records are
    None (rendered as "-")."""
    if not records:
        raise EmptySet("no records to aggregate")
    table: dict = {}
    mcq = [r for r in records if r.correct is not None]
    groups = sorted({(r.category, r.proximity_kind) for r in mcq})
    for category, kind in groups:
        subset = [
            r for r in mcq if r.category == category and r.proximity_kind == kind
        ]
        table["{}/{}".format(category, kind)] = {
            "n": len(subset),
            "accuracy": _pct([1.0 if r.correct else 0.0 for r in subset]),
        }
    chain = [r for r in records if r.act_correct is not None]
    if chain:
        matched = [r for r in chain if r.act_correct]
        table["chain_of_actions"] = {
            "n": len(chain),
            "act_acc": _pct([1.0 if r.act_correct else 0.0 for r in chain]),
            "rel_acc_s": _pct([r.rel_s for r in matched]) if matched else None,
            "rel_acc_l": _pct([r.rel_l for r in matched]) if matched else None,
        }
    return table


def format_report(table: dict) -> str:
    """Plain-text rendering of the aggregate table; absent metrics show '-'."""
    lines = []
    width = max((len(k) for k in table), default=0)
    for group in sorted(table):
        metrics = table[group]
        parts = []
        for name in ("accuracy", "act_acc", "rel_acc_s", "rel_acc_l"):
            if name not in metrics:
                continue
            value = metrics[name]
            shown = "-" if value is None else "{:.2f}".format(value)
            parts.append("{} {}".format(name, shown))
        parts.append("n {}".format(metrics["n"]))
        lines.append("{:<{}}  {}".format(group, width, "  ".join(parts)))
    return "\n".join(lines)


def records_to_file(records: Sequence[EvalRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# proxibench eval records v1\n")
        for r in records:
            fh.write(
                json.dumps(
                    {
                        "item_id": r.item_id,
                        "category": r.category,
                        "proximity_kind": r.proximity_kind,
                        "correct": r.correct,
                        "act_correct": r.act_correct,
                        "rel_s": r.rel_s,
                        "rel_l": r.rel_l,
                        "parse_failed": r.parse_failed,
                    }
                )
                + "\n"
            )


def records_from_file(path) -> list[EvalRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            data = json.loads(line)
            records.append(EvalRecord(**data))
    return records
