"""Human-verification service for generated items.

Reviewers page through items, inspect one with its eight frame references,
and submit accept / reject / edit verdicts. Every verdict appends to a
durable JSONL log (replayed on restart), re-verdicts are allowed but
nothing ever returns to pending, and a per-item version token makes
concurrent edits fail loudly instead of silently overwriting each other.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    ConcurrentEditConflict,
    IllegalTransition,
    ProxibenchError,
    UnknownItem,
)
from .evalharness import STREAM_RATE_HZ, frame_reference_indices
from .forge import item_to_record

REJECT_REASONS = (
    "not answerable",
    "wrong answer",
    "bad clip",
    "ambiguous options",
)


class ReviewStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    EDITED = "edited"


@dataclass
class ReviewState:
    """Current review position of one item, plus its full verdict history."""

    item_id: str
    status: ReviewStatus = ReviewStatus.PENDING
    verdict_note: str = ""
    reject_reason: Optional[str] = None
    edited_payload: Optional[dict] = None
    reviewer_id: str = ""
    timestamp: Optional[float] = None
    history: list = field(default_factory=list)

    @property
    def version_token(self) -> str:
        return str(len(self.history))

    def to_record(self) -> dict:
        return {
            "item_id": self.item_id,
            "status": self.status.value,
            "verdict_note": self.verdict_note,
            "reject_reason": self.reject_reason,
            "edited_payload": self.edited_payload,
            "reviewer_id": self.reviewer_id,
            "timestamp": self.timestamp,
            "version_token": self.version_token,
        }


class VerdictRequest(BaseModel):
    action: Literal["accept", "reject", "edit"]
    note: str = ""
    reason: Optional[
        Literal["not answerable", "wrong answer", "bad clip", "ambiguous options"]
    ] = None
    payload: Optional[dict] = None


_ACTION_STATUS = {
    "accept": ReviewStatus.ACCEPTED,
    "reject": ReviewStatus.REJECTED,
    "edit": ReviewStatus.EDITED,
}


class ReviewStore:
    """Items plus review state; writes serialized and logged append-only."""

    def __init__(self, items, log_path=None, clock=time.time):
        self._items = {item.id: item for item in items}
        if len(self._items) != len(items):
            raise ValueError("duplicate item ids in review set")
        self._order = [item.id for item in items]
        self._states = {iid: ReviewState(iid) for iid in self._order}
        self._log_path = log_path
        self._clock = clock
        self._lock = threading.Lock()
        if log_path is not None:
            self._replay_log()

    def _replay_log(self) -> None:
        try:
            fh = open(self._log_path, "r", encoding="utf-8")
        except FileNotFoundError:
            return
        with fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                entry = json.loads(line)
                state = self._states.get(entry["item_id"])
                if state is not None:
                    self._apply(state, entry)

    @staticmethod
    def _apply(state: ReviewState, entry: dict) -> None:
        state.status = ReviewStatus(entry["status"])
        state.verdict_note = entry.get("note", "")
        state.reject_reason = entry.get("reason")
        state.edited_payload = entry.get("payload")
        state.reviewer_id = entry.get("reviewer_id", "")
        state.timestamp = entry.get("timestamp")
        state.history.append(entry)

    def _append_log(self, entry: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def item(self, item_id: str):
        if item_id not in self._items:
            raise UnknownItem("no item with id {!r}".format(item_id))
        return self._items[item_id]

    def state(self, item_id: str) -> ReviewState:
        self.item(item_id)
        return self._states[item_id]

    def list_items(
        self,
        category: Optional[str] = None,
        status: Optional[str] = None,
        limit: int = 50,
        offset: int = 0,
    ) -> tuple[list, int]:
        selected = []
        for iid in self._order:
            item = self._items[iid]
            if category is not None and item.category.value != category:
                continue
            if status is not None and self._states[iid].status.value != status:
                continue
            selected.append(item)
        return selected[offset : offset + limit], len(selected)

    def submit(
        self,
        item_id: str,
        verdict: VerdictRequest,
        reviewer_id: str,
        version_token: str,
    ) -> ReviewState:
        with self._lock:
            state = self.state(item_id)
            if version_token != state.version_token:
                raise ConcurrentEditConflict(
                    "token {!r} is stale; item is at {!r}".format(
                        version_token, state.version_token
                    )
                )
            if verdict.action == "edit" and verdict.payload is None:
                raise IllegalTransition("an edit verdict must carry a payload")
            if verdict.action == "reject" and verdict.reason is None:
                raise IllegalTransition(
                    "a reject verdict must carry one of the reasons {}".format(
                        list(REJECT_REASONS)
                    )
                )
            entry = {
                "item_id": item_id,
                "action": verdict.action,
                "status": _ACTION_STATUS[verdict.action].value,
                "note": verdict.note,
                "reason": verdict.reason,
                "payload": verdict.payload,
                "reviewer_id": reviewer_id,
                "timestamp": self._clock(),
                "token_before": state.version_token,
            }
            self._apply(state, entry)
            self._append_log(entry)
            return state

    def export(self) -> list:
        out = []
        for iid in self._order:
            state = self._states[iid]
            if state.status in (ReviewStatus.ACCEPTED, ReviewStatus.EDITED):
                out.append((self._items[iid], state))
        return out


def _frame_refs(item) -> list:
    clip = item.clip
    n = max(1, int(round(clip.duration * STREAM_RATE_HZ)))
    return [
        "{}@{}".format(clip.stream_id, i) for i in frame_reference_indices(n)
    ]


def _item_view(item, state: ReviewState) -> dict:
    return {
        "item": item_to_record(item),
        "review": state.to_record(),
        "version_token": state.version_token,
        "frame_refs": _frame_refs(item),
    }


def create_app(store: ReviewStore) -> FastAPI:
    app = FastAPI(title="proxibench review")

    @app.exception_handler(ProxibenchError)
    async def _domain_error(request: Request, exc: ProxibenchError):
        codes = {
            UnknownItem: 404,
            IllegalTransition: 409,
            ConcurrentEditConflict: 409,
        }
        return JSONResponse(
            status_code=codes.get(type(exc), 400),
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/items")
    def list_items(
        category: Optional[str] = Query(default=None),
        status: Optional[str] = Query(default=None),
        limit: int = Query(default=50, ge=1, le=500),
        offset: int = Query(default=0, ge=0),
    ):
        items, total = store.list_items(category, status, limit, offset)
        return {
            "items": [_item_view(item, store.state(item.id)) for item in items],
            "total": total,
            "limit": limit,
            "offset": offset,
        }

    @app.get("/items/{item_id:path}/verdicts")
    def verdict_history(item_id: str):
        state = store.state(item_id)
        return {"item_id": item_id, "history": state.history}

    @app.get("/items/{item_id:path}")
    def get_item(item_id: str):
        return _item_view(store.item(item_id), store.state(item_id))

    @app.post("/items/{item_id:path}/verdict")
    def post_verdict(
        item_id: str,
        verdict: VerdictRequest,
        x_review_token: str = Header(),
        x_reviewer_id: str = Header(),
    ):
        state = store.submit(item_id, verdict, x_reviewer_id, x_review_token)
        return {
            "review": state.to_record(),
            "version_token": state.version_token,
        }

    @app.get("/export")
    def export():
        return {
            "items": [
                {"item": item_to_record(item), "review": state.to_record()}
                for item, state in store.export()
            ]
        }

    return app


def serve(store: ReviewStore, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the review service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(store), host=host, port=port)
