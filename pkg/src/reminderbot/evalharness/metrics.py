"""Automation scoring over conversation logs.

E2E counts conversations completed without any human involvement; AOR counts
conversations with at least one automated response. Headline numbers are the
unweighted mean of per-day scores, so a slow day weighs the same as a busy
one. AOR−E2E is always derived, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Any, Iterable, Sequence

from ..core.messages import Conversation, Responder, Sender

HUMAN = Responder.HUMAN.value
AUTOMATED = frozenset({Responder.GRAPH.value, Responder.NEURAL.value})


class UndefinedScoreError(Exception):
    """Scoring an empty record set has no defined value."""


@dataclass(frozen=True)
class EvalRecord:
    conversation_id: str
    day: date | None
    completed: bool
    responders: frozenset[str]
    automated_response_count: int
    total_responses: int

    def __post_init__(self) -> None:
        if self.automated_response_count < 0:
            raise ValueError("automated_response_count must be >= 0")
        if self.automated_response_count > self.total_responses:
            raise ValueError("automated_response_count exceeds total_responses")
        unknown = self.responders - AUTOMATED - {HUMAN}
        if unknown:
            raise ValueError(f"unknown responders: {sorted(unknown)}")
        # a completed task implies someone responded; if no human did,
        # an automated engine must have
        if self.completed and HUMAN not in self.responders and self.automated_response_count < 1:
            raise ValueError("completed without human requires an automated response")

    @property
    def e2e_qualifying(self) -> bool:
        return self.completed and HUMAN not in self.responders

    @property
    def aor_qualifying(self) -> bool:
        return self.automated_response_count >= 1


def e2e_score(records: Sequence[EvalRecord]) -> float:
    """Percent of conversations completed with zero human intervention."""
    if not records:
        raise UndefinedScoreError("e2e score of an empty log is undefined")
    return 100.0 * sum(r.e2e_qualifying for r in records) / len(records)


def aor_score(records: Sequence[EvalRecord]) -> float:
    """Percent of conversations with at least one automated response."""
    if not records:
        raise UndefinedScoreError("aor score of an empty log is undefined")
    return 100.0 * sum(r.aor_qualifying for r in records) / len(records)


@dataclass(frozen=True)
class DayScore:
    day: date | None
    e2e_percent: float
    aor_percent: float
    records: int

    @property
    def aor_minus_e2e(self) -> float:
        return self.aor_percent - self.e2e_percent


@dataclass(frozen=True)
class ScoreReport:
    e2e_percent: float
    aor_percent: float
    per_day: tuple[DayScore, ...]

    @property
    def aor_minus_e2e(self) -> float:
        return self.aor_percent - self.e2e_percent

    def to_dict(self) -> dict[str, Any]:
        return {
            "e2e_percent": round(self.e2e_percent, 2),
            "aor_percent": round(self.aor_percent, 2),
            "aor_minus_e2e": round(self.aor_minus_e2e, 2),
            "per_day": [
                {
                    "day": d.day.isoformat() if d.day else None,
                    "e2e_percent": round(d.e2e_percent, 2),
                    "aor_percent": round(d.aor_percent, 2),
                    "aor_minus_e2e": round(d.aor_minus_e2e, 2),
                    "records": d.records,
                }
                for d in self.per_day
            ],
        }


def daily_mean(days: Sequence[DayScore]) -> ScoreReport:
    """Unweighted arithmetic mean of per-day percentages."""
    if not days:
        raise UndefinedScoreError("mean over zero days is undefined")
    e2e = sum(d.e2e_percent for d in days) / len(days)
    aor = sum(d.aor_percent for d in days) / len(days)
    return ScoreReport(e2e_percent=e2e, aor_percent=aor, per_day=tuple(days))


def score_records(records: Sequence[EvalRecord]) -> ScoreReport:
    """Per-day scores plus their unweighted mean.

    Days are taken from the records when every record carries one; otherwise
    the whole log is scored as a single unlabeled day.
    """
    if not records:
        raise UndefinedScoreError("cannot score an empty log")
    if all(r.day is not None for r in records):
        by_day: dict[date, list[EvalRecord]] = {}
        for r in records:
            assert r.day is not None
            by_day.setdefault(r.day, []).append(r)
        days = [
            DayScore(day, e2e_score(rs), aor_score(rs), len(rs))
            for day, rs in sorted(by_day.items())
        ]
    else:
        days = [DayScore(None, e2e_score(records), aor_score(records), len(records))]
    return daily_mean(days)


def record_from_conversation(conversation: Conversation) -> EvalRecord:
    """Reduce one logged conversation to its scoring facts."""
    responders: set[str] = set()
    automated = 0
    total = 0
    for msg in conversation.messages:
        if msg.sender is not Sender.ASSISTANT:
            continue
        total += 1
        if msg.responder is not None:
            responders.add(msg.responder.value)
            if msg.responder.value in AUTOMATED:
                automated += 1
    return EvalRecord(
        conversation_id=conversation.id,
        day=conversation.day,
        completed=conversation.completed,
        responders=frozenset(responders),
        automated_response_count=automated,
        total_responses=total,
    )


def score_conversations(conversations: Iterable[Conversation]) -> ScoreReport:
    return score_records([record_from_conversation(c) for c in conversations])


def records_from_events(events: Iterable[dict]) -> list[EvalRecord]:
    """Reduce a service event log (one JSON object per line) to records.

    A session counts as completed when any action fired; a handoff event puts
    the would-be human turn into the responder set even if no human message
    was logged afterwards.
    """
    sessions: dict[str, dict] = {}
    order: list[str] = []
    for e in events:
        sid = e.get("session_id")
        if not sid:
            continue
        s = sessions.get(sid)
        if s is None:
            s = {"day": None, "completed": False, "responders": set(), "auto": 0, "total": 0}
            sessions[sid] = s
            order.append(sid)
        kind = e.get("event")
        if s["day"] is None and e.get("day"):
            s["day"] = date.fromisoformat(e["day"])
        if kind == "message":
            m = e.get("message") or {}
            if m.get("sender") == Sender.ASSISTANT.value:
                s["total"] += 1
                r = m.get("responder")
                if r:
                    s["responders"].add(r)
                    if r in AUTOMATED:
                        s["auto"] += 1
        elif kind == "action_fired":
            s["completed"] = True
        elif kind == "handoff":
            s["responders"].add(HUMAN)
    return [
        EvalRecord(
            conversation_id=sid,
            day=sessions[sid]["day"],
            completed=sessions[sid]["completed"],
            responders=frozenset(sessions[sid]["responders"]),
            automated_response_count=sessions[sid]["auto"],
            total_responses=sessions[sid]["total"],
        )
        for sid in order
    ]
