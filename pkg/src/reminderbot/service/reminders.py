"""Reminder persistence and due-notification scheduling.

Reminders are one-shot (a concrete date and time) or recurring (a frequency
like ``hourly:2`` or ``daily``). The book keeps every reminder in memory and
journals each mutation, so reopening the journal reproduces the exact state.
All time arithmetic takes an injected ``now``; nothing here reads the wall
clock.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from datetime import date, datetime, time as dtime, timedelta
from enum import Enum
from typing import Any

from ..core.messages import Message, MessageKind, Responder, Sender, new_message_id
from .store import Journal


class ReminderKind(str, Enum):
    WAKEUP = "wakeup"
    MEDICINE = "medicine"
    DRINK_WATER = "drink_water"
    GENERIC_TASK = "generic_task"


class Channel(str, Enum):
    MESSAGE = "message"
    CALL = "call"


class ReminderStatus(str, Enum):
    SCHEDULED = "scheduled"
    FIRED = "fired"
    CANCELLED = "cancelled"


class ValidationError(Exception):
    pass


class ConflictError(Exception):
    pass


class NotFoundError(Exception):
    pass


NOTIFICATION_BODY = {
    ReminderKind.WAKEUP: "Reminder: time for your wake up call.",
    ReminderKind.MEDICINE: "Reminder: time to take your medicine.",
    ReminderKind.DRINK_WATER: "Reminder: it is time to drink water.",
}


def parse_frequency(frequency: str) -> timedelta:
    """Period of one recurrence; raises on unknown shapes."""
    if frequency == "hourly":
        return timedelta(hours=1)
    if frequency.startswith("hourly:"):
        n = int(frequency.split(":", 1)[1])
        if not 1 <= n <= 24:
            raise ValidationError(f"hourly step out of range: {n}")
        return timedelta(hours=n)
    if frequency == "daily":
        return timedelta(days=1)
    if frequency == "weekly":
        return timedelta(weeks=1)
    raise ValidationError(f"unknown frequency: {frequency!r}")


def resolve_date_marker(value: Any, today: date) -> date:
    """'today'/'tomorrow' markers, ISO strings, or date objects."""
    if isinstance(value, date):
        return value
    if value == "today":
        return today
    if value == "tomorrow":
        return today + timedelta(days=1)
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ValidationError(f"not a date: {value!r}") from None


def minutes_to_time(minutes: int) -> dtime:
    if not 0 <= minutes <= 1439:
        raise ValidationError(f"time of day out of range: {minutes}")
    return dtime(hour=minutes // 60, minute=minutes % 60)


@dataclass(frozen=True)
class Reminder:
    id: str
    user_id: str
    kind: ReminderKind
    channel: Channel
    status: ReminderStatus
    date: date | None = None
    time: int | None = None  # minutes since midnight
    frequency: str | None = None
    task_text: str | None = None
    session_id: str | None = None
    created_at: datetime | None = None
    next_fire_at: datetime | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "kind": self.kind.value,
            "channel": self.channel.value,
            "status": self.status.value,
            "date": self.date.isoformat() if self.date else None,
            "time": self.time,
            "frequency": self.frequency,
            "task_text": self.task_text,
            "session_id": self.session_id,
            "created_at": self.created_at.isoformat() if self.created_at else None,
            "next_fire_at": self.next_fire_at.isoformat() if self.next_fire_at else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Reminder":
        return cls(
            id=d["id"],
            user_id=d["user_id"],
            kind=ReminderKind(d["kind"]),
            channel=Channel(d["channel"]),
            status=ReminderStatus(d["status"]),
            date=date.fromisoformat(d["date"]) if d.get("date") else None,
            time=d.get("time"),
            frequency=d.get("frequency"),
            task_text=d.get("task_text"),
            session_id=d.get("session_id"),
            created_at=datetime.fromisoformat(d["created_at"]) if d.get("created_at") else None,
            next_fire_at=datetime.fromisoformat(d["next_fire_at"]) if d.get("next_fire_at") else None,
        )


def _initial_next_fire(
    kind: ReminderKind,
    when_date: date | None,
    when_time: int | None,
    frequency: str | None,
    now: datetime,
) -> datetime:
    if frequency is not None:
        period = parse_frequency(frequency)
        if when_time is not None:
            base = datetime.combine(when_date or now.date(), minutes_to_time(when_time))
            while base <= now:
                base += period
            return base
        return now + period
    if when_date is None or when_time is None:
        raise ValidationError(f"one-shot {kind.value} reminder needs both date and time")
    when = datetime.combine(when_date, minutes_to_time(when_time))
    if when <= now:
        raise ValidationError(f"{when.isoformat()} is in the past")
    return when


class ReminderBook:
    """In-memory reminder table with journaled mutations."""

    def __init__(self, journal: Journal | None = None):
        self.journal = journal
        self.reminders: dict[str, Reminder] = {}
        if journal is not None:
            for record in journal.replay():
                self._apply(record)

    def _apply(self, record: dict[str, Any]) -> None:
        op = record.get("op")
        if op == "create":
            r = Reminder.from_dict(record["reminder"])
            self.reminders[r.id] = r
        elif op == "update":
            r = Reminder.from_dict(record["reminder"])
            if r.id not in self.reminders:
                raise NotFoundError(f"journal updates unknown reminder {r.id}")
            self.reminders[r.id] = r
        else:
            raise ValidationError(f"unknown journal op: {op!r}")

    def _journal(self, op: str, reminder: Reminder) -> None:
        if self.journal is not None:
            self.journal.append({"op": op, "reminder": reminder.to_dict()})

    def create(
        self,
        user_id: str,
        kind: ReminderKind,
        *,
        now: datetime,
        channel: Channel = Channel.MESSAGE,
        when_date: date | None = None,
        when_time: int | None = None,
        frequency: str | None = None,
        task_text: str | None = None,
        session_id: str | None = None,
    ) -> Reminder:
        for existing in self.reminders.values():
            if (
                existing.status is ReminderStatus.SCHEDULED
                and existing.user_id == user_id
                and existing.kind is kind
                and existing.date == when_date
                and existing.time == when_time
            ):
                raise ConflictError(
                    f"duplicate {kind.value} reminder for {user_id} at "
                    f"({when_date}, {when_time})"
                )
        next_fire = _initial_next_fire(kind, when_date, when_time, frequency, now)
        reminder = Reminder(
            id=uuid.uuid4().hex[:12],
            user_id=user_id,
            kind=kind,
            channel=channel,
            status=ReminderStatus.SCHEDULED,
            date=when_date,
            time=when_time,
            frequency=frequency,
            task_text=task_text,
            session_id=session_id,
            created_at=now,
            next_fire_at=next_fire,
        )
        self.reminders[reminder.id] = reminder
        self._journal("create", reminder)
        return reminder

    def get(self, reminder_id: str) -> Reminder:
        try:
            return self.reminders[reminder_id]
        except KeyError:
            raise NotFoundError(f"no reminder {reminder_id}") from None

    def cancel(self, reminder_id: str) -> Reminder:
        """Cancelling twice is a no-op success; cancelled never fires again."""
        reminder = self.get(reminder_id)
        if reminder.status is ReminderStatus.CANCELLED:
            return reminder
        reminder = replace(reminder, status=ReminderStatus.CANCELLED, next_fire_at=None)
        self.reminders[reminder_id] = reminder
        self._journal("update", reminder)
        return reminder

    def list_for_user(self, user_id: str) -> list[Reminder]:
        """Scheduled first, then fired/cancelled, newest first within group."""
        # dict order is creation order (updates replace in place), so it
        # breaks created_at ties deterministically
        pos = {rid: i for i, rid in enumerate(self.reminders)}
        mine = [r for r in self.reminders.values() if r.user_id == user_id]
        order = {ReminderStatus.SCHEDULED: 0, ReminderStatus.FIRED: 1, ReminderStatus.CANCELLED: 2}
        mine.sort(
            key=lambda r: (
                order[r.status],
                -(r.created_at.timestamp() if r.created_at else 0.0),
                -pos[r.id],
            )
        )
        return mine

    def latest_scheduled(self, user_id: str) -> Reminder | None:
        scheduled = [
            r
            for r in self.reminders.values()
            if r.user_id == user_id and r.status is ReminderStatus.SCHEDULED
        ]
        if not scheduled:
            return None
        # stable sort: ties on created_at resolve to the latest insertion
        scheduled.sort(key=lambda r: r.created_at or datetime.min)
        return scheduled[-1]

    def tick(self, now: datetime) -> list[tuple[Reminder, Message]]:
        """Fire everything due at or before ``now``; once per due instant.

        A recurring reminder that missed several periods (large clock jump)
        emits a single catch-up notification and reschedules past ``now``.
        """
        fired: list[tuple[Reminder, Message]] = []
        for reminder in list(self.reminders.values()):
            if reminder.status is not ReminderStatus.SCHEDULED:
                continue
            if reminder.next_fire_at is None or reminder.next_fire_at > now:
                continue
            if reminder.frequency is None:
                updated = replace(
                    reminder, status=ReminderStatus.FIRED, next_fire_at=None
                )
            else:
                period = parse_frequency(reminder.frequency)
                nxt = reminder.next_fire_at + period
                while nxt <= now:
                    nxt += period
                updated = replace(reminder, next_fire_at=nxt)
            self.reminders[reminder.id] = updated
            self._journal("update", updated)
            body = NOTIFICATION_BODY.get(
                reminder.kind, reminder.task_text or "Reminder."
            )
            message = Message(
                id=new_message_id(),
                sender=Sender.ASSISTANT,
                kind=MessageKind.NOTIFICATION,
                body=body,
                timestamp=int(now.timestamp() * 1000),
                responder=Responder.GRAPH,
            )
            fired.append((updated, message))
        return fired
