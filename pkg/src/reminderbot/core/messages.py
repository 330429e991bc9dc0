"""Shared domain types: messages, conversations and live session state.

Everything that the graph engine, the generative engine and the service
exchange is expressed in these types. Conversations are append-only and
single-writer per session; the types themselves carry no locking.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Any, Iterable

ACTION_TAG_RE = re.compile(r"^_api_[a-z_]+_$")

# {time}, {date}, ... placeholders inside response templates
PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")

# Separator tokens used when flattening a conversation into one token stream.
EOM = "_eom_"  # boundary between messages of the same speaker
EOT = "_eot_"  # boundary where the speaker switches

DEFAULT_CONTEXT_BUDGET = 160


class Sender(str, Enum):
    USER = "user"
    ASSISTANT = "assistant"


class Responder(str, Enum):
    GRAPH = "graph"
    NEURAL = "neural"
    HUMAN = "human"
    SYSTEM = "system"


class MessageKind(str, Enum):
    TEXT = "text"
    UI_ELEMENT = "ui_element"
    ACTION_TAG = "action_tag"
    NOTIFICATION = "notification"


class ElementKind(str, Enum):
    QUICK_REPLIES = "quick_replies"
    FORM = "form"
    REMINDER_CARD = "reminder_card"


class DomainError(Exception):
    """Base class for contract violations in the domain layer."""


class OrderingError(DomainError):
    """Raised when a message would break timestamp ordering."""


@dataclass
class StructuredElement:
    """A non-text chat element: quick replies, an input form or a card."""

    element_kind: ElementKind
    options: list[dict[str, str]] = field(default_factory=list)
    fields: list[dict[str, str]] = field(default_factory=list)
    payload: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.element_kind is ElementKind.QUICK_REPLIES and not self.options:
            raise DomainError("quick_replies element needs at least one option")
        if self.element_kind is ElementKind.FORM and not self.fields:
            raise DomainError("form element needs at least one field")

    def to_dict(self) -> dict[str, Any]:
        return {
            "element_kind": self.element_kind.value,
            "options": self.options,
            "fields": self.fields,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StructuredElement":
        return cls(
            element_kind=ElementKind(d["element_kind"]),
            options=list(d.get("options") or []),
            fields=list(d.get("fields") or []),
            payload=dict(d.get("payload") or {}),
        )


@dataclass
class Message:
    """One chat turn element.

    ``responder`` is set only on assistant messages and records which engine
    (or human) produced it. ``body`` of an action_tag message must match the
    action tag grammar ``_api_[a-z_]+_``.
    """

    id: str
    sender: Sender
    kind: MessageKind
    body: str
    timestamp: int
    responder: Responder | None = None
    element: StructuredElement | None = None

    def __post_init__(self) -> None:
        if self.sender is Sender.USER and self.responder is not None:
            raise DomainError("user messages carry no responder")
        if self.kind is MessageKind.ACTION_TAG and not ACTION_TAG_RE.match(self.body):
            raise DomainError(f"invalid action tag: {self.body!r}")
        if self.element is not None:
            self.element.validate()

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "sender": self.sender.value,
            "kind": self.kind.value,
            "body": self.body,
            "timestamp": self.timestamp,
        }
        if self.responder is not None:
            d["responder"] = self.responder.value
        if self.element is not None:
            d["element"] = self.element.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Message":
        return cls(
            id=d["id"],
            sender=Sender(d["sender"]),
            kind=MessageKind(d["kind"]),
            body=d["body"],
            timestamp=int(d["timestamp"]),
            responder=Responder(d["responder"]) if d.get("responder") else None,
            element=StructuredElement.from_dict(d["element"]) if d.get("element") else None,
        )


def new_message_id() -> str:
    return uuid.uuid4().hex[:12]


@dataclass
class Conversation:
    """An ordered message sequence with responder attribution."""

    id: str
    messages: list[Message] = field(default_factory=list)
    completed: bool = False
    completion_task: str | None = None
    day: date | None = None
    domain: str | None = None

    def last_timestamp(self) -> int | None:
        return self.messages[-1].timestamp if self.messages else None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "completed": self.completed,
            "completion_task": self.completion_task,
            "day": self.day.isoformat() if self.day else None,
            "messages": [m.to_dict() for m in self.messages],
        }
        if self.domain is not None:
            d["domain"] = self.domain
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Conversation":
        return cls(
            id=d["id"],
            messages=[Message.from_dict(m) for m in d.get("messages", [])],
            completed=bool(d.get("completed", False)),
            completion_task=d.get("completion_task"),
            day=date.fromisoformat(d["day"]) if d.get("day") else None,
            domain=d.get("domain"),
        )


def append_message(conversation: Conversation, message: Message) -> Conversation:
    """Append ``message`` in place, enforcing non-decreasing timestamps."""
    last = conversation.last_timestamp()
    if last is not None and message.timestamp < last:
        raise OrderingError(
            f"message timestamp {message.timestamp} precedes last timestamp {last}"
        )
    conversation.messages.append(message)
    return conversation


def message_tokens(message: Message) -> list[str]:
    """Tokens a message contributes to the flat context stream.

    Structured elements are encoded as a single ``_elem_<kind>_`` marker
    followed by whatever label text the message body carries.
    """
    tokens: list[str] = []
    if message.kind is MessageKind.UI_ELEMENT and message.element is not None:
        tokens.append(f"_elem_{message.element.element_kind.value}_")
    tokens.extend(message.body.split())
    return tokens


def build_context(
    conversation: Conversation | Iterable[Message],
    budget_words: int = DEFAULT_CONTEXT_BUDGET,
) -> list[str]:
    """Flatten a conversation into one token sequence, newest-biased.

    Messages are concatenated oldest to newest. A boundary between two
    messages from the same speaker is marked ``_eom_``; a speaker switch is
    marked ``_eot_``. The result keeps only the last ``budget_words`` tokens,
    which keeps the most recent messages and never splits the boundary
    markers (they are tokens themselves).
    """
    if budget_words < 1:
        raise ValueError("budget_words must be >= 1")
    messages = conversation.messages if isinstance(conversation, Conversation) else list(conversation)
    tokens: list[str] = []
    prev_sender: Sender | None = None
    for msg in messages:
        if prev_sender is not None:
            tokens.append(EOM if msg.sender == prev_sender else EOT)
        tokens.extend(message_tokens(msg))
        prev_sender = msg.sender
    return tokens[-budget_words:]
