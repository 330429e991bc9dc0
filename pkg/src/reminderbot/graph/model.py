"""Dialogue graph domain types.

States carry example user phrasings (templates), a slot table mapping to
prompts, canned responses and an optional action. Directed edges define the
ideal chat-flows; a single Generic State catches FAQs and casual messages.
The graph is immutable after loading and shared freely between sessions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..core.messages import ACTION_TAG_RE, Message, StructuredElement
from ..entities.types import EntityType


class GraphError(Exception):
    """Raised for invalid graph definitions or engine contract violations."""


class ActionKind(str, Enum):
    CREATE_REMINDER = "create_reminder"
    CANCEL_REMINDER = "cancel_reminder"
    VIEW_REMINDERS = "view_reminders"
    MODIFY_REMINDER = "modify_reminder"


@dataclass
class SlotSpec:
    name: str
    entity_type: EntityType
    required: bool
    prompt: str
    element: StructuredElement | None = None


@dataclass
class ActionSpec:
    tag: str
    kind: ActionKind
    required_slots: list[str]
    ack_template: str

    def __post_init__(self) -> None:
        if not ACTION_TAG_RE.match(self.tag):
            raise GraphError(f"action tag does not match the tag grammar: {self.tag!r}")


@dataclass
class GraphState:
    id: str
    intent_name: str
    templates: list[str]
    slot_table: list[SlotSpec] = field(default_factory=list)
    responses: dict[str, str] = field(default_factory=dict)
    response_elements: dict[str, StructuredElement] = field(default_factory=dict)
    action: ActionSpec | None = None
    is_generic: bool = False
    entry: bool = False

    def prompt_order(self) -> list[SlotSpec]:
        """Slots in prompting order: definition order, required first."""
        return sorted(self.slot_table, key=lambda s: not s.required)

    def effective_required(self) -> list[SlotSpec]:
        """Slots that must be filled before the state's action may fire."""
        needed = set(self.action.required_slots) if self.action else set()
        return [s for s in self.prompt_order() if s.required or s.name in needed]


@dataclass
class DialogueGraph:
    states: dict[str, GraphState]
    edges: list[tuple[str, str]]

    def __post_init__(self) -> None:
        self._successors: dict[str, list[str]] = {}
        for frm, to in self.edges:
            self._successors.setdefault(frm, []).append(to)

    def successors(self, state_id: str) -> list[str]:
        return self._successors.get(state_id, [])

    def generic_state(self) -> GraphState:
        return next(s for s in self.states.values() if s.is_generic)

    def entry_states(self) -> list[GraphState]:
        return [s for s in self.states.values() if s.entry]

    def state_by_action_tag(self, tag: str) -> GraphState | None:
        for state in self.states.values():
            if state.action is not None and state.action.tag == tag:
                return state
        return None

    def all_templates(self) -> list[tuple[str, str]]:
        return [(s.id, t) for s in self.states.values() for t in s.templates]


@dataclass
class GraphDecision:
    matched_state: str | None
    score: float
    response: Message | None = None
    action_fired: ActionSpec | None = None
    slots_missing: list[str] = field(default_factory=list)
    # slot name -> normalized value, captured when an action fires; the engine
    # consumes the state's slots at that point so values must travel here
    slot_values: dict[str, object] = field(default_factory=dict)
