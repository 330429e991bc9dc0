"""Live routing state for one chat session.

All mutation for a session is serialized by its owner (the service keeps one
writer per session); the value itself is a plain record.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..entities.types import EntitySet
from .messages import DEFAULT_CONTEXT_BUDGET, Conversation


@dataclass
class SessionState:
    session_id: str
    current_state_id: str | None = None
    entities: EntitySet = field(default_factory=EntitySet)
    context: list[str] = field(default_factory=list)
    neural_consecutive: int = 0
    unfavorable_count: int = 0
    handed_off: bool = False
    context_budget: int = DEFAULT_CONTEXT_BUDGET
    conversation: Conversation | None = None
    # speaker of the last tokens appended to context, for separator choice
    last_context_sender: str | None = None

    def __post_init__(self) -> None:
        if self.neural_consecutive < 0:
            raise ValueError("neural_consecutive must be >= 0")

    def set_context(self, tokens: list[str]) -> None:
        self.context = tokens[-self.context_budget :]
