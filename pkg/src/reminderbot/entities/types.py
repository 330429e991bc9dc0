"""Entity types, spans and the per-session entity memory."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union


class EntityType(str, Enum):
    DATE = "date"
    TIME = "time"
    PHONE = "phone"
    FREQUENCY = "frequency"
    PERSON_NAME = "person_name"
    TASK_TEXT = "task_text"


# Placeholder tags substituted for entity surfaces in text. person_name maps
# to a user or assistant tag depending on the span's role.
TAG_BY_TYPE = {
    EntityType.DATE: "_date_",
    EntityType.TIME: "_time_",
    EntityType.PHONE: "_phone_number_",
    EntityType.FREQUENCY: "_frequency_",
    EntityType.PERSON_NAME: "_user_name_",
    EntityType.TASK_TEXT: "_task_",
}
ASSISTANT_NAME_TAG = "_assistant_name_"

EntityValue = Union[str, int]


@dataclass
class EntitySpan:
    """A typed extraction with character offsets into the original text.

    ``value`` is the normalized form: dates become an ISO calendar date or a
    relative marker (today / tomorrow / tonight / weekday:<name>), times
    become minutes from midnight, phones a bare digit string, frequencies one
    of once/hourly/daily/weekly with an optional ":<interval>" suffix, and
    name/task extractions a cleaned string.
    """

    entity_type: EntityType
    surface: str
    start: int
    end: int
    value: EntityValue
    role: str = "user"  # person_name only: "user" or "assistant"

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"bad span offsets [{self.start}, {self.end})")

    @property
    def tag(self) -> str:
        if self.entity_type is EntityType.PERSON_NAME and self.role == "assistant":
            return ASSISTANT_NAME_TAG
        return TAG_BY_TYPE[self.entity_type]

    def overlaps(self, other: "EntitySpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass
class EntitySet:
    """Most recent entity value per type, collected over a session."""

    spans: dict[EntityType, EntitySpan] = field(default_factory=dict)

    def get(self, entity_type: EntityType) -> EntitySpan | None:
        return self.spans.get(entity_type)

    def value(self, entity_type: EntityType) -> EntityValue | None:
        span = self.spans.get(entity_type)
        return span.value if span else None

    def has(self, entity_type: EntityType) -> bool:
        return entity_type in self.spans

    def value_map(self) -> dict[str, EntityValue]:
        return {t.value: s.value for t, s in self.spans.items()}

    def copy(self) -> "EntitySet":
        return EntitySet(dict(self.spans))

    def __len__(self) -> int:
        return len(self.spans)


def merge_into(entity_set: EntitySet, spans: Iterable[EntitySpan]) -> EntitySet:
    """Overwrite per-type entries with later spans; other types untouched."""
    for span in spans:
        entity_set.spans[span.entity_type] = span
    return entity_set
