from .recognizer import (
    DEFAULT_REFERENCE_DATE,
    EntityRecognizer,
    RuleError,
    format_date,
    format_time,
    resolve_date_value,
)
from .types import (
    ASSISTANT_NAME_TAG,
    TAG_BY_TYPE,
    EntitySet,
    EntitySpan,
    EntityType,
    merge_into,
)

__all__ = [
    "ASSISTANT_NAME_TAG",
    "DEFAULT_REFERENCE_DATE",
    "EntityRecognizer",
    "EntitySet",
    "EntitySpan",
    "EntityType",
    "RuleError",
    "TAG_BY_TYPE",
    "format_date",
    "format_time",
    "merge_into",
    "resolve_date_value",
]
