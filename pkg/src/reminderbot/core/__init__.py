from .messages import (
    ACTION_TAG_RE,
    DEFAULT_CONTEXT_BUDGET,
    EOM,
    EOT,
    Conversation,
    DomainError,
    ElementKind,
    Message,
    MessageKind,
    OrderingError,
    Responder,
    Sender,
    StructuredElement,
    append_message,
    build_context,
    message_tokens,
    new_message_id,
)
from .logio import read_log, write_log
from .session import SessionState

__all__ = [
    "SessionState",
    "ACTION_TAG_RE",
    "DEFAULT_CONTEXT_BUDGET",
    "EOM",
    "EOT",
    "Conversation",
    "DomainError",
    "ElementKind",
    "Message",
    "MessageKind",
    "OrderingError",
    "Responder",
    "Sender",
    "StructuredElement",
    "append_message",
    "build_context",
    "message_tokens",
    "new_message_id",
    "read_log",
    "write_log",
]
