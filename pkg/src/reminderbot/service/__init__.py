from .api import AppState, ChatSession, ServiceConfig, create_app
from .reminders import (
    Channel,
    ConflictError,
    NotFoundError,
    Reminder,
    ReminderBook,
    ReminderKind,
    ReminderStatus,
    ValidationError,
    parse_frequency,
    resolve_date_marker,
)
from .store import Journal, JournalError

__all__ = [
    "AppState",
    "ChatSession",
    "ServiceConfig",
    "create_app",
    "Channel",
    "ConflictError",
    "NotFoundError",
    "Reminder",
    "ReminderBook",
    "ReminderKind",
    "ReminderStatus",
    "ValidationError",
    "parse_frequency",
    "resolve_date_marker",
    "Journal",
    "JournalError",
]
