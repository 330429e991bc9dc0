"""HTTP surface around the routing engine and the reminder book.

Every outbound item is an envelope carrying exactly one of a message, a
structured element, or a handoff flag. Sessions serialize their own turns;
the clock is owned by the app and only moves through the admin tick
endpoint, which also fires due reminders into their originating sessions.
Each state change is appended to the event log (one JSON object per line)
in the shape the evaluation harness ingests.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.staticfiles import StaticFiles

from ..core.messages import (
    Conversation,
    ElementKind,
    Message,
    MessageKind,
    Responder,
    Sender,
    StructuredElement,
    new_message_id,
)
from ..core.session import SessionState
from ..entities.recognizer import EntityRecognizer
from ..graph.engine import build_matcher
from ..graph.loader import load_default_graph, load_graph
from ..hybrid.controller import Engine, HybridConfig, RoutingDecision, handle_message
from ..nn import KERNEL_BACKEND
from ..nn.checkpoint import load_checkpoint
from .reminders import (
    Channel,
    ConflictError,
    NotFoundError,
    ReminderBook,
    ReminderKind,
    ReminderStatus,
    ValidationError,
    resolve_date_marker,
)
from .store import Journal

logger = logging.getLogger("reminderbot.service")

DEFAULT_START_TIME = datetime(2017, 4, 17, 9, 0)

ACTION_KINDS = {
    "_api_call_reminder_wakeup_": (ReminderKind.WAKEUP, Channel.CALL),
    "_api_call_reminder_medicine_": (ReminderKind.MEDICINE, Channel.CALL),
    "_api_call_reminder_drink_water_": (ReminderKind.DRINK_WATER, Channel.MESSAGE),
}


@dataclass
class ServiceConfig:
    graph_path: str | None = None
    checkpoint_path: str | None = None
    store_path: str | None = None
    log_path: str | None = None
    frontend_dir: str | None = None
    start_time: datetime = DEFAULT_START_TIME
    tau_sim: float = 0.35
    max_neural_turns: int = 3
    max_unfavorable: int = 2

    def hybrid(self) -> HybridConfig:
        return HybridConfig(
            tau_sim=self.tau_sim,
            max_neural_turns=self.max_neural_turns,
            max_unfavorable=self.max_unfavorable,
        )


@dataclass
class ChatSession:
    session_id: str
    user_id: str
    state: SessionState
    conversation: Conversation
    envelopes: list[dict[str, Any]] = field(default_factory=list)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    fresh: asyncio.Event = field(default_factory=asyncio.Event)


class AppState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.graph = (
            load_graph(config.graph_path) if config.graph_path else load_default_graph()
        )
        self.index = build_matcher(self.graph)
        self.model = (
            load_checkpoint(config.checkpoint_path) if config.checkpoint_path else None
        )
        self.recognizer = EntityRecognizer()
        self.hybrid_config = config.hybrid()
        journal = Journal(config.store_path) if config.store_path else None
        self.book = ReminderBook(journal)
        self.sessions: dict[str, ChatSession] = {}
        self.now = config.start_time
        self._log_fh = (
            open(config.log_path, "a", encoding="utf-8") if config.log_path else None
        )

    def log_event(self, event: dict[str, Any]) -> None:
        if self._log_fh is None:
            return
        event = {"day": self.now.date().isoformat(), **event}
        self._log_fh.write(json.dumps(event, separators=(",", ":")) + "\n")
        self._log_fh.flush()

    def now_ms(self) -> int:
        return int(self.now.timestamp() * 1000)


def _choice_text(choice: dict[str, Any]) -> str:
    """A tapped option's label, or a submitted form's values joined."""
    if "label" in choice:
        return str(choice["label"])
    if "values" in choice and isinstance(choice["values"], dict):
        return " ".join(str(v) for v in choice["values"].values() if str(v).strip())
    raise HTTPException(422, "element_choice needs 'label' or 'values'")


def _reminder_card(book: ReminderBook, user_id: str) -> StructuredElement:
    reminders = book.list_for_user(user_id)
    return StructuredElement(
        element_kind=ElementKind.REMINDER_CARD,
        options=[{"label": "Cancel it"}] if reminders else [],
        payload={"reminders": [r.to_dict() for r in reminders]},
    )


def _service_note(app: AppState, text: str) -> Message:
    return Message(
        id=new_message_id(),
        sender=Sender.ASSISTANT,
        kind=MessageKind.TEXT,
        body=text,
        timestamp=app.now_ms(),
        responder=Responder.GRAPH,
    )


def _execute_action(
    app: AppState, chat: ChatSession, decision: RoutingDecision
) -> list[dict[str, Any]]:
    """Apply the fired action to the reminder book; extra envelope items."""
    assert decision.action_executed is not None
    tag = decision.action_executed.tag
    slots = decision.slot_values
    extras: list[dict[str, Any]] = []
    reminder_id: str | None = None
    today = app.now.date()

    try:
        if tag in ACTION_KINDS:
            kind, channel = ACTION_KINDS[tag]
            frequency = slots.get("frequency")
            when_time = slots.get("time")
            when_date = (
                resolve_date_marker(slots["date"], today) if "date" in slots else None
            )
            if frequency is None:
                if when_date is None and when_time is not None:
                    # no date given: next occurrence of that clock time
                    when_date = today
                    if when_time <= app.now.hour * 60 + app.now.minute:
                        when_date = today + timedelta(days=1)
            reminder = app.book.create(
                chat.user_id,
                kind,
                now=app.now,
                channel=channel,
                when_date=when_date,
                when_time=when_time,
                frequency=frequency,
                session_id=chat.session_id,
            )
            reminder_id = reminder.id
        elif tag == "_api_view_reminders_":
            card = _reminder_card(app.book, chat.user_id)
            extras.append({"element": card.to_dict(), "engine": decision.engine})
        elif tag == "_api_cancel_reminder_":
            target = app.book.latest_scheduled(chat.user_id)
            if target is None:
                extras.append(
                    {
                        "message": _service_note(
                            app, "You have no scheduled reminders to cancel."
                        ).to_dict(),
                        "engine": decision.engine,
                    }
                )
            else:
                app.book.cancel(target.id)
                reminder_id = target.id
        else:
            logger.warning("action %s has no service mapping", tag)
    except ConflictError:
        extras.append(
            {
                "message": _service_note(
                    app, "You already have that reminder scheduled."
                ).to_dict(),
                "engine": decision.engine,
            }
        )
    except ValidationError as exc:
        extras.append(
            {
                "message": _service_note(app, f"I cannot schedule that: {exc}").to_dict(),
                "engine": decision.engine,
            }
        )

    app.log_event(
        {
            "event": "action_fired",
            "session_id": chat.session_id,
            "tag": tag,
            "reminder_id": reminder_id,
        }
    )
    chat.conversation.completed = True
    chat.conversation.completion_task = tag
    return extras


def _push_envelopes(chat: ChatSession, items: list[dict[str, Any]]) -> None:
    chat.envelopes.extend(items)
    chat.fresh.set()


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    app_state = AppState(config or ServiceConfig())
    api = FastAPI(title="reminderbot")
    api.state.engine = app_state

    def _get_chat(session_id: str) -> ChatSession:
        chat = app_state.sessions.get(session_id)
        if chat is None:
            raise HTTPException(404, f"no session {session_id}")
        return chat

    def _envelope(sid: str, item: dict[str, Any]) -> dict[str, Any]:
        return {"session_id": sid, "timestamp": app_state.now_ms(), **item}

    @api.post("/sessions")
    async def create_session(body: dict[str, Any] = Body(default={})) -> dict[str, Any]:
        user_id = str(body.get("user_id") or "local")
        session_id = new_message_id()
        chat = ChatSession(
            session_id=session_id,
            user_id=user_id,
            state=SessionState(session_id=session_id),
            conversation=Conversation(id=session_id, day=app_state.now.date()),
        )
        app_state.sessions[session_id] = chat
        app_state.log_event(
            {"event": "session_started", "session_id": session_id, "user_id": user_id}
        )
        return {"session_id": session_id, "user_id": user_id}

    @api.post("/sessions/{session_id}/messages")
    async def post_message(
        session_id: str, body: dict[str, Any] = Body(...)
    ) -> dict[str, Any]:
        chat = _get_chat(session_id)
        text = body.get("text")
        if text is None and "element_choice" in body:
            text = _choice_text(body["element_choice"])
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(422, "need non-empty 'text' or an 'element_choice'")

        async with chat.lock:
            user_msg = Message(
                id=new_message_id(),
                sender=Sender.USER,
                kind=MessageKind.TEXT,
                body=text,
                timestamp=app_state.now_ms(),
            )
            chat.conversation.messages.append(user_msg)
            app_state.log_event(
                {"event": "message", "session_id": session_id, "message": user_msg.to_dict()}
            )

            decision = handle_message(
                chat.state,
                text,
                app_state.graph,
                app_state.index,
                app_state.model,
                app_state.hybrid_config,
                recognizer=app_state.recognizer,
                now_ms=app_state.now_ms(),
                today=app_state.now.date(),
            )

            items: list[dict[str, Any]] = []
            if decision.engine == Engine.HANDOFF:
                items.append({"handoff": True, "engine": Engine.HANDOFF})
                app_state.log_event({"event": "handoff", "session_id": session_id})
            else:
                response = decision.response
                assert response is not None
                chat.conversation.messages.append(response)
                app_state.log_event(
                    {
                        "event": "message",
                        "session_id": session_id,
                        "message": response.to_dict(),
                    }
                )
                items.append({"message": response.to_dict(), "engine": decision.engine})
                if response.element is not None:
                    items.append(
                        {"element": response.element.to_dict(), "engine": decision.engine}
                    )
                if decision.action_executed is not None:
                    items.extend(_execute_action(app_state, chat, decision))

            envelopes = [_envelope(session_id, item) for item in items]
            _push_envelopes(chat, envelopes)
            return {
                "session_id": session_id,
                "handoff": chat.state.handed_off,
                "envelopes": envelopes,
                "trace": decision.trace,
            }

    @api.get("/sessions/{session_id}/events")
    async def get_events(
        session_id: str,
        cursor: int = Query(default=0, ge=0),
        wait: float = Query(default=0.0, ge=0.0, le=25.0),
    ) -> dict[str, Any]:
        chat = _get_chat(session_id)
        if wait > 0 and len(chat.envelopes) <= cursor:
            chat.fresh.clear()
            try:
                await asyncio.wait_for(chat.fresh.wait(), timeout=wait)
            except asyncio.TimeoutError:
                pass
        items = chat.envelopes[cursor:]
        return {"cursor": cursor + len(items), "envelopes": items}

    @api.get("/reminders")
    async def list_reminders(user_id: str = Query(default="local")) -> dict[str, Any]:
        return {
            "reminders": [r.to_dict() for r in app_state.book.list_for_user(user_id)]
        }

    @api.post("/reminders/{reminder_id}/cancel")
    async def cancel_reminder(reminder_id: str) -> dict[str, Any]:
        try:
            reminder = app_state.book.cancel(reminder_id)
        except NotFoundError as exc:
            raise HTTPException(404, str(exc)) from None
        return {"reminder": reminder.to_dict()}

    @api.get("/health")
    async def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "kernel_backend": KERNEL_BACKEND,
            "model_loaded": app_state.model is not None,
            "sessions": len(app_state.sessions),
            "time": app_state.now.isoformat(),
        }

    @api.post("/admin/tick")
    async def admin_tick(body: dict[str, Any] = Body(default={})) -> dict[str, Any]:
        if "now" in body:
            new_now = datetime.fromisoformat(body["now"])
        elif "advance_seconds" in body:
            new_now = app_state.now + timedelta(seconds=float(body["advance_seconds"]))
        else:
            new_now = app_state.now
        if new_now < app_state.now:
            raise HTTPException(422, "clock cannot move backwards")
        app_state.now = new_now

        fired = app_state.book.tick(app_state.now)
        notified = []
        for reminder, message in fired:
            chat = (
                app_state.sessions.get(reminder.session_id)
                if reminder.session_id
                else None
            )
            app_state.log_event(
                {
                    "event": "message",
                    "session_id": reminder.session_id,
                    "message": message.to_dict(),
                }
            )
            if chat is not None:
                chat.conversation.messages.append(message)
                _push_envelopes(
                    chat,
                    [
                        _envelope(
                            chat.session_id,
                            {"message": message.to_dict(), "engine": Engine.GRAPH},
                        )
                    ],
                )
            notified.append({"reminder_id": reminder.id, "body": message.body})
        return {"time": app_state.now.isoformat(), "notifications": notified}

    frontend = config.frontend_dir if config else None
    if frontend and Path(frontend).is_dir():
        api.mount("/", StaticFiles(directory=frontend, html=True), name="frontend")

    return api
