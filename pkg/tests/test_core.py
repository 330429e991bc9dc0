"""Message/conversation primitives and the flat context stream."""

from __future__ import annotations

import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reminderbot.core.logio import read_log, write_log
from reminderbot.core.messages import (
    EOM,
    EOT,
    Conversation,
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
from reminderbot.core.session import SessionState
from reminderbot.corpus.pipeline import normalize_orthography


def _msg(body, sender=Sender.USER, ts=0, kind=MessageKind.TEXT, element=None):
    return Message(
        id=new_message_id(),
        sender=sender,
        kind=kind,
        body=body,
        timestamp=ts,
        responder=Responder.GRAPH if sender is Sender.ASSISTANT else None,
        element=element,
    )


class TestMessageTokens:
    def test_text_splits_on_whitespace(self):
        assert message_tokens(_msg("wake  me\tup")) == ["wake", "me", "up"]

    def test_element_marker_precedes_body(self):
        el = StructuredElement(
            element_kind=ElementKind.FORM, fields=({"name": "time"},)
        )
        m = _msg("Pick a time", Sender.ASSISTANT, kind=MessageKind.UI_ELEMENT, element=el)
        assert message_tokens(m) == ["_elem_form_", "Pick", "a", "time"]

    def test_action_tag_is_single_token(self):
        m = _msg("_api_view_reminders_", Sender.ASSISTANT, kind=MessageKind.ACTION_TAG)
        assert message_tokens(m) == ["_api_view_reminders_"]


class TestBuildContext:
    def test_speaker_switch_gets_eot(self):
        conv = Conversation(
            id="c",
            messages=[_msg("hi", ts=1), _msg("hello", Sender.ASSISTANT, ts=2)],
        )
        assert build_context(conv) == ["hi", EOT, "hello"]

    def test_same_speaker_gets_eom(self):
        conv = Conversation(
            id="c",
            messages=[
                _msg("here", Sender.ASSISTANT, ts=1),
                _msg("are your reminders", Sender.ASSISTANT, ts=2),
            ],
        )
        assert build_context(conv) == ["here", EOM, "are", "your", "reminders"]

    def test_budget_keeps_the_tail(self):
        conv = Conversation(
            id="c",
            messages=[_msg("a b c d", ts=1), _msg("e f", Sender.ASSISTANT, ts=2)],
        )
        assert build_context(conv, budget_words=3) == [EOT, "e", "f"]

    def test_accepts_bare_message_iterable(self):
        msgs = [_msg("one", ts=1), _msg("two", ts=2)]
        assert build_context(msgs) == ["one", EOM, "two"]


class TestConversation:
    def test_append_rejects_time_travel(self):
        conv = Conversation(id="c", messages=[_msg("hi", ts=10)])
        with pytest.raises(OrderingError):
            append_message(conv, _msg("late", ts=9))

    def test_append_allows_equal_timestamps(self):
        conv = Conversation(id="c", messages=[_msg("hi", ts=10)])
        append_message(conv, _msg("again", ts=10))
        assert len(conv.messages) == 2

    def test_round_trips_through_dict(self):
        el = StructuredElement(
            element_kind=ElementKind.QUICK_REPLIES, options=[{"label": "Cancel it"}]
        )
        conv = Conversation(
            id="c",
            messages=[
                _msg("view", ts=1),
                _msg("Here", Sender.ASSISTANT, ts=2, kind=MessageKind.UI_ELEMENT, element=el),
            ],
            completed=True,
            completion_task="_api_view_reminders_",
        )
        back = Conversation.from_dict(conv.to_dict())
        assert back == conv

    def test_message_ids_are_unique(self):
        ids = {new_message_id() for _ in range(200)}
        assert len(ids) == 200


class TestLogIO:
    def test_write_then_read_is_identity(self, tmp_path):
        convs = [
            Conversation(id=f"c{i}", messages=[_msg("hi", ts=1)], completed=bool(i % 2))
            for i in range(5)
        ]
        path = tmp_path / "log.jsonl"
        assert write_log(path, convs) == 5
        assert list(read_log(path)) == convs


class TestSessionContext:
    def test_set_context_enforces_budget(self):
        s = SessionState(session_id="t", context_budget=4)
        s.set_context([str(i) for i in range(10)])
        assert s.context == ["6", "7", "8", "9"]

    def test_small_context_kept_whole(self):
        s = SessionState(session_id="t", context_budget=160)
        s.set_context(["a", "b"])
        assert s.context == ["a", "b"]


class TestNormalizeOrthography:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("Can u plz wake me up", "can u plz wake me up"),
            ("Hello!!! How R U??", "hello how r u"),
            ("don't worry", "dont worry"),
            ("_time_ kept as-is", "_time_ kept asis"),
            ("a  b\tc", "a b c"),
        ],
    )
    def test_known_forms(self, raw, expected):
        assert normalize_orthography(raw) == expected

    @given(st.text(max_size=80))
    def test_alphabet_is_closed(self, raw):
        out = normalize_orthography(raw)
        assert set(out) <= set(string.ascii_lowercase + " _")
        assert "  " not in out
        assert out == out.strip()

    @given(st.text(max_size=80))
    def test_idempotent(self, raw):
        once = normalize_orthography(raw)
        assert normalize_orthography(once) == once
