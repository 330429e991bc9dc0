"""Reminder book semantics, the journal, and the HTTP surface."""

from __future__ import annotations

import json
from datetime import date, datetime, timedelta

import pytest
from fastapi.testclient import TestClient

from reminderbot.core.messages import MessageKind
from reminderbot.service.api import ServiceConfig, create_app
from reminderbot.service.reminders import (
    Channel,
    ConflictError,
    NotFoundError,
    Reminder,
    ReminderBook,
    ReminderKind,
    ReminderStatus,
    ValidationError,
    minutes_to_time,
    parse_frequency,
    resolve_date_marker,
)
from reminderbot.service.store import Journal, JournalError

NOW = datetime(2017, 4, 17, 9, 0)
TODAY = NOW.date()


class TestFieldParsing:
    def test_parse_frequency(self):
        assert parse_frequency("hourly") == timedelta(hours=1)
        assert parse_frequency("hourly:2") == timedelta(hours=2)
        assert parse_frequency("daily") == timedelta(days=1)
        assert parse_frequency("weekly") == timedelta(weeks=1)

    @pytest.mark.parametrize("bad", ["hourly:0", "hourly:25", "fortnightly", ""])
    def test_parse_frequency_rejects(self, bad):
        with pytest.raises(ValidationError):
            parse_frequency(bad)

    def test_resolve_date_marker(self):
        assert resolve_date_marker("today", TODAY) == TODAY
        assert resolve_date_marker("tomorrow", TODAY) == date(2017, 4, 18)
        assert resolve_date_marker("2017-05-01", TODAY) == date(2017, 5, 1)
        assert resolve_date_marker(date(2017, 6, 2), TODAY) == date(2017, 6, 2)
        with pytest.raises(ValidationError):
            resolve_date_marker("someday", TODAY)

    def test_minutes_to_time(self):
        assert minutes_to_time(0).hour == 0
        assert minutes_to_time(725).hour == 12 and minutes_to_time(725).minute == 5
        assert minutes_to_time(1439).hour == 23
        for bad in (-1, 1440):
            with pytest.raises(ValidationError):
                minutes_to_time(bad)


class TestReminderBook:
    def _wakeup(self, book, when_time=420, when_date=None, user="u1"):
        return book.create(
            user,
            ReminderKind.WAKEUP,
            now=NOW,
            channel=Channel.CALL,
            when_date=when_date or date(2017, 4, 18),
            when_time=when_time,
        )

    def test_one_shot_needs_date_and_time(self):
        book = ReminderBook()
        with pytest.raises(ValidationError, match="both date and time"):
            book.create("u1", ReminderKind.WAKEUP, now=NOW, when_time=420)

    def test_one_shot_in_the_past_rejected(self):
        book = ReminderBook()
        with pytest.raises(ValidationError, match="past"):
            book.create(
                "u1", ReminderKind.WAKEUP, now=NOW,
                when_date=TODAY, when_time=420,  # 7:00 is before the 9:00 clock
            )

    def test_duplicate_slot_conflicts(self):
        book = ReminderBook()
        self._wakeup(book)
        with pytest.raises(ConflictError):
            self._wakeup(book)
        # same slot, different user: fine
        self._wakeup(book, user="u2")

    def test_cancel_frees_the_slot(self):
        book = ReminderBook()
        first = self._wakeup(book)
        book.cancel(first.id)
        second = self._wakeup(book)
        assert second.id != first.id

    def test_cancel_is_idempotent(self):
        book = ReminderBook()
        r = self._wakeup(book)
        once = book.cancel(r.id)
        twice = book.cancel(r.id)
        assert once.status is twice.status is ReminderStatus.CANCELLED
        assert twice.next_fire_at is None

    def test_cancel_unknown_raises(self):
        with pytest.raises(NotFoundError):
            ReminderBook().cancel("nope")

    def test_list_orders_scheduled_first(self):
        book = ReminderBook()
        a = self._wakeup(book, when_time=420)
        b = self._wakeup(book, when_time=480)
        book.cancel(a.id)
        listed = book.list_for_user("u1")
        assert [r.id for r in listed] == [b.id, a.id]
        assert listed[0].status is ReminderStatus.SCHEDULED

    def test_latest_scheduled(self):
        book = ReminderBook()
        assert book.latest_scheduled("u1") is None
        self._wakeup(book, when_time=420)
        b = self._wakeup(book, when_time=480)
        assert book.latest_scheduled("u1").id == b.id
        book.cancel(b.id)
        assert book.latest_scheduled("u1").time == 420

    def test_one_shot_fires_exactly_once(self):
        book = ReminderBook()
        r = self._wakeup(book)
        due = datetime(2017, 4, 18, 7, 0)
        assert book.tick(due - timedelta(minutes=1)) == []
        fired = book.tick(due)
        assert [f.id for f, _ in fired] == [r.id]
        assert book.get(r.id).status is ReminderStatus.FIRED
        assert book.tick(due + timedelta(days=2)) == []

    def test_notification_message_shape(self):
        book = ReminderBook()
        self._wakeup(book)
        [(_, message)] = book.tick(datetime(2017, 4, 18, 7, 0))
        assert message.kind is MessageKind.NOTIFICATION
        assert message.body

    def test_recurring_skips_missed_periods(self):
        book = ReminderBook()
        r = book.create(
            "u1", ReminderKind.DRINK_WATER, now=NOW, frequency="hourly:2"
        )
        # jump 7 hours: 3 due instants collapse into one catch-up
        later = NOW + timedelta(hours=7)
        fired = book.tick(later)
        assert len(fired) == 1
        updated = book.get(r.id)
        assert updated.status is ReminderStatus.SCHEDULED
        assert updated.next_fire_at > later
        assert (updated.next_fire_at - later) <= timedelta(hours=2)

    def test_recurring_fires_again_next_period(self):
        book = ReminderBook()
        book.create("u1", ReminderKind.DRINK_WATER, now=NOW, frequency="hourly")
        assert len(book.tick(NOW + timedelta(hours=1))) == 1
        assert len(book.tick(NOW + timedelta(hours=1))) == 0
        assert len(book.tick(NOW + timedelta(hours=2))) == 1

    def test_cancelled_never_fires(self):
        book = ReminderBook()
        r = self._wakeup(book)
        book.cancel(r.id)
        assert book.tick(datetime(2017, 4, 30, 0, 0)) == []

    def test_journal_replay_rebuilds_state(self, tmp_path):
        path = tmp_path / "store.jsonl"
        with Journal(path) as journal:
            book = ReminderBook(journal)
            kept = self._wakeup(book, when_time=480)
            gone = self._wakeup(book, when_time=540)
            book.cancel(gone.id)
            book.tick(datetime(2017, 4, 18, 8, 0))  # fires `kept`
        with Journal(path) as journal:
            rebuilt = ReminderBook(journal)
        assert rebuilt.get(kept.id).status is ReminderStatus.FIRED
        assert rebuilt.get(gone.id).status is ReminderStatus.CANCELLED
        assert rebuilt.get(kept.id).to_dict() == book.get(kept.id).to_dict()


class TestJournal:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "j.jsonl"
        records = [{"op": "create", "n": i} for i in range(5)]
        with Journal(path) as j:
            for r in records:
                j.append(r)
        with Journal(path) as j:
            assert list(j.replay()) == records

    def test_append_after_replay(self, tmp_path):
        path = tmp_path / "j.jsonl"
        with Journal(path) as j:
            j.append({"n": 1})
        with Journal(path) as j:
            assert list(j.replay()) == [{"n": 1}]
            j.append({"n": 2})
        with Journal(path) as j:
            assert [r["n"] for r in j.replay()] == [1, 2]

    def test_torn_final_line_tolerated(self, tmp_path):
        path = tmp_path / "j.jsonl"
        with Journal(path) as j:
            j.append({"n": 1})
            j.append({"n": 2})
        raw = path.read_bytes()
        path.write_bytes(raw + b'{"n": 3, "tr')  # crash mid-write
        with Journal(path) as j:
            assert [r["n"] for r in j.replay()] == [1, 2]

    def test_mid_file_corruption_raises(self, tmp_path):
        path = tmp_path / "j.jsonl"
        path.write_text('{"n": 1}\nGARBAGE\n{"n": 3}\n')
        with Journal(path) as j:
            with pytest.raises(JournalError, match="line 2"):
                list(j.replay())

    def test_newline_in_value_stays_one_line(self, tmp_path):
        path = tmp_path / "j.jsonl"
        with Journal(path) as j:
            j.append({"text": "two\nlines"})
        assert len(path.read_text().splitlines()) == 1
        with Journal(path) as j:
            assert list(j.replay()) == [{"text": "two\nlines"}]


@pytest.fixture()
def client(tmp_path):
    config = ServiceConfig(
        store_path=str(tmp_path / "store.jsonl"),
        log_path=str(tmp_path / "events.jsonl"),
    )
    app = create_app(config)
    with TestClient(app) as tc:
        tc.log_path = tmp_path / "events.jsonl"
        yield tc


def _session(client):
    return client.post("/sessions", json={"user_id": "u1"}).json()["session_id"]


class TestApi:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["kernel_backend"] in ("python", "cython")
        assert body["model_loaded"] is False
        assert body["time"].startswith("2017-04-17T09:00")

    def test_unknown_session_404(self, client):
        assert client.post("/sessions/nope/messages", json={"text": "hi"}).status_code == 404
        assert client.get("/sessions/nope/events").status_code == 404

    def test_message_needs_text_or_choice(self, client):
        sid = _session(client)
        assert client.post(f"/sessions/{sid}/messages", json={}).status_code == 422
        assert client.post(f"/sessions/{sid}/messages", json={"text": "  "}).status_code == 422
        bad_choice = {"element_choice": {"neither": 1}}
        assert client.post(f"/sessions/{sid}/messages", json=bad_choice).status_code == 422

    def test_wakeup_flow_persists(self, client):
        sid = _session(client)
        out = client.post(
            f"/sessions/{sid}/messages",
            json={"text": "wake me up at 7 am tomorrow"},
        ).json()
        assert out["handoff"] is False
        kinds = [
            ("message" if "message" in e else "element" if "element" in e else "handoff")
            for e in out["envelopes"]
        ]
        assert kinds[0] == "message"
        listed = client.get("/reminders", params={"user_id": "u1"}).json()["reminders"]
        assert len(listed) == 1
        assert listed[0]["kind"] == "wakeup"
        assert listed[0]["time"] == 420
        assert listed[0]["date"] == "2017-04-18"
        assert listed[0]["status"] == "scheduled"

    def test_envelopes_have_exactly_one_payload_key(self, client):
        sid = _session(client)
        out = client.post(
            f"/sessions/{sid}/messages", json={"text": "wake me up at 7 am tomorrow"}
        ).json()
        for envelope in out["envelopes"]:
            present = [k for k in ("message", "element", "handoff") if k in envelope]
            assert len(present) == 1

    def test_element_choice_cancels(self, client):
        sid = _session(client)
        client.post(
            f"/sessions/{sid}/messages", json={"text": "wake me up at 7 am tomorrow"}
        )
        view = client.post(
            f"/sessions/{sid}/messages", json={"text": "show my reminders"}
        ).json()
        cards = [e["element"] for e in view["envelopes"] if "element" in e]
        assert cards and cards[0]["element_kind"] == "reminder_card"
        assert cards[0]["payload"]["reminders"][0]["kind"] == "wakeup"
        assert {"label": "Cancel it"} in cards[0]["options"]

        client.post(
            f"/sessions/{sid}/messages",
            json={"element_choice": {"label": "Cancel it"}},
        )
        listed = client.get("/reminders", params={"user_id": "u1"}).json()["reminders"]
        assert listed[0]["status"] == "cancelled"

    def test_cancel_endpoint_idempotent(self, client):
        sid = _session(client)
        client.post(
            f"/sessions/{sid}/messages", json={"text": "wake me up at 7 am tomorrow"}
        )
        rid = client.get("/reminders", params={"user_id": "u1"}).json()["reminders"][0]["id"]
        first = client.post(f"/reminders/{rid}/cancel")
        second = client.post(f"/reminders/{rid}/cancel")
        assert first.status_code == second.status_code == 200
        assert second.json()["reminder"]["status"] == "cancelled"
        assert client.post("/reminders/zzz/cancel").status_code == 404

    def test_events_cursor(self, client):
        sid = _session(client)
        client.post(f"/sessions/{sid}/messages", json={"text": "hi"})
        page = client.get(f"/sessions/{sid}/events", params={"cursor": 0}).json()
        assert page["cursor"] == len(page["envelopes"]) > 0
        again = client.get(
            f"/sessions/{sid}/events", params={"cursor": page["cursor"]}
        ).json()
        assert again["envelopes"] == []
        assert again["cursor"] == page["cursor"]

    def test_tick_rejects_backwards_clock(self, client):
        out = client.post("/admin/tick", json={"now": "2017-04-16T00:00:00"})
        assert out.status_code == 422

    def test_tick_delivers_notification(self, client):
        sid = _session(client)
        client.post(
            f"/sessions/{sid}/messages", json={"text": "wake me up at 7 am tomorrow"}
        )
        before = client.get(f"/sessions/{sid}/events").json()
        out = client.post("/admin/tick", json={"now": "2017-04-18T07:00:00"}).json()
        assert len(out["notifications"]) == 1
        page = client.get(
            f"/sessions/{sid}/events", params={"cursor": before["cursor"]}
        ).json()
        bodies = [
            e["message"]["body"] for e in page["envelopes"] if "message" in e
        ]
        assert any("wake" in b.lower() for b in bodies)
        listed = client.get("/reminders", params={"user_id": "u1"}).json()["reminders"]
        assert listed[0]["status"] == "fired"

    def test_handoff_disables_further_replies(self, client):
        sid = _session(client)
        out = client.post(f"/sessions/{sid}/messages", json={"text": "asdkjh qweqw"}).json()
        assert out["handoff"] is True
        assert any("handoff" in e for e in out["envelopes"])
        after = client.post(f"/sessions/{sid}/messages", json={"text": "hi"}).json()
        assert after["handoff"] is True
        assert all("message" not in e for e in after["envelopes"])

    def test_event_log_lines_are_dated_json(self, client):
        sid = _session(client)
        client.post(f"/sessions/{sid}/messages", json={"text": "hi"})
        lines = [
            json.loads(l)
            for l in client.log_path.read_text().splitlines()
        ]
        assert lines, "event log should not be empty"
        for line in lines:
            assert line["day"] == "2017-04-17"
            assert "event" in line
        kinds = [l["event"] for l in lines]
        assert "session_started" in kinds
        assert "message" in kinds
