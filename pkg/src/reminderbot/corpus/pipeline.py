"""Corpus preprocessing: raw chat logs to context-target training pairs.

The pipeline runs five steps in a fixed order:

  1. drop out-of-domain conversations
  2. collapse runs of reminder notifications, keeping the last of each run
  3. replace entity surfaces with placeholder tags
  4. turn acknowledgment messages into action tags
  5. normalize orthography to lowercase {a-z, _, space}

The order matters: entity patterns need the original punctuation (step 3
before step 5) and ack patterns are written against tagged text (step 4
after step 3). `run_pipeline` records conversation/message counts after
every step so shrinkage is auditable.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..core.messages import (
    Conversation,
    Message,
    MessageKind,
    Responder,
    Sender,
    build_context,
    message_tokens,
)
from ..entities.recognizer import EntityRecognizer

_TOKEN_KEEP = re.compile(r"[^a-z0-9_]+")
_DIGITS = re.compile(r"[0-9]+")


class PipelineError(Exception):
    """Configuration problems: bad ack tables, impossible mixes."""


class PairSource(str, Enum):
    HUMAN = "human"
    GRAPH = "graph"


@dataclass
class TrainingPair:
    context: list[str]
    target: list[str]
    source: PairSource

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError("training pair target must be non-empty")


@dataclass
class AckPattern:
    pattern: str  # normalized substring to look for in assistant text
    tag: str
    state: str


@dataclass
class StepReport:
    step: str
    conversations: int
    messages: int


@dataclass
class PipelineReport:
    steps: list[StepReport] = field(default_factory=list)
    actions_extracted: dict[str, int] = field(default_factory=dict)
    pairs: int = 0
    pairs_dropped_empty_context: int = 0

    def to_dict(self) -> dict:
        return {
            "steps": [vars(s) for s in self.steps],
            "actions_extracted": dict(self.actions_extracted),
            "pairs": self.pairs,
            "pairs_dropped_empty_context": self.pairs_dropped_empty_context,
        }


# -- step 1 -----------------------------------------------------------------

def filter_domain(
    conversations: Sequence[Conversation],
    domain_labeler: Callable[[Conversation], bool],
) -> list[Conversation]:
    """Keep conversations the labeler marks in-domain, preserving order."""
    return [c for c in conversations if domain_labeler(c)]


def label_by_domain_field(domain: str) -> Callable[[Conversation], bool]:
    return lambda conversation: conversation.domain == domain


# -- step 2 -----------------------------------------------------------------

def _is_notification(message: Message) -> bool:
    return message.sender is Sender.ASSISTANT and message.kind is MessageKind.NOTIFICATION


def merge_notifications(conversation: Conversation) -> Conversation:
    """Collapse each maximal run of notifications to its last element."""
    out: list[Message] = []
    run: Message | None = None
    for message in conversation.messages:
        if _is_notification(message):
            run = message
            continue
        if run is not None:
            out.append(run)
            run = None
        out.append(message)
    if run is not None:
        out.append(run)
    return replace(conversation, messages=out)


# -- step 3 -----------------------------------------------------------------

def replace_entities(
    conversation: Conversation, recognizer: EntityRecognizer
) -> Conversation:
    """Substitute placeholder tags for entity surfaces in every message."""
    out: list[Message] = []
    for message in conversation.messages:
        if message.kind is MessageKind.ACTION_TAG or not message.body:
            out.append(message)
            continue
        tagged, _ = recognizer.replace_with_tags(message.body, today=conversation.day)
        out.append(replace(message, body=tagged))
    return replace(conversation, messages=out)


# -- step 4 -----------------------------------------------------------------

def load_ack_patterns(path: str | Path) -> list[AckPattern]:
    import json

    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return [
        AckPattern(pattern=p["pattern"], tag=p["tag"], state=p["state"])
        for p in doc["patterns"]
    ]


def default_ack_patterns() -> list[AckPattern]:
    from importlib import resources

    return load_ack_patterns(str(resources.files("reminderbot.data") / "reminders_acks.json"))


def validate_ack_patterns(
    patterns: Iterable[AckPattern], known_states: Iterable[str]
) -> None:
    known = set(known_states)
    for p in patterns:
        if p.state not in known:
            raise PipelineError(f"ack pattern {p.pattern!r} maps to unknown state {p.state!r}")


def extract_actions(
    conversation: Conversation,
    ack_patterns: Sequence[AckPattern],
    hits: dict[str, int] | None = None,
) -> Conversation:
    """Replace assistant acknowledgments with their action-tag message."""
    out: list[Message] = []
    for message in conversation.messages:
        if message.sender is not Sender.ASSISTANT or message.kind is MessageKind.ACTION_TAG:
            out.append(message)
            continue
        normalized = normalize_orthography(message.body)
        matched: AckPattern | None = None
        for p in ack_patterns:
            if p.pattern in normalized:
                matched = p
                break
        if matched is None:
            out.append(message)
            continue
        if hits is not None:
            hits[matched.tag] = hits.get(matched.tag, 0) + 1
        out.append(
            replace(message, kind=MessageKind.ACTION_TAG, body=matched.tag, element=None)
        )
    return replace(conversation, messages=out)


# -- step 5 -----------------------------------------------------------------

def _is_tag_token(token: str) -> bool:
    return len(token) > 2 and token.startswith("_") and token.endswith("_")


def normalize_orthography(text: str) -> str:
    """Lowercase and strip to {a-z, _, space}; digits survive only in tags."""
    out: list[str] = []
    for token in text.lower().split():
        kept = _TOKEN_KEEP.sub("", token)
        if not _is_tag_token(kept):
            kept = _DIGITS.sub("", kept)
        if kept:
            out.append(kept)
    return " ".join(out)


def normalize_conversation(conversation: Conversation) -> Conversation:
    out = [
        m if m.kind is MessageKind.ACTION_TAG else replace(m, body=normalize_orthography(m.body))
        for m in conversation.messages
    ]
    return replace(conversation, messages=out)


# -- pairs ------------------------------------------------------------------

def make_pairs(
    conversations: Sequence[Conversation],
    budget_words: int = 160,
    dropped: list[int] | None = None,
) -> list[TrainingPair]:
    """One pair per assistant turn; target is the turn's first message.

    Pairs whose context would be empty (assistant-initiated pushes) are
    dropped. ``dropped`` (if given) receives the drop count at index 0.
    """
    pairs: list[TrainingPair] = []
    n_dropped = 0
    for conversation in conversations:
        messages = conversation.messages
        for i, message in enumerate(messages):
            if message.sender is not Sender.ASSISTANT:
                continue
            if i > 0 and messages[i - 1].sender is Sender.ASSISTANT:
                continue  # not the first message of its turn
            context = build_context(messages[:i], budget_words)
            if not context:
                n_dropped += 1
                continue
            target = message_tokens(message)
            if not target:
                n_dropped += 1
                continue
            source = (
                PairSource.GRAPH if message.responder is Responder.GRAPH else PairSource.HUMAN
            )
            pairs.append(TrainingPair(context=context, target=target, source=source))
    if dropped is not None:
        dropped.insert(0, n_dropped)
    return pairs


def split(
    pairs: Sequence[TrainingPair], ratio: float, seed: int = 0
) -> tuple[list[TrainingPair], list[TrainingPair]]:
    """Deterministic shuffled split; train size is round-half-up(ratio*N)."""
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    shuffled = list(pairs)
    random.Random(seed).shuffle(shuffled)
    n_train = int(ratio * len(shuffled) + 0.5)
    return shuffled[:n_train], shuffled[n_train:]


def mix_sources(
    pairs: Sequence[TrainingPair], human_fraction: float, seed: int = 0
) -> list[TrainingPair]:
    """Subsample so human:graph matches the requested fraction.

    The larger class is cut down to fit; the limiting class is kept whole,
    e.g. 100 human + 10 graph at 0.8 keeps 40 human + all 10 graph.
    """
    if not 0.0 <= human_fraction <= 1.0:
        raise ValueError("human_fraction must be in [0, 1]")
    rng = random.Random(seed)
    human = [p for p in pairs if p.source is PairSource.HUMAN]
    graph = [p for p in pairs if p.source is PairSource.GRAPH]
    rng.shuffle(human)
    rng.shuffle(graph)

    if human_fraction == 1.0:
        if not human:
            raise PipelineError("mix needs human pairs but none are present")
        return human
    if human_fraction == 0.0:
        if not graph:
            raise PipelineError("mix needs graph pairs but none are present")
        return graph
    if not human or not graph:
        raise PipelineError("mix needs both source classes present")

    n_human = len(human)
    n_graph = int(n_human * (1.0 - human_fraction) / human_fraction + 0.5)
    if n_graph > len(graph):
        n_graph = len(graph)
        n_human = int(n_graph * human_fraction / (1.0 - human_fraction) + 0.5)
    out = human[:n_human] + graph[:n_graph]
    rng.shuffle(out)
    return out


# -- stats ------------------------------------------------------------------

@dataclass
class CorpusSideStats:
    conversations: int = 0
    total_messages: int = 0
    inbound: int = 0
    outbound: int = 0
    mean_messages_per_conversation: float = 0.0
    mean_turns: float = 0.0
    mean_tokens_per_message: float = 0.0
    vocabulary_size: int = 0

    def to_dict(self) -> dict:
        return vars(self).copy()


@dataclass
class CorpusStats:
    before: CorpusSideStats
    after: CorpusSideStats
    pair_count: int = 0

    def to_dict(self) -> dict:
        return {
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "pair_count": self.pair_count,
        }


def count_turns(conversation: Conversation) -> int:
    """Speaker switches + 1; an empty conversation has zero turns."""
    if not conversation.messages:
        return 0
    turns = 1
    for prev, cur in zip(conversation.messages, conversation.messages[1:]):
        if prev.sender is not cur.sender:
            turns += 1
    return turns


def _side_stats(conversations: Sequence[Conversation]) -> CorpusSideStats:
    stats = CorpusSideStats(conversations=len(conversations))
    vocabulary: set[str] = set()
    token_total = 0
    turn_total = 0
    for conversation in conversations:
        turn_total += count_turns(conversation)
        for message in conversation.messages:
            stats.total_messages += 1
            if message.sender is Sender.USER:
                stats.inbound += 1
            else:
                stats.outbound += 1
            tokens = message.body.split()
            token_total += len(tokens)
            vocabulary.update(tokens)
    stats.vocabulary_size = len(vocabulary)
    if stats.conversations:
        stats.mean_messages_per_conversation = stats.total_messages / stats.conversations
        stats.mean_turns = turn_total / stats.conversations
    if stats.total_messages:
        stats.mean_tokens_per_message = token_total / stats.total_messages
    return stats


def compute_stats(
    corpus_before: Sequence[Conversation],
    corpus_after: Sequence[Conversation],
    pairs: Sequence[TrainingPair],
) -> CorpusStats:
    return CorpusStats(
        before=_side_stats(corpus_before),
        after=_side_stats(corpus_after),
        pair_count=len(pairs),
    )


# -- whole pipeline ----------------------------------------------------------

def _snapshot(step: str, conversations: Sequence[Conversation]) -> StepReport:
    return StepReport(
        step=step,
        conversations=len(conversations),
        messages=sum(len(c.messages) for c in conversations),
    )


def run_pipeline(
    conversations: Sequence[Conversation],
    recognizer: EntityRecognizer | None = None,
    ack_patterns: Sequence[AckPattern] | None = None,
    domain: str = "reminders",
    budget_words: int = 160,
    steps: Sequence[int] = (1, 2, 3, 4, 5),
) -> tuple[list[Conversation], list[TrainingPair], PipelineReport]:
    bad = [s for s in steps if s not in (1, 2, 3, 4, 5)]
    if bad:
        raise PipelineError(f"unknown pipeline steps: {bad}")
    chosen = set(steps)
    recognizer = recognizer or EntityRecognizer()
    ack_patterns = list(ack_patterns) if ack_patterns is not None else default_ack_patterns()
    report = PipelineReport()
    report.steps.append(_snapshot("raw", conversations))

    current = list(conversations)
    if 1 in chosen:
        current = filter_domain(current, label_by_domain_field(domain))
        report.steps.append(_snapshot("1_filter_domain", current))

    if 2 in chosen:
        current = [merge_notifications(c) for c in current]
        report.steps.append(_snapshot("2_merge_notifications", current))

    if 3 in chosen:
        current = [replace_entities(c, recognizer) for c in current]
        report.steps.append(_snapshot("3_replace_entities", current))

    if 4 in chosen:
        current = [extract_actions(c, ack_patterns, report.actions_extracted) for c in current]
        report.steps.append(_snapshot("4_extract_actions", current))

    if 5 in chosen:
        current = [normalize_conversation(c) for c in current]
        report.steps.append(_snapshot("5_normalize", current))

    dropped: list[int] = []
    pairs = make_pairs(current, budget_words, dropped)
    report.pairs = len(pairs)
    report.pairs_dropped_empty_context = dropped[0] if dropped else 0
    return current, pairs, report


# -- pairs file format: context \t target \t source --------------------------

def write_pairs_tsv(pairs: Iterable[TrainingPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(
                " ".join(pair.context)
                + "\t"
                + " ".join(pair.target)
                + "\t"
                + pair.source.value
                + "\n"
            )


def read_pairs_tsv(path: str | Path) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise PipelineError(f"line {line_no}: expected 3 tab-separated fields")
            context, target, source = parts
            pairs.append(
                TrainingPair(
                    context=context.split(),
                    target=target.split(),
                    source=PairSource(source),
                )
            )
    return pairs


# -- conversation log format: one conversation per JSON line ------------------

def write_conversations_jsonl(
    conversations: Iterable[Conversation], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for conversation in conversations:
            fh.write(json.dumps(conversation.to_dict(), separators=(",", ":")) + "\n")


def read_conversations_jsonl(path: str | Path) -> list[Conversation]:
    out: list[Conversation] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(Conversation.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise PipelineError(f"line {line_no}: {exc}") from None
    return out
