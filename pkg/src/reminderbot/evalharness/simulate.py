"""Scripted-user simulation for graph-only vs hybrid comparisons.

Scripts are ideal chat-flows read off the dialogue graph (one-shot and
stepwise slot filling), each carrying its ground-truth action tag and slot
values. Noise injection models the four production failure classes: spelling
mistakes, deviations from the ideal flow, out-of-domain queries, and
code-mixed wording. Both policies replay byte-identical noised scripts, so
any score difference comes from routing, not from luck of the draw.

A conversation counts as completed only when the script's expected action
fired with exactly the scripted slot values; a handoff puts a human into the
responder set from that turn onward.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Any, Sequence

from ..core.messages import (
    Conversation,
    Message,
    MessageKind,
    Responder,
    Sender,
    new_message_id,
)
from ..core.session import SessionState
from ..corpus.synthetic import CODEMIX_MAP, DEVIATION_LINES, OUT_OF_DOMAIN_LINES
from ..entities.recognizer import EntityRecognizer
from ..graph.model import DialogueGraph
from ..hybrid.controller import Engine, HybridConfig, handle_message
from ..match.tfidf import TfidfIndex
from ..nn.model import Seq2SeqModel
from .metrics import ScoreReport, record_from_conversation, score_records

POLICY_GRAPH_ONLY = "graph_only"
POLICY_HYBRID = "hybrid"

DEFAULT_BASE_DAY = date(2017, 4, 17)
DEFAULT_DAYS = 5

# (surface, recognizer value) pairs; values must match what the extractor
# produces or completion checks would never pass
TIME_CHOICES = (
    ("7 am", 420),
    ("9 am", 540),
    ("2 pm", 840),
    ("6:15 am", 375),
    ("8:30 pm", 1230),
    ("10 pm", 1320),
)
DATE_CHOICES = (("today", "today"), ("tomorrow", "tomorrow"))
FREQ_CHOICES = (
    ("every 2 hours", "hourly:2"),
    ("every 3 hours", "hourly:3"),
    ("daily", "daily"),
    ("every hour", "hourly"),
)

# deviation/out-of-domain pools are shared with the synthetic corpus so the
# evaluated nuisance text matches the training distribution; the lines are
# mostly outside the template vocabulary on purpose, since overlap through
# function words alone can clear the match threshold
CLOSING_LINES = ("thanks", "thank you", "ok thanks")


@dataclass(frozen=True)
class NoiseConfig:
    char_rate: float = 0.0
    deviation_rate: float = 0.0
    ood_rate: float = 0.0
    codemix_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("char_rate", "deviation_rate", "ood_rate", "codemix_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    def to_dict(self) -> dict[str, float]:
        return {
            "char_rate": self.char_rate,
            "deviation_rate": self.deviation_rate,
            "ood_rate": self.ood_rate,
            "codemix_rate": self.codemix_rate,
        }


@dataclass(frozen=True)
class UserScript:
    script_id: str
    intent: str
    messages: tuple[str, ...]
    expected_tag: str | None
    expected_slots: dict[str, Any] = field(default_factory=dict)
    day: date = DEFAULT_BASE_DAY

    def to_dict(self) -> dict[str, Any]:
        return {
            "script_id": self.script_id,
            "intent": self.intent,
            "messages": list(self.messages),
            "expected_tag": self.expected_tag,
            "expected_slots": self.expected_slots,
            "day": self.day.isoformat(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "UserScript":
        return cls(
            script_id=d["script_id"],
            intent=d["intent"],
            messages=tuple(d["messages"]),
            expected_tag=d.get("expected_tag"),
            expected_slots=dict(d.get("expected_slots") or {}),
            day=date.fromisoformat(d["day"]) if d.get("day") else DEFAULT_BASE_DAY,
        )


def _wakeup(rng: random.Random, i: int, day: date) -> UserScript:
    t_surface, t_value = rng.choice(TIME_CHOICES)
    if rng.random() < 0.5:
        d_surface, _ = rng.choice(DATE_CHOICES)
        msgs = (f"wake me up at {t_surface} {d_surface}",)
    else:
        msgs = (rng.choice(("wake me up", "can you wake me up")), t_surface)
    return UserScript(
        script_id=f"s{i:05d}",
        intent="wakeup_reminder",
        messages=msgs,
        expected_tag="_api_call_reminder_wakeup_",
        expected_slots={"time": t_value},
        day=day,
    )


def _medicine(rng: random.Random, i: int, day: date) -> UserScript:
    t_surface, t_value = rng.choice(TIME_CHOICES)
    d_surface, d_value = rng.choice(DATE_CHOICES)
    if rng.random() < 0.5:
        msgs = (f"remind me to take my medicine at {t_surface} {d_surface}",)
    else:
        msgs = ("set a medicine reminder", t_surface, d_surface)
    return UserScript(
        script_id=f"s{i:05d}",
        intent="medicine_reminder",
        messages=msgs,
        expected_tag="_api_call_reminder_medicine_",
        expected_slots={"time": t_value, "date": d_value},
        day=day,
    )


def _drink_water(rng: random.Random, i: int, day: date) -> UserScript:
    f_surface, f_value = rng.choice(FREQ_CHOICES)
    if rng.random() < 0.5:
        msgs = (f"remind me to drink water {f_surface}",)
    else:
        msgs = ("remind me to drink water", f_surface)
    return UserScript(
        script_id=f"s{i:05d}",
        intent="drink_water_reminder",
        messages=msgs,
        expected_tag="_api_call_reminder_drink_water_",
        expected_slots={"frequency": f_value},
        day=day,
    )


def _view(rng: random.Random, i: int, day: date) -> UserScript:
    return UserScript(
        script_id=f"s{i:05d}",
        intent="view_reminders",
        messages=(rng.choice(("show my reminders", "what are my reminders")),),
        expected_tag="_api_view_reminders_",
        day=day,
    )


def _view_cancel(rng: random.Random, i: int, day: date) -> UserScript:
    return UserScript(
        script_id=f"s{i:05d}",
        intent="cancel_reminder",
        messages=("show my reminders", rng.choice(("cancel it", "cancel the last one"))),
        expected_tag="_api_cancel_reminder_",
        day=day,
    )


_INTENT_BUILDERS = (_wakeup, _medicine, _drink_water, _view, _view_cancel)


def generate_scripts(
    n: int,
    seed: int,
    base_day: date = DEFAULT_BASE_DAY,
    days: int = DEFAULT_DAYS,
) -> list[UserScript]:
    """Ideal-flow scripts spread round-robin over ``days`` calendar days."""
    if n < 1:
        raise ValueError("need at least one script")
    rng = random.Random(seed)
    scripts = []
    for i in range(n):
        day = base_day + timedelta(days=i % days)
        builder = rng.choice(_INTENT_BUILDERS)
        script = builder(rng, i, day)
        if rng.random() < 0.3:
            script = replace(script, messages=script.messages + (rng.choice(CLOSING_LINES),))
        scripts.append(script)
    return scripts


def perturb_word(word: str, rng: random.Random) -> str:
    """One keyboard-style slip: swap, drop, or double a character."""
    if len(word) < 3:
        return word
    op = rng.choice(("swap", "drop", "double"))
    k = rng.randrange(len(word) - 1)
    if op == "swap":
        return word[:k] + word[k + 1] + word[k] + word[k + 2 :]
    if op == "drop":
        return word[:k] + word[k + 1 :]
    return word[: k + 1] + word[k] + word[k + 1 :]


def _char_noise(message: str, rng: random.Random) -> str:
    words = message.split()
    candidates = [i for i, w in enumerate(words) if len(w) >= 3 and w.isalpha()]
    if not candidates:
        return message
    i = rng.choice(candidates)
    words[i] = perturb_word(words[i], rng)
    return " ".join(words)


def _codemix(message: str, rng: random.Random) -> str:
    words = message.split()
    out = []
    for w in words:
        out.append(CODEMIX_MAP.get(w, w))
    return " ".join(out)


def apply_noise(
    script: UserScript, noise: NoiseConfig, rng: random.Random
) -> UserScript:
    """Independent draws per class; insertion positions are seeded too."""
    messages = list(script.messages)
    if noise.deviation_rate > 0 and rng.random() < noise.deviation_rate:
        pos = rng.randrange(1, len(messages) + 1)
        messages.insert(pos, rng.choice(DEVIATION_LINES))
    if noise.ood_rate > 0 and rng.random() < noise.ood_rate:
        pos = rng.randrange(0, len(messages) + 1)
        messages.insert(pos, rng.choice(OUT_OF_DOMAIN_LINES))
    out = []
    for m in messages:
        if noise.codemix_rate > 0 and rng.random() < noise.codemix_rate:
            m = _codemix(m, rng)
        if noise.char_rate > 0 and rng.random() < noise.char_rate:
            m = _char_noise(m, rng)
        out.append(m)
    return replace(script, messages=tuple(out))


def _user_msg(text: str, ts: int) -> Message:
    return Message(
        id=new_message_id(), sender=Sender.USER, kind=MessageKind.TEXT, body=text, timestamp=ts
    )


def _human_msg(text: str, ts: int) -> Message:
    return Message(
        id=new_message_id(),
        sender=Sender.ASSISTANT,
        kind=MessageKind.TEXT,
        body=text,
        timestamp=ts,
        responder=Responder.HUMAN,
    )


def simulate_conversation(
    script: UserScript,
    graph: DialogueGraph,
    index: TfidfIndex,
    model: Seq2SeqModel | None,
    config: HybridConfig,
    recognizer: EntityRecognizer,
    today: date,
) -> Conversation:
    """Replay one script against one policy (graph-only = no model)."""
    session = SessionState(session_id=script.script_id)
    conv = Conversation(id=script.script_id, day=script.day)
    ts = 0
    human_engaged = False
    for text in script.messages:
        ts += 1
        conv.messages.append(_user_msg(text, ts))
        ts += 1
        if human_engaged:
            conv.messages.append(_human_msg("Our agent is with you.", ts))
            continue
        decision = handle_message(
            session, text, graph, index, model, config,
            recognizer=recognizer, now_ms=ts, today=today,
        )
        if decision.engine == Engine.HANDOFF:
            human_engaged = True
            conv.messages.append(_human_msg("Let me connect you to our agent.", ts))
            continue
        assert decision.response is not None
        conv.messages.append(decision.response)
        if (
            not conv.completed
            and decision.action_executed is not None
            and decision.action_executed.tag == script.expected_tag
            and all(decision.slot_values.get(k) == v for k, v in script.expected_slots.items())
        ):
            conv.completed = True
            conv.completion_task = decision.action_executed.tag
    return conv


def run_policy(
    scripts: Sequence[UserScript],
    graph: DialogueGraph,
    index: TfidfIndex,
    model: Seq2SeqModel | None,
    config: HybridConfig,
    recognizer: EntityRecognizer,
    today: date,
) -> list[Conversation]:
    return [
        simulate_conversation(s, graph, index, model, config, recognizer, today)
        for s in scripts
    ]


@dataclass(frozen=True)
class ExperimentReport:
    seed: int
    noise: NoiseConfig
    scripts: int
    graph_only: ScoreReport
    hybrid: ScoreReport

    @property
    def delta_e2e(self) -> float:
        return self.hybrid.e2e_percent - self.graph_only.e2e_percent

    @property
    def delta_aor(self) -> float:
        return self.hybrid.aor_percent - self.graph_only.aor_percent

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "noise": self.noise.to_dict(),
            "scripts": self.scripts,
            "graph_only": self.graph_only.to_dict(),
            "hybrid": self.hybrid.to_dict(),
            "delta": {
                "e2e_percent": round(self.delta_e2e, 2),
                "aor_percent": round(self.delta_aor, 2),
            },
        }


def run_experiment(
    graph: DialogueGraph,
    index: TfidfIndex,
    model: Seq2SeqModel | None,
    *,
    n_scripts: int = 500,
    scripts: Sequence[UserScript] | None = None,
    noise: NoiseConfig = NoiseConfig(),
    seed: int = 0,
    config: HybridConfig | None = None,
    recognizer: EntityRecognizer | None = None,
    today: date = DEFAULT_BASE_DAY,
) -> ExperimentReport:
    """Score graph-only vs hybrid on one shared noised script set.

    Scripts (generated from ``seed`` unless passed in) are noised once;
    afterwards both policies see the exact same message sequences, so
    reports are seed-deterministic.
    """
    config = config or HybridConfig()
    recognizer = recognizer or EntityRecognizer()
    if scripts is None:
        scripts = generate_scripts(n_scripts, seed)
    noise_rng = random.Random(seed + 1)
    noised = [apply_noise(s, noise, noise_rng) for s in scripts]

    graph_convs = run_policy(noised, graph, index, None, config, recognizer, today)
    hybrid_convs = run_policy(noised, graph, index, model, config, recognizer, today)

    return ExperimentReport(
        seed=seed,
        noise=noise,
        scripts=len(noised),
        graph_only=score_records([record_from_conversation(c) for c in graph_convs]),
        hybrid=score_records([record_from_conversation(c) for c in hybrid_convs]),
    )
