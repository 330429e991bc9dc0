"""Graph-first, neural-fallback routing with threshold heuristics.

Per turn: extract entities, try the dialogue graph; on a miss ask the
generative model for a response over the rolling context. A neural output
that is an action tag is delegated back to the graph (state lookup, slot
check, execution), so no action ever runs with missing required slots no
matter which engine proposed it. Two heuristics guard the neural engine:
a cap on consecutive neural responses and a cap on unfavorable ("sorry...")
responses per conversation; exceeding either hands the session to a human
before anything is sent.

The rolling context mirrors the training distribution: entity-tagged,
orthography-normalized message tokens joined by _eom_/_eot_ separators,
with executed actions contributing their action tag instead of ack text.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date

from ..core.messages import (
    ACTION_TAG_RE,
    EOM,
    EOT,
    Message,
    MessageKind,
    Responder,
    Sender,
    new_message_id,
)
from ..core.session import SessionState
from ..corpus.pipeline import normalize_orthography
from ..entities.recognizer import EntityRecognizer
from ..graph.engine import advance, resolve_state
from ..graph.model import ActionSpec, DialogueGraph, GraphState
from ..match.tfidf import TfidfIndex
from ..nn.model import Seq2SeqModel, decode_greedy

logger = logging.getLogger("reminderbot.hybrid")

DEFAULT_UNFAVORABLE = (
    "sorry i cannot help you with that",
    "sorry i did not understand",
    "i am not able to help with that",
)


class Engine:
    GRAPH = "graph"
    NEURAL = "neural"
    HANDOFF = "handoff"


@dataclass(frozen=True)
class HybridConfig:
    tau_sim: float = 0.35
    max_neural_turns: int = 3
    max_unfavorable: int = 2
    unfavorable_patterns: tuple[str, ...] = DEFAULT_UNFAVORABLE
    max_decode_len: int = 40

    def __post_init__(self) -> None:
        if not 0.0 < self.tau_sim < 1.0:
            raise ValueError("tau_sim must be in (0, 1)")
        if self.max_neural_turns < 1:
            raise ValueError("max_neural_turns must be >= 1")
        if self.max_unfavorable < 1:
            raise ValueError("max_unfavorable must be >= 1")


@dataclass
class RoutingDecision:
    engine: str
    response: Message | None = None
    graph_score: float = 0.0
    action_executed: ActionSpec | None = None
    slot_values: dict[str, object] = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)


def check_turn_threshold(session: SessionState, config: HybridConfig) -> bool:
    """True when one more neural response would exceed the cap."""
    return session.neural_consecutive >= config.max_neural_turns


def check_unfavorable(
    response_text: str, session: SessionState, config: HybridConfig
) -> bool:
    """Count an unfavorable response; True when the cap would be exceeded."""
    normalized = normalize_orthography(response_text)
    if not any(p in normalized for p in config.unfavorable_patterns):
        return False
    session.unfavorable_count += 1
    return session.unfavorable_count > config.max_unfavorable


def map_action_tag(tag: str, graph: DialogueGraph) -> GraphState | None:
    """State owning this action tag; None (plus anomaly log) when unknown."""
    state = graph.state_by_action_tag(tag)
    if state is None:
        logger.warning("neural engine emitted unknown action tag %s", tag)
    return state


def _append_context(session: SessionState, sender: Sender, tokens: list[str]) -> None:
    if not tokens:
        return
    if session.context:
        sep = EOM if session.last_context_sender == sender.value else EOT
        session.context.append(sep)
    session.context.extend(tokens)
    session.last_context_sender = sender.value
    session.set_context(session.context)


def _response_context_tokens(message: Message, action: ActionSpec | None) -> list[str]:
    if action is not None:
        return [action.tag]
    tokens: list[str] = []
    if message.kind is MessageKind.UI_ELEMENT and message.element is not None:
        tokens.append(f"_elem_{message.element.element_kind.value}_")
    tokens.extend(normalize_orthography(message.body).split())
    return tokens


def _neural_message(text: str, now_ms: int) -> Message:
    return Message(
        id=new_message_id(),
        sender=Sender.ASSISTANT,
        kind=MessageKind.TEXT,
        body=text,
        timestamp=now_ms,
        responder=Responder.NEURAL,
    )


def handle_message(
    session: SessionState,
    user_text: str,
    graph: DialogueGraph,
    index: TfidfIndex,
    model: Seq2SeqModel | None,
    config: HybridConfig,
    *,
    recognizer: EntityRecognizer | None = None,
    now_ms: int = 0,
    today: date | None = None,
) -> RoutingDecision:
    """Route one user message; may hand off instead of responding.

    A handed-off session stays silent forever: every further call returns a
    handoff decision without a message.
    """
    if session.handed_off:
        return RoutingDecision(engine=Engine.HANDOFF, trace=["handoff:already"])

    recognizer = recognizer or EntityRecognizer()
    trace: list[str] = []

    tagged, spans = recognizer.replace_with_tags(user_text, today=today)
    if spans:
        trace.append("entities:" + ",".join(s.entity_type.value for s in spans))
    _append_context(session, Sender.USER, normalize_orthography(tagged).split())

    graph_decision = advance(
        graph,
        session,
        tagged,
        index,
        new_spans=spans,
        tau_sim=config.tau_sim,
        now_ms=now_ms,
        today=today,
    )

    if graph_decision.matched_state is not None:
        trace.append(
            f"graph:match {graph_decision.matched_state} score={graph_decision.score:.3f}"
        )
        session.neural_consecutive = 0
        response = graph_decision.response
        assert response is not None
        _append_context(
            session, Sender.ASSISTANT,
            _response_context_tokens(response, graph_decision.action_fired),
        )
        return RoutingDecision(
            engine=Engine.GRAPH,
            response=response,
            graph_score=graph_decision.score,
            action_executed=graph_decision.action_fired,
            slot_values=graph_decision.slot_values,
            trace=trace,
        )

    trace.append(f"graph:miss score={graph_decision.score:.3f}")

    if model is None:
        trace.append("neural:unavailable")
        session.handed_off = True
        return RoutingDecision(
            engine=Engine.HANDOFF, graph_score=graph_decision.score, trace=trace
        )

    if check_turn_threshold(session, config):
        trace.append(f"threshold:neural_turns={session.neural_consecutive}")
        session.handed_off = True
        return RoutingDecision(
            engine=Engine.HANDOFF, graph_score=graph_decision.score, trace=trace
        )

    tokens = decode_greedy(model, session.context, max_len=config.max_decode_len)
    tag = next((t for t in tokens if ACTION_TAG_RE.match(t)), None)

    if tag is not None:
        trace.append(f"neural:action {tag}")
        state = map_action_tag(tag, graph)
        if state is not None:
            resolved = resolve_state(
                graph, state, session, graph_decision.score, now_ms=now_ms, today=today
            )
            session.neural_consecutive += 1
            response = resolved.response
            assert response is not None
            # the graph executed it, but the neural engine chose it
            response.responder = Responder.NEURAL
            _append_context(
                session, Sender.ASSISTANT,
                _response_context_tokens(response, resolved.action_fired),
            )
            return RoutingDecision(
                engine=Engine.NEURAL,
                response=response,
                graph_score=graph_decision.score,
                action_executed=resolved.action_fired,
                slot_values=resolved.slot_values,
                trace=trace,
            )
        trace.append("neural:unknown_tag")
        tokens = [t for t in tokens if not ACTION_TAG_RE.match(t)]

    text = " ".join(tokens).strip()
    if not text:
        trace.append("neural:empty")
        session.handed_off = True
        return RoutingDecision(
            engine=Engine.HANDOFF, graph_score=graph_decision.score, trace=trace
        )

    if check_unfavorable(text, session, config):
        trace.append(f"threshold:unfavorable={session.unfavorable_count}")
        session.handed_off = True
        return RoutingDecision(
            engine=Engine.HANDOFF, graph_score=graph_decision.score, trace=trace
        )

    session.neural_consecutive += 1
    response = _neural_message(text, now_ms)
    _append_context(session, Sender.ASSISTANT, _response_context_tokens(response, None))
    return RoutingDecision(
        engine=Engine.NEURAL,
        response=response,
        graph_score=graph_decision.score,
        trace=trace,
    )
