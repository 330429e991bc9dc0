"""Graph-first turn handling: state identification, slot filling, actions.

State identification follows the retrieval recipe: the incoming message
(entities already replaced by their tags) is scored with tf-idf cosine
against the templates of every *candidate* state, and the best state wins
if its score clears the similarity threshold. Candidates are the current
state, its successors along graph edges, every entry state and the generic
state, deduplicated in that order.

Slot answers rarely look like intent templates ("7 am tomorrow" shares no
terms with "wake me up"), so before any scoring the engine checks whether
the new message supplied an entity that fills one of the current state's
missing required slots. If so the session stays put and the fill counts as
a confident match.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from ..core.messages import (
    Message,
    MessageKind,
    PLACEHOLDER_RE,
    Responder,
    Sender,
    StructuredElement,
    new_message_id,
)
from ..core.session import SessionState
from ..entities.recognizer import format_date, format_time
from ..entities.types import EntitySet, EntitySpan, merge_into
from ..match.tfidf import TfidfIndex, fit as fit_index
from .model import DialogueGraph, GraphDecision, GraphError, GraphState, SlotSpec

DEFAULT_TAU_SIM = 0.35

_FREQ_WORDS = {
    "once": "once",
    "hourly": "every hour",
    "daily": "every day",
    "weekly": "every week",
}


class RenderError(GraphError):
    """A response template referenced a value that is not available."""


def format_value(key: str, value: object, today: date | None = None) -> str:
    """Render one slot value for humans; `key` is the entity type name."""
    if key == "time" and isinstance(value, int):
        return format_time(value)
    if key == "date" and isinstance(value, str):
        return format_date(value, today)
    if key == "frequency" and isinstance(value, str):
        if value.startswith("hourly:"):
            return f"every {value.split(':', 1)[1]} hours"
        return _FREQ_WORDS.get(value, value)
    return str(value)


def render_response(
    template: str, values: EntitySet | dict, today: date | None = None
) -> str:
    """Fill {placeholders} in a response template with formatted values.

    With ``today`` given, relative date markers render as the calendar date
    they resolve to; without it they stay as the bare word.
    """
    mapping = values.value_map() if isinstance(values, EntitySet) else dict(values)
    missing = [k for k in PLACEHOLDER_RE.findall(template) if k not in mapping]
    if missing:
        raise RenderError(f"template needs values for: {', '.join(sorted(set(missing)))}")

    def _sub(match) -> str:
        key = match.group(1)
        return format_value(key, mapping[key], today)

    return PLACEHOLDER_RE.sub(_sub, template)


def build_matcher(graph: DialogueGraph) -> TfidfIndex:
    """Index every state's templates for cosine scoring."""
    return fit_index(graph.all_templates())


def candidate_states(graph: DialogueGraph, session: SessionState) -> list[str]:
    """Possible next states: stay, follow an edge, start fresh, or generic."""
    ordered: list[str] = []
    current = session.current_state_id
    if current is not None and current in graph.states:
        ordered.append(current)
        ordered.extend(graph.successors(current))
    ordered.extend(s.id for s in graph.entry_states())
    ordered.append(graph.generic_state().id)
    seen: set[str] = set()
    out: list[str] = []
    for sid in ordered:
        if sid not in seen:
            seen.add(sid)
            out.append(sid)
    return out


def _shared_terms(index: TfidfIndex, qvec: dict[int, float], owner: int) -> int:
    return len(qvec.keys() & index.phrase_vectors[owner].keys())


@dataclass
class _Ranked:
    state_id: str
    template_index: int
    score: float
    shared: int


def rank_states(
    index: TfidfIndex, text: str, allowed: list[str]
) -> list[_Ranked]:
    """Best template score per allowed state, strongest first.

    Ties break toward the template sharing more terms with the query, then
    the lexicographically smaller state id, so ranking is deterministic.
    """
    if not allowed:
        raise ValueError("allowed states must not be empty")
    qvec = index.query_vector(text)
    if not qvec:
        return []
    allowed_set = set(allowed)
    best: dict[str, _Ranked] = {}
    for i, (state_id, vec) in enumerate(zip(index.phrase_owner, index.phrase_vectors)):
        if state_id not in allowed_set:
            continue
        score = 0.0
        small, big = (qvec, vec) if len(qvec) <= len(vec) else (vec, qvec)
        for term, weight in small.items():
            other = big.get(term)
            if other is not None:
                score += weight * other
        if score <= 0.0:
            continue
        shared = len(qvec.keys() & vec.keys())
        prev = best.get(state_id)
        if prev is None or (score, shared) > (prev.score, prev.shared):
            best[state_id] = _Ranked(state_id, i, score, shared)
    return sorted(best.values(), key=lambda r: (-r.score, -r.shared, r.state_id))


def _assistant_message(
    text: str,
    element: StructuredElement | None,
    now_ms: int,
) -> Message:
    return Message(
        id=new_message_id(),
        sender=Sender.ASSISTANT,
        kind=MessageKind.UI_ELEMENT if element is not None else MessageKind.TEXT,
        body=text,
        timestamp=now_ms,
        responder=Responder.GRAPH,
        element=element,
    )


def _missing_slots(state: GraphState, entities: EntitySet) -> list[SlotSpec]:
    out = []
    for slot in state.effective_required():
        if not entities.has(slot.entity_type):
            out.append(slot)
    return out


def advance(
    graph: DialogueGraph,
    session: SessionState,
    text: str,
    index: TfidfIndex,
    *,
    new_spans: list[EntitySpan] | None = None,
    tau_sim: float = DEFAULT_TAU_SIM,
    now_ms: int = 0,
    today: date | None = None,
) -> GraphDecision:
    """Run one user message through the graph.

    `text` should already have entity surfaces replaced by tags; `new_spans`
    are the entities extracted from this very message. The engine owns the
    session's entity memory: spans merge in here exactly once per message,
    whether or not a state matches, and a firing action consumes its state's
    slots (values travel on the decision). `matched_state` is None on a
    miss; the caller decides what to do next in that case.
    """
    if session.handed_off:
        raise GraphError("session already handed off to a human")

    allowed = candidate_states(graph, session)
    new_spans = list(new_spans or [])

    state: GraphState | None = None
    score = 0.0

    # slot continuation: answering a prompt does not need to look like an
    # intent, so check against the slots that were open before this message
    current = graph.states.get(session.current_state_id or "")
    if current is not None and not current.is_generic and new_spans:
        open_types = {s.entity_type for s in _missing_slots(current, session.entities)}
        supplied = {sp.entity_type for sp in new_spans}
        if open_types & supplied:
            state, score = current, 1.0

    merge_into(session.entities, new_spans)

    if state is None:
        ranked = rank_states(index, text, allowed)
        if ranked and ranked[0].score >= tau_sim:
            state, score = graph.states[ranked[0].state_id], ranked[0].score
        else:
            top = ranked[0].score if ranked else 0.0
            return GraphDecision(matched_state=None, score=top)

    return resolve_state(graph, state, session, score, now_ms=now_ms, today=today)


def resolve_state(
    graph: DialogueGraph,
    state: GraphState,
    session: SessionState,
    score: float,
    *,
    now_ms: int = 0,
    today: date | None = None,
) -> GraphDecision:
    """Land on a state: prompt the first open slot, fire the action, or
    send the canned response. Firing consumes the state's slots."""
    session.current_state_id = state.id

    missing = _missing_slots(state, session.entities)
    if missing:
        slot = missing[0]
        return GraphDecision(
            matched_state=state.id,
            score=score,
            response=_assistant_message(slot.prompt, slot.element, now_ms),
            slots_missing=[s.name for s in missing],
        )

    if state.action is not None:
        ack = render_response(state.action.ack_template, session.entities, today)
        slot_values = {
            slot.name: session.entities.value(slot.entity_type)
            for slot in state.slot_table
            if session.entities.has(slot.entity_type)
        }
        for slot in state.slot_table:
            session.entities.spans.pop(slot.entity_type, None)
        return GraphDecision(
            matched_state=state.id,
            score=score,
            response=_assistant_message(ack, None, now_ms),
            action_fired=state.action,
            slot_values=slot_values,
        )

    situation = "greeting" if "greeting" in state.responses else next(iter(state.responses))
    text_out = render_response(state.responses[situation], session.entities, today)
    element = state.response_elements.get(situation)
    return GraphDecision(
        matched_state=state.id,
        score=score,
        response=_assistant_message(text_out, element, now_ms),
    )
