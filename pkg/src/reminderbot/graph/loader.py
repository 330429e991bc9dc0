"""Load and validate dialogue graphs from JSON.

Expected document shape::

    {
      "version": 1,
      "states": [
        {
          "id": "wakeup_reminder",
          "intent": "set_wakeup_reminder",
          "entry": true,
          "generic": false,
          "templates": ["wake me up", ...],
          "slots": [
            {"name": "time", "entity_type": "time", "required": true,
             "prompt": "...", "element": {...}}          # element optional
          ],
          "responses": {"greeting": "..." | {"text": "...", "element": {...}}},
          "action": {"tag": "_api_..._", "kind": "create_reminder",
                     "required_slots": ["time"], "ack_template": "..."}
        }, ...
      ],
      "edges": [["view_reminders", "cancel_reminder"], ...]
    }

Validation is strict: a broken graph should fail at load time, not while a
user is mid-conversation.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..core.messages import PLACEHOLDER_RE, StructuredElement
from ..entities.types import EntityType
from .model import ActionKind, ActionSpec, DialogueGraph, GraphError, GraphState, SlotSpec

_SITUATIONS = ("greeting", "slot_prompt", "confirmation")


def _parse_element(raw: dict) -> StructuredElement:
    return StructuredElement.from_dict(raw)


def _parse_slot(raw: dict, state_id: str) -> SlotSpec:
    try:
        entity_type = EntityType(raw["entity_type"])
    except (KeyError, ValueError):
        raise GraphError(
            f"state {state_id}: slot {raw.get('name')!r} has unknown entity type "
            f"{raw.get('entity_type')!r}"
        ) from None
    prompt = raw.get("prompt", "")
    if not prompt or not prompt.strip():
        raise GraphError(f"state {state_id}: slot {raw.get('name')!r} is missing a prompt")
    element = _parse_element(raw["element"]) if raw.get("element") else None
    return SlotSpec(
        name=raw["name"],
        entity_type=entity_type,
        required=bool(raw.get("required", False)),
        prompt=prompt,
        element=element,
    )


def _parse_action(raw: dict, state_id: str) -> ActionSpec:
    try:
        kind = ActionKind(raw["kind"])
    except (KeyError, ValueError):
        raise GraphError(f"state {state_id}: unknown action kind {raw.get('kind')!r}") from None
    action = ActionSpec(
        tag=raw["tag"],
        kind=kind,
        required_slots=list(raw.get("required_slots", [])),
        ack_template=raw.get("ack_template", ""),
    )
    if not action.ack_template.strip():
        raise GraphError(f"state {state_id}: action {action.tag} has no ack template")
    return action


def _parse_state(raw: dict) -> GraphState:
    state_id = raw.get("id")
    if not state_id:
        raise GraphError("state without an id")
    templates = [t for t in raw.get("templates", []) if t and t.strip()]
    slots = [_parse_slot(s, state_id) for s in raw.get("slots", [])]
    responses: dict[str, str] = {}
    response_elements: dict[str, StructuredElement] = {}
    for situation, value in raw.get("responses", {}).items():
        if situation not in _SITUATIONS:
            raise GraphError(f"state {state_id}: unknown response situation {situation!r}")
        if isinstance(value, str):
            responses[situation] = value
        else:
            responses[situation] = value["text"]
            if value.get("element"):
                response_elements[situation] = _parse_element(value["element"])
    action = _parse_action(raw["action"], state_id) if raw.get("action") else None
    return GraphState(
        id=state_id,
        intent_name=raw.get("intent", state_id),
        templates=templates,
        slot_table=slots,
        responses=responses,
        response_elements=response_elements,
        action=action,
        is_generic=bool(raw.get("generic", False)),
        entry=bool(raw.get("entry", False)),
    )


def _validate(graph: DialogueGraph) -> None:
    generics = [s for s in graph.states.values() if s.is_generic]
    if len(generics) != 1:
        raise GraphError(f"graph must have exactly one generic state, found {len(generics)}")

    known = set(graph.states)
    for frm, to in graph.edges:
        if frm not in known:
            raise GraphError(f"dangling edge from unknown state {frm}")
        if to not in known:
            raise GraphError(f"dangling edge to unknown state {to}")

    for state in graph.states.values():
        if state.is_generic:
            if state.action is not None:
                raise GraphError("generic state must not carry an action")
            if "greeting" not in state.responses:
                raise GraphError("generic state needs a greeting response")
            continue
        if not state.templates:
            raise GraphError(f"state {state.id} has no templates")
        if state.action is None and not state.responses:
            raise GraphError(f"state {state.id} has neither an action nor responses")
        slot_names = {s.name for s in state.slot_table}
        if state.action is not None:
            for name in state.action.required_slots:
                if name not in slot_names:
                    raise GraphError(
                        f"state {state.id}: action requires unknown slot {name!r}"
                    )
            # every ack placeholder must be deliverable once required slots fill
            deliverable = {
                s.name for s in state.slot_table
                if s.required or s.name in state.action.required_slots
            }
            for key in PLACEHOLDER_RE.findall(state.action.ack_template):
                if key not in deliverable:
                    raise GraphError(
                        f"state {state.id}: ack references {{{key}}} which is not a "
                        "required slot"
                    )


def parse_graph(doc: dict) -> DialogueGraph:
    raw_states = doc.get("states")
    if not raw_states:
        raise GraphError("graph document has no states")
    states: dict[str, GraphState] = {}
    for raw in raw_states:
        state = _parse_state(raw)
        if state.id in states:
            raise GraphError(f"duplicate state id {state.id}")
        states[state.id] = state
    edges = [(str(e[0]), str(e[1])) for e in doc.get("edges", [])]
    graph = DialogueGraph(states=states, edges=edges)
    _validate(graph)
    return graph


def load_graph(path: str | Path) -> DialogueGraph:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise GraphError(f"cannot read graph file: {exc}") from exc
    with fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"graph file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphError("graph document must be a JSON object")
    return parse_graph(doc)


def default_graph_path() -> Path:
    from importlib import resources

    return Path(str(resources.files("reminderbot.data") / "reminders_graph.json"))


def load_default_graph() -> DialogueGraph:
    return load_graph(default_graph_path())
