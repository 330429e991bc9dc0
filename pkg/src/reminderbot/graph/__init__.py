from .engine import (
    DEFAULT_TAU_SIM,
    RenderError,
    advance,
    build_matcher,
    candidate_states,
    format_value,
    rank_states,
    render_response,
    resolve_state,
)
from .loader import default_graph_path, load_default_graph, load_graph, parse_graph
from .model import (
    ActionKind,
    ActionSpec,
    DialogueGraph,
    GraphDecision,
    GraphError,
    GraphState,
    SlotSpec,
)

__all__ = [
    "ActionKind",
    "ActionSpec",
    "DEFAULT_TAU_SIM",
    "DialogueGraph",
    "GraphDecision",
    "GraphError",
    "GraphState",
    "RenderError",
    "SlotSpec",
    "advance",
    "build_matcher",
    "candidate_states",
    "default_graph_path",
    "format_value",
    "load_default_graph",
    "load_graph",
    "parse_graph",
    "rank_states",
    "render_response",
    "resolve_state",
]
