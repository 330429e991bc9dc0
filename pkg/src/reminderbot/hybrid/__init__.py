from .controller import (
    DEFAULT_UNFAVORABLE,
    Engine,
    HybridConfig,
    RoutingDecision,
    check_turn_threshold,
    check_unfavorable,
    handle_message,
    map_action_tag,
)

__all__ = [
    "DEFAULT_UNFAVORABLE",
    "Engine",
    "HybridConfig",
    "RoutingDecision",
    "check_turn_threshold",
    "check_unfavorable",
    "handle_message",
    "map_action_tag",
]
