from .metrics import (
    AUTOMATED,
    HUMAN,
    DayScore,
    EvalRecord,
    ScoreReport,
    UndefinedScoreError,
    aor_score,
    daily_mean,
    e2e_score,
    record_from_conversation,
    records_from_events,
    score_conversations,
    score_records,
)
from .simulate import (
    ExperimentReport,
    NoiseConfig,
    UserScript,
    apply_noise,
    generate_scripts,
    run_experiment,
    run_policy,
    simulate_conversation,
)

__all__ = [
    "AUTOMATED",
    "HUMAN",
    "DayScore",
    "EvalRecord",
    "ScoreReport",
    "UndefinedScoreError",
    "aor_score",
    "daily_mean",
    "e2e_score",
    "record_from_conversation",
    "records_from_events",
    "score_conversations",
    "score_records",
    "ExperimentReport",
    "NoiseConfig",
    "UserScript",
    "apply_noise",
    "generate_scripts",
    "run_experiment",
    "run_policy",
    "simulate_conversation",
]
