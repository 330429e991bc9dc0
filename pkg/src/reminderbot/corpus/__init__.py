from .pipeline import (
    AckPattern,
    CorpusSideStats,
    CorpusStats,
    PairSource,
    PipelineError,
    PipelineReport,
    TrainingPair,
    compute_stats,
    count_turns,
    default_ack_patterns,
    extract_actions,
    filter_domain,
    label_by_domain_field,
    load_ack_patterns,
    make_pairs,
    merge_notifications,
    mix_sources,
    normalize_conversation,
    normalize_orthography,
    read_conversations_jsonl,
    read_pairs_tsv,
    replace_entities,
    run_pipeline,
    split,
    validate_ack_patterns,
    write_conversations_jsonl,
    write_pairs_tsv,
)

__all__ = [
    "AckPattern",
    "CorpusSideStats",
    "CorpusStats",
    "PairSource",
    "PipelineError",
    "PipelineReport",
    "TrainingPair",
    "compute_stats",
    "count_turns",
    "default_ack_patterns",
    "extract_actions",
    "filter_domain",
    "label_by_domain_field",
    "load_ack_patterns",
    "make_pairs",
    "merge_notifications",
    "mix_sources",
    "normalize_conversation",
    "normalize_orthography",
    "read_conversations_jsonl",
    "read_pairs_tsv",
    "replace_entities",
    "run_pipeline",
    "split",
    "validate_ack_patterns",
    "write_conversations_jsonl",
    "write_pairs_tsv",
]
from .synthetic import make_synthetic_raw

__all__.append("make_synthetic_raw")
