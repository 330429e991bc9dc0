from .tfidf import BuildError, MatchResult, TfidfIndex, best_match, fit, normalize_query

__all__ = ["BuildError", "MatchResult", "TfidfIndex", "best_match", "fit", "normalize_query"]
