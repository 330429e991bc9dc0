"""Sparse TF-IDF vectorizer and cosine scorer for state identification.

Term weights use raw term counts and the smoothed inverse document frequency
ln((1+N)/(1+df)) + 1, so a term present in every template still carries a
positive weight. Vectors are L2-normalized at build time, which makes the
match score a cosine in [0, 1] (all weights are non-negative). The index is
immutable after fit; rebuilds swap in a whole new index.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

_KEEP = re.compile(r"[^a-z0-9_ ]+")


def normalize_query(text: str) -> list[str]:
    """Lowercase, drop characters outside {a-z, 0-9, _, space}, split."""
    return _KEEP.sub("", text.lower()).split()


class BuildError(Exception):
    """Raised when the template corpus cannot be indexed."""


@dataclass
class MatchResult:
    state_id: str
    template_index: int
    score: float


@dataclass
class TfidfIndex:
    vocabulary: dict[str, int]
    idf: list[float]
    phrase_vectors: list[dict[int, float]]  # unit L2 norm, term index -> weight
    phrase_owner: list[str]
    sublinear_tf: bool = False

    def query_vector(self, text: str) -> dict[int, float]:
        counts: dict[int, float] = {}
        for term in normalize_query(text):
            idx = self.vocabulary.get(term)
            if idx is not None:
                counts[idx] = counts.get(idx, 0.0) + 1.0
        if not counts:
            return {}
        vec = {
            i: (1.0 + math.log(c) if self.sublinear_tf else c) * self.idf[i]
            for i, c in counts.items()
        }
        norm = math.sqrt(sum(w * w for w in vec.values()))
        return {i: w / norm for i, w in vec.items()}


def fit(
    templates: Sequence[tuple[str, str]],
    sublinear_tf: bool = False,
) -> TfidfIndex:
    """Index (state_id, phrase) templates.

    Raises BuildError for an empty template set or a phrase that normalizes
    to zero terms (such a template could never be matched).
    """
    if not templates:
        raise BuildError("no templates to index")
    token_lists: list[list[str]] = []
    for state_id, phrase in templates:
        terms = normalize_query(phrase)
        if not terms:
            raise BuildError(f"template for state {state_id!r} has no terms: {phrase!r}")
        token_lists.append(terms)

    vocabulary: dict[str, int] = {}
    df: dict[int, int] = {}
    for terms in token_lists:
        seen = set()
        for term in terms:
            idx = vocabulary.setdefault(term, len(vocabulary))
            if idx not in seen:
                df[idx] = df.get(idx, 0) + 1
                seen.add(idx)

    n = len(templates)
    idf = [math.log((1 + n) / (1 + df[i])) + 1.0 for i in range(len(vocabulary))]

    phrase_vectors: list[dict[int, float]] = []
    for terms in token_lists:
        counts: dict[int, float] = {}
        for term in terms:
            idx = vocabulary[term]
            counts[idx] = counts.get(idx, 0.0) + 1.0
        vec = {
            i: (1.0 + math.log(c) if sublinear_tf else c) * idf[i]
            for i, c in counts.items()
        }
        norm = math.sqrt(sum(w * w for w in vec.values()))
        phrase_vectors.append({i: w / norm for i, w in vec.items()})

    return TfidfIndex(
        vocabulary=vocabulary,
        idf=idf,
        phrase_vectors=phrase_vectors,
        phrase_owner=[state_id for state_id, _ in templates],
        sublinear_tf=sublinear_tf,
    )


def _dot(a: dict[int, float], b: dict[int, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b[i] for i, w in a.items() if i in b)


def best_match(
    index: TfidfIndex,
    text: str,
    allowed_states: Iterable[str],
) -> MatchResult | None:
    """Maximum cosine over templates owned by the allowed states.

    Returns None when the query shares no vocabulary term with any allowed
    template. Ties break toward the lower template index.
    """
    allowed = set(allowed_states)
    if not allowed:
        raise ValueError("allowed_states must be non-empty")
    query = index.query_vector(text)
    if not query:
        return None
    best: MatchResult | None = None
    for t_idx, owner in enumerate(index.phrase_owner):
        if owner not in allowed:
            continue
        score = _dot(query, index.phrase_vectors[t_idx])
        if score > 0.0 and (best is None or score > best.score):
            best = MatchResult(owner, t_idx, score)
    return best
