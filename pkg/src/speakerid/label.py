"""Bind detected mentions to speaker ids by fuzzy name matching.

Each speaker contributes several candidate strings: the full gold name and
every token of it (so a bare first name can match). The best similarity over
those candidates scores the speaker; the top speaker wins if it reaches the
threshold, otherwise the mention is labeled ``null``.
"""

from __future__ import annotations

from dataclasses import dataclass

from speakerid.core import (
    NULL,
    GoldRoster,
    LabeledMention,
    NameMention,
    Transcript,
    normalize_name,
    speaker_sort_key,
)
from speakerid.fuzzy import levenshtein

DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True)
class MatchResult:
    best_speaker: str
    theta: float
    l_sum: int
    d: int


def name_candidates(full_name: str) -> list[str]:
    full = normalize_name(full_name)
    cands = [full]
    for tok in full.split():
        if tok not in cands:
            cands.append(tok)
    return cands


def _best_against(query: str, candidates: list[str]) -> tuple[float, int, int]:
    best = (-1.0, 0, 0)
    for cand in candidates:
        l_sum = len(query) + len(cand)
        d = levenshtein(query, cand)
        theta = 1.0 if l_sum == 0 else (l_sum - d) / l_sum
        if theta > best[0]:
            best = (theta, l_sum, d)
    return best


def name_similarity(name: str, gold_name: str) -> float:
    """Similarity of a (possibly partial) name against one gold full name."""
    return _best_against(normalize_name(name), name_candidates(gold_name))[0]


def match_name(surface: str, gold: GoldRoster, threshold: float = DEFAULT_THRESHOLD) -> MatchResult:
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    query = normalize_name(surface)
    best: MatchResult | None = None
    for sid in sorted(gold.names, key=speaker_sort_key):
        theta, l_sum, d = _best_against(query, name_candidates(gold.names[sid]))
        # strict '>' keeps the lower ordinal on ties
        if best is None or theta > best.theta:
            best = MatchResult(sid, theta, l_sum, d)
    if best is None:
        return MatchResult(NULL, 0.0, len(query), len(query))
    if best.theta < threshold:
        return MatchResult(NULL, best.theta, best.l_sum, best.d)
    return best


def match_mention(m: NameMention, gold: GoldRoster, threshold: float = DEFAULT_THRESHOLD) -> MatchResult:
    return match_name(m.surface, gold, threshold)


def build_labeled_dataset(
    t: Transcript,
    gold: GoldRoster,
    mentions: list[NameMention],
    threshold: float = DEFAULT_THRESHOLD,
) -> list[LabeledMention]:
    out = []
    for m in mentions:
        r = match_mention(m, gold, threshold)
        out.append(LabeledMention(m, r.best_speaker, r.theta))
    return out
