"""Speaker-level precision, recall and F1, plus dataset statistics.

A predicted name is correct when it fuzzy-matches the speaker's own gold
name (full name or any of its tokens) at the labeling threshold. Counts are
pooled over all meetings before computing the ratios.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

from speakerid.core import Assignment, GoldRoster, LabeledMention, NameMention, Transcript
from speakerid.errors import UnknownSpeaker
from speakerid.label import DEFAULT_THRESHOLD, name_similarity


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    n_correct: int
    n_predicted: int
    n_speakers: int
    n_matchable: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def prf(n_correct: int, n_predicted: int, n_total: int, n_matchable: int | None = None) -> Metrics:
    p = n_correct / n_predicted if n_predicted else 0.0
    r = n_correct / n_total if n_total else 0.0
    return Metrics(p, r, f1_score(p, r), n_correct, n_predicted, n_total, n_matchable)


def speaker_prf(
    assignments: Mapping[str, Iterable[Assignment]],
    gold_rosters: Mapping[str, GoldRoster],
    threshold: float = DEFAULT_THRESHOLD,
    n_matchable: int | None = None,
) -> Metrics:
    """Micro-averaged speaker-level metrics.

    ``assignments`` and ``gold_rosters`` are keyed by meeting id; every gold
    meeting counts toward recall even if it has no predictions.
    """
    n_correct = n_predicted = 0
    for meeting_id, items in assignments.items():
        gold = gold_rosters.get(meeting_id)
        for a in items:
            if gold is None or a.speaker_id not in gold.names:
                raise UnknownSpeaker(f"{meeting_id}/{a.speaker_id} is not in the gold rosters")
            n_predicted += 1
            if name_similarity(a.name, gold.names[a.speaker_id]) >= threshold:
                n_correct += 1
    n_speakers = sum(len(g.names) for g in gold_rosters.values())
    return prf(n_correct, n_predicted, n_speakers, n_matchable)


def matchable_speakers(
    t: Transcript, gold: GoldRoster, mentions: Iterable[NameMention | LabeledMention],
    threshold: float = DEFAULT_THRESHOLD,
) -> set[str]:
    """Speakers whose gold name is matched by at least one mention."""
    surfaces = {(m.mention if isinstance(m, LabeledMention) else m).surface for m in mentions}
    found = set()
    for sid, gold_name in gold.names.items():
        if any(name_similarity(s, gold_name) >= threshold for s in surfaces):
            found.add(sid)
    return found


def count_matchable(labeled_set, threshold: float = DEFAULT_THRESHOLD) -> tuple[int, int]:
    """(matchable, total) speaker counts over ``(transcript, gold, mentions)`` triples."""
    matchable = total = 0
    for t, gold, mentions in labeled_set:
        matchable += len(matchable_speakers(t, gold, mentions, threshold))
        total += len(gold.names)
    return matchable, total


def recall_upper_bound(labeled_set, threshold: float = DEFAULT_THRESHOLD) -> float:
    matchable, total = count_matchable(labeled_set, threshold)
    return matchable / total if total else 0.0


def dataset_stats(split: Iterable[tuple[Transcript, list]]) -> tuple[int, int, int, int]:
    """(#meetings, #sentences, #names, #speakers) over ``(transcript, mentions)`` pairs."""
    meetings = sents = names = speakers = 0
    for t, mentions in split:
        meetings += 1
        sents += len(t.utterances)
        names += len(mentions)
        speakers += len(t.roster)
    return meetings, sents, names, speakers
