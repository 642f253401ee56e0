"""Turn head probabilities into one name per speaker."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Sequence

import torch

from speakerid.core import PAD, Assignment, HeadScores, NameMention, Transcript, normalize_name, speaker_sort_key
from speakerid.encode import ContextWindow, assemble_window

HEAD_NAMES = ("prev", "cur", "next")
DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class Candidate:
    speaker_id: str
    name: str
    probability: float
    source: tuple[int, int, str]  # (utt_index, start_tok, head)


def candidates_from_scores(
    cw: ContextWindow, scores: Sequence[HeadScores], tau: float = DEFAULT_TAU
) -> list[Candidate]:
    out = []
    for m, s in zip(cw.mentions, scores):
        name = normalize_name(m.surface)
        if not name:
            continue
        for head, speaker, p in zip(HEAD_NAMES, cw.speakers, s):
            p = float(p)
            if speaker != PAD and p >= tau:
                out.append(Candidate(speaker, name, p, (m.utt_index, m.start_tok, head)))
    return out


def windows_by_utterance(t: Transcript, mentions: Iterable[NameMention]) -> list[ContextWindow]:
    ordered = sorted(mentions, key=lambda m: (m.utt_index, m.start_tok))
    return [assemble_window(t, list(g)) for _, g in groupby(ordered, key=lambda m: m.utt_index)]


def collect_candidates(t: Transcript, mentions: Iterable[NameMention], model, tau: float = DEFAULT_TAU) -> list[Candidate]:
    """Run ``model`` over every mention and keep non-pad heads scoring >= ``tau``."""
    out: list[Candidate] = []
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            for cw in windows_by_utterance(t, mentions):
                out.extend(candidates_from_scores(cw, model(cw), tau))
    finally:
        model.train(was_training)
    return out


def _rank(c: Candidate) -> tuple:
    utt, start, head = c.source
    return (-c.probability, utt, start, c.name, HEAD_NAMES.index(head))


def resolve(candidates: Iterable[Candidate], unique_names: bool = False) -> list[Assignment]:
    """Highest-probability name per speaker.

    Ties go to the earlier mention, then the lexicographically smaller name.
    With ``unique_names`` a name already given to a higher-ranked speaker is
    skipped.
    """
    best: dict[str, Candidate] = {}
    if unique_names:
        used: set[str] = set()
        for c in sorted(candidates, key=_rank):
            if c.speaker_id not in best and c.name not in used:
                best[c.speaker_id] = c
                used.add(c.name)
    else:
        for c in candidates:
            cur = best.get(c.speaker_id)
            if cur is None or _rank(c) < _rank(cur):
                best[c.speaker_id] = c
    return [
        Assignment(sid, best[sid].name, best[sid].probability)
        for sid in sorted(best, key=speaker_sort_key)
    ]


def predict_transcript(t: Transcript, mentions: Iterable[NameMention], model,
                       tau: float = DEFAULT_TAU, unique_names: bool = False) -> list[Assignment]:
    return resolve(collect_candidates(t, mentions, model, tau), unique_names)
