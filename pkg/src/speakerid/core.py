"""Domain types shared across the pipeline.

All types are frozen dataclasses; tuples are used for sequences so values
can be hashed and shared between workers.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass, field
from typing import NamedTuple

PAD = "pad"
NULL = "null"
RESERVED_IDS = frozenset({PAD, NULL})

_EDGE_PUNCT = string.punctuation + "‘’“”—–…"
_SPEAKER_NUM = re.compile(r"(\d+)$")


def tokenize(text: str) -> tuple[str, ...]:
    """NFC-normalize and split on whitespace."""
    return tuple(unicodedata.normalize("NFC", text).split())


def strip_token(token: str) -> str:
    return token.strip(_EDGE_PUNCT)


def normalize_name(text: str) -> str:
    """Canonical form used for all name comparisons: tokens stripped of edge
    punctuation, case-folded, joined by single spaces."""
    parts = (strip_token(t) for t in unicodedata.normalize("NFC", text).split())
    return " ".join(p for p in parts if p).casefold()


def speaker_ordinal(speaker_id: str) -> int:
    """Numeric suffix of a generated id (``speaker12`` -> 12)."""
    m = _SPEAKER_NUM.search(speaker_id)
    return int(m.group(1)) if m else 0


def speaker_sort_key(speaker_id: str) -> tuple[int, str]:
    return speaker_ordinal(speaker_id), speaker_id


@dataclass(frozen=True)
class Utterance:
    index: int
    speaker_id: str
    tokens: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


PAD_UTTERANCE = Utterance(index=-1, speaker_id=PAD, tokens=("<pad>",))


@dataclass(frozen=True)
class Transcript:
    meeting_id: str
    utterances: tuple[Utterance, ...]
    roster: frozenset[str] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.roster is None:
            object.__setattr__(
                self, "roster", frozenset(u.speaker_id for u in self.utterances)
            )

    def __len__(self) -> int:
        return len(self.utterances)

    def ordered_roster(self) -> list[str]:
        return sorted(self.roster, key=speaker_sort_key)


@dataclass(frozen=True)
class GoldRoster:
    meeting_id: str
    names: dict[str, str]

    def __hash__(self):
        return hash((self.meeting_id, tuple(sorted(self.names.items()))))


@dataclass(frozen=True, order=True)
class NameMention:
    utt_index: int
    start_tok: int
    end_tok: int
    surface: str

    @property
    def span(self) -> tuple[int, int]:
        return self.start_tok, self.end_tok

    def overlaps(self, other: "NameMention") -> bool:
        return (
            self.utt_index == other.utt_index
            and self.start_tok <= other.end_tok
            and other.start_tok <= self.end_tok
        )


@dataclass(frozen=True)
class LabeledMention:
    mention: NameMention
    label: str
    match_score: float


class HeadScores(NamedTuple):
    """Probabilities from the prev/cur/next heads. Entries may be floats or
    0-d tensors (during training)."""

    p_prev: float
    p_cur: float
    p_next: float


@dataclass(frozen=True)
class Assignment:
    speaker_id: str
    name: str
    probability: float


def validate_transcript(t: Transcript, g: GoldRoster) -> list[str]:
    """Return a description of every violated invariant; empty when valid."""
    problems: list[str] = []
    if t.meeting_id != g.meeting_id:
        problems.append(f"meeting_id mismatch: {t.meeting_id!r} vs {g.meeting_id!r}")

    for pos, u in enumerate(t.utterances):
        if u.index != pos:
            problems.append(f"non-contiguous index: position {pos} has index {u.index}")
            break
    for u in t.utterances:
        if u.speaker_id == PAD:
            problems.append(f"utterance {u.index}: pad speaker in stored transcript")
        elif u.speaker_id not in t.roster:
            problems.append(f"utterance {u.index}: speaker {u.speaker_id} not in roster")
        if not u.tokens and u.speaker_id != PAD:
            problems.append(f"utterance {u.index}: empty tokens")

    for reserved in sorted(RESERVED_IDS & t.roster):
        problems.append(f"roster contains reserved id {reserved!r}")

    gold_ids = set(g.names)
    for sid in sorted(gold_ids - t.roster, key=speaker_sort_key):
        problems.append(f"gold roster speaker {sid} absent from transcript")
    for sid in sorted(t.roster - gold_ids, key=speaker_sort_key):
        problems.append(f"transcript speaker {sid} absent from gold roster")
    for sid, name in sorted(g.names.items()):
        if not name.strip():
            problems.append(f"gold name for {sid} is blank")
    return problems


def validate_mention(t: Transcript, m: NameMention) -> list[str]:
    if not 0 <= m.utt_index < len(t.utterances):
        return [f"mention utterance {m.utt_index} out of range"]
    tokens = t.utterances[m.utt_index].tokens
    if not 0 <= m.start_tok <= m.end_tok < len(tokens):
        return [f"mention span {m.span} out of range for utterance {m.utt_index}"]
    if " ".join(tokens[m.start_tok : m.end_tok + 1]) != m.surface:
        return [f"mention surface {m.surface!r} does not match its span"]
    return []
