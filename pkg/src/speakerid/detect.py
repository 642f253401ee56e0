"""Person-name mention detection.

The reference detector is a gazetteer scan over whitespace tokens. Output of
an external NER tool can be imported instead through a JSON-lines span file.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

from speakerid.core import GoldRoster, NameMention, Transcript, normalize_name, strip_token
from speakerid.errors import ExternalDetectorUnavailable, SpanOutOfRange

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorConfig:
    kind: Literal["external", "gazetteer"] = "gazetteer"
    gazetteer_source: Literal["roster", "file"] = "roster"
    min_token_len: int = 2
    gazetteer_path: str | None = None
    mention_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("external", "gazetteer"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.kind == "gazetteer":
            if self.gazetteer_source not in ("roster", "file"):
                raise ValueError(f"unknown gazetteer source {self.gazetteer_source!r}")
            if self.gazetteer_source == "file" and not self.gazetteer_path:
                raise ValueError("gazetteer_source='file' needs gazetteer_path")


class Gazetteer:
    """A set of normalized names, each stored as a tuple of tokens."""

    def __init__(self, names: Iterable[str] = (), min_token_len: int = 2):
        self.min_token_len = min_token_len
        self.entries: set[tuple[str, ...]] = set()
        for name in names:
            self.add(name)

    def add(self, name: str) -> None:
        key = tuple(normalize_name(name).split())
        if key and all(len(t) >= self.min_token_len for t in key):
            self.entries.add(key)

    @property
    def max_len(self) -> int:
        return max((len(e) for e in self.entries), default=0)

    @classmethod
    def from_roster(cls, gold: GoldRoster, min_token_len: int = 2) -> "Gazetteer":
        gaz = cls(min_token_len=min_token_len)
        for name in gold.names.values():
            gaz.add(name)
            for tok in name.split():
                gaz.add(tok)
        return gaz

    @classmethod
    def from_file(cls, path: str | Path, min_token_len: int = 2) -> "Gazetteer":
        path = Path(path)
        if not path.exists():
            raise ExternalDetectorUnavailable(f"gazetteer file not found: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        return cls((ln for ln in lines if ln.strip() and not ln.startswith("#")), min_token_len)

    def scan(self, tokens: tuple[str, ...]) -> list[tuple[int, int]]:
        """All (start, end) spans whose normalized tokens form an entry."""
        norm = [strip_token(t).casefold() for t in tokens]
        hits = []
        width = self.max_len
        for start in range(len(tokens)):
            for end in range(start, min(start + width, len(tokens))):
                if len(norm[end]) < self.min_token_len:
                    break
                if tuple(norm[start : end + 1]) in self.entries:
                    hits.append((start, end))
        return hits


def resolve_overlaps(spans: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    """Keep longest spans first, then leftmost; drop anything overlapping."""
    kept: list[tuple[int, int]] = []
    taken: set[int] = set()
    for start, end in sorted(set(spans), key=lambda s: (s[0] - s[1], s[0])):
        if taken.isdisjoint(range(start, end + 1)):
            kept.append((start, end))
            taken.update(range(start, end + 1))
    return sorted(kept)


def _mentions_from_spans(t: Transcript, utt_index: int, spans) -> list[NameMention]:
    toks = t.utterances[utt_index].tokens
    return [NameMention(utt_index, s, e, " ".join(toks[s : e + 1])) for s, e in spans]


def detect_mentions(
    t: Transcript,
    cfg: DetectorConfig,
    gold: GoldRoster | None = None,
    gazetteer: Gazetteer | None = None,
) -> list[NameMention]:
    """Detect name mentions, sorted by (utterance, start token), non-overlapping.

    ``gazetteer`` may be passed pre-built to avoid re-reading a file per transcript.
    """
    if cfg.kind == "external":
        if not cfg.mention_path or not Path(cfg.mention_path).exists():
            raise ExternalDetectorUnavailable(f"external mention file not found: {cfg.mention_path}")
        return import_external_mentions(t, cfg.mention_path)

    if gazetteer is None:
        if cfg.gazetteer_source == "roster":
            if gold is None:
                raise ValueError("roster gazetteer requires the gold roster")
            gazetteer = Gazetteer.from_roster(gold, cfg.min_token_len)
        else:
            gazetteer = Gazetteer.from_file(cfg.gazetteer_path, cfg.min_token_len)

    mentions: list[NameMention] = []
    for u in t.utterances:
        spans = resolve_overlaps(gazetteer.scan(u.tokens))
        mentions.extend(_mentions_from_spans(t, u.index, spans))
    return mentions


def read_mention_file(path: str | Path) -> dict[str, list[dict]]:
    by_meeting: dict[str, list[dict]] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                by_meeting.setdefault(str(rec["meeting_id"]), []).append(rec)
    return by_meeting


def import_external_mentions(
    t: Transcript, mention_file: str | Path | list[dict]
) -> list[NameMention]:
    """Load spans produced by an external NER tool for one transcript.

    ``mention_file`` is a path to a JSON-lines file of
    ``{meeting_id, utt_index, start_tok, end_tok, surface}`` records, or the
    already-parsed records.
    """
    if isinstance(mention_file, (str, Path)):
        if not Path(mention_file).exists():
            raise ExternalDetectorUnavailable(f"external mention file not found: {mention_file}")
        records = read_mention_file(mention_file).get(t.meeting_id, [])
    else:
        records = [r for r in mention_file if str(r.get("meeting_id", t.meeting_id)) == t.meeting_id]

    per_utt: dict[int, list[tuple[int, int]]] = {}
    for rec in records:
        ui, s, e = int(rec["utt_index"]), int(rec["start_tok"]), int(rec["end_tok"])
        if not 0 <= ui < len(t.utterances):
            raise SpanOutOfRange(f"{t.meeting_id}: utterance {ui} does not exist")
        n = len(t.utterances[ui].tokens)
        if not 0 <= s <= e < n:
            raise SpanOutOfRange(f"{t.meeting_id}: span ({s}, {e}) outside utterance {ui} of {n} tokens")
        surface = " ".join(t.utterances[ui].tokens[s : e + 1])
        if rec.get("surface") not in (None, surface):
            log.debug("%s: surface %r replaced by span text %r", t.meeting_id, rec["surface"], surface)
        per_utt.setdefault(ui, []).append((s, e))

    mentions: list[NameMention] = []
    for ui in sorted(per_utt):
        mentions.extend(_mentions_from_spans(t, ui, resolve_overlaps(per_utt[ui])))
    return mentions


def write_mention_file(path: str | Path, items: Iterable[tuple[str, NameMention]]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for meeting_id, m in items:
            rec = {"meeting_id": meeting_id, "utt_index": m.utt_index,
                   "start_tok": m.start_tok, "end_tok": m.end_tok, "surface": m.surface}
            fh.write(json.dumps(rec) + "\n")
