"""On-disk formats: JSON-lines datasets, gold sidecars and predictions.

Dataset files never contain gold names; those live in a ``.gold.jsonl``
sidecar keyed by meeting id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from speakerid.core import (
    Assignment,
    GoldRoster,
    LabeledMention,
    NameMention,
    Transcript,
    Utterance,
    speaker_sort_key,
)


@dataclass
class MeetingRecord:
    transcript: Transcript
    mentions: list[LabeledMention] = field(default_factory=list)
    split: str = ""

    @property
    def meeting_id(self) -> str:
        return self.transcript.meeting_id

    @property
    def name_mentions(self) -> list[NameMention]:
        return [lm.mention for lm in self.mentions]


def record_to_dict(rec: MeetingRecord) -> dict:
    t = rec.transcript
    return {
        "meeting_id": t.meeting_id,
        "split": rec.split,
        "utterances": [
            {"index": u.index, "speaker_id": u.speaker_id, "tokens": list(u.tokens)}
            for u in t.utterances
        ],
        "mentions": [
            {
                "utt_index": lm.mention.utt_index,
                "start_tok": lm.mention.start_tok,
                "end_tok": lm.mention.end_tok,
                "surface": lm.mention.surface,
                "label": lm.label,
                "match_score": round(lm.match_score, 6),
            }
            for lm in rec.mentions
        ],
    }


def record_from_dict(d: dict) -> MeetingRecord:
    utts = tuple(Utterance(int(u["index"]), u["speaker_id"], tuple(u["tokens"])) for u in d["utterances"])
    t = Transcript(d["meeting_id"], utts)
    mentions = [
        LabeledMention(
            NameMention(int(m["utt_index"]), int(m["start_tok"]), int(m["end_tok"]), m["surface"]),
            m.get("label", "null"),
            float(m.get("match_score", 0.0)),
        )
        for m in d.get("mentions", [])
    ]
    return MeetingRecord(t, mentions, d.get("split", ""))


def _write_lines(path: str | Path, rows: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_lines(path: str | Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_dataset(path: str | Path, records: Iterable[MeetingRecord]) -> None:
    _write_lines(path, (record_to_dict(r) for r in records))


def read_dataset(path: str | Path) -> list[MeetingRecord]:
    return [record_from_dict(d) for d in _read_lines(path)]


def gold_path_for(dataset_path: str | Path) -> Path:
    p = Path(dataset_path)
    stem = p.name[: -len(".jsonl")] if p.name.endswith(".jsonl") else p.stem
    return p.with_name(f"{stem}.gold.jsonl")


def write_gold(path: str | Path, rosters: Iterable[GoldRoster]) -> None:
    _write_lines(path, ({"meeting_id": g.meeting_id, "names": g.names} for g in rosters))


def read_gold(path: str | Path) -> dict[str, GoldRoster]:
    return {d["meeting_id"]: GoldRoster(d["meeting_id"], dict(d["names"])) for d in _read_lines(path)}


def write_predictions(path: str | Path, predictions: Mapping[str, list[Assignment]]) -> None:
    rows = []
    for meeting_id in sorted(predictions):
        for a in sorted(predictions[meeting_id], key=lambda a: speaker_sort_key(a.speaker_id)):
            rows.append({"meeting_id": meeting_id, "speaker_id": a.speaker_id,
                         "name": a.name, "probability": round(a.probability, 6)})
    _write_lines(path, rows)


def read_predictions(path: str | Path) -> dict[str, list[Assignment]]:
    out: dict[str, list[Assignment]] = {}
    for d in _read_lines(path):
        out.setdefault(d["meeting_id"], []).append(
            Assignment(d["speaker_id"], d["name"], float(d["probability"]))
        )
    return out


def write_json(path: str | Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
