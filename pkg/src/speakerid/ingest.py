"""Parse MediaSum-style interview records into anonymized transcripts.

Each record carries parallel ``utt`` and ``speaker`` arrays; the speaker
strings hold a name followed by optional comma-separated titles. Names are
replaced by ``speaker<N>`` ids numbered by first appearance, and the true
names go to a separate :class:`GoldRoster`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from speakerid.core import GoldRoster, Transcript, Utterance, tokenize
from speakerid.errors import EmptyDescriptor, MalformedRecord

log = logging.getLogger(__name__)

_OPTIONAL = ("program", "date", "url", "title", "summary")


@dataclass(frozen=True)
class RawInterview:
    id: str
    utt: tuple[str, ...]
    speaker: tuple[str, ...]
    extra: dict[str, str] = field(default_factory=dict, compare=False)


def parse_interview(raw_record: str | dict[str, Any]) -> RawInterview:
    if isinstance(raw_record, str):
        try:
            raw_record = json.loads(raw_record)
        except json.JSONDecodeError as e:
            raise MalformedRecord(f"not valid JSON: {e}") from e
    if not isinstance(raw_record, dict):
        raise MalformedRecord("record is not an object")
    missing = [k for k in ("id", "utt", "speaker") if k not in raw_record]
    if missing:
        raise MalformedRecord(f"missing field(s): {', '.join(missing)}")
    utt, speaker = raw_record["utt"], raw_record["speaker"]
    if not isinstance(utt, list) or not isinstance(speaker, list):
        raise MalformedRecord("utt and speaker must be arrays")
    if len(utt) != len(speaker):
        raise MalformedRecord(
            f"record {raw_record['id']}: {len(utt)} utterances but {len(speaker)} speakers"
        )
    extra = {k: raw_record[k] for k in _OPTIONAL if k in raw_record}
    return RawInterview(
        id=str(raw_record["id"]),
        utt=tuple(str(u) for u in utt),
        speaker=tuple(str(s) for s in speaker),
        extra=extra,
    )


def extract_speaker_name(speaker_desc: str) -> str:
    """Name portion of a descriptor like ``"ALISYN CAMEROTA, CNN ANCHOR"``."""
    if not speaker_desc or not speaker_desc.strip():
        raise EmptyDescriptor("blank speaker descriptor")
    name = speaker_desc.split(",", 1)[0].strip()
    if not name:
        raise EmptyDescriptor(f"no name before comma in {speaker_desc!r}")
    return name


def to_transcript(ri: RawInterview) -> tuple[Transcript, GoldRoster]:
    ids: dict[str, str] = {}
    names: dict[str, str] = {}
    utterances = []
    for utt_text, desc in zip(ri.utt, ri.speaker):
        name = extract_speaker_name(desc)
        tokens = tokenize(utt_text)
        if not tokens:
            log.debug("%s: dropping empty utterance", ri.id)
            continue
        key = name.casefold()
        if key not in ids:
            sid = f"speaker{len(ids) + 1}"
            ids[key] = sid
            names[sid] = name
        utterances.append(Utterance(len(utterances), ids[key], tokens))

    transcript = Transcript(ri.id, tuple(utterances), frozenset(names))
    return transcript, GoldRoster(ri.id, names)


def iter_records(path: str | Path) -> Iterator[dict[str, Any]]:
    """Yield raw records from a JSON-lines file or a single JSON array file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        head = fh.read(1)
        while head and head.isspace():
            head = fh.read(1)
        fh.seek(0)
        if head == "[":
            yield from json.load(fh)
            return
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise MalformedRecord(f"{path}:{lineno}: {e}") from e


def load_interviews(path: str | Path) -> Iterator[tuple[Transcript, GoldRoster]]:
    """Ingest every record, skipping ones with no usable utterances."""
    for record in iter_records(path):
        ri = parse_interview(record)
        if not ri.utt:
            log.warning("skipping %s: zero utterances", ri.id)
            continue
        t, g = to_transcript(ri)
        if not t.utterances:
            log.warning("skipping %s: all utterances empty", ri.id)
            continue
        yield t, g
