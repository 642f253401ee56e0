"""Synthetic MediaSum-style interviews with known name attributions.

Every speaker is named at least once by an unambiguous cue: a
self-introduction, a reply addressing the previous speaker, or a hand-off
to the next one. Names of people who never speak appear as distractors.
The generator tallies what it emitted so tests can check downstream counts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from speakerid.fuzzy import similarity

FIRST_NAMES = [
    "Alisyn", "Bartholomew", "Cordelia", "Desmond", "Evangeline", "Fitzgerald", "Guinevere",
    "Horatio", "Isadora", "Jebediah", "Katarina", "Leopold", "Marguerite", "Nathaniel",
    "Ophelia", "Percival", "Quentin", "Rosalind", "Sebastian", "Theodora", "Ulysses",
    "Valentina", "Wilhelmina", "Xavier", "Yolanda", "Zachariah", "Anastasia", "Benedikt",
    "Cassius", "Dorothea", "Ezekiel", "Florentina", "Gideon", "Henrietta", "Ignatius",
    "Josephine", "Kristoffer", "Lucinda", "Maximilian", "Nicolette",
]
LAST_NAMES = [
    "Camerota", "Abernathy", "Blackwood", "Castellano", "Davenport", "Eastwick", "Fairbanks",
    "Goldsworthy", "Hawthorne", "Ingersoll", "Jablonski", "Kowalczyk", "Lindqvist",
    "Montgomery", "Northcott", "Oyelaran", "Pemberton", "Quarshie", "Rutherford",
    "Szczepanski", "Thistlewood", "Underhill", "Vanderbilt", "Whitmore", "Yamaguchi",
    "Zelenko", "Archambault", "Bjornstad", "Cunningham", "Dubrovnik", "Etheridge",
    "Fitzwilliam", "Grimaldi", "Holloway", "Iwasaki", "Kensington", "Lockhart",
    "Marchetti", "Nakagawa", "Oppenheim",
]
OTHER_FIRST = ["Volodymyr", "Angela", "Narendra", "Jacinda", "Emmanuel", "Cyril", "Justin",
               "Ursula", "Recep", "Fumio", "Olaf", "Giorgia", "Mateusz", "Petteri"]
OTHER_LAST = ["Zelensky", "Merkel", "Modi", "Ardern", "Macron", "Ramaphosa", "Trudeau",
              "Leyen", "Erdogan", "Kishida", "Scholz", "Meloni", "Morawiecki", "Orpo"]
TITLES = ["CNN ANCHOR", "NPR HOST", "CORRESPONDENT", "SENATOR", "ECONOMIST",
          "POLITICAL ANALYST", "REPORTER", "PROFESSOR", ""]

SELF = [
    "Good morning everyone, this is {n} speaking.",
    "Hello, my name is {n}.",
    "This is {n} reporting from the capital.",
    "I am {n} and I have covered this story for years.",
]
PREV = [
    "Thank you, {n}. That was helpful.",
    "Absolutely, {n}. I agree with that point.",
    "Good question, {n}. Let me explain.",
    "Hi {n}, thanks for having me.",
]
NEXT = [
    "{n}, what do you think?",
    "Let us bring in {n} now.",
    "I think {n} has a question.",
    "Over to you, {n}.",
]
NULL = [
    "Yesterday {p} said the plan would fail.",
    "I spoke with {p} about the budget.",
    "According to {p}, the numbers are wrong.",
]
PREV_NEXT = ["Thanks, {a}. Now {b}, your turn."]
SELF_NULL = ["This is {n}, and I read what {p} wrote."]
FILLER = [
    "That is a fair point.",
    "The numbers tell a different story.",
    "We should look at the data first.",
    "I am not sure that is right.",
    "It has been a difficult year for everyone.",
    "The committee will meet again next week.",
    "Voters care about the economy above all.",
    "That is exactly what we heard on the ground.",
    "Let me push back on that a little.",
    "There are two sides to this question.",
    "Nobody expected the vote to be this close.",
    "We will have more on that after the break.",
]

KINDS = ("self", "prev", "next", "null", "prev_next", "self_null", "filler")
WEIGHTS = np.array([0.15, 0.15, 0.15, 0.10, 0.05, 0.05, 0.35])


@dataclass
class Person:
    first: str
    last: str

    @property
    def full(self) -> str:
        return f"{self.first} {self.last}"


@dataclass
class SynthTally:
    meetings: int = 0
    sentences: int = 0
    names: int = 0
    speakers: int = 0
    per_meeting: dict[str, dict] = field(default_factory=dict)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.meetings, self.sentences, self.names, self.speakers


def _distinct(people: list[Person], threshold: float) -> bool:
    toks = [t.casefold() for p in people for t in (p.first, p.last)]
    return all(similarity(a, b) < threshold for i, a in enumerate(toks) for b in toks[i + 1:])


def _variant(rng: np.random.Generator, p: Person, self_intro: bool = False) -> str:
    u = rng.random()
    if self_intro:
        return p.full if u < 0.5 else p.first
    if u < 0.7:
        return p.first
    return p.full if u < 0.9 else p.last


def _draw_people(rng: np.random.Generator, n_speakers: int, n_others: int) -> tuple[list[Person], list[Person]]:
    while True:
        fi = rng.choice(len(FIRST_NAMES), n_speakers, replace=False)
        li = rng.choice(len(LAST_NAMES), n_speakers, replace=False)
        speakers = [Person(FIRST_NAMES[a], LAST_NAMES[b]) for a, b in zip(fi, li)]
        oi = rng.choice(len(OTHER_FIRST), n_others, replace=False)
        oj = rng.choice(len(OTHER_LAST), n_others, replace=False)
        others = [Person(OTHER_FIRST[a], OTHER_LAST[b]) for a, b in zip(oi, oj)]
        if _distinct(speakers + others, 0.8):
            return speakers, others


def _speaker_order(rng: np.random.Generator, n_speakers: int, n_turns: int) -> list[int]:
    while True:
        order = [0]
        for _ in range(n_turns - 1):
            choices = [s for s in range(n_speakers) if s != order[-1]]
            order.append(int(rng.choice(choices)))
        if len(set(order)) == n_speakers:
            return order


def generate_dialogue(rng: np.random.Generator, meeting_id: str) -> tuple[dict, dict]:
    """One MediaSum-format record plus its bookkeeping."""
    n_speakers = int(rng.integers(2, 5))
    n_turns = int(rng.integers(8, 15))
    speakers, others = _draw_people(rng, n_speakers, 3)
    order = _speaker_order(rng, n_speakers, n_turns)

    def feasible(i: int) -> list[str]:
        ok = ["self", "null", "self_null", "filler"]
        if i > 0:
            ok.append("prev")
        has_next = i + 1 < n_turns and (i == 0 or order[i + 1] != order[i - 1])
        if has_next:
            ok.append("next")
        if i > 0 and has_next:
            ok.append("prev_next")
        return ok

    kinds = []
    for i in range(n_turns):
        ok = feasible(i)
        w = np.array([WEIGHTS[KINDS.index(k)] for k in ok])
        kinds.append(str(rng.choice(ok, p=w / w.sum())))

    def named_by(i: int) -> set[int]:
        k = kinds[i]
        out = set()
        if k in ("self", "self_null"):
            out.add(order[i])
        if k in ("prev", "prev_next"):
            out.add(order[i - 1])
        if k in ("next", "prev_next"):
            out.add(order[i + 1])
        return out

    while True:
        covered = set().union(*(named_by(i) for i in range(n_turns)))
        missing = [s for s in range(n_speakers) if s not in covered]
        if not missing:
            break
        turns = [i for i in range(n_turns) if order[i] == missing[0] and kinds[i] not in ("self", "self_null")]
        kinds[int(rng.choice(turns))] = "self"

    utts, n_names = [], 0
    for i, k in enumerate(kinds):
        s = speakers[order[i]]
        other = others[int(rng.integers(len(others)))]
        if k == "self":
            text, c = str(rng.choice(SELF)).format(n=_variant(rng, s, True)), 1
        elif k == "prev":
            text, c = str(rng.choice(PREV)).format(n=_variant(rng, speakers[order[i - 1]])), 1
        elif k == "next":
            text, c = str(rng.choice(NEXT)).format(n=_variant(rng, speakers[order[i + 1]])), 1
        elif k == "null":
            text, c = str(rng.choice(NULL)).format(p=_variant(rng, other)), 1
        elif k == "prev_next":
            text = str(rng.choice(PREV_NEXT)).format(
                a=_variant(rng, speakers[order[i - 1]]), b=_variant(rng, speakers[order[i + 1]]))
            c = 2
        elif k == "self_null":
            text, c = str(rng.choice(SELF_NULL)).format(n=_variant(rng, s, True), p=_variant(rng, other)), 2
        else:
            text, c = str(rng.choice(FILLER)), 0
        utts.append(text)
        n_names += c

    titles = [str(rng.choice(TITLES)) for _ in speakers]
    descs = [p.full.upper() + (f", {t}" if t else "") for p, t in zip(speakers, titles)]
    record = {
        "id": meeting_id,
        "program": "SYNTH",
        "date": "2026-01-01",
        "url": "",
        "title": f"Synthetic interview {meeting_id}",
        "summary": "",
        "utt": utts,
        "speaker": [descs[s] for s in order],
    }
    info = {"sentences": n_turns, "names": n_names, "speakers": n_speakers,
            "people": [p.full for p in speakers + others], "kinds": kinds}
    return record, info


def generate_corpus(n: int, seed: int = 0) -> tuple[list[dict], SynthTally]:
    rng = np.random.default_rng(seed)
    records, tally = [], SynthTally()
    for k in range(n):
        mid = f"synth-{seed}-{k:05d}"
        rec, info = generate_dialogue(rng, mid)
        records.append(rec)
        tally.meetings += 1
        tally.sentences += info["sentences"]
        tally.names += info["names"]
        tally.speakers += info["speakers"]
        tally.per_meeting[mid] = info
    return records, tally


def gazetteer_lines(tally: SynthTally) -> list[str]:
    names = set()
    for info in tally.per_meeting.values():
        for full in info["people"]:
            names.add(full)
            names.update(full.split())
    return sorted(names)


def write_corpus(out_path: str | Path, n: int, seed: int = 0,
                 gazetteer_path: str | Path | None = None) -> SynthTally:
    records, tally = generate_corpus(n, seed)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    if gazetteer_path:
        Path(gazetteer_path).write_text("\n".join(gazetteer_lines(tally)) + "\n", encoding="utf-8")
    return tally
