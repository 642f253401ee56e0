import json
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speakerid.core import GoldRoster, NameMention, Transcript, Utterance
from speakerid.detect import (
    DetectorConfig,
    Gazetteer,
    detect_mentions,
    import_external_mentions,
    write_mention_file,
)
from speakerid.errors import ExternalDetectorUnavailable, SpanOutOfRange

PUNCT = string.punctuation + "‘’“”—–…"


def oracle(tokens, entries, min_len=2):
    """Enumerate every subspan, compare its text to every entry, then pick
    the longest remaining hit (leftmost on ties) until none is left."""
    entry_texts = {" ".join(e) for e in entries}
    width = max((len(e) for e in entries), default=0)
    hits = []
    for s in range(len(tokens)):
        for e in range(s, len(tokens)):
            if e - s + 1 > width:
                continue
            parts = [tokens[i].strip(PUNCT).casefold() for i in range(s, e + 1)]
            if any(len(p) < min_len for p in parts):
                continue
            if " ".join(parts) in entry_texts:
                hits.append((s, e))
    chosen = []
    while hits:
        best = max(hits, key=lambda h: (h[1] - h[0], -h[0]))
        chosen.append(best)
        hits = [h for h in hits if h[1] < best[0] or h[0] > best[1]]
    return sorted(chosen)


def one_utt(tokens):
    return Transcript("m", (Utterance(0, "speaker1", tuple(tokens)),))


def test_table1_roster_gazetteer(table1):
    t, g = table1
    ms = detect_mentions(t, DetectorConfig(), gold=g)
    second = [m for m in ms if m.utt_index == 1]
    assert second == [NameMention(1, 1, 1, "John,"), NameMention(1, 4, 4, "Sarah.")]
    assert [(m.utt_index, m.start_tok) for m in ms] == sorted((m.utt_index, m.start_tok) for m in ms)
    assert len(ms) == 5


def test_no_hits():
    t = one_utt(["nothing", "here"])
    assert detect_mentions(t, DetectorConfig(), gold=GoldRoster("m", {"speaker1": "Sarah Lee"})) == []


def test_repeated_name():
    t = one_utt(["sarah", "sarah"])
    gaz = Gazetteer(["Sarah"])
    ms = detect_mentions(t, DetectorConfig(), gazetteer=gaz)
    assert [(m.start_tok, m.end_tok) for m in ms] == oracle(t.utterances[0].tokens, gaz.entries) == [(0, 0), (1, 1)]


def test_longest_match_first():
    t = one_utt(["Hello", "John", "Smith", "and", "John."])
    gaz = Gazetteer.from_roster(GoldRoster("m", {"speaker1": "JOHN SMITH"}))
    ms = detect_mentions(t, DetectorConfig(), gazetteer=gaz)
    assert [m.surface for m in ms] == ["John Smith", "John."]


def test_min_token_len_blocks_initials():
    t = one_utt(["J", "Smith", "J."])
    gaz = Gazetteer(["J", "Smith", "J Smith"])
    assert [m.surface for m in detect_mentions(t, DetectorConfig(), gazetteer=gaz)] == ["Smith"]


def test_file_gazetteer(tmp_path):
    p = tmp_path / "names.txt"
    p.write_text("# people\nVolodymyr Zelensky\nZelensky\n")
    t = one_utt(["Yesterday", "Zelensky", "said"])
    cfg = DetectorConfig(gazetteer_source="file", gazetteer_path=str(p))
    assert detect_mentions(t, cfg)[0].surface == "Zelensky"


def test_missing_gazetteer_file(tmp_path):
    cfg = DetectorConfig(gazetteer_source="file", gazetteer_path=str(tmp_path / "none.txt"))
    with pytest.raises(ExternalDetectorUnavailable):
        detect_mentions(one_utt(["a"]), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(kind="spacy")
    with pytest.raises(ValueError):
        DetectorConfig(gazetteer_source="file")


vocab = st.sampled_from(["ann", "Ann,", "lee", "Lee.", "bo", "x", "the", "ANN", "chan", "(lee)"])


@settings(max_examples=300)
@given(st.lists(vocab, min_size=0, max_size=12),
       st.lists(st.lists(st.sampled_from(["ann", "lee", "bo", "chan", "x"]), min_size=1, max_size=3),
                min_size=1, max_size=5))
def test_matches_bruteforce_oracle(tokens, names):
    gaz = Gazetteer(" ".join(n) for n in names)
    t = one_utt(tokens or ["filler"])
    got = [(m.start_tok, m.end_tok) for m in detect_mentions(t, DetectorConfig(), gazetteer=gaz)]
    assert got == oracle(t.utterances[0].tokens, gaz.entries)
    for a, b in zip(got, got[1:]):
        assert a[1] < b[0]


def test_external_import(tmp_path, table1):
    t, _ = table1
    p = tmp_path / "spans.jsonl"
    write_mention_file(p, [("table1", NameMention(1, 4, 4, "Sarah.")), ("table1", NameMention(0, 5, 5, "John")),
                           ("other", NameMention(0, 0, 0, "x"))])
    ms = import_external_mentions(t, p)
    assert ms == [NameMention(0, 5, 5, "John"), NameMention(1, 4, 4, "Sarah.")]
    cfg = DetectorConfig(kind="external", mention_path=str(p))
    assert detect_mentions(t, cfg) == ms


def test_external_out_of_range(tmp_path, table1):
    t, _ = table1
    p = tmp_path / "spans.jsonl"
    p.write_text(json.dumps({"meeting_id": "table1", "utt_index": 0, "start_tok": 3, "end_tok": 40}) + "\n")
    with pytest.raises(SpanOutOfRange):
        import_external_mentions(t, p)
    with pytest.raises(SpanOutOfRange):
        import_external_mentions(t, [{"meeting_id": "table1", "utt_index": 9, "start_tok": 0, "end_tok": 0}])


def test_external_missing_file(tmp_path, table1):
    with pytest.raises(ExternalDetectorUnavailable):
        detect_mentions(table1[0], DetectorConfig(kind="external", mention_path=str(tmp_path / "x")))


def test_external_overlaps_resolved(table1):
    t, _ = table1
    recs = [{"utt_index": 1, "start_tok": 0, "end_tok": 1}, {"utt_index": 1, "start_tok": 1, "end_tok": 1}]
    assert import_external_mentions(t, recs) == [NameMention(1, 0, 1, "Hi John,")]
