import itertools

import numpy as np
import pytest
import torch

from speakerid.core import Assignment, HeadScores, NameMention, Transcript, Utterance
from speakerid.encode import assemble_window
from speakerid.inference import Candidate, candidates_from_scores, collect_candidates, resolve


def transcript():
    return Transcript("m", (
        Utterance(0, "speaker2", ("hello",)),
        Utterance(1, "speaker1", ("I", "am", "John.")),
        Utterance(2, "speaker3", ("Thanks", "John,", "and", "Sarah")),
    ))


class FixedModel(torch.nn.Module):
    """Returns preset (prev, cur, next) probabilities per utterance index."""

    def __init__(self, table):
        super().__init__()
        self.table = table

    def forward(self, cw):
        return [HeadScores(*self.table[cw.w_cur.index]) for _ in cw.mentions]


def test_current_head_candidate():
    t = transcript()
    m = NameMention(1, 2, 2, "John.")
    cands = collect_candidates(t, [m], FixedModel({1: (0.1, 0.9, 0.2)}))
    assert cands == [Candidate("speaker1", "john", 0.9, (1, 2, "cur"))]


def test_pad_head_never_nominates():
    t = transcript()
    m = NameMention(2, 1, 1, "John,")
    cands = collect_candidates(t, [m], FixedModel({2: (0.2, 0.3, 0.99)}))
    assert cands == []


def test_all_below_tau():
    t = transcript()
    ms = [NameMention(1, 2, 2, "John."), NameMention(2, 3, 3, "Sarah")]
    assert collect_candidates(t, ms, FixedModel({1: (0.4, 0.4, 0.4), 2: (0.1, 0.2, 0.3)})) == []


def test_candidates_from_scores_per_mention():
    t = transcript()
    cw = assemble_window(t, [NameMention(2, 1, 1, "John,"), NameMention(2, 3, 3, "Sarah")])
    cands = candidates_from_scores(cw, [HeadScores(0.8, 0.1, 0.1), HeadScores(0.1, 0.7, 0.1)])
    assert [(c.speaker_id, c.name) for c in cands] == [("speaker1", "john"), ("speaker3", "sarah")]


def test_resolve_argmax():
    cands = [Candidate("speaker1", "john", 0.9, (0, 0, "cur")), Candidate("speaker1", "sarah", 0.7, (1, 0, "prev"))]
    assert resolve(cands) == [Assignment("speaker1", "john", 0.9)]


def test_resolve_empty():
    assert resolve([]) == []


def test_resolve_ties():
    a = Candidate("speaker1", "zed", 0.8, (0, 1, "cur"))
    b = Candidate("speaker1", "amy", 0.8, (2, 0, "prev"))
    c = Candidate("speaker1", "bob", 0.8, (0, 1, "next"))
    assert resolve([b, c, a])[0].name == "bob"
    assert resolve([a, b])[0].name == "zed"


def test_unique_names_filter():
    cands = [Candidate("speaker1", "john", 0.9, (0, 0, "cur")), Candidate("speaker2", "john", 0.8, (0, 0, "prev")),
             Candidate("speaker2", "sarah", 0.6, (1, 0, "cur"))]
    assert [a.name for a in resolve(cands)] == ["john", "john"]
    assert [a.name for a in resolve(cands, unique_names=True)] == ["john", "sarah"]


def brute_resolve(cands):
    """Scan every speaker's candidates for the best by the documented order."""
    out = []
    speakers = sorted({c.speaker_id for c in cands}, key=lambda s: int(s[7:]))
    for sid in speakers:
        mine = [c for c in cands if c.speaker_id == sid]
        top = max(c.probability for c in mine)
        mine = [c for c in mine if c.probability == top]
        first_pos = min(c.source[:2] for c in mine)
        mine = [c for c in mine if c.source[:2] == first_pos]
        best = min(mine, key=lambda c: c.name)
        out.append(Assignment(sid, best.name, best.probability))
    return out


def random_candidates(rng, n):
    return [
        Candidate(f"speaker{rng.integers(1, 5)}", str(rng.choice(["ann", "bo", "cy", "di"])),
                  float(rng.choice([0.5, 0.6, 0.7, 0.9])),
                  (int(rng.integers(3)), int(rng.integers(3)), str(rng.choice(["prev", "cur", "next"]))))
        for _ in range(n)
    ]


def test_resolve_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(300):
        cands = random_candidates(rng, int(rng.integers(0, 12)))
        assert resolve(cands) == brute_resolve(cands)


def test_resolve_order_invariant():
    rng = np.random.default_rng(1)
    for _ in range(100):
        cands = random_candidates(rng, 6)
        ref = resolve(cands)
        for perm in itertools.islice(itertools.permutations(cands), 20):
            assert resolve(list(perm)) == ref
        assert len({a.speaker_id for a in ref}) == len(ref)


def test_raising_tau_never_adds_assignments():
    t = transcript()
    ms = [NameMention(1, 2, 2, "John."), NameMention(2, 1, 1, "John,"), NameMention(2, 3, 3, "Sarah")]
    model = FixedModel({1: (0.55, 0.9, 0.6), 2: (0.7, 0.52, 0.1)})
    prev = None
    for tau in (0.0, 0.3, 0.5, 0.6, 0.8, 0.95):
        got = {a.speaker_id for a in resolve(collect_candidates(t, ms, model, tau))}
        if prev is not None:
            assert got <= prev
        prev = got
