import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from speakerid.core import GoldRoster, NameMention  # noqa: E402
from speakerid.ingest import parse_interview, to_transcript  # noqa: E402

TABLE1 = {
    "id": "table1",
    "utt": [
        "Good morning, everyone. This is John speaking.",
        "Hi John, this is Sarah. Thanks for organizing this.",
        "Absolutely, Sarah. And I think Mike has a question.",
        "Yes, I do. What's the timeline for our project?",
    ],
    "speaker": ["John", "Sarah", "John", "Mike"],
}


@pytest.fixture
def table1():
    return to_transcript(parse_interview(TABLE1))


@pytest.fixture
def table1_mentions(table1):
    t, _ = table1
    spans = [(0, 5, 5), (1, 1, 1), (1, 4, 4), (2, 1, 1), (2, 5, 5)]
    return [NameMention(u, s, e, " ".join(t.utterances[u].tokens[s : e + 1])) for u, s, e in spans]


@pytest.fixture
def cnn_roster():
    return GoldRoster("m", {"speaker1": "ALISYN CAMEROTA", "speaker2": "JOHN BERMAN"})


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"[{n:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
