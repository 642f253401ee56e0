"""Text-based speaker identification.

Builds fuzzy-labeled datasets from interview transcripts, trains models that
attribute mentioned person names to anonymized speakers, and scores them at
the speaker level.
"""

from speakerid.core import (
    Assignment,
    GoldRoster,
    HeadScores,
    LabeledMention,
    NameMention,
    Transcript,
    Utterance,
    validate_transcript,
)
from speakerid.fuzzy import levenshtein, similarity

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "GoldRoster",
    "HeadScores",
    "LabeledMention",
    "NameMention",
    "Transcript",
    "Utterance",
    "levenshtein",
    "similarity",
    "validate_transcript",
]
