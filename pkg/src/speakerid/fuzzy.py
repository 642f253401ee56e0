"""Levenshtein distance and the length-normalized similarity built on it.

The compiled kernel is used when it was built; set ``SPEAKERID_PURE_PYTHON=1``
to force the fallback. Both backends return identical results.
"""

from __future__ import annotations

import os

from speakerid import _fuzzy_py

if os.environ.get("SPEAKERID_PURE_PYTHON"):
    _impl = _fuzzy_py
    BACKEND = "python"
else:
    try:
        from speakerid import _fuzzy_ext as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fuzzy_py
        BACKEND = "python"


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions or
    substitutions turning ``a`` into ``b``."""
    return _impl.levenshtein(a, b)


def similarity(a: str, b: str) -> float:
    """``(len(a) + len(b) - levenshtein(a, b)) / (len(a) + len(b))``.

    Lies in [0, 1]; two empty strings are fully similar.
    """
    return _impl.similarity(a, b)
