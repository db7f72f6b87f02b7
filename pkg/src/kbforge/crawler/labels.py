"""Label identity and the cheap literal screen.

Normalization is deliberately minimal: whitespace only, case preserved.
Surface-form variants like "John F. Kennedy" vs "John Fitzgerald Kennedy"
stay distinct labels here; collapsing them is consolidation's job.
"""

from __future__ import annotations

import re

from kbforge.errors import LabelError

_NUMBER_RE = re.compile(r"^[+-]?\d+(?:[.,]\d+)*%?$")
_DATE_RES = (
    re.compile(r"^\d{4}-\d{1,2}(?:-\d{1,2})?$"),
    re.compile(r"^\d{4}/\d{1,2}/\d{1,2}$"),
    re.compile(r"^\d{1,2}/\d{1,2}/\d{4}$"),
    re.compile(r"^\d{1,2} (January|February|March|April|May|June|July|August|September|October|November|December) \d{4}$", re.I),
    re.compile(r"^(January|February|March|April|May|June|July|August|September|October|November|December) \d{1,2}, \d{4}$", re.I),
)
_URL_RE = re.compile(r"^(?:[a-z][a-z0-9+.-]*://|www\.)", re.I)

MAX_ENTITY_LABEL_LENGTH = 100


def normalize_label(raw: str) -> str:
    label = " ".join(raw.split())
    if not label:
        raise LabelError(f"label empty after normalization: {raw!r}")
    return label


def screens_as_literal(phrase: str) -> bool:
    """True for strings that are literals on sight: pure numbers, dates,
    URLs, or anything longer than 100 characters. These skip NER."""
    if len(phrase) > MAX_ENTITY_LABEL_LENGTH:
        return True
    if _NUMBER_RE.match(phrase):
        return True
    if _URL_RE.match(phrase):
        return True
    return any(rx.match(phrase) for rx in _DATE_RES)
