"""Rule-based question categorization.

A question maps to a SET of categories and overlap is expected: "What color
is the stone?" is both an object-identification and a color question. OTHER
appears only when nothing else matched. The rules are deliberately lexical
(auditable, deterministic); no ML classification.
"""

from __future__ import annotations

import enum
import re
import string

from groundcheck.errors import InvalidArgumentError


class QuestionCategory(str, enum.Enum):
    OBJECT_IDENTIFICATION = "object_identification"
    QUANTITY = "quantity"
    COLOR = "color"
    OTHER = "other"


_OBJECT_PREFIXES = frozenset({"what", "where", "which"})
_COLOR_TOKENS = frozenset({"color", "colour"})
_HOW_MANY = re.compile(r"\bhow\s+many\b")
_STRIP_CHARS = string.punctuation + string.whitespace


def classify(question: str) -> set[QuestionCategory]:
    """Case-insensitive category rules.

    OBJECT_IDENTIFICATION: first token (after stripping leading punctuation)
    is "what", "where" or "which". QUANTITY: the phrase "how many" occurs
    anywhere. COLOR: the token "color"/"colour" occurs anywhere. OTHER only
    when no rule matched.
    """
    if not isinstance(question, str) or not question.strip():
        raise InvalidArgumentError("question must be non-empty text")
    lowered = question.lower()

    categories: set[QuestionCategory] = set()

    head = lowered.lstrip(_STRIP_CHARS)
    first_token = head.split()[0] if head.split() else ""
    if first_token in _OBJECT_PREFIXES:
        categories.add(QuestionCategory.OBJECT_IDENTIFICATION)

    if _HOW_MANY.search(lowered):
        categories.add(QuestionCategory.QUANTITY)

    for token in lowered.split():
        if token.strip(string.punctuation) in _COLOR_TOKENS:
            categories.add(QuestionCategory.COLOR)
            break

    if not categories:
        categories.add(QuestionCategory.OTHER)
    return categories
