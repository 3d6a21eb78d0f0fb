"""
Rule cascade for pulling an option key out of free-form model output.

1. Key letters. A-D in either case standing alone as a token ("B", "(b)",
   "answer: c", "I pick d") count. The article is not a key: "a" followed by
   a word ("a red cube"), or "A" opening a sentence that way ("A red cube
   ..."). One distinct letter wins; two or more is ambiguous -> unmatched.
2. Option text. Case- and whitespace-insensitive containment of exactly one
   option's text, on token boundaries; an option contained in another
   matched option yields to the longer one.
3. Otherwise unmatched.
"""

import re
from typing import Dict, List, Optional, Set

from .base import AnswerMatcher

_KEY = re.compile(r"(?<![\w'’])([A-Da-d])(?![\w'’])")
# "a red cube", or "A red cube" opening a sentence; "a or b" lists keys
_ARTICLE = re.compile(
    r"(?:^|[.!?]\s+)(A)\s+[a-z]"
    r"|(?<![\w'’])(a)\s+(?!(?:or|and|nor)\b)[A-Za-z]"
)

_WS = re.compile(r"\s+")


def _normalize(text: str) -> str:
    return _WS.sub(" ", text.casefold()).strip().rstrip(".").strip()


def claimed_keys(raw: str) -> Set[str]:
    """Distinct option letters a raw output names explicitly."""
    text = raw.strip()
    articles = {m.start(1) if m.group(1) else m.start(2) for m in _ARTICLE.finditer(text)}
    return {m.group(1).upper() for m in _KEY.finditer(text) if m.start(1) not in articles}


def option_text_key(raw: str, options: Dict[str, str]) -> Optional[str]:
    """Key of the single option whose text the output contains, else None."""
    haystack = _normalize(raw)
    hits: List[str] = []
    for key, text in options.items():
        needle = _normalize(text)
        if not needle:
            continue
        if re.search(rf"(?<!\w){re.escape(needle)}(?![\w]|\.\d)", haystack):
            hits.append(key)

    if len(hits) > 1:
        # Drop options whose text sits inside another hit
        texts = {k: _normalize(options[k]) for k in hits}
        hits = [k for k in hits if not any(k != o and texts[k] in texts[o] for o in hits)]
    return hits[0] if len(hits) == 1 else None


def extract_key(raw: str, options: Dict[str, str]) -> Optional[str]:
    """Run the cascade; None means unmatched."""
    if not raw or not raw.strip():
        return None
    keys = {k for k in claimed_keys(raw) if k in options}
    if len(keys) == 1:
        return keys.pop()
    if len(keys) > 1:
        return None
    return option_text_key(raw, options)


class RuleMatcher(AnswerMatcher):
    """Deterministic matcher built on extract_key."""

    method = "rule"

    def match(self, raw: str, options: Dict[str, str], question: str = "") -> Optional[str]:
        return extract_key(raw, options)
