"""
Base answer-matcher interface.

A matcher maps a model's raw output onto one MCQ option key (A-D) or None
when it cannot tell. Provides a mock implementation for testing.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

from ..errors import MatcherError


class AnswerMatcher(ABC):
    """Base class for all answer matchers."""

    method = "rule"

    @abstractmethod
    def match(self, raw: str, options: Dict[str, str], question: str = "") -> Optional[str]:
        """
        Extract the option key a raw output commits to.

        Args:
            raw: Model output text
            options: Option texts keyed A-D
            question: Question text, for matchers that need context

        Returns:
            "A".."D", or None when no single option is claimed

        Raises:
            MatcherError: If the matcher itself fails (external services only)
        """
        pass


@dataclass
class MatchCall:
    """Record of a matcher call for testing/debugging."""
    raw: str
    options: Dict[str, str]
    question: str


class MockMatcher(AnswerMatcher):
    """
    Mock matcher for testing.

    Returns a fixed key (or raises a fixed error) and records every call.
    """

    method = "external"

    def __init__(self, key: Optional[str] = None, error: Optional[MatcherError] = None):
        self.key = key
        self.error = error
        self.calls: List[MatchCall] = []

    def match(self, raw: str, options: Dict[str, str], question: str = "") -> Optional[str]:
        self.calls.append(MatchCall(raw=raw, options=dict(options), question=question))
        if self.error:
            raise self.error
        return self.key

    def reset(self):
        self.calls = []
