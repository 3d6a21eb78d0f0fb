"""
Answer matchers for MCQ evaluation.

A rule cascade handles CI and default runs; an optional HTTP client defers
hard cases to an external matching service.
"""

from .base import AnswerMatcher, MockMatcher
from .external import ExternalMatcher
from .rules import RuleMatcher, extract_key

__all__ = ["AnswerMatcher", "MockMatcher", "ExternalMatcher", "RuleMatcher", "extract_key"]
