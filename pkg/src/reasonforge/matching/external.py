"""
HTTP client for an external answer-matching service.

Request:  POST <url>  {"question": str, "options": {"A".."D": str}, "raw_output": str}
Response: {"key": "A" | "B" | "C" | "D" | "none"}

The endpoint and bearer key come from REASONFORGE_MATCHER_URL and
REASONFORGE_MATCHER_KEY (loaded from .env by the CLI).
"""

import os
from typing import Any, Dict, Optional

import requests

from ..errors import ErrorCode, MatcherError
from ..logging import get_logger
from .base import AnswerMatcher

URL_ENV = "REASONFORGE_MATCHER_URL"
KEY_ENV = "REASONFORGE_MATCHER_KEY"
DEFAULT_TIMEOUT = 30

VALID_KEYS = ("A", "B", "C", "D")

logger = get_logger("matching")


class ExternalMatcher(AnswerMatcher):
    """Answer matcher backed by an HTTP service."""

    method = "external"

    def __init__(self, url: str, api_key: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT):
        """
        Args:
            url: Service endpoint
            api_key: Sent as a bearer token when set
            timeout: Per-request timeout in seconds
        """
        if not url:
            raise MatcherError(ErrorCode.MATCHER_NOT_CONFIGURED)
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    @classmethod
    def from_env(cls, timeout: float = DEFAULT_TIMEOUT) -> "ExternalMatcher":
        """
        Build a client from the environment.

        Raises:
            MatcherError(MATCHER_NOT_CONFIGURED): URL variable unset
        """
        url = os.environ.get(URL_ENV, "")
        if not url:
            raise MatcherError(ErrorCode.MATCHER_NOT_CONFIGURED, f"{URL_ENV} is not set")
        return cls(url, os.environ.get(KEY_ENV) or None, timeout)

    def match(self, raw: str, options: Dict[str, str], question: str = "") -> Optional[str]:
        """
        Ask the service which option the output commits to.

        Returns:
            "A".."D", or None when the service answers "none"

        Raises:
            MatcherError: MATCHER_TIMEOUT, MATCHER_HTTP_ERROR or MATCHER_MALFORMED_RESPONSE
        """
        payload = {"question": question, "options": dict(options), "raw_output": raw}
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        try:
            response = requests.post(self.url, json=payload, headers=headers, timeout=self.timeout)
        except requests.Timeout:
            raise MatcherError(ErrorCode.MATCHER_TIMEOUT, f"No answer within {self.timeout}s")
        except requests.RequestException as e:
            raise MatcherError(ErrorCode.MATCHER_HTTP_ERROR, str(e))

        if response.status_code != 200:
            raise MatcherError(ErrorCode.MATCHER_HTTP_ERROR, f"HTTP {response.status_code}")

        try:
            data = response.json()
        except ValueError:
            raise MatcherError(ErrorCode.MATCHER_MALFORMED_RESPONSE, "Response is not JSON")
        return self._parse_key(data)

    @staticmethod
    def _parse_key(data: Any) -> Optional[str]:
        if not isinstance(data, dict) or "key" not in data:
            raise MatcherError(ErrorCode.MATCHER_MALFORMED_RESPONSE, "Missing field: key")
        key = data["key"]
        if not isinstance(key, str):
            raise MatcherError(ErrorCode.MATCHER_MALFORMED_RESPONSE, f"key must be a string, got {key!r}")
        key = key.strip()
        if key.lower() == "none":
            return None
        if key.upper() in VALID_KEYS:
            return key.upper()
        raise MatcherError(ErrorCode.MATCHER_MALFORMED_RESPONSE, f"Unexpected key {key!r}")
