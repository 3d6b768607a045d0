"""Security status lattice shared by every element of the log model."""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable


class SecurityStatus(IntEnum):
    """Totally ordered status: safe < vulnerable < malicious."""

    SAFE = 0
    VULNERABLE = 1
    MALICIOUS = 2

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "SecurityStatus":
        key = text.strip().lower()
        if key == "compromised":
            return cls.MALICIOUS
        try:
            return cls[key.upper()]
        except KeyError:
            raise ValueError(f"unknown security status {text!r}") from None


SAFE = SecurityStatus.SAFE
VULNERABLE = SecurityStatus.VULNERABLE
MALICIOUS = SecurityStatus.MALICIOUS


def max_status(statuses: Iterable[SecurityStatus]) -> SecurityStatus:
    """Greatest status in ``statuses``; ``SAFE`` when empty."""
    return max(statuses, default=SAFE)


def render_status(status: SecurityStatus, host_like: bool = False) -> str:
    """Human rendering. Hosts and build environments call the top value "compromised"."""
    if host_like and status is MALICIOUS:
        return "compromised"
    return str(status)
