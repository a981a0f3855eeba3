"""Authorized invocation: a client may call a target when it holds a reference to it
and is authorized.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from odpcheck.instance import System

REF_ROLE = "ref"
GRANT_ROLE = "grant"
AUTHORIZED_ATTR = "authorized"


class Verdict(str, Enum):
    ALLOW = "ALLOW"
    DENY = "DENY"


class DenyReason(str, Enum):
    NO_REFERENCE = "NO_REFERENCE"
    NO_AUTHORIZATION = "NO_AUTHORIZATION"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    reason: Optional[DenyReason] = None

    @property
    def allowed(self) -> bool:
        return self.verdict is Verdict.ALLOW

    def __str__(self) -> str:
        return self.verdict.value if self.reason is None else f"{self.verdict.value}({self.reason.value})"


ALLOW = Decision(Verdict.ALLOW)


def has_authorization(client: str, s: System, target: Optional[str] = None) -> bool:
    """``authorized = true`` in the client's state, or a grant link from the client.

    With ``target`` the grant link must point at it; without, any grant link counts.
    """
    obj = s.objects.get(client)
    if obj is None:
        return False
    if (obj.state or {}).get(AUTHORIZED_ATTR) is True:
        return True
    return any(target is None or link.target == target for link in s.links_of(GRANT_ROLE) if link.source == client)


def authorize_invocation(client: str, target: str, s: System) -> Decision:
    if s.find_link(REF_ROLE, client, target) is None:
        return Decision(Verdict.DENY, DenyReason.NO_REFERENCE)
    if not has_authorization(client, s, target):
        return Decision(Verdict.DENY, DenyReason.NO_AUTHORIZATION)
    return ALLOW
