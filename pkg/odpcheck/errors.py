from __future__ import annotations

from enum import Enum
from typing import Any, Optional


class OdpCheckError(Exception):
    """Base class for every error raised by odp-check."""


class UsageError(OdpCheckError):
    pass


class ModelResolutionError(OdpCheckError):
    pass


# ---- metamodel ---------------------------------------------------------------

class UnknownTemplate(OdpCheckError):
    def __init__(self, name: str):
        super().__init__(f"unknown template {name}")
        self.name = name


class CyclicInheritance(OdpCheckError):
    def __init__(self, cycle: list[str]):
        super().__init__("cyclic parenthood: " + " -> ".join(cycle))
        self.cycle = cycle


# ---- constraints -------------------------------------------------------------

class EvalErrorKind(str, Enum):
    MISSING_ATTRIBUTE = "MissingAttribute"
    UNBOUND_VARIABLE = "UnboundVariable"
    UNKNOWN_DOMAIN = "UnknownDomain"
    UNKNOWN_OBJECT = "UnknownObject"
    SORT_MISMATCH = "SortMismatch"
    SHADOWED_VARIABLE = "ShadowedVariable"


class EvalError(OdpCheckError):
    def __init__(self, kind: EvalErrorKind, message: str):
        super().__init__(f"{kind.value}: {message}")
        self.kind = kind


# ---- dynamics ----------------------------------------------------------------

class DynamicsError(OdpCheckError):
    pass


class RuleNotEnabled(DynamicsError):
    pass


class EffectError(DynamicsError):
    pass


class PostconditionFailed(DynamicsError):
    def __init__(self, rule: str):
        super().__init__(f"postcondition of rule {rule} is false after its effects")
        self.rule = rule


class InvariantBroken(DynamicsError):
    def __init__(self, rule: str, schema_name: str):
        super().__init__(f"rule {rule} breaks invariant schema {schema_name}")
        self.rule = rule
        self.schema_name = schema_name


class DeleteDanglingLink(DynamicsError):
    def __init__(self, rule: str, object_id: str, link_ids: list[str]):
        super().__init__(
            f"rule {rule} deletes {object_id} but leaves links {', '.join(link_ids)} in place"
        )
        self.rule = rule
        self.object_id = object_id
        self.link_ids = link_ids


class InitialNonConforming(DynamicsError):
    def __init__(self, report: Any):
        super().__init__("initial system does not conform to its model")
        self.report = report


# ---- engineering -------------------------------------------------------------

class EngineeringError(OdpCheckError):
    pass


class MissingChannelTemplates(EngineeringError):
    def __init__(self, missing: list[str]):
        super().__init__("model lacks channel elements: " + ", ".join(missing))
        self.missing = missing


class DuplicateChannel(EngineeringError):
    pass


class UnknownDestination(EngineeringError):
    def __init__(self, node: str, detail: Optional[str] = None):
        super().__init__(f"unknown destination node {node}" + (f" ({detail})" if detail else ""))
        self.node = node


class CredentialRejected(EngineeringError):
    pass


class IncompletePayload(EngineeringError):
    pass


class AuthenticationFailed(EngineeringError):
    pass


class MissingTemplate(EngineeringError):
    pass
