from __future__ import annotations

from enum import Enum


class FunctionGroup(str, Enum):
    MANAGEMENT = "management"
    COORDINATION = "coordination"
    REPOSITORY = "repository"
    SECURITY = "security"


class EngineeringTag(Enum):
    """The fixed taxonomy of engineering function tags (group, function)."""

    MANAGEMENT_NODE = (FunctionGroup.MANAGEMENT, "node")
    MANAGEMENT_OBJECT = (FunctionGroup.MANAGEMENT, "object")
    MANAGEMENT_CLUSTER = (FunctionGroup.MANAGEMENT, "cluster")
    MANAGEMENT_CAPSULE = (FunctionGroup.MANAGEMENT, "capsule")

    COORDINATION_EVENT_NOTIFICATION = (FunctionGroup.COORDINATION, "eventNotification")
    COORDINATION_CHECKPOINT_RECOVERY = (FunctionGroup.COORDINATION, "checkpointRecovery")
    COORDINATION_DEACTIVATION_REACTIVATION = (FunctionGroup.COORDINATION, "deactivationReactivation")
    COORDINATION_GROUP = (FunctionGroup.COORDINATION, "group")
    COORDINATION_MIGRATION = (FunctionGroup.COORDINATION, "migration")
    COORDINATION_INTERFACE_REF_TRACKING = (FunctionGroup.COORDINATION, "interfaceRefTracking")
    COORDINATION_TRANSACTION = (FunctionGroup.COORDINATION, "transaction")

    REPOSITORY_STORAGE = (FunctionGroup.REPOSITORY, "storage")
    REPOSITORY_INFORMATION_ORGANIZATION = (FunctionGroup.REPOSITORY, "informationOrganization")
    REPOSITORY_RELOCATION = (FunctionGroup.REPOSITORY, "relocation")
    REPOSITORY_TYPE_REPOSITORY = (FunctionGroup.REPOSITORY, "typeRepository")
    REPOSITORY_TRADING = (FunctionGroup.REPOSITORY, "trading")

    SECURITY_ACCESS_CONTROL = (FunctionGroup.SECURITY, "accessControl")
    SECURITY_AUTHENTICATION = (FunctionGroup.SECURITY, "authentication")
    SECURITY_AUDIT = (FunctionGroup.SECURITY, "securityAudit")
    SECURITY_KEY_MANAGEMENT = (FunctionGroup.SECURITY, "keyManagement")
    SECURITY_CONFIDENTIALITY_INTEGRITY = (FunctionGroup.SECURITY, "confidentialityIntegrity")

    @property
    def group(self) -> FunctionGroup:
        return self.value[0]

    @property
    def function(self) -> str:
        return self.value[1]

    @property
    def label(self) -> str:
        return f"{self.group.value}.{self.function}"

    @classmethod
    def parse(cls, label: str) -> "EngineeringTag":
        for tag in cls:
            if tag.label == label:
                return tag
        raise ValueError(f"unknown engineering tag {label!r}")

    def __lt__(self, other: "EngineeringTag") -> bool:
        return self.label < other.label
