"""Moving software entities between nodes and creating them remotely."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Mapping, Optional

from odpcheck.engineering.containment import ContainmentPath
from odpcheck.engineering.invocation import has_authorization
from odpcheck.errors import (
    AuthenticationFailed,
    CredentialRejected,
    EngineeringError,
    IncompletePayload,
    MissingTemplate,
    OdpCheckError,
    UnknownDestination,
)
from odpcheck.instance import ObjectInstance, System, TravelRequest
from odpcheck.metamodel import Model
from odpcheck.sorts import Value, default_value

logger = logging.getLogger(__name__)

PAYLOAD_FIELDS = ("authority", "credential", "code")


@dataclass(frozen=True)
class SoftwareEntity:
    object_ref: str
    state: Mapping[str, Value] = field(default_factory=dict)
    authority: str = ""
    credential: str = ""
    code: str = ""

    @classmethod
    def of(cls, object_id: str, s: System) -> "SoftwareEntity":
        """Reads the payload out of an object's state."""
        obj = s.objects.get(object_id)
        if obj is None:
            raise EngineeringError(f"object {object_id} is not in system {s.name}")
        state = dict(obj.state or {})
        return cls(object_id, state, *(str(state.get(f, "")) for f in PAYLOAD_FIELDS))

    def missing_payload(self) -> List[str]:
        return [f for f in PAYLOAD_FIELDS if not getattr(self, f)]


def _destination(s: System, node: str) -> ContainmentPath:
    if node not in s.containment.nodes:
        raise UnknownDestination(node)
    path = s.containment.designated_cluster(node)
    if path is None:
        raise UnknownDestination(node, "it hosts no cluster")
    return path


def _return_path(s: System, entity: str, dest_node: str) -> Optional[ContainmentPath]:
    """The cluster ``entity`` occupied when it last left ``dest_node``, if that cluster still exists."""
    for t in reversed(s.travel_log):
        if t.entity == entity and t.source == dest_node:
            if t.source_path is not None and s.containment.has_cluster(t.source_path):
                return t.source_path
            return None
    return None


def transfer_entity(e: SoftwareEntity, dest_node: str, s: System) -> System:
    """Moves ``e`` to ``dest_node`` and logs the travel request.

    An entity coming back to a node it left returns to the cluster it left
    from; otherwise it lands in the node's designated cluster.

    The entity's state travels verbatim. Failures leave ``s`` untouched.
    """
    obj = s.objects.get(e.object_ref)
    if obj is None:
        raise EngineeringError(f"object {e.object_ref} is not in system {s.name}")
    missing = e.missing_payload()
    if missing:
        raise IncompletePayload(f"entity {e.object_ref} lacks {', '.join(missing)}")
    path = _return_path(s, e.object_ref, dest_node) or _destination(s, dest_node)
    if not s.containment.nodes[dest_node].accepts_credential(e.credential):
        raise CredentialRejected(f"node {dest_node} rejects the credential of {e.object_ref}")

    source = s.containment.locate(e.object_ref)
    containment = s.containment.remove_object(e.object_ref).place(e.object_ref, path)
    request = TravelRequest(e.object_ref, source.node if source else None, dest_node, source_path=source)
    logger.debug("%s travels %s -> %s", e.object_ref, request.source or "(nowhere)", dest_node)
    return replace(
        s.with_object(replace(obj, state=dict(e.state))),
        containment=containment,
        travel_log=s.travel_log + (request,),
    )


def remote_create(client_id: str, template: str, dest_node: str, s: System, m: Model) -> System:
    """Creates an object of ``template`` (with its ancestors) under ``dest_node`` on behalf of a client.

    The client authenticates the way invocations are authorized. Attributes
    start at the default value of their sort.
    """
    if not has_authorization(client_id, s):
        raise AuthenticationFailed(f"client {client_id} cannot authenticate to {dest_node}")
    if template not in m.templates:
        raise MissingTemplate(f"model {m.name} declares no template {template}")
    try:
        of = m.closure(template)
    except OdpCheckError as err:
        raise MissingTemplate(str(err)) from err
    path = _destination(s, dest_node)
    oid = s.fresh_id(template.lower())
    state = {attr: default_value(sort) for attr, sort in m.attributes_of(of).items()}
    out = s.with_object(ObjectInstance(oid, of, state))
    logger.debug("%s creates %s at %s", client_id, oid, path)
    return replace(out, containment=out.containment.place(oid, path))
