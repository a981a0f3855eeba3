from __future__ import annotations

from dataclasses import replace

import pytest

from conftest import CORPUS, load, rule_ids
from odpcheck.checks.conformance import conform
from odpcheck.dsl.parser import parse_system
from odpcheck.dsl.serializer import serialize
from odpcheck.engineering.channel import CHAIN_ROLES, build_channel, find_channels
from odpcheck.engineering.checks import check_engineering, domain_members, locate
from odpcheck.engineering.containment import ContainmentPath
from odpcheck.engineering.invocation import DenyReason, Verdict, authorize_invocation
from odpcheck.engineering.mobility import SoftwareEntity, remote_create, transfer_entity
from odpcheck.engineering.tags import EngineeringTag, FunctionGroup
from odpcheck.errors import (
    AuthenticationFailed,
    CredentialRejected,
    DuplicateChannel,
    EngineeringError,
    IncompletePayload,
    MissingChannelTemplates,
    MissingTemplate,
    UnknownDestination,
)
from odpcheck.instance import Link, TravelRequest

CLIENT_CLUSTER = ContainmentPath("clientNode", "clientCapsule", "clientCluster")
DB_CLUSTER = ContainmentPath("serverNode", "dbCapsule", "dbCluster")


# ---- channels ---------------------------------------------------------------


def test_channel_matches_the_corpus_system(dbms, dbms_base):
    built = build_channel("c1", "s1", dbms_base, dbms)
    assert built == load(CORPUS / "dbms_channel.odps")
    assert len(built.objects) == len(dbms_base.objects) + 6
    assert len(built.links) == len(dbms_base.links) + 7
    assert conform(built, dbms).conforms
    assert check_engineering(built, dbms) == []


def test_channel_sides_follow_their_endpoints(dbms, dbms_base):
    built = build_channel("c1", "s1", dbms_base, dbms)
    assert locate("c1_s1_client_protocol", built) == CLIENT_CLUSTER
    assert locate("c1_s1_server_protocol", built) == DB_CLUSTER
    assert built.objects["c1_s1_client_stub"].state == {"messages": 0}


def test_find_channels_follows_the_chain(dbms, dbms_base):
    built = build_channel("c1", "s1", dbms_base, dbms)
    assert find_channels("c1", "s1", built) == [(
        "c1_s1_client_stub", "c1_s1_client_binder", "c1_s1_client_protocol",
        "c1_s1_server_protocol", "c1_s1_server_binder", "c1_s1_server_stub",
    )]
    assert find_channels("c2", "s2", built) == []
    assert find_channels("c1", "s1", dbms_base) == []
    assert [link.of for link in built.links_touching("c1_s1_client_protocol")] == ["binderProtocol", "interworks"]
    assert {built.links_of(role)[0].id for role in CHAIN_ROLES} == {f"{role}1" for role in CHAIN_ROLES}


def test_channel_may_be_built_only_once(dbms, dbms_base):
    built = build_channel("c1", "s1", dbms_base, dbms)
    with pytest.raises(DuplicateChannel):
        build_channel("c1", "s1", built, dbms)
    second = build_channel("c2", "s2", built, dbms)
    assert len(find_channels("c2", "s2", second)) == 1


def test_channel_needs_the_channel_vocabulary(counter, counter_start):
    with pytest.raises(MissingChannelTemplates) as info:
        build_channel("a", "a", counter_start, counter)
    assert "template Stub" in info.value.missing
    assert "role toObject" in info.value.missing


def test_channel_endpoints_must_exist(dbms, dbms_base):
    with pytest.raises(EngineeringError):
        build_channel("c1", "ghost", dbms_base, dbms)


# ---- authorization ----------------------------------------------------------


@pytest.mark.parametrize(
    "client, target, verdict, reason",
    [
        ("c1", "s1", Verdict.ALLOW, None),
        ("c2", "s2", Verdict.DENY, DenyReason.NO_AUTHORIZATION),
        ("c1", "s2", Verdict.DENY, DenyReason.NO_REFERENCE),
        ("c2", "s1", Verdict.DENY, DenyReason.NO_REFERENCE),
    ],
)
def test_authorization_table(dbms_base, client, target, verdict, reason):
    decision = authorize_invocation(client, target, dbms_base)
    assert (decision.verdict, decision.reason) == (verdict, reason)


def test_grant_link_authorizes_its_target_only(dbms_base):
    granted = dbms_base.with_link(Link("g1", "grant", "c2", "s2"))
    assert authorize_invocation("c2", "s2", granted).allowed
    elsewhere = dbms_base.with_link(Link("g1", "grant", "c2", "s1"))
    assert str(authorize_invocation("c2", "s2", elsewhere)) == "DENY(NO_AUTHORIZATION)"


# ---- mobility ---------------------------------------------------------------


def test_entity_payload_comes_from_state(dbms_base):
    e = SoftwareEntity.of("c1", dbms_base)
    assert (e.authority, e.credential, e.code) == ("alice", "tok-client", "client-v1")
    assert e.missing_payload() == []
    assert SoftwareEntity.of("s1", dbms_base).missing_payload() == ["authority", "credential", "code"]


def test_transfer_there_and_back(dbms, dbms_base):
    there = transfer_entity(SoftwareEntity.of("c1", dbms_base), "serverNode", dbms_base)
    assert locate("c1", there) == DB_CLUSTER
    assert "c1" in domain_members("serverNode", there)
    assert there.travel_log == (TravelRequest("c1", "clientNode", "serverNode", source_path=CLIENT_CLUSTER),)
    assert check_engineering(there, dbms) == []

    back = transfer_entity(SoftwareEntity.of("c1", there), "clientNode", there)
    assert back.containment == dbms_base.containment
    assert back.objects == dbms_base.objects
    assert len(back.travel_log) == 2
    assert back.travel_log[-1] == TravelRequest("c1", "serverNode", "clientNode", source_path=DB_CLUSTER)


_SPLIT_CLIENTS = ("cluster clientCluster { c1, c2 }", "cluster clientCluster { c2 }\n            cluster zCluster { c1 }")
Z_CLUSTER = ContainmentPath("clientNode", "clientCapsule", "zCluster")


@pytest.fixture
def split_base():
    text = (CORPUS / "dbms_base.odps").read_text(encoding="utf-8").replace(*_SPLIT_CLIENTS)
    return parse_system(text)


def test_round_trip_returns_to_the_cluster_it_left(split_base):
    assert split_base.containment.designated_cluster("clientNode") == CLIENT_CLUSTER
    assert locate("c1", split_base) == Z_CLUSTER
    there = transfer_entity(SoftwareEntity.of("c1", split_base), "serverNode", split_base)
    back = transfer_entity(SoftwareEntity.of("c1", there), "clientNode", there)
    assert back.containment == split_base.containment
    assert locate("c1", back) == Z_CLUSTER


def test_return_falls_back_to_the_designated_cluster(split_base):
    there = transfer_entity(SoftwareEntity.of("c1", split_base), "serverNode", split_base)
    capsule = there.containment.nodes["clientNode"].capsules["clientCapsule"]
    gone = replace(capsule, clusters={"clientCluster": capsule.clusters["clientCluster"]})
    node = replace(there.containment.nodes["clientNode"], capsules={"clientCapsule": gone})
    there = replace(there, containment=replace(there.containment, nodes={**there.containment.nodes, "clientNode": node}))
    back = transfer_entity(SoftwareEntity.of("c1", there), "clientNode", there)
    assert locate("c1", back) == CLIENT_CLUSTER


def test_travel_origin_survives_the_file_format(split_base):
    there = transfer_entity(SoftwareEntity.of("c1", split_base), "serverNode", split_base)
    text = serialize(there)
    assert "travel c1 from clientNode.clientCapsule.zCluster to serverNode;" in text
    reread = parse_system(text)
    assert reread.travel_log == there.travel_log
    back = transfer_entity(SoftwareEntity.of("c1", reread), "clientNode", reread)
    assert locate("c1", back) == Z_CLUSTER


def test_destination_rejects_unknown_credentials(dbms_base):
    with pytest.raises(CredentialRejected):
        transfer_entity(SoftwareEntity.of("c2", dbms_base), "serverNode", dbms_base)


def test_transfer_needs_a_full_payload(dbms_base):
    with pytest.raises(IncompletePayload):
        transfer_entity(SoftwareEntity.of("s1", dbms_base), "clientNode", dbms_base)


def test_transfer_to_unknown_node(dbms_base):
    with pytest.raises(UnknownDestination) as info:
        transfer_entity(SoftwareEntity.of("c1", dbms_base), "moon", dbms_base)
    assert info.value.node == "moon"


def test_remote_create_places_a_default_object(dbms, dbms_base):
    created = remote_create("c1", "Server", "serverNode", dbms_base, dbms)
    server = created.objects["server1"]
    assert server.of == frozenset({"Server", "DbmsObject"})
    assert server.state == {"authorized": False, "capacity": 0, "load": 0}
    assert locate("server1", created) == DB_CLUSTER
    assert check_engineering(created, dbms) == []


def test_remote_create_requires_authentication(dbms, dbms_base):
    with pytest.raises(AuthenticationFailed):
        remote_create("c2", "Server", "serverNode", dbms_base, dbms)
    assert "server1" not in dbms_base.objects
    granted = dbms_base.with_link(Link("g1", "grant", "c2", "s2"))
    assert "server1" in remote_create("c2", "Server", "serverNode", granted, dbms).objects


def test_remote_create_of_unknown_template(dbms, dbms_base):
    with pytest.raises(MissingTemplate):
        remote_create("c1", "Spaceship", "serverNode", dbms_base, dbms)


# ---- engineering rules ------------------------------------------------------


def test_corpus_deployment_is_clean(dbms, dbms_base):
    assert check_engineering(dbms_base, dbms) == []
    assert domain_members("serverNode", dbms_base) == frozenset({"s1", "s2"})
    assert locate("s2", dbms_base) == DB_CLUSTER
    assert locate("nobody", dbms_base) is None


def test_object_in_two_clusters(dbms, dbms_base):
    s = replace(dbms_base, containment=dbms_base.containment.place("c1", DB_CLUSTER))
    (v,) = check_engineering(s, dbms)
    assert (v.rule.value, v.subjects) == ("E1", ("c1",))


def test_placed_object_must_exist(dbms, dbms_base):
    s = replace(dbms_base, containment=dbms_base.containment.place("ghost", DB_CLUSTER))
    assert rule_ids(check_engineering(s, dbms)) == ["E2"]


def test_managed_object_must_be_placed(dbms, dbms_base):
    s = replace(dbms_base, containment=dbms_base.containment.remove_object("s2"))
    (v,) = check_engineering(s, dbms)
    assert (v.rule.value, v.subjects) == ("E3", ("s2",))


def test_travel_records_must_name_known_things(dbms, dbms_base):
    s = replace(dbms_base, travel_log=(TravelRequest("ghost", "clientNode", "moon"),))
    assert [(v.rule.value, v.subjects) for v in check_engineering(s, dbms)] == [
        ("E4", ("ghost",)),
        ("E4", ("ghost", "moon")),
    ]


def test_software_entity_payload_must_be_filled(dbms, dbms_base):
    c1 = dbms_base.objects["c1"]
    s = dbms_base.with_object(replace(c1, state={**c1.state, "credential": ""}))
    (v,) = check_engineering(s, dbms)
    assert (v.rule.value, v.subjects) == ("E5", ("c1", "credential"))


# ---- tags -------------------------------------------------------------------


def test_tag_labels_round_trip():
    for tag in EngineeringTag:
        assert EngineeringTag.parse(tag.label) is tag
    assert EngineeringTag.SECURITY_AUTHENTICATION.group is FunctionGroup.SECURITY
    assert EngineeringTag.REPOSITORY_RELOCATION.function == "relocation"


def test_unknown_tag_label():
    with pytest.raises(ValueError):
        EngineeringTag.parse("management.spaceship")
