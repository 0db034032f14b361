import json

import pytest

from thetagl.geometry import is_open_orbit, param_orbit_dim
from thetagl.knowledge import (
    KnowledgeBase,
    KnowledgeError,
    PacketFact,
    ReplayError,
    Rule,
    Status,
    derive_from,
    ks_members,
    ks_parameter,
)
from thetagl.params import (
    contragredient,
    infinitesimal,
    is_arthur_type,
    parse_parameter,
    phi_alpha_part,
    theta_lift_param,
    theta_lift_rep,
)

HALF_PAIR = parse_parameter("nu^{1/2}+nu^{-1/2}")


@pytest.fixture
def ks_kb():
    kb = KnowledgeBase()
    derive_from(kb, contragredient(ks_parameter()), [1, 2, 3, 4, 5, 6])
    return kb


def test_ks_data_shape():
    phi = ks_parameter()
    assert phi.dim == 16
    assert contragredient(phi) == phi
    assert sorted(set(infinitesimal(phi).exponents())) == [-2, -1, 0, 1, 2]
    a, b = ks_members()
    assert a == phi
    assert contragredient(b) == b and infinitesimal(b) == infinitesimal(phi)
    assert not is_open_orbit(phi)
    assert is_arthur_type(phi) is None


def test_ks_seed_is_two_members():
    kb = KnowledgeBase()
    facts = kb.seed(ks_parameter())
    assert len(facts) == 2 and all(f.rule is Rule.SEED_KS for f in facts)
    assert kb.packet(ks_parameter()) == set(ks_members())
    assert set(kb.eta(ks_parameter()).coefficients.values()) == {1}


def test_seed_kinds():
    kb = KnowledgeBase()
    (f,) = kb.seed(HALF_PAIR)
    assert f.rule is Rule.SEED_ARTHUR and f.coefficient == 1
    (g,) = kb.seed(parse_parameter("nu^{1} S_2"))
    assert g.rule is Rule.SEED_OPEN
    assert kb.seed(parse_parameter("nu^{1} + S_1")) == []
    with pytest.raises(KnowledgeError):
        kb.seed_arthur(parse_parameter("nu^{1}"))
    with pytest.raises(KnowledgeError):
        kb.seed_open_orbit(HALF_PAIR)


@pytest.mark.parametrize("alpha,n", [(2, 18), (4, 20), (5, 21), (6, 22)])
def test_transport_gives_two_members(ks_kb, alpha, n):
    phi = theta_lift_param(contragredient(ks_parameter()), alpha)
    assert phi.dim == n
    members = [f for f in ks_kb.seeded_in(phi) if f.rule is Rule.THETA]
    assert len(members) == 2
    assert {f.pi for f in members} == {theta_lift_rep(pi, alpha) for pi in ks_members()}
    assert len(ks_kb.packet(phi)) == 2


@pytest.mark.parametrize("alpha", [1, 3])
def test_transport_refused_below_threshold(alpha):
    kb = KnowledgeBase()
    kb.seed(ks_parameter())
    assert kb.rule_theta_transport(ks_parameter(), alpha) == []
    refused = [f for f in kb if f.rule is Rule.THETA_REFUSED]
    assert len(refused) == 1 and refused[0].status is Status.UNKNOWN


def test_transport_needs_eta():
    kb = KnowledgeBase()
    with pytest.raises(KnowledgeError):
        kb.rule_theta_transport(HALF_PAIR, 2)
    with pytest.raises(KnowledgeError):
        kb.rule_theta_transport(HALF_PAIR, 0)


def test_query_members_and_outsiders(ks_kb):
    phi = theta_lift_param(contragredient(ks_parameter()), 5)
    for pi in ks_members():
        ans = ks_kb.query(phi, theta_lift_rep(pi, 5))
        assert ans.status is Status.IN
        assert ans.trace[0].rule is Rule.THETA
        assert any(f.rule is Rule.SEED_KS for f in ans.trace)
    assert ks_kb.query(phi, parse_parameter("S_21")).status is Status.OUT


def test_every_fact_replays(ks_kb):
    assert ks_kb.replay_all() == len(ks_kb)


def test_contragredient_invariance(ks_kb):
    assert ks_kb.is_contragredient_invariant()


def test_unseeded_parameter_is_unknown():
    kb = KnowledgeBase()
    kb.seed(HALF_PAIR)
    phi = parse_parameter("nu^{1} + S_1")
    pi = parse_parameter("nu^{1/2} S_2")
    assert not is_open_orbit(phi) and is_arthur_type(phi) is None
    ans = kb.query(phi, pi)
    assert ans.status is Status.UNKNOWN and ans.trace == []


def test_infinitesimal_mismatch_is_out():
    kb = KnowledgeBase()
    ans = kb.query(HALF_PAIR, parse_parameter("S_2 + S_1"))
    assert ans.status is Status.OUT and ans.trace[0].rule is Rule.INFINITESIMAL


def test_closure_prune_on_incomparable_pair():
    kb = KnowledgeBase()
    a = parse_parameter("nu^{1} S_2 + nu^{-1/2} + nu^{-3/2}")
    b = parse_parameter("nu^{3/2} + S_2 + nu^{-3/2}")
    f = kb.rule_closure_prune(a, b)
    assert f.status is Status.OUT and f.rule is Rule.CLOSURE
    assert kb.query(a, b).status is Status.OUT


def test_complete_seed_excludes_rest():
    kb = KnowledgeBase()
    phi = parse_parameter("nu^{3/2}+nu^{1/2}+nu^{-1/2}+nu^{-3/2}")
    kb.seed(phi)
    ans = kb.query(phi, parse_parameter("S_4"))
    assert ans.status is Status.OUT and ans.trace[0].rule is Rule.COMPLETE


def test_conflict_is_rejected():
    kb = KnowledgeBase()
    f = kb.seed_arthur(HALF_PAIR)
    with pytest.raises(KnowledgeError):
        kb.add(PacketFact(HALF_PAIR, HALF_PAIR, Status.OUT, Rule.CLOSURE))
    with pytest.raises(KnowledgeError):
        kb.add(PacketFact(HALF_PAIR, HALF_PAIR, Status.IN, Rule.CONTRAGREDIENT, ("nope",)))
    assert len(kb) == 1 and f.id in kb.facts


def test_ids_are_content_hashes():
    f = PacketFact(HALF_PAIR, HALF_PAIR, Status.IN, Rule.SEED_ARTHUR, (), 1)
    g = PacketFact(HALF_PAIR, HALF_PAIR, Status.IN, Rule.SEED_ARTHUR, (), 1)
    assert f.id == g.id and len(f.id) == 16
    assert PacketFact.from_json(f.to_json()) == f
    bad = dict(f.to_json(), id="0" * 16)
    with pytest.raises(ReplayError):
        PacketFact.from_json(bad)


def test_journal_persists(tmp_path):
    path = tmp_path / "kb.jsonl"
    kb = KnowledgeBase(path)
    derive_from(kb, HALF_PAIR, [2])
    lines = path.read_text().splitlines()
    assert json.loads(lines[0]) == {"format": "thetagl-kb", "version": 1}
    assert len(lines) == len(kb) + 1
    again = KnowledgeBase(path)
    assert set(again.facts) == set(kb.facts)
    assert again.replay_all() == len(kb)
    total = theta_lift_param(HALF_PAIR, 2)
    assert again.query(total, total).status is Status.IN


def test_journal_rejects_bad_header(tmp_path):
    path = tmp_path / "kb.jsonl"
    path.write_text('{"format": "other", "version": 1}\n')
    with pytest.raises(KnowledgeError):
        KnowledgeBase(path)


def test_journal_rejects_dangling_input(tmp_path):
    path = tmp_path / "kb.jsonl"
    f = PacketFact(HALF_PAIR, HALF_PAIR, Status.IN, Rule.CONTRAGREDIENT, ("ffffffffffffffff",), 1)
    path.write_text('{"format": "thetagl-kb", "version": 1}\n' + json.dumps(f.to_json()) + "\n")
    with pytest.raises(KnowledgeError):
        KnowledgeBase(path)


def test_transport_coefficients_follow_orbit_signs(ks_kb):
    phi = theta_lift_param(contragredient(ks_parameter()), 2)
    eta = ks_kb.eta(phi)
    d = param_orbit_dim(phi)
    for pi, c in eta.coefficients.items():
        assert c in (1, -1)
        assert c == (-1) ** ((d + param_orbit_dim(pi)) % 2) or pi == phi


def test_half_pair_transport_matches_seed():
    kb = KnowledgeBase()
    out = derive_from(kb, HALF_PAIR, [2])
    (f,) = out[2]
    total = theta_lift_param(HALF_PAIR, 2)
    assert f.phi == total and f.pi == total and f.coefficient == 1
    assert kb.seed_arthur(phi_alpha_part(2)).id in f.inputs
