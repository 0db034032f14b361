"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import random
import time

from helpers import chains_upto, random_unitriangular, threshold_corpus
from test_duality import all_multisegments
from thetagl import kgroup
from thetagl.certify import certify_theta
from thetagl.duality import check_dual_sum_identity, dual, zelevinsky_dual
from thetagl.geometry import (
    SplitDescriptor,
    chain,
    geometric_dual_orbit,
    is_open_orbit,
    iter_orbits,
    lagrangian_check,
    orbits,
    verify_lemma1,
)
from thetagl.kgroup import BasisMatrix, KVector
from thetagl.knowledge import KnowledgeBase, Rule, Status, derive_from, ks_members, ks_parameter
from thetagl.params import (
    adams_threshold_ok,
    contragredient,
    format_parameter,
    is_arthur_type,
    m_beta,
    parse_parameter,
    theta_lift_param,
    theta_lift_rep,
)

HALF_PAIR = parse_parameter("nu^{1/2}+nu^{-1/2}")
WIDE_PAIR = parse_parameter("nu^{3/2}+nu^{-3/2}")


def test_mw_involution_on_six_points(criterion):
    # every multisegment on 6 consecutive points with total length at most 9
    t0 = time.perf_counter()
    n = bad = 0
    for m in all_multisegments(6, 9):
        n += 1
        if zelevinsky_dual(zelevinsky_dual(m).dual).dual != m:
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and n > 1000 and dt < 10
    assert criterion(1, ok, f"{n} multisegments, {bad} failures, {dt:.1f}s")


def test_geometric_dual_matches_mw(criterion):
    t0 = time.perf_counter()
    n = bad = 0
    witness = None
    for dims in chains_upto(12):
        V = chain(dims)
        for m in iter_orbits(V):
            n += 1
            got = geometric_dual_orbit(V, m, seed=0).to_multisegment()
            if got != dual(m):
                bad += 1
                witness = witness or (dims, str(m), str(got))
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 60
    assert criterion(2, ok, f"{n} orbits, {bad} failures, {dt:.1f}s" + (f", first {witness}" if witness else ""))


def test_worked_examples_exact(criterion):
    checks = []
    lift = theta_lift_param(HALF_PAIR, 2)
    checks.append(format_parameter(lift) == format_parameter(HALF_PAIR + HALF_PAIR))
    good = check_dual_sum_identity(HALF_PAIR, 2)
    checks.append(good.ok and format_parameter(good.lhs) == "S_2 + S_2")
    bad = check_dual_sum_identity(WIDE_PAIR, 2)
    checks.append(not bad.ok and format_parameter(bad.lhs) == "S_4")
    checks.append(format_parameter(bad.rhs) == format_parameter(parse_parameter("nu^{3/2} + S_2 + nu^{-3/2}")))
    checks.append(format_parameter(theta_lift_param(WIDE_PAIR, 2))
                  == format_parameter(parse_parameter("nu^{3/2}+nu^{1/2}+nu^{-1/2}+nu^{-3/2}")))
    checks.append(str(m_beta(HALF_PAIR, "1/2")) == "1/2")
    checks.append(str(m_beta(WIDE_PAIR, "1/2")) == "3/2")
    checks.append(adams_threshold_ok(HALF_PAIR, 2) and not adams_threshold_ok(WIDE_PAIR, 2))
    assert criterion(3, all(checks), f"{sum(checks)}/{len(checks)} exact matches")


def test_ks_threshold_set(criterion):
    phi = ks_parameter()
    got = [a for a in range(1, 41) if adams_threshold_ok(phi, a)]
    want = [2, 4] + list(range(5, 41))
    assert criterion(4, got == want, f"threshold holds for alpha in {got[:6]}...")


def test_ks_transport_sizes(criterion):
    kb = KnowledgeBase()
    out = derive_from(kb, contragredient(ks_parameter()), range(1, 7))
    sizes = {}
    for alpha, facts in out.items():
        if facts:
            phi = facts[0].phi
            sizes[phi.dim] = len({f.pi for f in facts})
    want = {18: 2, 20: 2, 21: 2, 22: 2}
    members_ok = all(
        kb.query(theta_lift_param(ks_parameter(), a), theta_lift_rep(pi, a)).status is Status.IN
        for a in (2, 4, 5, 6) for pi in ks_members())
    refused = sorted(f.param("alpha") for f in kb if f.rule is Rule.THETA_REFUSED)
    ok = sizes == want and members_ok and refused == [1, 3] and len(kb.seeded_in(ks_parameter())) == 2
    assert criterion(5, ok, f"packet sizes by n {sizes}, refused alpha {refused}")


def test_fixed_point_certificates(criterion):
    t0 = time.perf_counter()
    notes = []
    works = certify_theta(HALF_PAIR, 2, seed=0)
    works_ok = works.ok and works.fixed_point["ok"] is True
    notes.append(f"half pair {'ok' if works_ok else 'FAILED'}")

    cert_bad = central_bad = lemma_bad = closure_bad = 0
    witness = None
    for i, (phi, alpha) in enumerate(threshold_corpus(100, seed=0)):
        rep = certify_theta(phi, alpha, seed=i, fixed_point=False)
        for c in rep.chains:
            cert_bad += not c.certificate.ok
            central_bad += not c.central.ok
            lemma_bad += not c.lemma1.lemma_ok
            if not c.lemma1.closure_ok:
                closure_bad += 1
                witness = witness or (format_parameter(phi), alpha, c.chain, c.lemma1.witness)
    notes.append(f"corpus: certificate {cert_bad}, s-triviality {central_bad}, "
                 f"decomposition {lemma_bad}, closure intersection {closure_bad} failures")

    quad = chain((1, 1, 1, 1))
    split = SplitDescriptor(quad, (0, 1, 1, 0))
    quad_ok = all(verify_lemma1(quad, split, t) for t in orbits(quad))
    notes.append(f"(1,1,1,1) exhaustive {'ok' if quad_ok else 'FAILED'}")
    dt = time.perf_counter() - t0
    ok = works_ok and quad_ok and not (cert_bad or central_bad or lemma_bad or closure_bad) and dt < 300
    if witness:
        notes.append(f"witness {witness}")
    assert criterion(6, ok, "; ".join(notes) + f"; {dt:.1f}s")


def test_kl_pairing_identities(criterion):
    rng = random.Random(0)
    bad = 0
    for _ in range(50):
        n = rng.randint(1, 12)
        orbs = tuple(parse_parameter(f"nu^{{{k}}}") for k in range(n))
        m = BasisMatrix(orbs, random_unitriangular(rng, n))
        dims = [rng.randint(0, 12) for _ in range(n)]
        eta = KVector("irreducible", orbs, tuple(rng.randint(-5, 5) for _ in range(n)))
        F = KVector("IC", orbs, tuple(rng.randint(-5, 5) for _ in range(n)))
        bad += not kgroup.kl_translate_check(eta, F, m, dims)
        bad += not kgroup.pairing_on_standards_check(m, dims)
    builtin = 0
    for r in range(1, 9):
        m = kgroup.basis_matrix_for_chain(chain((1,) * r))
        d = kgroup.orbit_dims_for(m)
        bad += not kgroup.pairing_on_standards_check(m, d)
        eta = KVector.unit("irreducible", m.orbits, m.orbits[-1])
        F = KVector("IC", m.orbits, tuple(rng.randint(-3, 3) for _ in m.orbits))
        bad += not kgroup.kl_translate_check(eta, F, m, d)
        builtin += 1
    assert criterion(7, bad == 0, f"50 random matrices, {builtin} multiplicity-free chains, {bad} failures")


def test_lagrangian_dimension(criterion):
    n = bad = 0
    for dims in chains_upto(12):
        V = chain(dims)
        for m in iter_orbits(V):
            f, d, total = lagrangian_check(V, m)
            n += 1
            bad += f + d != total
    assert criterion(8, bad == 0, f"{n} orbits, {bad} failures")


def test_kb_soundness(criterion):
    kb = KnowledgeBase()
    derive_from(kb, contragredient(ks_parameter()), range(1, 7))
    derive_from(kb, HALF_PAIR, [2, 3])
    replayed = kb.replay_all()
    invariant = kb.is_contragredient_invariant()
    phi = parse_parameter("nu^{1} + S_1")
    unseeded = not is_open_orbit(phi) and is_arthur_type(phi) is None
    ans = kb.query(phi, parse_parameter("nu^{1/2} S_2"))
    also = kb.query(parse_parameter("rho nu^{1} + rho S_1"), parse_parameter("rho nu^{1/2} S_2"))
    ok = invariant and unseeded and ans.status is Status.UNKNOWN and also.status is Status.UNKNOWN
    assert criterion(9, ok, f"{replayed} facts replayed, contragredient invariant {invariant}, "
                            f"unseeded query {ans.status.value}")
