import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_unitriangular
from thetagl import kgroup, linalg
from thetagl.certify import fixed_point_report
from thetagl.geometry import chain, closure_leq, orbit_dim, orbits
from thetagl.kgroup import BasisMatrix, KGroupError, KVector
from thetagl.params import (
    Multisegment,
    infinitesimal,
    parse_lambda,
    parse_parameter,
    phi_alpha_part,
    theta_lift_param,
)

HALF_PAIR = parse_parameter("nu^{1/2}+nu^{-1/2}")


def square_matrix():
    return kgroup.basis_matrix_for_lambda(parse_lambda("{1/2,1/2,-1/2,-1/2}"))


def test_single_segment_chain():
    m = kgroup.basis_matrix_for_chain(chain((1, 1)))
    assert m.orbits == (parse_parameter("nu^{0} S_2"), HALF_PAIR)
    assert m.entries.tolist() == [[1, 1], [0, 1]]


def test_one_point_chain():
    m = kgroup.basis_matrix_for_chain(chain((1,)))
    assert m.entries.tolist() == [[1]]


def test_quad_matrix_is_closure_zeta():
    V = chain((1, 1, 1, 1))
    m = kgroup.basis_matrix_for_chain(V)
    tris = orbits(V)
    assert m.size == 8
    for i in range(8):
        for j in range(8):
            assert m.entries[i, j] == (1 if closure_leq(tris[j], tris[i]) else 0)


def test_square_matrix_from_data_file():
    m = square_matrix()
    assert m.entries.tolist() == [[1, 1, 1], [0, 1, 2], [0, 0, 1]]
    assert m.orbits[0] == parse_parameter("S_2 + S_2")
    assert m.orbits[-1] == parse_parameter("2*nu^{1/2} + 2*nu^{-1/2}")


def test_shifted_chain_uses_same_file():
    m = kgroup.basis_matrix_for_lambda(parse_lambda("{3/2,3/2,1/2,1/2}"))
    assert m.orbits[0] == parse_parameter("nu^{1} S_2 + nu^{1} S_2")
    assert m.entries.tolist() == [[1, 1, 1], [0, 1, 2], [0, 0, 1]]


def test_missing_matrix_is_reported():
    with pytest.raises(KGroupError, match="m_chain_2_3"):
        kgroup.basis_matrix_for_chain(chain((2, 3)))


def test_search_path_and_bad_file(tmp_path):
    data = {"orbits": [[{"label": "1", "center": "0", "length": 1}]], "rows": [[1]]}
    (tmp_path / "m_chain_2_3.json").write_text(json.dumps(data))
    with pytest.raises(KGroupError, match="does not index"):
        kgroup.basis_matrix_for_chain(chain((2, 3)), search=[tmp_path])


def test_rejects_non_unitriangular():
    with pytest.raises(KGroupError):
        BasisMatrix((HALF_PAIR, parse_parameter("S_2")), np.array([[1, 0], [1, 1]], dtype=object))
    with pytest.raises(KGroupError):
        BasisMatrix((HALF_PAIR,), np.array([[2]], dtype=object))


def test_json_round_trip():
    m = square_matrix()
    back = BasisMatrix.from_json(json.loads(json.dumps(m.to_json())))
    assert back.orbits == m.orbits and back.entries.tolist() == m.entries.tolist()


def test_standard_round_trip():
    m = square_matrix()
    v = KVector("irreducible", m.orbits, (3, -1, 2))
    s = kgroup.to_standard(v, m)
    assert kgroup.from_standard(s, m) == v
    # M(pi_j) = m^{-1} times column j
    assert kgroup.to_standard(KVector.unit("irreducible", m.orbits, m.orbits[1]), m).values == (-1, 1, 0)


def test_basis_mismatch_raises():
    m = square_matrix()
    v = KVector("standard", m.orbits, (1, 0, 0))
    with pytest.raises(KGroupError):
        kgroup.to_standard(v, m)
    with pytest.raises(KGroupError):
        KVector("weird", m.orbits, (0, 0, 0))
    with pytest.raises(KGroupError):
        KVector.from_dict("irreducible", m.orbits, {parse_parameter("S_9"): 1})


def test_orbit_dims_and_signs():
    m = square_matrix()
    assert kgroup.orbit_dims_for(m) == [4, 3, 0]
    assert kgroup.sign_diagonal([4, 3, 0]) == [1, -1, 1]


@pytest.mark.parametrize("seed", range(50))
def test_kl_translation_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    orbs = tuple(parse_parameter(f"nu^{{{k}}}") for k in range(n))
    m = BasisMatrix(orbs, random_unitriangular(rng, n))
    dims = [rng.randint(0, 9) for _ in range(n)]
    eta = KVector("irreducible", orbs, tuple(rng.randint(-4, 4) for _ in range(n)))
    F = KVector("IC", orbs, tuple(rng.randint(-4, 4) for _ in range(n)))
    assert kgroup.kl_translate_check(eta, F, m, dims)
    assert kgroup.from_natural(kgroup.to_natural(F, m, dims), m, dims) == F
    assert kgroup.pairing_on_standards_check(m, dims)


@pytest.mark.parametrize("lam", ["{1/2,-1/2}", "{3/2,1/2,-1/2,-3/2}", "{1/2,1/2,-1/2,-1/2}", "{rho@1/2,rho@-1/2,0}"])
def test_pairing_on_standards_for_chains(lam):
    m = kgroup.basis_matrix_for_lambda(parse_lambda(lam))
    assert kgroup.pairing_on_standards_check(m, kgroup.orbit_dims_for(m))


def test_kron_is_unitriangular_and_ordered():
    a = kgroup.basis_matrix_for_chain(chain((1, 1)))
    b = kgroup.basis_matrix_for_chain(chain((1, 1, 1)))
    k = kgroup.kron(a, b)
    assert k.size == 8
    assert linalg.is_upper_unitriangular(k.entries)
    assert k.orbits[0] == (a.orbits[0], b.orbits[0])


def test_lambda_with_two_chains():
    m = kgroup.basis_matrix_for_lambda(parse_lambda("{1/2,-1/2,rho@0}"))
    assert m.size == 2
    assert all(isinstance(o, Multisegment) for o in m.orbits)


def test_lift_is_union():
    a = kgroup.basis_matrix_for_chain(chain((1, 1)))
    b = kgroup.basis_matrix_for_chain(chain((1,), top=5))
    k = kgroup.kron(a, b)
    target = kgroup.basis_matrix_for_lambda(parse_lambda("{1/2,-1/2,5}"))
    v = KVector("standard", k.orbits, (2, -1))
    out = kgroup.lift_concatenate(v, target.orbits)
    assert out.as_dict() == {a.orbits[0] + b.orbits[0]: 2, a.orbits[1] + b.orbits[0]: -1}


def test_lift_associative_and_empty_side():
    a = kgroup.basis_matrix_for_chain(chain((1, 1)))
    b = kgroup.basis_matrix_for_chain(chain((1,), top=5))
    c = kgroup.basis_matrix_for_chain(chain((1,), top=9))
    left = kgroup.kron(kgroup.kron(a, b), c)
    right = kgroup.kron(a, kgroup.kron(b, c))
    assert [kgroup.flatten_key(k) for k in left.orbits] == [kgroup.flatten_key(k) for k in right.orbits]
    e = kgroup.basis_matrix_for_lambda(parse_lambda("{}"))
    ae = kgroup.kron(a, e)
    assert [kgroup.flatten_key(k) for k in ae.orbits] == list(a.orbits)
    assert ae.entries.tolist() == a.entries.tolist()


def test_lift_rejects_foreign_orbit():
    a = kgroup.basis_matrix_for_chain(chain((1, 1)))
    v = KVector("standard", a.orbits, (1, 0))
    with pytest.raises(KGroupError):
        kgroup.lift_concatenate(v, (HALF_PAIR,))


def test_fixed_point_half_pair():
    rep = fixed_point_report(HALF_PAIR, 2)
    assert rep["ok"] is True


def test_fixed_point_by_hand_half_pair():
    phi_v, phi_a = HALF_PAIR, phi_alpha_part(2)
    m_v, eta_v = kgroup.eta_for_side(None, phi_v)
    m_a, eta_a = kgroup.eta_for_side(None, phi_a)
    total = theta_lift_param(HALF_PAIR, 2)
    m_t, eta_t = kgroup.eta_for_side(None, total)
    side = kgroup.kron(m_v, m_a)
    prod = KVector.unit("irreducible", side.orbits, (phi_v, phi_a))
    lhs = kgroup.lift_concatenate(kgroup.to_standard(prod, side), m_t.orbits)
    assert lhs.values == (1, -2, 1)
    assert kgroup.fixed_point_check(prod, eta_t, side, m_t)


def test_fixed_point_detects_corrupted_eta():
    phi_v, phi_a = HALF_PAIR, phi_alpha_part(2)
    m_v, _ = kgroup.eta_for_side(None, phi_v)
    m_a, _ = kgroup.eta_for_side(None, phi_a)
    m_t = square_matrix()
    side = kgroup.kron(m_v, m_a)
    prod = KVector.unit("irreducible", side.orbits, (phi_v, phi_a))
    bad = KVector("irreducible", m_t.orbits, (0, 0, 2))
    chk = kgroup.fixed_point_check(prod, bad, side, m_t)
    assert not chk and "orbit" in chk.detail


def test_fixed_point_fails_for_wide_pair():
    rep = fixed_point_report(parse_parameter("nu^{3/2}+nu^{-3/2}"), 2)
    assert rep["ok"] is False
    assert rep["orbit"] == "S_4"


def test_fixed_point_skipped_without_data():
    rep = fixed_point_report(parse_parameter("nu^{1} + S_1"), 1)
    assert rep["ok"] is None


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 1), (1, 1, 1), (1, 1, 1, 1), (1, 1, 1, 1, 1)]))
def test_unit_eta_at_open_orbit_is_standard(dims):
    # the open orbit's irreducible is its own standard module
    m = kgroup.basis_matrix_for_chain(chain(dims))
    v = KVector.unit("irreducible", m.orbits, m.orbits[0])
    assert kgroup.to_standard(v, m).as_dict() == {m.orbits[0]: 1}


def test_natural_basis_dims_agree_with_geometry():
    V = chain((1, 1, 1))
    m = kgroup.basis_matrix_for_chain(V)
    assert kgroup.orbit_dims_for(m) == [orbit_dim(V, t) for t in orbits(V)]


def test_infinitesimal_of_lambda_matrix_orbits():
    lam = parse_lambda("{1/2,1/2,-1/2,-1/2}")
    assert all(infinitesimal(o) == lam for o in square_matrix().orbits)
