"""End-to-end certificates for a theta lift (phi, alpha).

For every chain of lambda_{phi_alpha}: build x = eps(x_v, 0) with x_v the
canonical point of phi^vee, and y = eps*(y_v, y_a) with y_v a generic
conormal covector over x_v and y_a the full-rank chain on the alpha slots.
Then run the regular-pair certificate, the s-triviality check and the
orbit decomposition of C_{phi_alpha} cap V^x. Where multiplicity matrices and eta
seeds are available on both sides, also check the fixed point formula in
standard coordinates.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import geometry as geo
from . import kgroup
from .duality import dual
from .params import (
    Multisegment,
    adams_threshold_ok,
    contragredient,
    format_parameter,
    infinitesimal,
    phi_alpha_part,
    theta_lift_param,
)


def generic_covector(V: geo.ChainVariety, x, seed: int = 0, height: int = geo.DEFAULT_HEIGHT,
                     max_samples: int = 15):
    """A covector in the conormal fiber over x lying in the generic (dense) dual orbit.

    Same stabilisation rule as the dual-orbit oracle: accept once the last
    three samples agree and dominate everything drawn before.
    """
    rng = random.Random(seed)
    basis = geo.conormal_fiber(V, x)
    shapes = geo._point_shapes(V.dims, dual_point=True)
    if not basis:
        return geo.zero_point(V, dual_point=True)
    seen = []
    for _ in range(max_samples):
        y = geo.random_combination(rng, basis, shapes, height)
        seen.append((geo.orbit_of_dual_point(V, y), y))
        if len(seen) >= 3:
            t = seen[-1][0]
            if all(s[0] == t for s in seen[-3:]) and all(geo.closure_leq(s[0], t) for s in seen):
                return y
    raise geo.UnstableSample(f"no stable generic covector after {max_samples} samples on {V}")


@dataclass
class ChainReport:
    chain: str
    split: tuple
    certificate: geo.Certificate
    central: geo.Verdict
    lemma1: geo.Lemma1Report

    @property
    def ok(self) -> bool:
        return bool(self.certificate) and bool(self.central) and bool(self.lemma1)

    def to_json(self) -> dict:
        return {
            "chain": self.chain,
            "alpha_slots": list(self.split),
            "regular_pair": {"ok": self.certificate.ok, "clauses": self.certificate.clauses,
                             "detail": self.certificate.detail},
            "s_trivial": {"ok": self.central.ok, "reason": self.central.reason},
            "conormal_decomposition": {
                "ok": self.lemma1.ok, "checks": self.lemma1.checks,
                "components": [[str(a), str(b)] for a, b in self.lemma1.components],
                "witness": self.lemma1.witness},
        }


@dataclass
class ThetaReport:
    phi: Multisegment
    alpha: int
    seed: int
    threshold: bool
    chains: list = field(default_factory=list)
    fixed_point: dict | None = None

    @property
    def ok(self) -> bool:
        fp = self.fixed_point is None or self.fixed_point.get("ok", True) is not False
        return all(c.ok for c in self.chains) and fp

    def to_json(self) -> dict:
        return {"phi": format_parameter(self.phi), "alpha": self.alpha, "seed": self.seed,
                "threshold": self.threshold, "ok": self.ok,
                "chains": [c.to_json() for c in self.chains], "fixed_point": self.fixed_point}


def certify_chain(V: geo.ChainVariety, phi_v: Multisegment, phi_a: Multisegment, seed: int = 0,
                  height: int = geo.DEFAULT_HEIGHT, samples: int = 3) -> ChainReport:
    split = geo.split_for(V, phi_a)
    vch, ach = split.v_chain, split.a_chain
    pv = geo.restrict(phi_v, V)
    pa = geo.restrict(phi_a, V)
    xv = geo.canonical_representative(vch, pv)
    yv = generic_covector(vch, xv, seed, height)
    xa = geo.zero_point(ach)
    ya = geo.canonical_dual_representative(ach, dual(pa))
    x = geo.embed_split(split, xv, xa)
    y = geo.embed_split_dual(split, yv, ya)
    expected = pv + pa
    cert = geo.regular_certificate(V, split, x, y, expected)
    central = geo.s_central_triviality(V, split, x, y)
    lem = geo.verify_lemma1(V, split, expected, samples=samples, seed=seed, height=height)
    return ChainReport(str(V), split.alpha_slots, cert, central, lem)


def certify_theta(phi: Multisegment, alpha: int, seed: int = 0, height: int = geo.DEFAULT_HEIGHT,
                  samples: int = 3, fixed_point: bool = True) -> ThetaReport:
    phi_v = contragredient(phi)
    phi_a = phi_alpha_part(alpha)
    total = theta_lift_param(phi, alpha)
    rep = ThetaReport(phi, alpha, seed, adams_threshold_ok(phi, alpha) if alpha >= 1 else True)
    for k, V in enumerate(geo.varieties_of(infinitesimal(total))):
        rep.chains.append(certify_chain(V, phi_v, phi_a, seed + k, height, samples))
    if fixed_point:
        rep.fixed_point = fixed_point_report(phi, alpha)
    return rep


def _seed_eta(phi: Multisegment):
    """Unit eta at C_phi when phi is seeded by an unconditional rule, else None."""
    from .knowledge import KnowledgeBase
    kb = KnowledgeBase()
    if not kb.seed(phi):
        return None
    return kb.eta(phi).coefficients


def fixed_point_report(phi: Multisegment, alpha: int) -> dict:
    """Lift(M(eta_{phi^x})) = M(eta_{phi_alpha}), when every ingredient is known independently."""
    phi_v, phi_a = contragredient(phi), phi_alpha_part(alpha)
    total = theta_lift_param(phi, alpha)
    eta_v, eta_a, eta_t = _seed_eta(phi_v), _seed_eta(phi_a), _seed_eta(total)
    if eta_v is None or eta_a is None or eta_t is None:
        return {"ok": None, "reason": "eta not seeded independently on every side"}
    try:
        m_v = kgroup.basis_matrix_for_lambda(infinitesimal(phi_v))
        m_a = kgroup.basis_matrix_for_lambda(infinitesimal(phi_a))
        m_t = kgroup.basis_matrix_for_lambda(infinitesimal(total))
    except kgroup.KGroupError as e:
        return {"ok": None, "reason": str(e)}
    m_side = kgroup.kron(m_v, m_a)
    prod = {(a, b): ca * cb for a, ca in eta_v.items() for b, cb in eta_a.items()}
    v_side = kgroup.KVector.from_dict("irreducible", m_side.orbits, prod)
    v_total = kgroup.KVector.from_dict("irreducible", m_t.orbits, eta_t)
    chk = kgroup.fixed_point_check(v_side, v_total, m_side, m_t)
    return {"ok": chk.ok, **chk.detail}
