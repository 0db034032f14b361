"""Grothendieck-group bookkeeping: bases, the KL transpose relation, the pairing.

Orbits are indexed in a fixed order refining the closure order, open orbit
first. m[i][j] is the multiplicity of the irreducible pi_i in the standard
module M(pi_j), so m is upper unitriangular in that order. The KL relation
c = m^T turns IC coordinates into the natural basis F^nat = c D f with
D = diag((-1)^d(C)).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .geometry import (
    ChainVariety,
    closure_leq,
    orbits,
    varieties_of,
)
from .params import InfinitesimalParameter, Multisegment, from_json, infinitesimal, to_json

BASES = ("irreducible", "standard", "IC", "natural")


class KGroupError(ValueError):
    pass


@dataclass(frozen=True)
class BasisMatrix:
    orbits: tuple  # orbit keys (Multisegments, or tuples of them on product varieties)
    entries: np.ndarray

    def __post_init__(self):
        n = len(self.orbits)
        e = linalg.as_matrix(self.entries) if n else linalg.zeros(0, 0)
        if e.shape != (n, n):
            raise KGroupError(f"matrix shape {e.shape} does not match {n} orbits")
        if not linalg.is_upper_unitriangular(e):
            raise KGroupError("basis matrix is not upper unitriangular")
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return len(self.orbits)

    def inverse(self) -> np.ndarray:
        return linalg.unitriangular_inverse(self.entries)

    def transpose(self) -> np.ndarray:
        return self.entries.T.copy()

    def index(self, orbit) -> int:
        try:
            return self.orbits.index(orbit)
        except ValueError:
            raise KGroupError(f"orbit {orbit} is not indexed by this matrix") from None

    def to_json(self) -> dict:
        return {"orbits": [to_json(o) for o in self.orbits],
                "rows": [[int(v) for v in row] for row in self.entries.tolist()]}

    @classmethod
    def from_json(cls, data: dict) -> "BasisMatrix":
        orbs = tuple(from_json(o) for o in data["orbits"])
        return cls(orbs, np.array(data["rows"], dtype=object).reshape(len(orbs), len(orbs)))


@dataclass(frozen=True)
class KVector:
    basis: str
    orbits: tuple
    values: tuple

    def __post_init__(self):
        if self.basis not in BASES:
            raise KGroupError(f"unknown basis {self.basis!r}")
        if len(self.orbits) != len(self.values):
            raise KGroupError("orbit list and coefficient list differ in length")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    @classmethod
    def unit(cls, basis: str, orbits: Sequence, at) -> "KVector":
        orbits = tuple(orbits)
        if at not in orbits:
            raise KGroupError(f"{at} is not among the orbits")
        return cls(basis, orbits, tuple(1 if o == at else 0 for o in orbits))

    @classmethod
    def from_dict(cls, basis: str, orbits: Sequence, coeffs: dict) -> "KVector":
        orbits = tuple(orbits)
        extra = set(coeffs) - set(orbits)
        if extra:
            raise KGroupError(f"coefficients on unknown orbits: {sorted(map(str, extra))}")
        return cls(basis, orbits, tuple(coeffs.get(o, 0) for o in orbits))

    def as_dict(self) -> dict:
        return {o: v for o, v in zip(self.orbits, self.values) if v}

    def column(self) -> np.ndarray:
        return np.array(self.values, dtype=object).reshape(-1, 1)


def _check(v: KVector, basis: str, m: BasisMatrix):
    if v.basis != basis:
        raise KGroupError(f"expected a vector in the {basis} basis, got {v.basis}")
    if tuple(v.orbits) != tuple(m.orbits):
        raise KGroupError("vector and basis matrix are indexed by different orbits")


def _vec(col: np.ndarray) -> tuple:
    return tuple(int(x) for x in col.ravel())


def to_standard(v: KVector, m: BasisMatrix) -> KVector:
    """M(v) = m^{-1} v: irreducible coordinates to standard-module coordinates."""
    _check(v, "irreducible", m)
    return KVector("standard", m.orbits, _vec(linalg.matmul(m.inverse(), v.column())))


def from_standard(v: KVector, m: BasisMatrix) -> KVector:
    _check(v, "standard", m)
    return KVector("irreducible", m.orbits, _vec(linalg.matmul(m.entries, v.column())))


def sign_diagonal(dims: Sequence[int]) -> list[int]:
    return [-1 if d % 2 else 1 for d in dims]


def to_natural(f: KVector, m: BasisMatrix, dims: Sequence[int]) -> KVector:
    """F^nat = c D f with c = m^T."""
    _check(f, "IC", m)
    D = sign_diagonal(dims)
    df = np.array([s * x for s, x in zip(D, f.values)], dtype=object).reshape(-1, 1)
    return KVector("natural", m.orbits, _vec(linalg.matmul(m.transpose(), df)))


def from_natural(F: KVector, m: BasisMatrix, dims: Sequence[int]) -> KVector:
    _check(F, "natural", m)
    D = sign_diagonal(dims)
    cinv = m.inverse().T  # (m^T)^{-1}
    g = _vec(linalg.matmul(cinv, F.column()))
    return KVector("IC", m.orbits, tuple(s * x for s, x in zip(D, g)))


def pairing(v: KVector, F: KVector, dims: Sequence[int]) -> int:
    """sum over C of (-1)^d(C) v[C] F[C], irreducible against IC coordinates."""
    if v.basis != "irreducible" or F.basis != "IC":
        raise KGroupError("pairing takes an irreducible-basis vector and an IC-basis vector")
    if tuple(v.orbits) != tuple(F.orbits) or len(dims) != len(v.orbits):
        raise KGroupError("index mismatch in pairing")
    return sum(s * a * b for s, a, b in zip(sign_diagonal(dims), v.values, F.values))


def pairing_standard(Mv: KVector, Fn: KVector) -> int:
    if Mv.basis != "standard" or Fn.basis != "natural" or tuple(Mv.orbits) != tuple(Fn.orbits):
        raise KGroupError("standard pairing takes standard against natural coordinates")
    return sum(a * b for a, b in zip(Mv.values, Fn.values))


class Check(NamedTuple):
    ok: bool
    detail: dict

    def __bool__(self):
        return self.ok


def kl_translate_check(eta: KVector, F: KVector, m: BasisMatrix, dims: Sequence[int]) -> Check:
    """<eta, F> computed directly equals <M(eta), F^nat> with c = m^T."""
    lhs = pairing(eta, F, dims)
    rhs = pairing_standard(to_standard(eta, m), to_natural(F, m, dims))
    return Check(lhs == rhs, {"direct": lhs, "standard": rhs})


def pairing_on_standards_check(m: BasisMatrix, dims: Sequence[int]) -> Check:
    """<M(pi_j), 1^nat_{C_k}> = delta_jk for all j, k.

    M(pi_j) in irreducible coordinates is column j of m; 1^nat_{C_k} in IC
    coordinates is D c^{-1} e_k.
    """
    n = m.size
    D = sign_diagonal(dims)
    cinv = linalg.unitriangular_inverse(m.entries).T
    for j in range(n):
        v = KVector("irreducible", m.orbits, _vec(m.entries[:, j]))
        for k in range(n):
            f = KVector("IC", m.orbits, tuple(D[a] * cinv[a, k] for a in range(n)))
            got = pairing(v, f, dims)
            if got != (1 if j == k else 0):
                return Check(False, {"j": j, "k": k, "pairing": got})
    return Check(True, {})


# --- m for chains ----------------------------------------------------------------

def chain_orbits(V: ChainVariety) -> list[Multisegment]:
    return [t.to_multisegment() for t in orbits(V)]


def builtin_m_for_multiplicity_free(V: ChainVariety) -> BasisMatrix:
    """All dims 1: closures are coordinate subspaces and m[i][j] = 1 iff C_i >= C_j."""
    if any(d != 1 for d in V.dims):
        raise KGroupError(f"{V} is not multiplicity free")
    tris = orbits(V)
    n = len(tris)
    e = linalg.zeros(n, n)
    for i, a in enumerate(tris):
        for j, b in enumerate(tris):
            if closure_leq(b, a):
                e[i, j] = 1
    return BasisMatrix(tuple(t.to_multisegment() for t in tris), e)


def _shift_key(V: ChainVariety) -> str:
    return "-".join(map(str, V.dims))


def _data_files():
    return resources.files("thetagl").joinpath("data")


def load_basis_matrix(path) -> BasisMatrix:
    with open(path) as fh:
        return BasisMatrix.from_json(json.load(fh))


def _shift(m: Multisegment, d2: int, label=None) -> Multisegment:
    from .params import Segment
    return Multisegment(Segment(label or s.label, s.center2 + d2, s.length) for s in m)


def basis_matrix_for_chain(V: ChainVariety, search: Sequence[Path] = ()) -> BasisMatrix:
    """Built-in for multiplicity-free chains, otherwise ingested from a JSON file.

    Files are named m_chain_<dims>.json and stored for the chain centred at 0
    with trivial label; the orbits are translated onto V.
    """
    if all(d == 1 for d in V.dims):
        return builtin_m_for_multiplicity_free(V)
    name = f"m_chain_{_shift_key(V).replace('-', '_')}.json"
    candidates = [Path(p) / name for p in search] + [_data_files().joinpath(name)]
    for c in candidates:
        if c.is_file():
            with c.open() as fh:
                data = json.load(fh)
            stored = BasisMatrix.from_json(data)
            d2 = V.top2 - (V.r - 1)
            orbs = tuple(_shift(o, d2, V.label) for o in stored.orbits)
            want = set(chain_orbits(V))
            if set(orbs) != want:
                raise KGroupError(f"stored matrix {name} does not index the orbits of {V}")
            return BasisMatrix(orbs, stored.entries)
    raise KGroupError(f"no multiplicity matrix available for dims {V.dims}; supply {name}")


def kron(a: BasisMatrix, b: BasisMatrix) -> BasisMatrix:
    """Matrix on the product variety; orbit keys are pairs, ordered lexicographically."""
    orbs = tuple((x, y) for x in a.orbits for y in b.orbits)
    e = np.kron(a.entries, b.entries).astype(object) if a.size and b.size else linalg.zeros(0, 0)
    return BasisMatrix(orbs, e)


def flatten_key(key) -> Multisegment:
    if isinstance(key, Multisegment):
        return key
    out = Multisegment()
    for part in key:
        out = out + flatten_key(part)
    return out


def basis_matrix_for_lambda(lam: InfinitesimalParameter, search: Sequence[Path] = ()) -> BasisMatrix:
    """Kronecker product over the chains of lambda; orbit keys are unions."""
    chains = varieties_of(lam)
    if not chains:
        return BasisMatrix((Multisegment(),), linalg.identity(1))
    acc = basis_matrix_for_chain(chains[0], search)
    for V in chains[1:]:
        acc = kron(acc, basis_matrix_for_chain(V, search))
    return BasisMatrix(tuple(flatten_key(k) for k in acc.orbits), acc.entries)


def orbit_dims_for(m: BasisMatrix) -> list[int]:
    from .geometry import param_orbit_dim
    return [param_orbit_dim(flatten_key(o)) for o in m.orbits]


# --- lift and the fixed point check ------------------------------------------

def lift_concatenate(v: KVector, target_orbits: Sequence) -> KVector:
    """Standard coordinates on a product variety to standard coordinates on the join."""
    if v.basis != "standard":
        raise KGroupError("lift acts on standard coordinates")
    target = tuple(target_orbits)
    index = {o: k for k, o in enumerate(target)}
    out = [0] * len(target)
    for key, c in zip(v.orbits, v.values):
        if not c:
            continue
        joined = flatten_key(key)
        if joined not in index:
            raise KGroupError(f"lifted orbit {joined} is not among the target orbits")
        out[index[joined]] += c
    return KVector("standard", target, tuple(out))


def fixed_point_check(eta_prod: KVector, eta_total: KVector, m_side: BasisMatrix,
                      m_total: BasisMatrix) -> Check:
    """Lift(M(eta_prod)) = M(eta_total) in standard coordinates."""
    lhs = lift_concatenate(to_standard(eta_prod, m_side), m_total.orbits)
    rhs = to_standard(eta_total, m_total)
    if lhs.values == rhs.values:
        return Check(True, {})
    for o, a, b in zip(m_total.orbits, lhs.values, rhs.values):
        if a != b:
            return Check(False, {"orbit": str(flatten_key(o)), "lift": a, "total": b})
    return Check(False, {})


def eta_for_side(V_or_lambda, phi: Multisegment, search: Sequence[Path] = ()) -> tuple[BasisMatrix, KVector]:
    """Basis matrix on lambda_phi and the unit eta at C_phi (an L-packet-sized packet)."""
    m = basis_matrix_for_lambda(infinitesimal(phi), search)
    return m, KVector.unit("irreducible", m.orbits, phi)
