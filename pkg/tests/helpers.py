"""Hypothesis strategies and independent oracles shared by the tests."""
import itertools
import random
from fractions import Fraction

import sympy
from hypothesis import strategies as st

from thetagl.geometry import varieties_of
from thetagl.params import (
    ONE,
    CuspidalLabel,
    Multisegment,
    Segment,
    adams_threshold_ok,
    infinitesimal,
    theta_lift_param,
)

RHO = CuspidalLabel("rho", "rhov")


@st.composite
def segments(draw, labels=(ONE,), span=4, max_len=4):
    label = draw(st.sampled_from(labels))
    length = draw(st.integers(1, max_len))
    begin2 = draw(st.integers(-span, span))
    return Segment.from_ends(begin2, begin2 + 2 * (length - 1), label)


def multisegments(labels=(ONE,), max_size=5, span=4, max_len=4):
    return st.lists(segments(labels, span, max_len), max_size=max_size).map(Multisegment)


def sympy_rank(m) -> int:
    return sympy.Matrix(m.tolist() if hasattr(m, "tolist") else m).rank()


def hom_dim(s, t) -> int:
    """dim Hom(M[s], M[t]) for interval modules of the equioriented type-A quiver.

    Arrows go from higher to lower exponents. The space is one-dimensional
    exactly when begin(t) <= begin(s) <= end(t) <= end(s).
    """
    if s.label != t.label or (s.begin2 - t.begin2) % 2:
        return 0
    return 1 if t.begin2 <= s.begin2 <= t.end2 <= s.end2 else 0


def orbit_dim_by_homs(V, m: Multisegment) -> int:
    """dim H minus dim End(M): the stabiliser of a point is the unit group of End(M)."""
    ends = sum(hom_dim(s, t) for s in m for t in m)
    return V.dim_H - ends


def brute_force_arthur(phi: Multisegment) -> bool:
    """Try every grouping of segments into symmetric rectangles (x = 0)."""
    segs = sorted(phi, key=lambda s: (s.label, s.length, s.center2))

    def solve(rest):
        if not rest:
            return True
        s = rest[0]
        for b in range(1, len(rest) + 1):
            rows = [Segment(s.label, b - 1 - 2 * k, s.length) for k in range(b)]
            pool = list(rest)
            ok = True
            for r in rows:
                if r in pool:
                    pool.remove(r)
                else:
                    ok = False
                    break
            if ok and s in rows and solve(pool):
                return True
        return False

    return solve(segs)


def random_parameter(rng: random.Random, max_segments=3, max_len=3, span=3) -> Multisegment:
    segs = []
    for _ in range(rng.randint(1, max_segments)):
        length = rng.randint(1, max_len)
        c2 = rng.randint(-span, span)
        if (c2 + length - 1) % 2:
            c2 += 1 if c2 < span else -1
        segs.append(Segment(ONE, c2, length))
    return Multisegment(segs)


def threshold_corpus(n=100, seed=0, max_alpha=6, max_dim_v=20):
    """Distinct threshold-satisfying (phi, alpha) with dim V_{lambda_{phi_alpha}} bounded."""
    rng = random.Random(seed)
    out, seen = [], set()
    while len(out) < n:
        phi = random_parameter(rng)
        a = rng.randint(1, max_alpha)
        if (phi, a) in seen or not adams_threshold_ok(phi, a):
            continue
        lam = infinitesimal(theta_lift_param(phi, a))
        if sum(V.dim_V for V in varieties_of(lam)) > max_dim_v:
            continue
        seen.add((phi, a))
        out.append((phi, a))
    return out


def chains_upto(limit: int):
    """All dims tuples (r >= 2, entries >= 1) with dim V = sum m_i m_{i+1} <= limit."""
    out = []

    def grow(dims, dv):
        if len(dims) >= 2:
            out.append(tuple(dims))
        for m in itertools.count(1):
            add = dims[-1] * m
            if dv + add > limit:
                break
            grow(dims + [m], dv + add)

    for m0 in range(1, limit + 1):
        grow([m0], 0)
    return out


def random_unitriangular(rng: random.Random, n: int, lo=-3, hi=3):
    import numpy as np
    m = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            m[i, j] = 1 if i == j else (rng.randint(lo, hi) if j > i else 0)
    return m


def half(x2):
    return Fraction(x2, 2)
