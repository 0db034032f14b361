"""Vogan varieties of GL_n as type-A chains of linear maps, over exact rationals.

A chain has eigenspaces E_1..E_r for exponents e_1 > ... > e_r (consecutive),
dims m_i. A point x has maps x_i: E_i -> E_{i+1} (shape m_{i+1} x m_i); a dual
point y has y_i: E_{i+1} -> E_i (shape m_i x m_{i+1}). Indices are 0-based in
code. A segment covering e_i..e_j (i <= j, so e_i is its top) is recorded in
N[i][j]; R[i][j] = rank(x_{j-1}...x_i) counts segments covering both e_i and e_j.
"""
from __future__ import annotations

import math
import random
from operator import mul
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import networkx as nx
import numpy as np

from . import linalg
from .duality import dual
from .params import (
    CuspidalLabel,
    InfinitesimalParameter,
    Multisegment,
    Segment,
    format_exponent,
    format_parameter,
    infinitesimal,
)

DEFAULT_HEIGHT = 7
DEFAULT_HASSE_BOUND = 10**5


class GeometryError(ValueError):
    pass


class UnstableSample(GeometryError):
    pass


class BoundExceeded(GeometryError):
    pass


@dataclass(frozen=True, order=True)
class ChainVariety:
    label: CuspidalLabel
    top2: int
    dims: tuple

    @property
    def r(self) -> int:
        return len(self.dims)

    def exponent2(self, i: int) -> int:
        return self.top2 - 2 * i

    def index_of(self, x2: int) -> int | None:
        d = self.top2 - x2
        if d < 0 or d % 2 or d // 2 >= self.r:
            return None
        return d // 2

    @property
    def dim_V(self) -> int:
        return sum(a * b for a, b in zip(self.dims, self.dims[1:]))

    @property
    def dim_H(self) -> int:
        return sum(a * a for a in self.dims)

    def holds(self, s: Segment) -> bool:
        return (s.label == self.label and self.index_of(s.end2) is not None
                and self.index_of(s.begin2) is not None)

    def __str__(self):
        exps = ",".join(format_exponent(self.exponent2(i)) for i in range(self.r))
        lab = "" if self.label.is_trivial else f"{self.label} "
        return f"{lab}chain[{exps}] dims {self.dims}"


def chain(dims: Sequence[int], top=None, label=None) -> ChainVariety:
    """Chain with given dims; by default centred so that exponents are symmetric about 0."""
    from .params import as_label, to_double
    top2 = len(dims) - 1 if top is None else to_double(top)
    return ChainVariety(as_label(label), top2, tuple(int(d) for d in dims))


def varieties_of(lam: InfinitesimalParameter) -> list[ChainVariety]:
    """One chain per maximal run of consecutive exponents on each (label, coset) line."""
    counts: dict = {}
    for lab, x2 in lam.support:
        counts[(lab, x2)] = counts.get((lab, x2), 0) + 1
    out = []
    for lab, parity in sorted({(lab, x2 % 2) for lab, x2 in counts}):
        xs = sorted((x2 for (l2, x2) in counts if l2 == lab and x2 % 2 == parity), reverse=True)
        run: list[int] = []
        for x2 in xs + [None]:
            if run and (x2 is None or run[-1] - x2 != 2):
                out.append(ChainVariety(lab, run[0], tuple(counts[(lab, e)] for e in run)))
                run = []
            if x2 is not None:
                run.append(x2)
    return out


def restrict(m: Multisegment, V: ChainVariety) -> Multisegment:
    return Multisegment(s for s in m if V.holds(s))


# --- rank triangles -----------------------------------------------------------

@dataclass(frozen=True)
class RankTriangle:
    chain: ChainVariety
    R: tuple  # r x r, zero below the diagonal

    def __getitem__(self, ij):
        i, j = ij
        if i < 0 or j >= self.chain.r or i > j:
            return 0
        return self.R[i][j]

    def multiplicities(self) -> dict:
        r = self.chain.r
        # pad with a zero row on top and a zero column on the right
        P = [[0] * (r + 1)] + [list(row) + [0] for row in self.R]
        out = {}
        for i in range(r):
            up, cur = P[i], P[i + 1]
            for j in range(i, r):
                n = cur[j] - up[j] - cur[j + 1] + up[j + 1]
                if n:
                    out[(i, j)] = n
        return out

    def is_realizable(self) -> bool:
        return all(n > 0 for n in self.multiplicities().values()) and all(
            self.R[i][i] == self.chain.dims[i] for i in range(self.chain.r))

    def to_multisegment(self) -> Multisegment:
        V = self.chain
        segs = []
        for (i, j), n in self.multiplicities().items():
            if n < 0:
                raise GeometryError(f"rank triangle is not realizable at ({i},{j})")
            segs += [Segment.from_ends(V.exponent2(j), V.exponent2(i), V.label)] * n
        return Multisegment(segs)

    @classmethod
    def from_multisegment(cls, V: ChainVariety, m: Multisegment) -> "RankTriangle":
        r = V.r
        N = [[0] * r for _ in range(r)]
        top, label = V.top2, V.label
        for s in m:
            i, j = top - s.end2, top - s.begin2
            if s.label != label or i < 0 or i % 2 or j >= 2 * r:
                raise GeometryError(f"segment {s} does not lie on {V}")
            N[i // 2][j // 2] += 1
        # R[i][j] = sum of N[a][b] over a <= i, b >= j
        R = [[0] * (r + 1) for _ in range(r)]
        for i in range(r):
            for j in range(r - 1, i - 1, -1):
                R[i][j] = N[i][j] + R[i][j + 1] + (R[i - 1][j] - R[i - 1][j + 1] if i else 0)
        R = [row[:r] for row in R]
        for i in range(r):
            for j in range(i):
                R[i][j] = 0
        tri = cls(V, tuple(map(tuple, R)))
        if any(R[i][i] != V.dims[i] for i in range(r)):
            raise GeometryError(f"multisegment {m} does not fill dims {V.dims}")
        return tri

    def total(self) -> int:
        return sum(map(sum, self.R))

    def to_json(self) -> dict:
        return {"dims": list(self.chain.dims), "top": f"{self.chain.top2}/2",
                "label": self.chain.label.name, "R": [list(r) for r in self.R]}


def open_triangle(V: ChainVariety) -> RankTriangle:
    r = V.r
    R = [[min(V.dims[i:j + 1]) if j >= i else 0 for j in range(r)] for i in range(r)]
    return RankTriangle(V, tuple(map(tuple, R)))


def zero_triangle(V: ChainVariety) -> RankTriangle:
    r = V.r
    R = [[V.dims[i] if i == j else 0 for j in range(r)] for i in range(r)]
    return RankTriangle(V, tuple(map(tuple, R)))


def closure_leq(a: RankTriangle, b: RankTriangle) -> bool:
    """True when a lies in the closure of b."""
    if a.chain != b.chain:
        raise GeometryError("rank triangles live on different chains")
    return all(x <= y for ra, rb in zip(a.R, b.R) for x, y in zip(ra, rb))


# --- points -----------------------------------------------------------------

def _check_point(V: ChainVariety, x, dual_point=False) -> tuple:
    if len(x) != max(V.r - 1, 0):
        raise GeometryError(f"expected {V.r - 1} maps, got {len(x)}")
    out = []
    for i, xi in enumerate(x):
        shape = (V.dims[i], V.dims[i + 1]) if dual_point else (V.dims[i + 1], V.dims[i])
        xi = linalg.as_matrix(xi, shape)
        if xi.shape != shape:
            raise GeometryError(f"map {i} has shape {xi.shape}, expected {shape}")
        out.append(xi)
    return tuple(out)


def zero_point(V: ChainVariety, dual_point=False) -> tuple:
    d = V.dims
    if dual_point:
        return tuple(linalg.zeros(d[i], d[i + 1]) for i in range(V.r - 1))
    return tuple(linalg.zeros(d[i + 1], d[i]) for i in range(V.r - 1))


def _lists(pt) -> list:
    return [m.tolist() if isinstance(m, np.ndarray) else m for m in pt]


def _mul(a: list, b: list, inner: int) -> list:
    """a (p x inner) times b (inner x q) on nested lists."""
    q = len(b[0]) if b else 0
    cols = list(zip(*b)) if b else []
    if not cols:
        return [[0] * q for _ in a]
    return [[sum(u * v for u, v in zip(row, col)) for col in cols] for row in a]


def _rank(m: list) -> int:
    if not m or not m[0]:
        return 0
    if all(type(v) is int for row in m for v in row):
        return linalg.rank_int([list(row) for row in m])
    return linalg.rank(m)


def _eye(n: int) -> list:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _ranks_down(V: ChainVariety, maps: list) -> RankTriangle:
    """R[i][j] = rank(maps[j-1] ... maps[i]) for maps going E_i -> E_{i+1}."""
    r, d = V.r, V.dims
    R = [[0] * r for _ in range(r)]
    for i in range(r):
        R[i][i] = d[i]
        P = _eye(d[i])
        for j in range(i + 1, r):
            P = _mul(maps[j - 1], P, d[j - 1])
            R[i][j] = _rank(P)
            if R[i][j] == 0:
                break
    return RankTriangle(V, tuple(map(tuple, R)))


def _ranks_up(V: ChainVariety, maps: list) -> RankTriangle:
    """R[i][j] = rank(maps[i] ... maps[j-1]) for maps going E_{i+1} -> E_i."""
    if all(type(v) is int for m in maps for row in m for v in row):
        return _ranks_up_int(V, maps)
    r, d = V.r, V.dims
    R = [[0] * r for _ in range(r)]
    for j in range(r):
        R[j][j] = d[j]
        P = _eye(d[j])
        for i in range(j - 1, -1, -1):
            P = _mul(maps[i], P, d[i + 1])
            R[i][j] = _rank(P)
            if R[i][j] == 0:
                break
    return RankTriangle(V, tuple(map(tuple, R)))


def _ranks_up_int(V: ChainVariety, maps: list) -> RankTriangle:
    # Only the image of the running composite matters, so after each step the
    # composite is cut down to a set of independent columns.
    r, d = V.r, V.dims
    R = [[0] * r for _ in range(r)]
    for j in range(r):
        R[j][j] = d[j]
        Rj = R
        cols = [tuple([1 if a == b else 0 for a in range(d[j])]) for b in range(d[j])]
        for i in range(j - 1, -1, -1):
            yi = maps[i]
            if d[i] == 1:
                row = yi[0]
                for col in cols:
                    v = sum(map(mul, row, col))
                    if v:
                        break
                else:
                    break
                cols = [(v,)]
                Rj[i][j] = 1
                continue
            new = [tuple([sum(map(mul, row, col)) for row in yi]) for col in cols]
            new = [c for c in new if any(c)]
            if not new:
                break
            if len(new) > 1:
                keep = linalg.independent_rows([list(c) for c in new])
                if len(keep) < len(new):
                    new = [new[k] for k in keep]
            cols = new
            Rj[i][j] = len(new)
    return RankTriangle(V, tuple(map(tuple, R)))


def orbit_of_point(V: ChainVariety, x) -> RankTriangle:
    return _ranks_down(V, _lists(_check_point(V, x)))


def orbit_of_dual_point(V: ChainVariety, y) -> RankTriangle:
    """Rank triangle of y, read on the same exponents (R[i][j] = rank y_i...y_{j-1})."""
    return _ranks_up(V, _lists(_check_point(V, y, dual_point=True)))


def _place_lists(V: ChainVariety, m: Multisegment, dual_point: bool) -> list:
    d = V.dims
    if dual_point:
        pt = [[[0] * d[i + 1] for _ in range(d[i])] for i in range(V.r - 1)]
    else:
        pt = [[[0] * d[i] for _ in range(d[i + 1])] for i in range(V.r - 1)]
    nxt = [0] * V.r
    spans = []
    top, r = V.top2, V.r
    for s in m:
        i, j = top - s.end2, top - s.begin2
        if s.label != V.label or i < 0 or i % 2 or j >= 2 * r:
            raise GeometryError(f"segment {s} does not lie on {V}")
        spans.append((i // 2, j // 2))
    # longest first, then by position; earliest free slot in every eigenspace
    spans.sort(key=lambda p: (p[0] - p[1], p))
    for i, j in spans:
        prev = None
        for k in range(i, j + 1):
            slot = nxt[k]
            if slot >= d[k]:
                raise GeometryError(f"multisegment {m} overflows dims {d}")
            nxt[k] = slot + 1
            if prev is not None:
                if dual_point:
                    pt[k - 1][prev][slot] = 1
                else:
                    pt[k - 1][slot][prev] = 1
            prev = slot
    return pt


def _place(V: ChainVariety, m: Multisegment, dual_point: bool) -> tuple:
    return tuple(_to_array(a, rows, cols) for a, (rows, cols) in
                 zip(_place_lists(V, m, dual_point), _point_shapes(V.dims, dual_point)))


def _to_array(rows_: list, nrows: int, ncols: int) -> np.ndarray:
    out = linalg.zeros(nrows, ncols)
    for p, row in enumerate(rows_):
        for q, v in enumerate(row):
            if v:
                out[p, q] = v
    return out


def canonical_representative(V: ChainVariety, m) -> tuple:
    if isinstance(m, RankTriangle):
        m = m.to_multisegment()
    return _place(V, m, dual_point=False)


def canonical_dual_representative(V: ChainVariety, m) -> tuple:
    if isinstance(m, RankTriangle):
        m = m.to_multisegment()
    return _place(V, m, dual_point=True)


# --- orbit enumeration --------------------------------------------------------

def iter_orbits(V: ChainVariety):
    """Yield every multisegment with support exactly the chain's multiplicities."""
    r = V.r
    cap = list(V.dims)
    acc: list = []
    segs = {(i, j): Segment.from_ends(V.exponent2(j), V.exponent2(i), V.label)
            for i in range(r) for j in range(i, r)}

    def at_vertex(i):
        if i == r:
            yield Multisegment(acc)
            return
        yield from choose(i, r - 1)

    def choose(i, j):
        if j == i:
            n = cap[i]
            seg = segs[(i, i)]
            acc.extend([seg] * n)
            cap[i] = 0
            yield from at_vertex(i + 1)
            cap[i] = n
            del acc[len(acc) - n:]
            return
        top = min(cap[i:j + 1])
        seg = segs[(i, j)]
        for n in range(top + 1):
            for k in range(i, j + 1):
                cap[k] -= n
            acc.extend([seg] * n)
            yield from choose(i, j - 1)
            del acc[len(acc) - n:]
            for k in range(i, j + 1):
                cap[k] += n

    yield from at_vertex(0)


def orbit_sort_key(t: RankTriangle):
    """Descending total rank, ties broken lexicographically: a linear extension of >=_C."""
    return (-t.total(), t.to_multisegment().key())


def orbits(V: ChainVariety, bound: int | None = None) -> list[RankTriangle]:
    out = []
    for m in iter_orbits(V):
        out.append(RankTriangle.from_multisegment(V, m))
        if bound is not None and len(out) > bound:
            raise BoundExceeded(f"{V} has more than {bound} orbits")
    out.sort(key=orbit_sort_key)
    return out


class HasseDiagram(NamedTuple):
    chain: ChainVariety
    nodes: list  # RankTriangles, open orbit first
    edges: list  # (i, j): node j is covered by node i

    def to_dot(self) -> str:
        lines = ["digraph hasse {", "  rankdir=TB;", "  node [shape=box, fontname=\"Helvetica\"];"]
        for k, t in enumerate(self.nodes):
            lines.append(f'  n{k} [label="{format_parameter(t.to_multisegment())}"];')
        for i, j in self.edges:
            lines.append(f"  n{i} -> n{j};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def hasse_diagram(V: ChainVariety, bound: int = DEFAULT_HASSE_BOUND) -> HasseDiagram:
    nodes = orbits(V, bound)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(nodes)))
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            if i != j and closure_leq(b, a) and a != b:
                g.add_edge(i, j)
    red = nx.transitive_reduction(g)
    return HasseDiagram(V, nodes, sorted(red.edges()))


# --- linear systems on chains --------------------------------------------------

def _offsets(shapes) -> list[int]:
    off, acc = [], 0
    for a, b in shapes:
        off.append(acc)
        acc += a * b
    off.append(acc)
    return off


def _point_shapes(dims, dual_point=False):
    if dual_point:
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]
    return [(dims[i + 1], dims[i]) for i in range(len(dims) - 1)]


def _unflatten(vec, shapes) -> tuple:
    out, k = [], 0
    for a, b in shapes:
        m = linalg.zeros(a, b)
        for p in range(a):
            for q in range(b):
                m[p, q] = vec[k]
                k += 1
        out.append(m)
    return tuple(out)


def _flatten(pt) -> list:
    return [v for m in pt for v in m.ravel().tolist()]


def stabilizer_system(V: ChainVariety, x) -> list[list]:
    """Rows of the linear map h -> (h_{i+1} x_i - x_i h_i)_i on Lie(H)."""
    d = V.dims
    off = _offsets([(a, a) for a in d])
    rows = []
    for i, xi in enumerate(x):
        for p in range(d[i + 1]):
            for q in range(d[i]):
                row = [0] * off[-1]
                for s in range(d[i + 1]):
                    if xi[s, q]:
                        row[off[i + 1] + p * d[i + 1] + s] += xi[s, q]
                for t in range(d[i]):
                    if xi[p, t]:
                        row[off[i] + t * d[i] + q] -= xi[p, t]
                rows.append(row)
    return rows


def orbit_dim(V: ChainVariety, c) -> int:
    """dim C = dim H - dim Stab, via the exact rank of the intertwining system."""
    x = canonical_representative(V, c)
    rows = stabilizer_system(V, x)
    return linalg.rank(rows) if rows and rows[0] else 0


def _bracket_rows(V: ChainVariety, x=None, y=None) -> list[list]:
    """Equations [x, y] = 0, linear in whichever of x, y is None.

    On E_i the bracket is x_{i-1} y_{i-1} - y_i x_i.
    """
    d, r = V.dims, V.r
    solve_y = y is None
    x = _lists(x) if x is not None else None
    y = _lists(y) if y is not None else None
    shapes = _point_shapes(d, dual_point=solve_y)
    off = _offsets(shapes)
    nvar = off[-1]
    rows = []
    for i in range(r):
        for p in range(d[i]):
            for q in range(d[i]):
                row = [0] * nvar
                if i >= 1:
                    # x_{i-1}[p,s] * y_{i-1}[s,q], s over E_{i-1}
                    for s in range(d[i - 1]):
                        if solve_y:
                            c = x[i - 1][p][s]
                            if c:
                                row[off[i - 1] + s * d[i] + q] += c
                        else:
                            c = y[i - 1][s][q]
                            if c:
                                row[off[i - 1] + p * d[i - 1] + s] += c
                if i <= r - 2:
                    # y_i[p,t] * x_i[t,q], t over E_{i+1}
                    for t in range(d[i + 1]):
                        if solve_y:
                            c = x[i][t][q]
                            if c:
                                row[off[i] + p * d[i + 1] + t] -= c
                        else:
                            c = y[i][p][t]
                            if c:
                                row[off[i] + t * d[i] + q] -= c
                if any(row):
                    rows.append(row)
    return rows


def bracket(V: ChainVariety, x, y) -> list:
    """Diagonal blocks of [x, y] on each eigenspace."""
    x = _check_point(V, x)
    y = _check_point(V, y, dual_point=True)
    out = []
    for i in range(V.r):
        b = linalg.zeros(V.dims[i], V.dims[i])
        if i >= 1:
            b = b + linalg.matmul(x[i - 1], y[i - 1])
        if i <= V.r - 2:
            b = b - linalg.matmul(y[i], x[i])
        out.append(b)
    return out


def bracket_vanishes(V: ChainVariety, x, y) -> bool:
    return all(v == 0 for b in bracket(V, x, y) for v in b.ravel())


def _integral(vec) -> list[int]:
    den = 1
    for v in vec:
        den = math.lcm(den, Fraction(v).denominator)
    return [int(Fraction(v) * den) for v in vec]


def _solve(rows: list, nvar: int, ints: bool = False) -> list[list[int]]:
    if not rows:
        return [[1 if k == j else 0 for k in range(nvar)] for j in range(nvar)]
    if ints or all(type(v) is int for row in rows for v in row):
        return linalg.nullspace_int(rows, nvar)
    return [_integral(v) for v in linalg.nullspace(rows, nvar)]


def _fiber_flat(V: ChainVariety, x, ints: bool = False) -> list[list[int]]:
    nvar = _offsets(_point_shapes(V.dims, dual_point=True))[-1]
    return _solve(_bracket_rows(V, x=x), nvar, ints)


def conormal_fiber(V: ChainVariety, x) -> list[tuple]:
    """Basis (as dual points with integer entries) of {y : [x, y] = 0}."""
    x = _check_point(V, x)
    shapes = _point_shapes(V.dims, dual_point=True)
    return [_unflatten(v, shapes) for v in _fiber_flat(V, x)]


def commutant(V: ChainVariety, y) -> list[tuple]:
    """Basis of {x : [x, y] = 0}."""
    y = _check_point(V, y, dual_point=True)
    shapes = _point_shapes(V.dims)
    nvar = _offsets(shapes)[-1]
    return [_unflatten(v, shapes) for v in _solve(_bracket_rows(V, y=y), nvar)]


def span_rank(points) -> int:
    rows = [_flatten(p) for p in points]
    if not rows or not rows[0]:
        return 0
    return linalg.rank(rows)


def nonzero_coefficients(rng: random.Random, n: int, height: int) -> list[int]:
    """n integers drawn uniformly from [-height, height] without 0.

    A zero coefficient kills every composite passing through a one-dimensional
    fiber direction, which makes long chains resample far more often.
    """
    pool = [c for c in range(-height, height + 1) if c]
    k = len(pool)
    rand = rng.random
    return [pool[int(rand() * k)] for _ in range(n)]


def random_combination(rng: random.Random, basis, shapes, height: int) -> tuple:
    coeffs = nonzero_coefficients(rng, len(basis), height)
    out = [linalg.zeros(a, b) for a, b in shapes]
    for c, pt in zip(coeffs, basis):
        if c:
            for k, m in enumerate(pt):
                out[k] = out[k] + c * m
    return tuple(out)


def geometric_dual_orbit(V: ChainVariety, c, seed: int = 0, height_bound: int = DEFAULT_HEIGHT,
                         max_samples: int = 15) -> RankTriangle:
    """Rank triangle of a generic covector in the conormal fiber over C.

    Samples are accepted once three consecutive draws agree and none of the
    earlier draws had a larger rank anywhere (generic ranks are maximal).
    """
    m = c.to_multisegment() if isinstance(c, RankTriangle) else c
    x = _place_lists(V, m, dual_point=False)
    basis = _fiber_flat(V, x, ints=True)
    shapes = _point_shapes(V.dims, dual_point=True)
    rng = random.Random(seed)
    seen: list[RankTriangle] = []
    nvar = _offsets(shapes)[-1]
    sparse = [[(k, v) for k, v in enumerate(b) if v] for b in basis]
    for _ in range(max_samples):
        coeffs = nonzero_coefficients(rng, len(basis), height_bound)
        flat = [0] * nvar
        for c, nz in zip(coeffs, sparse):
            if c:
                for k, v in nz:
                    flat[k] += c * v
        maps, k = [], 0
        for a, b in shapes:
            maps.append([flat[k + p * b:k + (p + 1) * b] for p in range(a)])
            k += a * b
        seen.append(_ranks_up_int(V, maps))
        last = seen[-3:]
        if len(last) == 3 and last[0] == last[1] == last[2]:
            if all(t == last[0] or closure_leq(t, last[0]) for t in seen):
                return last[0]
    raise UnstableSample(f"dual orbit of {m} did not stabilise "
                         f"after {max_samples} samples (seed {seed})")


def lagrangian_check(V: ChainVariety, c) -> tuple[int, int, int]:
    """(fiber dim, orbit dim, dim V) at the canonical representative."""
    x = canonical_representative(V, c)
    return len(conormal_fiber(V, x)), orbit_dim(V, c), V.dim_V


# --- parameters spread over several chains ----------------------------------

def triangles_of(phi: Multisegment, lam: InfinitesimalParameter | None = None) -> dict:
    lam = infinitesimal(phi) if lam is None else lam
    return {V: RankTriangle.from_multisegment(V, restrict(phi, V)) for V in varieties_of(lam)}


def closure_leq_params(phi: Multisegment, pi: Multisegment) -> bool:
    """C_phi in the closure of C_pi (both on the same infinitesimal parameter)."""
    lam = infinitesimal(phi)
    if infinitesimal(pi) != lam:
        raise GeometryError("parameters have different infinitesimal parameters")
    a, b = triangles_of(phi, lam), triangles_of(pi, lam)
    return all(closure_leq(a[V], b[V]) for V in a)


def param_orbit_dim(phi: Multisegment) -> int:
    return sum(orbit_dim(V, t) for V, t in triangles_of(phi).items())


def is_open_orbit(phi: Multisegment) -> bool:
    return all(t == open_triangle(V) for V, t in triangles_of(phi).items())


# --- the split embedding ------------------------------------------------------

@dataclass(frozen=True)
class SplitDescriptor:
    """m_i = m_i^v + m_i^a with m_i^a in {0,1}; the alpha slot is last in E_i."""

    chain: ChainVariety
    alpha_slots: tuple

    def __post_init__(self):
        if len(self.alpha_slots) != self.chain.r:
            raise GeometryError("split length does not match the chain")
        for a, m in zip(self.alpha_slots, self.chain.dims):
            if a not in (0, 1) or a > m:
                raise GeometryError(f"bad alpha slot {a} for dim {m}")

    @property
    def dims_v(self) -> tuple:
        return tuple(m - a for m, a in zip(self.chain.dims, self.alpha_slots))

    @property
    def dims_a(self) -> tuple:
        return self.alpha_slots

    @property
    def v_chain(self) -> ChainVariety:
        return ChainVariety(self.chain.label, self.chain.top2, self.dims_v)

    @property
    def a_chain(self) -> ChainVariety:
        return ChainVariety(self.chain.label, self.chain.top2, self.dims_a)

    def s(self, i: int) -> list[int]:
        return [1] * self.dims_v[i] + [-1] * self.dims_a[i]


def split_for(V: ChainVariety, alpha_part: Multisegment) -> SplitDescriptor:
    slots = [0] * V.r
    for s in alpha_part:
        for x2 in s.exponents2():
            if s.label == V.label and V.index_of(x2) is not None:
                slots[V.index_of(x2)] += 1
    return SplitDescriptor(V, tuple(slots))


def _blockdiag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = linalg.zeros(a.shape[0] + b.shape[0], a.shape[1] + b.shape[1])
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def embed_split(split: SplitDescriptor, xv, xa) -> tuple:
    xv = _check_point(split.v_chain, xv)
    xa = _check_point(split.a_chain, xa)
    return tuple(_blockdiag(a, b) for a, b in zip(xv, xa))


def embed_split_dual(split: SplitDescriptor, yv, ya) -> tuple:
    yv = _check_point(split.v_chain, yv, dual_point=True)
    ya = _check_point(split.a_chain, ya, dual_point=True)
    return tuple(_blockdiag(a, b) for a, b in zip(yv, ya))


def split_blocks(split: SplitDescriptor, x, dual_point=False):
    """(vv blocks, aa blocks, cross blocks) of a (dual) point."""
    dv = split.dims_v
    vv, aa, cross = [], [], []
    for i, m in enumerate(x):
        src, dst = (i + 1, i) if dual_point else (i, i + 1)
        vv.append(m[:dv[dst], :dv[src]])
        aa.append(m[dv[dst]:, dv[src]:])
        cross.append((m[:dv[dst], dv[src]:], m[dv[dst]:, :dv[src]]))
    return tuple(vv), tuple(aa), cross


def ad_s(split: SplitDescriptor, x, dual_point=False) -> tuple:
    out = []
    for i, m in enumerate(x):
        src, dst = (i + 1, i) if dual_point else (i, i + 1)
        sd, ss = split.s(dst), split.s(src)
        n = m.copy()
        for p in range(n.shape[0]):
            for q in range(n.shape[1]):
                n[p, q] = sd[p] * n[p, q] * ss[q]  # s_src^{-1} = s_src
        out.append(n)
    return tuple(out)


def _same(a, b) -> bool:
    return all(np.array_equal(p, q) for p, q in zip(a, b))


def s_fixed_dimension(split: SplitDescriptor) -> int:
    """dim {x : Ad(s) x = x}, counted entrywise."""
    V = split.chain
    return sum(1 for i in range(V.r - 1) for p in split.s(i + 1) for q in split.s(i) if p * q == 1)


def _random_invertible(rng, n: int, height: int) -> np.ndarray:
    while True:
        h = linalg.zeros(n, n)
        for p in range(n):
            for q in range(n):
                h[p, q] = rng.randint(-height, height)
        if n == 0 or linalg.rank(h) == n:
            return h


def random_conjugate(V: ChainVariety, x, rng, height: int = DEFAULT_HEIGHT) -> tuple:
    hs = [_random_invertible(rng, m, height) for m in V.dims]
    invs = [linalg.inverse(h) for h in hs]
    return tuple(linalg.matmul(linalg.matmul(hs[i + 1], xi), invs[i]) for i, xi in enumerate(x))


class Lemma1Report(NamedTuple):
    ok: bool
    components: list  # (multisegment on the v-side, multisegment on the a-side)
    checks: int
    witness: dict | None
    lemma_ok: bool = True  # the conormal decomposition itself
    closure_ok: bool = True  # closure of C meets V^x in the union of the listed closures

    def __bool__(self):
        return self.ok


def _product_orbits(split: SplitDescriptor) -> list[tuple]:
    return [(a, b) for a in orbits(split.v_chain) for b in orbits(split.a_chain)]


def verify_lemma1(V: ChainVariety, split: SplitDescriptor, C, samples: int = 3, seed: int = 0,
                  height: int = DEFAULT_HEIGHT) -> Lemma1Report:
    """Decompose the conormal bundle of C over the s-fixed locus.

    Checks: the listed V^x orbits are exactly those whose embedding lies in C;
    on sampled points of each, the s-fixed part of the conormal fiber is the
    embedded conormal fiber of V^x; and the closure of C meets V^x exactly in
    the union of the closures of the listed orbits (checked on every V^x orbit).
    """
    if split.chain != V:
        raise GeometryError("split does not belong to this chain")
    if not isinstance(C, RankTriangle):
        C = RankTriangle.from_multisegment(V, C)
    rng = random.Random(seed)
    vch, ach = split.v_chain, split.a_chain
    pairs = _product_orbits(split)
    checks = 0
    listed = []
    for tv, ta in pairs:
        x = embed_split(split, canonical_representative(vch, tv), canonical_representative(ach, ta))
        img = orbit_of_point(V, x)
        checks += 1
        if img.to_multisegment() != tv.to_multisegment() + ta.to_multisegment():
            return Lemma1Report(False, [], checks, lemma_ok=False, witness={"reason": "embedding is not concatenation",
                                                    "v": str(tv.to_multisegment()),
                                                    "a": str(ta.to_multisegment())})
        if img == C:
            listed.append((tv, ta))

    dual_shapes_v = _point_shapes(vch.dims, dual_point=True)
    dual_shapes_a = _point_shapes(ach.dims, dual_point=True)
    for tv, ta in listed:
        for _ in range(samples):
            xv = random_conjugate(vch, canonical_representative(vch, tv), rng, height)
            xa = random_conjugate(ach, canonical_representative(ach, ta), rng, height)
            x = embed_split(split, xv, xa)
            checks += 1
            if orbit_of_point(V, x) != C:
                return Lemma1Report(False, [], checks, lemma_ok=False, witness={"reason": "sampled point left C"})
            fv, fa = conormal_fiber(vch, xv), conormal_fiber(ach, xa)
            # Lambda_C' points map into Lambda_C
            yv = random_combination(rng, fv, dual_shapes_v, height)
            ya = random_combination(rng, fa, dual_shapes_a, height)
            if not bracket_vanishes(V, x, embed_split_dual(split, yv, ya)):
                return Lemma1Report(False, [], checks, lemma_ok=False, witness={"reason": "embedded covector not conormal"})
            # the s-fixed part of the fiber over x is no bigger than the embedded one
            full = conormal_fiber(V, x)
            fixed = _s_fixed_subspace(split, full)
            if fixed != len(fv) + len(fa):
                return Lemma1Report(False, [], checks, lemma_ok=False, witness={
                    "reason": "bracket does not split", "fixed": fixed, "product": len(fv) + len(fa)})

    comps = [(tv.to_multisegment(), ta.to_multisegment()) for tv, ta in listed]
    if listed:
        for tv, ta in pairs:
            checks += 1
            img = RankTriangle.from_multisegment(V, tv.to_multisegment() + ta.to_multisegment())
            lhs = closure_leq(img, C)
            rhs = any(closure_leq(tv, lv) and closure_leq(ta, la) for lv, la in listed)
            if lhs != rhs:
                # (x, 0) with x = eps(v, a) then lies in the closure of Lambda_C
                # but in no closure of a listed Lambda_C'
                return Lemma1Report(False, comps, checks, {
                    "reason": "closure of C meets V^x outside the listed closures",
                    "v": str(tv.to_multisegment()), "a": str(ta.to_multisegment())},
                    lemma_ok=True, closure_ok=False)
    return Lemma1Report(True, comps, checks, None)


def _s_fixed_subspace(split: SplitDescriptor, basis) -> int:
    """Dimension of the Ad(s)-fixed part of a span of dual points."""
    if not basis:
        return 0
    # Ad(s) is diagonal with eigenvalues +-1; the fixed part of an invariant
    # span is the projection (y + Ad(s) y) / 2 of the span.
    proj = []
    for y in basis:
        sy = ad_s(split, y, dual_point=True)
        proj.append(tuple(a + b for a, b in zip(y, sy)))
    return span_rank(proj)


# --- certificates --------------------------------------------------------------

class Certificate(NamedTuple):
    ok: bool
    clauses: dict
    detail: dict

    def __bool__(self):
        return self.ok


def regular_certificate(V: ChainVariety, split: SplitDescriptor, x, y, expected: Multisegment) -> Certificate:
    """Check that (x, y) is a regular conormal pair for C = C_expected.

    Clauses: bracket vanishes; x lies in C; y lies in the dual orbit (computed
    by the MW algorithm); and every x' commuting with y has the form eps(x'', 0)
    with x'' commuting with the v-block of y.
    """
    x = _check_point(V, x)
    y = _check_point(V, y, dual_point=True)
    clauses, detail = {}, {}
    clauses["bracket"] = bracket_vanishes(V, x, y)
    tx = orbit_of_point(V, x)
    want = RankTriangle.from_multisegment(V, expected)
    clauses["orbit"] = tx == want
    ty = orbit_of_dual_point(V, y)
    want_dual = dual(expected)
    clauses["dual_orbit"] = ty.to_multisegment() == want_dual
    if not clauses["orbit"]:
        detail["orbit"] = str(tx.to_multisegment())
    if not clauses["dual_orbit"]:
        detail["dual_orbit"] = {"got": str(ty.to_multisegment()), "want": str(want_dual)}

    yv, ya, cross = split_blocks(split, y, dual_point=True)
    if any(v != 0 for c in cross for blk in c for v in blk.ravel()):
        clauses["factorization"] = False
        detail["factorization"] = "y is not block diagonal"
    else:
        big = commutant(V, y)
        small = commutant(split.v_chain, yv)
        zero_a = zero_point(split.a_chain)
        emb = [embed_split(split, p, zero_a) for p in small]
        nb, ns = span_rank(big), span_rank(emb)
        both = span_rank(list(big) + emb)
        clauses["factorization"] = nb == ns == both
        if not clauses["factorization"]:
            detail["factorization"] = {"commutant": nb, "embedded": ns, "joint": both}
    return Certificate(all(clauses.values()), clauses, detail)


class Verdict(NamedTuple):
    ok: bool
    reason: str

    def __bool__(self):
        return self.ok


def s_central_triviality(V: ChainVariety, split: SplitDescriptor, x, y) -> Verdict:
    """s lies in the connected torus Z(GL) x Z(GL) inside the stabiliser of (x, y)."""
    x = _check_point(V, x)
    y = _check_point(V, y, dual_point=True)
    if not bracket_vanishes(V, x, y):
        return Verdict(False, "[x, y] != 0")
    if not (_same(ad_s(split, x), x) and _same(ad_s(split, y, True), y)):
        return Verdict(False, "Ad(s) does not fix (x, y)")
    _, xa, _ = split_blocks(split, x)
    if any(v != 0 for m in xa for v in m.ravel()):
        return Verdict(False, "x is not of the form eps(x', 0)")
    # t = (t1 on the v-block, t2 on the a-block); s is t at (1, -1)
    for t1, t2 in ((2, 3), (1, -1), (Fraction(1, 2), 5)):
        def tdiag(i, t1=t1, t2=t2):
            return [t1] * split.dims_v[i] + [t2] * split.dims_a[i]
        for pt, is_dual in ((x, False), (y, True)):
            for i, m in enumerate(pt):
                src, dst = (i + 1, i) if is_dual else (i, i + 1)
                a, b = tdiag(dst), tdiag(src)
                for p in range(m.shape[0]):
                    for q in range(m.shape[1]):
                        if m[p, q] != 0 and a[p] != b[q]:
                            return Verdict(False, "central torus does not fix (x, y)")
    return Verdict(True, "s lies in the identity component of the stabiliser")
