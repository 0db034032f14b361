"""Moeglin-Waldspurger computation of the Zelevinsky dual multisegment."""
from __future__ import annotations

from collections import defaultdict
from typing import NamedTuple

from .params import (
    Multisegment,
    Segment,
    contragredient,
    phi_alpha_part,
    theta_lift_param,
)


class DualStep(NamedTuple):
    chosen: tuple  # segments (as they stood before truncation) used in this pass
    produced: Segment


class DualResult(NamedTuple):
    dual: Multisegment
    trace: tuple


def lines_of(m: Multisegment) -> dict:
    """Group segments by (label, coset of Z containing their exponents)."""
    out = defaultdict(list)
    for s in m:
        out[(s.label, s.end2 % 2)].append(s)
    return dict(out)


def _dual_line(segs: list[Segment], trace: bool = True) -> tuple[list[Segment], list[DualStep]]:
    label = segs[0].label
    live = [[s.begin2, s.end2] for s in segs]
    produced, steps = [], []
    while live:
        e = max(x[1] for x in live)
        cur = max((x for x in live if x[1] == e), key=lambda x: x[0])
        chain = [cur]
        while True:
            cands = [x for x in live if x[1] == cur[1] - 2 and x[0] < cur[0]]
            if not cands:
                break
            cur = max(cands, key=lambda x: x[0])
            chain.append(cur)
        out = Segment(label, e - (len(chain) - 1), len(chain))
        if trace:
            steps.append(DualStep(tuple(Segment.from_ends(b, t, label) for b, t in chain), out))
        produced.append(out)
        for x in chain:
            x[1] -= 2
        live = [x for x in live if x[1] >= x[0]]
    return produced, steps


def zelevinsky_dual(m: Multisegment) -> DualResult:
    produced, trace = [], []
    lines = lines_of(m)
    for key in sorted(lines):
        p, t = _dual_line(lines[key])
        produced += p
        trace += t
    return DualResult(Multisegment(produced), tuple(trace))


def dual(m: Multisegment) -> Multisegment:
    """The dual multisegment alone (no step trace)."""
    produced = []
    for segs in lines_of(m).values():
        produced += _dual_line(segs, trace=False)[0]
    return Multisegment(produced)


class IdentityCheck(NamedTuple):
    ok: bool
    lhs: Multisegment  # dual of phi_alpha
    rhs: Multisegment  # dual of phi^vee plus dual of phi^alpha

    def __bool__(self):
        return self.ok


def check_dual_sum_identity(phi: Multisegment, alpha: int) -> IdentityCheck:
    lhs = dual(theta_lift_param(phi, alpha))
    rhs = dual(contragredient(phi)) + dual(phi_alpha_part(alpha))
    return IdentityCheck(lhs == rhs, lhs, rhs)
