"""L-parameters of GL_n as multisegments.

Exponents are kept doubled (an int holding 2x) so half-integers stay exact.
A segment is (label, center, length); its exponents run from
center - (length-1)/2 up to center + (length-1)/2 in steps of one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

TRIVIAL = "1"


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def to_double(x) -> int:
    """Doubled integer for a half-integer given as int, Fraction or 'p/q' string."""
    if isinstance(x, str):
        x = Fraction(x.strip())
    x = Fraction(x)
    d = 2 * x
    if d.denominator != 1:
        raise ValueError(f"{x} is not a half-integer")
    return int(d)


def half(x2: int) -> Fraction:
    return Fraction(x2, 2)


def format_exponent(x2: int) -> str:
    if x2 % 2 == 0:
        return str(x2 // 2)
    return f"{x2}/2"


@dataclass(frozen=True, order=True)
class CuspidalLabel:
    name: str = TRIVIAL
    dual_name: str = ""

    def __post_init__(self):
        if not self.dual_name:
            object.__setattr__(self, "dual_name", self.name)
        if self.name == TRIVIAL and self.dual_name != TRIVIAL:
            raise ValueError("the trivial label is self-dual")

    @property
    def is_trivial(self) -> bool:
        return self.name == TRIVIAL

    def dual(self) -> "CuspidalLabel":
        return CuspidalLabel(self.dual_name, self.name)

    def __str__(self):
        if self.dual_name == self.name:
            return self.name
        return f"{self.name}:{self.dual_name}"


ONE = CuspidalLabel()


def as_label(label) -> CuspidalLabel:
    if isinstance(label, CuspidalLabel):
        return label
    if label is None:
        return ONE
    name, _, dual_name = str(label).partition(":")
    return CuspidalLabel(name, dual_name)


@dataclass(frozen=True)
class Segment:
    label: CuspidalLabel
    center2: int
    length: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"segment length must be positive, got {self.length}")

    @classmethod
    def from_ends(cls, begin2: int, end2: int, label=ONE) -> "Segment":
        """Segment covering begin..end (doubled), both ends included."""
        if end2 < begin2 or (end2 - begin2) % 2:
            raise ValueError(f"bad segment ends {begin2}/2, {end2}/2")
        return cls(as_label(label), (begin2 + end2) // 2, (end2 - begin2) // 2 + 1)

    @classmethod
    def of(cls, center, length: int = 1, label=ONE) -> "Segment":
        return cls(as_label(label), to_double(center), length)

    @property
    def begin2(self) -> int:
        return self.center2 - (self.length - 1)

    @property
    def end2(self) -> int:
        return self.center2 + (self.length - 1)

    @property
    def center(self) -> Fraction:
        return half(self.center2)

    def exponents2(self) -> list[int]:
        """Doubled exponents from the top down."""
        return list(range(self.end2, self.begin2 - 1, -2))

    def sort_key(self):
        lab = self.label
        return (lab.name, lab.dual_name, self.center2 - self.length + 1, self.center2 + self.length - 1)

    def dual(self) -> "Segment":
        return Segment(self.label.dual(), -self.center2, self.length)

    def __str__(self):
        return format_segment(self)


class Multisegment:
    """Multiset of segments held in canonical (label, begin, end) order."""

    __slots__ = ("segments", "_hash")

    def __init__(self, segments: Iterable[Segment] = ()):
        self.segments = tuple(sorted(segments, key=Segment.sort_key))
        self._hash = None

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)

    def __eq__(self, other):
        return isinstance(other, Multisegment) and self.segments == other.segments

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.segments)
        return self._hash

    def __lt__(self, other):
        return self.key() < other.key()

    def __add__(self, other: "Multisegment") -> "Multisegment":
        return Multisegment(self.segments + other.segments)

    def __mul__(self, k: int) -> "Multisegment":
        return Multisegment(self.segments * k)

    __rmul__ = __mul__

    def key(self):
        return tuple((s.label.name, s.label.dual_name, s.begin2, s.end2) for s in self.segments)

    @property
    def dim(self) -> int:
        return sum(s.length for s in self.segments)

    def __str__(self):
        return format_parameter(self)

    def __repr__(self):
        return f"Multisegment({format_parameter(self)!r})"


class InfinitesimalParameter(NamedTuple):
    """Multiset of (label, doubled exponent), sorted by label then exponent descending."""

    support: tuple

    @classmethod
    def of(cls, pairs) -> "InfinitesimalParameter":
        pairs = [(as_label(lab), int(x2)) for lab, x2 in pairs]
        return cls(tuple(sorted(pairs, key=lambda p: (p[0], -p[1]))))

    def exponents(self) -> list[Fraction]:
        return [half(x2) for _, x2 in self.support]

    def __str__(self):
        parts = []
        for lab, x2 in self.support:
            e = format_exponent(x2)
            parts.append(e if lab.is_trivial else f"{lab}@{e}")
        return "{" + ",".join(parts) + "}"


class ArthurRectangle(NamedTuple):
    label: CuspidalLabel
    a: int
    b: int
    x2: int = 0

    def expand(self) -> list[Segment]:
        return [Segment(self.label, self.x2 + self.b - 1 - 2 * k, self.a) for k in range(self.b)]

    def __str__(self):
        lab = "" if self.label.is_trivial else f"{self.label} "
        tw = f"nu^{{{format_exponent(self.x2)}}} " if self.x2 else ""
        return f"{lab}{tw}S_{self.a} x S_{self.b}"


class ArthurDecomposition(NamedTuple):
    rectangles: tuple

    def expand(self) -> Multisegment:
        return Multisegment(s for r in self.rectangles for s in r.expand())

    def __str__(self):
        return " + ".join(str(r) for r in self.rectangles)


def seg(center, length: int = 1, label=ONE) -> Segment:
    return Segment.of(center, length, label)


def segment_from_ends(begin, end, label=ONE) -> Segment:
    return Segment.from_ends(to_double(begin), to_double(end), label)


# --- text grammar -----------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<plus>\+)|(?P<mult>\d+\s*\*)|(?P<nu>nu|\|\.\||\|·\|)"
    r"|(?P<s>S_(?:\{\s*(?P<sa>-?\d+)\s*\}|(?P<sb>-?\d+)))"
    r"|(?P<label>[A-Za-z][A-Za-z0-9_']*(?::[A-Za-z0-9_']+)?|1(?::1)?(?![\d/]))"
    r"|(?P<end>$))"
)
_POWER = re.compile(r"\s*\^\s*(?:\{\s*(?P<a>[^}]*)\}|(?P<b>-?\d+(?:/\d+)?))")
_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def _parse_power(text: str, pos: int) -> tuple[int, int]:
    m = _POWER.match(text, pos)
    if not m:
        return 2, pos  # bare nu means nu^1
    raw = m.group("a") if m.group("a") is not None else m.group("b")
    r = _RATIONAL.match(raw)
    if not r:
        raise ParseError(f"bad exponent {raw!r}", pos)
    num, den = int(r.group(1)), int(r.group(2) or 1)
    if den == 0:
        raise ParseError("zero denominator", pos)
    x = Fraction(num, den)
    if (2 * x).denominator != 1:
        raise ParseError(f"exponent {x} is not a half-integer", pos)
    return int(2 * x), m.end()


def _at(m) -> int:
    """Position of the token itself, skipping leading whitespace."""
    g = m.group(0)
    return m.start() + len(g) - len(g.lstrip())


def parse_parameter(text: str) -> Multisegment:
    """Parse sums of terms `[rho] nu^{p/q} S_a`, e.g. "nu^{1/2} S_2 + 2*S_1".

    A term may be prefixed with an integer multiplicity `k*`. The literal "0"
    denotes the empty parameter.
    """
    if text.strip() == "0":
        return Multisegment()
    segments: list[Segment] = []
    pos = 0
    n = len(text)
    expect_term = True
    while True:
        if expect_term:
            mult, label, x2, a, seen = 1, ONE, 0, 1, False
            have_nu = have_s = False
            term_start = pos
            while True:
                m = _TOKEN.match(text, pos)
                if not m or m.group("plus") or m.group("end") is not None:
                    break
                if m.group("mult"):
                    if seen or mult != 1:
                        raise ParseError("multiplicity must lead the term", _at(m))
                    mult = int(m.group("mult").rstrip("* \t"))
                    if mult <= 0:
                        raise ParseError("multiplicity must be positive", _at(m))
                    pos = m.end()
                    continue
                if m.group("nu"):
                    if have_nu or have_s:
                        raise ParseError("unexpected nu", _at(m))
                    x2, pos = _parse_power(text, m.end())
                    seen = have_nu = True
                    continue
                if m.group("s"):
                    if have_s:
                        raise ParseError("S_a given twice in one term", _at(m))
                    a = int(m.group("sa") or m.group("sb"))
                    if a <= 0:
                        raise ParseError(f"S_{a}: length must be positive", _at(m))
                    pos = m.end()
                    seen = have_s = True
                    continue
                if m.group("label"):
                    if seen:
                        raise ParseError("label must come first in a term", _at(m))
                    label = as_label(m.group("label"))
                    pos = m.end()
                    seen = True
                    continue
                break
            if not seen:
                raise ParseError("expected a term", term_start if pos >= n else pos)
            segments.extend([Segment(label, x2, a)] * mult)
            expect_term = False
        m = _TOKEN.match(text, pos)
        if m and m.group("end") is not None:
            break
        if m and m.group("plus"):
            pos = m.end()
            expect_term = True
            continue
        raise ParseError("expected '+' or end of input", pos)
    return Multisegment(segments)


def format_segment(s: Segment) -> str:
    parts = []
    if not s.label.is_trivial:
        parts.append(str(s.label))
    if s.center2:
        parts.append(f"nu^{{{format_exponent(s.center2)}}}")
    if s.length != 1 or not parts:
        parts.append(f"S_{s.length}")
    return " ".join(parts)


def format_parameter(phi: Multisegment) -> str:
    if not len(phi):
        return "0"
    return " + ".join(format_segment(s) for s in phi)


def parse_lambda(text: str) -> InfinitesimalParameter:
    """Parse "{3/2,1/2,-1/2}"; entries may carry a label as "rho@1/2"."""
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    pairs = []
    offset = text.find(body) if body else 0
    for item in body.split(","):
        if not item.strip():
            continue
        lab, _, val = item.rpartition("@")
        try:
            pairs.append((as_label(lab.strip() or None), to_double(val)))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad exponent {item.strip()!r}: {exc}", offset) from None
        offset += len(item) + 1
    return InfinitesimalParameter.of(pairs)


# --- JSON -------------------------------------------------------------------

def segment_to_json(s: Segment) -> dict:
    d = {"label": s.label.name, "center": f"{s.center2}/2", "length": s.length}
    if s.label.dual_name != s.label.name:
        d["dual_label"] = s.label.dual_name
    return d


def segment_from_json(d: dict) -> Segment:
    label = CuspidalLabel(str(d.get("label", TRIVIAL)), str(d.get("dual_label", "")))
    return Segment(label, to_double(str(d["center"])), int(d["length"]))


def to_json(phi: Multisegment) -> list:
    return [segment_to_json(s) for s in phi]


def from_json(data) -> Multisegment:
    return Multisegment(segment_from_json(d) for d in data)


# --- operations ---------------------------------------------------------------

def infinitesimal(phi: Multisegment) -> InfinitesimalParameter:
    return InfinitesimalParameter.of((s.label, x2) for s in phi for x2 in s.exponents2())


def contragredient(phi: Multisegment) -> Multisegment:
    return Multisegment(s.dual() for s in phi)


def phi_alpha_part(alpha: int) -> Multisegment:
    """The alpha trivial singletons at (alpha-1)/2 - i, i = 0..alpha-1."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    return Multisegment(Segment(ONE, alpha - 1 - 2 * i, 1) for i in range(alpha))


def theta_lift_param(phi: Multisegment, alpha: int) -> Multisegment:
    return contragredient(phi) + phi_alpha_part(alpha)


def theta_lift_rep(langlands_data: Multisegment, alpha: int) -> Multisegment:
    """Langlands data of theta_{-alpha}(pi) as a multiset of segments."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    extra = [Segment(ONE, 2 * i - (alpha - 1), 1) for i in range(alpha)]
    return Multisegment([s.dual() for s in langlands_data] + extra)


def trivial_exponents(phi_dual: Multisegment) -> set[Fraction]:
    return {half(x2) for s in phi_dual if s.label.is_trivial for x2 in s.exponents2()}


def m_beta(phi_dual: Multisegment, beta) -> Fraction | None:
    """max |x| over trivial exponents in beta + Z, or None when there are none."""
    b2 = to_double(beta)
    vals = [abs(x) for x in trivial_exponents(phi_dual) if (to_double(x) - b2) % 2 == 0]
    return max(vals) if vals else None


def adams_threshold_ok(phi: Multisegment, alpha: int) -> bool:
    if alpha < 1:
        raise ValueError("alpha must be positive")
    beta = Fraction(alpha - 1, 2)
    m = m_beta(contragredient(phi), beta)
    return m is None or m <= beta


def is_arthur_type(phi: Multisegment) -> ArthurDecomposition | None:
    """Rectangle decomposition with |x| < 1/2, or None.

    Exponents are half-integers, so |x| < 1/2 forces x = 0 and every
    rectangle is symmetric about 0. The segment of largest center must then
    be the top row of its rectangle (b = 2c + 1), so the backtracking search
    never branches: each step has exactly one admissible choice.
    """
    remaining: dict[Segment, int] = {}
    for s in phi:
        remaining[s] = remaining.get(s, 0) + 1
    rects: list[ArthurRectangle] = []
    while remaining:
        top = max(remaining, key=lambda s: (s.center2, s.label, s.length))
        if top.center2 < 0:
            return None
        rect = ArthurRectangle(top.label, top.length, top.center2 + 1, 0)
        for s in rect.expand():
            if remaining.get(s, 0) == 0:
                return None
            remaining[s] -= 1
            if not remaining[s]:
                del remaining[s]
        rects.append(rect)
    return ArthurDecomposition(tuple(sorted(rects)))
