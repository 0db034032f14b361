"""ABV-packet membership facts for GL_n with replayable provenance.

A fact says pi is IN or OUT of the ABV-packet of phi, or records a refusal.
Representations are identified with their Langlands data, which for GL_n is
again a multisegment, so pi also names the orbit C_{phi_pi}. Facts carry the
coefficient of eta_phi at that orbit when a rule determines it.

The journal is JSON lines: a header object, then one fact per line. Fact ids
are content hashes, so replaying a derivation reproduces the id exactly.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from .geometry import closure_leq_params, is_open_orbit, param_orbit_dim
from .params import (
    Multisegment,
    adams_threshold_ok,
    contragredient,
    format_parameter,
    from_json,
    infinitesimal,
    is_arthur_type,
    phi_alpha_part,
    segment_from_ends,
    theta_lift_param,
    theta_lift_rep,
    to_json,
)

JOURNAL_FORMAT = "thetagl-kb"
JOURNAL_VERSION = 1


class Status(str, Enum):
    IN = "IN"
    OUT = "OUT"
    UNKNOWN = "UNKNOWN"


class Rule(str, Enum):
    SEED_OPEN = "seed-open-orbit"
    SEED_ARTHUR = "seed-arthur"
    SEED_KS = "seed-ks"
    L_PACKET = "l-packet"
    CONTRAGREDIENT = "contragredient"
    THETA = "theta-transport"
    THETA_REFUSED = "theta-refused"
    CLOSURE = "closure-prune"
    INFINITESIMAL = "infinitesimal-mismatch"
    COMPLETE = "eta-complete"


SEEDS = {Rule.SEED_OPEN, Rule.SEED_ARTHUR, Rule.SEED_KS}


class KnowledgeError(ValueError):
    pass


class ReplayError(KnowledgeError):
    pass


def _canon(m: Multisegment) -> list:
    return to_json(m)


@dataclass(frozen=True)
class PacketFact:
    phi: Multisegment
    pi: Multisegment
    status: Status
    rule: Rule
    inputs: tuple = ()
    coefficient: int | None = None
    params: tuple = ()  # sorted (key, value) pairs of JSON scalars

    def payload(self) -> dict:
        return {
            "phi": _canon(self.phi),
            "pi": _canon(self.pi),
            "status": self.status.value,
            "rule": self.rule.value,
            "inputs": list(self.inputs),
            "coefficient": self.coefficient,
            "params": {k: v for k, v in self.params},
        }

    @property
    def id(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def to_json(self) -> dict:
        d = self.payload()
        d["id"] = self.id
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PacketFact":
        f = cls(from_json(d["phi"]), from_json(d["pi"]), Status(d["status"]), Rule(d["rule"]),
                tuple(d.get("inputs", ())), d.get("coefficient"),
                tuple(sorted(d.get("params", {}).items())))
        if "id" in d and d["id"] != f.id:
            raise ReplayError(f"stored id {d['id']} does not match content hash {f.id}")
        return f

    def describe(self) -> str:
        c = "" if self.coefficient is None else f" coeff {self.coefficient:+d}"
        return f"{self.status.value}: {format_parameter(self.pi)} in packet of {format_parameter(self.phi)} [{self.rule.value}{c}]"


def _params(**kw) -> tuple:
    return tuple(sorted((k, v) for k, v in kw.items() if v is not None))


@dataclass(frozen=True)
class EtaVector:
    phi: Multisegment
    coefficients: dict  # pi (orbit) -> int
    provenance: tuple  # fact ids

    def support(self) -> set:
        return {pi for pi, c in self.coefficients.items() if c}


@dataclass
class Answer:
    status: Status
    trace: list  # PacketFacts, conclusion first

    def __str__(self):
        return self.status.value


# --- seed data ------------------------------------------------------------------

def _ks_data() -> dict:
    with resources.files("thetagl").joinpath("data", "ks_gl16.json").open() as fh:
        return json.load(fh)


def _from_ends(pairs) -> Multisegment:
    return Multisegment(segment_from_ends(a, b) for a, b in pairs)


def ks_parameter() -> Multisegment:
    return _from_ends(_ks_data()["segments_by_ends"])


def ks_members() -> list[Multisegment]:
    return [_from_ends(m["segments_by_ends"]) for m in _ks_data()["members"]]


def _sign(d: int) -> int:
    return -1 if d % 2 else 1


# --- the fact base -------------------------------------------------------------

@dataclass
class KnowledgeBase:
    journal: Path | None = None
    facts: dict = field(default_factory=dict)  # id -> PacketFact, insertion ordered
    _by_pair: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.journal is not None:
            self.journal = Path(self.journal)
            if self.journal.exists() and self.journal.stat().st_size:
                self._load(self.journal)
            else:
                self.journal.parent.mkdir(parents=True, exist_ok=True)
                with self.journal.open("w") as fh:
                    fh.write(json.dumps({"format": JOURNAL_FORMAT, "version": JOURNAL_VERSION}) + "\n")

    # storage

    def _load(self, path: Path):
        with path.open() as fh:
            header = json.loads(fh.readline())
            if header.get("format") != JOURNAL_FORMAT or header.get("version") != JOURNAL_VERSION:
                raise KnowledgeError(f"{path}: unsupported journal header {header}")
            for n, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                f = PacketFact.from_json(json.loads(line))
                missing = [i for i in f.inputs if i not in self.facts]
                if missing:
                    raise KnowledgeError(f"{path}:{n}: fact refers to unknown inputs {missing}")
                self._index(f)

    def _index(self, f: PacketFact) -> PacketFact:
        fid = f.id
        if fid not in self.facts:
            self.facts[fid] = f
            self._by_pair.setdefault((f.phi, f.pi), []).append(fid)
        return self.facts[fid]

    def add(self, f: PacketFact) -> PacketFact:
        for i in f.inputs:
            if i not in self.facts:
                raise KnowledgeError(f"input fact {i} is not stored")
        new = f.id not in self.facts
        if new:
            self._check_consistent(f)
        f = self._index(f)
        if new and self.journal is not None:
            with self.journal.open("a") as fh:
                fh.write(json.dumps(f.to_json(), sort_keys=True) + "\n")
        return f

    def _check_consistent(self, f: PacketFact):
        for g in self.stored(f.phi, f.pi):
            if {f.status, g.status} == {Status.IN, Status.OUT}:
                raise KnowledgeError(f"conflicting facts {f.id} and {g.id}")

    def stored(self, phi: Multisegment, pi: Multisegment) -> list[PacketFact]:
        return [self.facts[i] for i in self._by_pair.get((phi, pi), ())]

    def __len__(self):
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts.values())

    # seeds

    def seed_open_orbit(self, phi: Multisegment) -> PacketFact:
        if not is_open_orbit(phi):
            raise KnowledgeError(f"{format_parameter(phi)} is not the open orbit of its Vogan variety")
        return self.add(PacketFact(phi, phi, Status.IN, Rule.SEED_OPEN, (), 1, _params(complete=True)))

    def seed_arthur(self, phi: Multisegment) -> PacketFact:
        psi = is_arthur_type(phi)
        if psi is None:
            raise KnowledgeError(f"{format_parameter(phi)} is not of Arthur type")
        return self.add(PacketFact(phi, phi, Status.IN, Rule.SEED_ARTHUR, (), 1,
                                   _params(complete=True, psi=str(psi))))

    def seed_ks(self) -> list[PacketFact]:
        data = _ks_data()
        phi = ks_parameter()
        d_phi = param_orbit_dim(phi)
        out = []
        for member in data["members"]:
            pi = _from_ends(member["segments_by_ends"])
            if infinitesimal(pi) != infinitesimal(phi):
                raise KnowledgeError(f"KS member {member['name']} has the wrong infinitesimal parameter")
            coeff = 1 if member["coefficient"] == "unit" else _sign(d_phi + param_orbit_dim(pi))
            out.append(self.add(PacketFact(phi, pi, Status.IN, Rule.SEED_KS, (), coeff,
                                           _params(complete=True, member=member["name"],
                                                   flag=member.get("flag")))))
        return out

    def seed(self, phi: Multisegment) -> list[PacketFact]:
        """Whichever unconditional seed applies; empty when none does."""
        if phi == ks_parameter():
            return self.seed_ks()
        if is_arthur_type(phi) is not None:
            return [self.seed_arthur(phi)]
        if is_open_orbit(phi):
            return [self.seed_open_orbit(phi)]
        return []

    # derivation rules

    def rule_contragredient(self, f: PacketFact) -> PacketFact:
        if f.status not in (Status.IN, Status.OUT):
            raise KnowledgeError("only IN/OUT facts are mirrored")
        if f.id not in self.facts:
            raise KnowledgeError("fact must be stored before it is mirrored")
        if f.rule is Rule.CONTRAGREDIENT:
            return self.facts[f.inputs[0]]
        return self.add(PacketFact(contragredient(f.phi), contragredient(f.pi), f.status,
                                   Rule.CONTRAGREDIENT, (f.id,), f.coefficient,
                                   _params(complete=f.param("complete"))))

    def seeded_in(self, phi: Multisegment) -> list[PacketFact]:
        """IN facts at phi with a known coefficient, one per member."""
        seen, out = set(), []
        for f in self.facts.values():
            if f.phi == phi and f.status is Status.IN and f.coefficient is not None and f.pi not in seen:
                seen.add(f.pi)
                out.append(f)
        return out

    def rule_theta_transport(self, phi: Multisegment, alpha: int) -> list[PacketFact]:
        if alpha < 1:
            raise KnowledgeError("alpha must be positive")
        if not adams_threshold_ok(phi, alpha):
            self.add(PacketFact(theta_lift_param(phi, alpha), Multisegment(), Status.UNKNOWN,
                                Rule.THETA_REFUSED, (), None,
                                _params(alpha=alpha, source=json.dumps(_canon(phi)))))
            return []
        members = self.seeded_in(phi)
        if not members:
            raise KnowledgeError(f"no eta data stored for {format_parameter(phi)}")
        phi_a = phi_alpha_part(alpha)
        h = self.seed_arthur(phi_a)
        out = []
        for f in members:
            g = self.rule_contragredient(f)
            out.append(self.add(PacketFact(theta_lift_param(phi, alpha), theta_lift_rep(f.pi, alpha),
                                           Status.IN, Rule.THETA, (g.id, h.id),
                                           g.coefficient * h.coefficient, _params(alpha=alpha))))
        return out

    def rule_closure_prune(self, phi: Multisegment, pi: Multisegment) -> PacketFact:
        if infinitesimal(phi) != infinitesimal(pi):
            return self.add(PacketFact(phi, pi, Status.OUT, Rule.INFINITESIMAL))
        if not closure_leq_params(phi, pi):
            return self.add(PacketFact(phi, pi, Status.OUT, Rule.CLOSURE))
        return PacketFact(phi, pi, Status.UNKNOWN, Rule.CLOSURE)

    def close_contragredient(self) -> int:
        """Mirror every IN/OUT fact; returns the number of new facts."""
        before = len(self)
        for f in list(self.facts.values()):
            if f.status is Status.UNKNOWN:
                continue
            mirrored = self.stored(contragredient(f.phi), contragredient(f.pi))
            if not any(g.status is f.status for g in mirrored):
                self.rule_contragredient(f)
        return len(self) - before

    # queries

    def _complete_at(self, phi: Multisegment) -> list[PacketFact]:
        return [f for f in self.facts.values()
                if f.phi == phi and f.status is Status.IN and f.param("complete")]

    def query(self, phi: Multisegment, pi: Multisegment) -> Answer:
        for f in self.stored(phi, pi):
            if f.status is not Status.UNKNOWN:
                return Answer(f.status, self.trace(f.id))
        if pi == phi:
            return Answer(Status.IN, [PacketFact(phi, pi, Status.IN, Rule.L_PACKET)])
        if infinitesimal(phi) != infinitesimal(pi):
            return Answer(Status.OUT, [PacketFact(phi, pi, Status.OUT, Rule.INFINITESIMAL)])
        if not closure_leq_params(phi, pi):
            return Answer(Status.OUT, [PacketFact(phi, pi, Status.OUT, Rule.CLOSURE)])
        complete = self._complete_at(phi)
        if complete:
            f = PacketFact(phi, pi, Status.OUT, Rule.COMPLETE, tuple(sorted(g.id for g in complete)))
            return Answer(Status.OUT, [f] + [g for c in complete for g in self.trace(c.id)])
        return Answer(Status.UNKNOWN, [])

    def packet(self, phi: Multisegment) -> set:
        return {f.pi for f in self.facts.values() if f.phi == phi and f.status is Status.IN} | {phi}

    def eta(self, phi: Multisegment) -> EtaVector:
        members = self.seeded_in(phi)
        return EtaVector(phi, {f.pi: f.coefficient for f in members}, tuple(f.id for f in members))

    def trace(self, fid: str) -> list[PacketFact]:
        out, stack, seen = [], [fid], set()
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            f = self.facts[i]
            out.append(f)
            stack.extend(reversed(f.inputs))
        return out

    # replay

    def _recompute(self, f: PacketFact, scratch: "KnowledgeBase") -> PacketFact:
        ins = [self.facts[i] for i in f.inputs]
        for g in ins:
            scratch._index(self._recompute(g, scratch))
        if f.rule is Rule.SEED_OPEN:
            return scratch.seed_open_orbit(f.phi)
        if f.rule is Rule.SEED_ARTHUR:
            return scratch.seed_arthur(f.phi)
        if f.rule is Rule.SEED_KS:
            hits = [g for g in scratch.seed_ks() if g.pi == f.pi]
            if not hits:
                raise ReplayError(f"KS data no longer lists {format_parameter(f.pi)}")
            return hits[0]
        if f.rule is Rule.CONTRAGREDIENT:
            return scratch.rule_contragredient(ins[0])
        if f.rule is Rule.THETA:
            g, h = ins
            alpha = f.param("alpha")
            if not adams_threshold_ok(contragredient(g.phi), alpha):
                raise ReplayError("threshold no longer holds")
            if h != scratch.seed_arthur(phi_alpha_part(alpha)):
                raise ReplayError("alpha-side seed does not match")
            return scratch.add(PacketFact(theta_lift_param(contragredient(g.phi), alpha),
                                          theta_lift_rep(contragredient(g.pi), alpha), Status.IN, Rule.THETA,
                                          (g.id, h.id), g.coefficient * h.coefficient, _params(alpha=alpha)))
        if f.rule in (Rule.CLOSURE, Rule.INFINITESIMAL):
            return scratch.rule_closure_prune(f.phi, f.pi)
        if f.rule is Rule.THETA_REFUSED:
            alpha = f.param("alpha")
            source = from_json(json.loads(f.param("source")))
            if adams_threshold_ok(source, alpha):
                raise ReplayError("refused transport now passes the threshold")
            scratch.rule_theta_transport(source, alpha)
            return next((g for g in scratch.stored(f.phi, f.pi) if g.rule is Rule.THETA_REFUSED), f)
        raise ReplayError(f"no replay for rule {f.rule.value}")

    def replay(self, fid: str) -> bool:
        f = self.facts[fid]
        got = self._recompute(f, KnowledgeBase())
        if got.id != fid:
            raise ReplayError(f"fact {fid} replays to {got.id}")
        return True

    def replay_all(self) -> int:
        for fid in self.facts:
            self.replay(fid)
        return len(self.facts)

    def is_contragredient_invariant(self) -> bool:
        for f in self.facts.values():
            if f.status is Status.UNKNOWN:
                continue
            if self.query(contragredient(f.phi), contragredient(f.pi)).status is not f.status:
                return False
        return True

    def export(self) -> dict:
        return {"format": JOURNAL_FORMAT, "version": JOURNAL_VERSION,
                "facts": [f.to_json() for f in self.facts.values()]}


def derive_from(kb: KnowledgeBase, phi: Multisegment, alphas: Iterable[int]) -> dict:
    """Seed phi (if not yet seeded) and transport along each alpha."""
    if not kb.seeded_in(phi):
        kb.seed(phi)
    out = {a: kb.rule_theta_transport(phi, a) for a in alphas}
    kb.close_contragredient()
    return out
