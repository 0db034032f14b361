"""Command line: thetagl {dual,theta,orbits,hasse,verify-fpf,kb}.

Exit codes: 0 success, 1 a verification failed, 2 usage or parse error,
3 a resource bound was hit. Randomised commands print their seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import geometry as geo
from .certify import certify_theta
from .duality import check_dual_sum_identity, dual, zelevinsky_dual
from .knowledge import KnowledgeBase, KnowledgeError, derive_from, ks_parameter
from .params import (
    ParseError,
    adams_threshold_ok,
    contragredient,
    format_parameter,
    m_beta,
    parse_lambda,
    parse_parameter,
    theta_lift_param,
    to_json,
)

CONFIG_ENV = "THETAGL_CONFIG"
KB_ENV = "THETAGL_KB"
SCHEMA_VERSION = 1

OK, FAILED, USAGE, BOUND = 0, 1, 2, 3


@dataclass
class RunConfig:
    seed: int = 0
    samples: int = 3
    height_bound: int = geo.DEFAULT_HEIGHT
    output: str = "text"


class UsageError(Exception):
    pass


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    path = os.environ.get(CONFIG_ENV)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            raise UsageError(f"cannot read config {path}: {e}")
        for k, v in data.items():
            if hasattr(cfg, k):
                setattr(cfg, k, v)
    for k in ("seed", "samples", "height_bound"):
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    if getattr(args, "json", False):
        cfg.output = "json"
    elif getattr(args, "dot", False):
        cfg.output = "dot"
    return cfg


def _emit(obj, cfg: RunConfig, text: str):
    if cfg.output == "json":
        print(json.dumps(obj, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _phi(text: str):
    return parse_parameter(text)


# --- commands -------------------------------------------------------------------

def cmd_dual(args, cfg: RunConfig) -> int:
    phi = _phi(args.phi)
    res = zelevinsky_dual(phi)
    obj = {"schema": SCHEMA_VERSION, "input": to_json(phi), "dual": to_json(res.dual),
           "text": format_parameter(res.dual),
           "trace": [{"chosen": [format_parameter(type(res.dual)([s])) for s in st.chosen],
                      "produced": format_parameter(type(res.dual)([st.produced]))} for st in res.trace]}
    lines = [format_parameter(res.dual)]
    if args.trace:
        for k, st in enumerate(obj["trace"], 1):
            lines.append(f"  step {k}: {', '.join(st['chosen'])} -> {st['produced']}")
    _emit(obj, cfg, "\n".join(lines))
    return OK


def cmd_theta(args, cfg: RunConfig) -> int:
    phi = _phi(args.phi)
    alpha = args.alpha
    if alpha < 0:
        raise UsageError("alpha must be nonnegative")
    lifted = theta_lift_param(phi, alpha)
    obj = {"schema": SCHEMA_VERSION, "phi": format_parameter(phi), "alpha": alpha,
           "phi_alpha": format_parameter(lifted)}
    lines = [f"phi_alpha: {format_parameter(lifted)}"]
    if alpha == 0:
        obj["contragredient"] = True
        lines.append("alpha = 0: phi_alpha is the contragredient")
        _emit(obj, cfg, "\n".join(lines))
        return OK
    mb = m_beta(contragredient(phi), f"{alpha - 1}/2")
    thr = adams_threshold_ok(phi, alpha)
    ident = check_dual_sum_identity(phi, alpha)
    obj.update({"threshold": thr, "m_beta": None if mb is None else str(mb), "beta": f"{alpha - 1}/2",
                "identity": ident.ok, "dual_phi_alpha": format_parameter(ident.lhs),
                "dual_sum": format_parameter(ident.rhs)})
    mtxt = "none" if mb is None else str(mb)
    lines.append(f"threshold: {'OK' if thr else 'FAIL'} (m^beta = {mtxt}, beta = {alpha - 1}/2)")
    if ident.ok:
        lines.append(f"dual-sum identity: OK ({format_parameter(ident.lhs)})")
    else:
        lines.append(f"dual-sum identity: FAIL ({format_parameter(ident.lhs)} vs {format_parameter(ident.rhs)})")
    _emit(obj, cfg, "\n".join(lines))
    return OK


def _chains(args):
    if args.lam:
        lam = parse_lambda(args.lam)
    elif args.phi:
        from .params import infinitesimal
        lam = infinitesimal(_phi(args.phi))
    else:
        raise UsageError("give --lambda or --phi")
    return geo.varieties_of(lam)


def cmd_orbits(args, cfg: RunConfig) -> int:
    out, lines = [], []
    for V in _chains(args):
        tris = geo.orbits(V, bound=args.bound)
        rows = [{"orbit": format_parameter(t.to_multisegment()), "dim": geo.orbit_dim(V, t),
                 "dual": format_parameter(dual(t.to_multisegment()))} for t in tris]
        out.append({"chain": str(V), "dim_V": V.dim_V, "orbits": rows})
        lines.append(f"{V}: dim V = {V.dim_V}, {len(rows)} orbits")
        lines += [f"  [{r['dim']:>3}] {r['orbit']}   dual: {r['dual']}" for r in rows]
    _emit({"schema": SCHEMA_VERSION, "chains": out}, cfg, "\n".join(lines))
    return OK


def cmd_hasse(args, cfg: RunConfig) -> int:
    chains = _chains(args)
    docs, lines = [], []
    for V in chains:
        h = geo.hasse_diagram(V, bound=args.bound)
        docs.append(h)
        lines.append(f"{V}: {len(h.nodes)} nodes, {len(h.edges)} covering relations")
        names = [format_parameter(t.to_multisegment()) for t in h.nodes]
        for i, j in h.edges:
            lines.append(f"  {names[j]}  <  {names[i]}")
    if cfg.output == "dot":
        text = "\n".join(h.to_dot() for h in docs)
        if args.out:
            Path(args.out).write_text(text)
        else:
            print(text, end="")
        return OK
    obj = {"schema": SCHEMA_VERSION, "chains": [
        {"chain": str(h.chain), "nodes": [format_parameter(t.to_multisegment()) for t in h.nodes],
         "covers": [[i, j] for i, j in h.edges]} for h in docs]}
    _emit(obj, cfg, "\n".join(lines))
    return OK


def cmd_verify_fpf(args, cfg: RunConfig) -> int:
    phi = _phi(args.phi)
    if args.alpha < 1:
        raise UsageError("alpha must be positive")
    rep = certify_theta(phi, args.alpha, seed=cfg.seed, height=cfg.height_bound, samples=cfg.samples)
    obj = {"schema": SCHEMA_VERSION, "config": asdict(cfg), **rep.to_json()}
    lines = [f"seed {cfg.seed}, samples {cfg.samples}, height bound {cfg.height_bound}",
             f"phi = {format_parameter(phi)}, alpha = {args.alpha}, "
             f"threshold {'holds' if rep.threshold else 'fails'}"]
    for c in rep.chains:
        cl = c.certificate.clauses
        lines.append(f"{c.chain} (alpha slots {list(c.split)})")
        lines.append("  regular conormal pair: " + ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in cl.items()))
        if c.certificate.detail:
            lines.append(f"    witness: {json.dumps(c.certificate.detail, default=str)}")
        lines.append(f"  s trivial in microlocal group: {'ok' if c.central else 'FAIL'} ({c.central.reason})")
        lem = c.lemma1
        lines.append(f"  conormal decomposition over V^x: {'ok' if lem.lemma_ok else 'FAIL'}; "
                     f"closure intersection: {'ok' if lem.closure_ok else 'FAIL'} ({lem.checks} checks)")
        if lem.witness:
            lines.append(f"    witness: {json.dumps(lem.witness)}")
    fp = rep.fixed_point
    if fp is not None:
        state = "skipped" if fp.get("ok") is None else ("ok" if fp["ok"] else "FAIL")
        extra = {k: v for k, v in fp.items() if k != "ok"}
        lines.append(f"fixed point formula (standard basis): {state}" + (f" {extra}" if extra else ""))
    lines.append("PASS" if rep.ok else "FAIL")
    _emit(obj, cfg, "\n".join(lines))
    return OK if rep.ok else FAILED


def _kb(args) -> KnowledgeBase:
    path = args.journal or os.environ.get(KB_ENV) or "thetagl-kb.jsonl"
    return KnowledgeBase(Path(path))


def cmd_kb(args, cfg: RunConfig) -> int:
    kb = _kb(args)
    if args.kb_cmd == "seed":
        if args.ks:
            facts = kb.seed_ks()
        elif args.phi:
            facts = kb.seed(_phi(args.phi))
            if not facts:
                print(f"no unconditional seed applies to {args.phi}", file=sys.stderr)
                return FAILED
        else:
            raise UsageError("kb seed needs --phi or --ks")
        kb.close_contragredient()
        _emit([f.to_json() for f in facts], cfg, "\n".join(f.describe() for f in facts))
        return OK
    if args.kb_cmd == "derive":
        phi = ks_parameter() if args.source.upper() == "KS" else _phi(args.source)
        res = derive_from(kb, phi, args.alpha)
        obj, lines = {}, []
        for a, facts in res.items():
            n = phi.dim + a
            obj[str(a)] = [f.to_json() for f in facts]
            if facts:
                lines.append(f"alpha = {a}: {len(facts)} IN facts for GL_{n}")
                lines += [f"  {f.describe()}" for f in facts]
            else:
                lines.append(f"alpha = {a}: refused (threshold fails)")
        _emit(obj, cfg, "\n".join(lines))
        return OK
    if args.kb_cmd == "query":
        phi = ks_parameter() if args.phi.upper() == "KS" else _phi(args.phi)
        pi = _phi(args.pi)
        ans = kb.query(phi, pi)
        obj = {"status": ans.status.value, "trace": [f.to_json() for f in ans.trace]}
        text = "\n".join([ans.status.value] + [f"  {f.describe()}" for f in ans.trace])
        _emit(obj, cfg, text)
        return OK
    if args.kb_cmd == "export":
        print(json.dumps(kb.export(), indent=2, sort_keys=True))
        return OK
    if args.kb_cmd == "replay":
        n = kb.replay_all()
        inv = kb.is_contragredient_invariant()
        print(f"{n} facts replayed; contragredient invariant: {inv}")
        return OK if inv else FAILED
    raise UsageError(f"unknown kb command {args.kb_cmd}")


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thetagl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, random_=False):
        sp.add_argument("--json", action="store_true", help="JSON output")
        if random_:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--samples", type=int)
            sp.add_argument("--height-bound", dest="height_bound", type=int)

    sp = sub.add_parser("dual", help="Zelevinsky dual by the MW algorithm")
    sp.add_argument("phi")
    sp.add_argument("--trace", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_dual)

    sp = sub.add_parser("theta", help="theta lift of a parameter, threshold and dual-sum identity")
    sp.add_argument("phi")
    sp.add_argument("alpha", type=int)
    common(sp)
    sp.set_defaults(func=cmd_theta)

    for name, fn, text in (("orbits", cmd_orbits, "orbits of each chain variety with their duals"),
                           ("hasse", cmd_hasse, "closure order as a Hasse diagram")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--lambda", dest="lam")
        sp.add_argument("--phi")
        sp.add_argument("--bound", type=int, default=geo.DEFAULT_HASSE_BOUND)
        if name == "hasse":
            sp.add_argument("--dot", action="store_true")
            sp.add_argument("--out")
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("verify-fpf", help="certificates for the fixed point formula")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--alpha", type=int, required=True)
    common(sp, random_=True)
    sp.set_defaults(func=cmd_verify_fpf)

    sp = sub.add_parser("kb", help="ABV-packet fact base")
    sp.add_argument("--journal", help=f"journal file (default ${KB_ENV} or ./thetagl-kb.jsonl)")
    kbs = sp.add_subparsers(dest="kb_cmd", required=True)
    s = kbs.add_parser("seed")
    s.add_argument("--phi")
    s.add_argument("--ks", action="store_true")
    common(s)
    s = kbs.add_parser("derive")
    s.add_argument("--from", dest="source", required=True, help="parameter, or KS")
    s.add_argument("--alpha", type=int, nargs="+", required=True)
    common(s)
    s = kbs.add_parser("query")
    s.add_argument("--phi", required=True)
    s.add_argument("--pi", required=True)
    common(s)
    s = kbs.add_parser("export")
    s.add_argument("--json", action="store_true", help="accepted for symmetry; export is always JSON")
    kbs.add_parser("replay")
    sp.set_defaults(func=cmd_kb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except geo.BoundExceeded as e:
        print(f"bound exceeded: {e}", file=sys.stderr)
        return BOUND
    except geo.UnstableSample as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return FAILED
    except (ParseError, UsageError, KnowledgeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE

if __name__ == "__main__":
    sys.exit(main())
