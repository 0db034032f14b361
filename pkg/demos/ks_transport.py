"""Seed the GL_16 Kashiwara-Saito packet and transport it along theta lifts."""
from thetagl.knowledge import KnowledgeBase, derive_from, ks_parameter
from thetagl.params import contragredient, format_parameter

kb = KnowledgeBase()
out = derive_from(kb, contragredient(ks_parameter()), range(1, 7))
for alpha, facts in out.items():
    if not facts:
        print(f"alpha {alpha}: refused (threshold fails)")
        continue
    print(f"alpha {alpha}: GL_{facts[0].phi.dim}, packet of size {len(facts)}")
    for f in facts:
        print(f"    {format_parameter(f.pi)}  coeff {f.coefficient:+d}")
print(f"{len(kb)} facts, {kb.replay_all()} replayed, contragredient invariant: {kb.is_contragredient_invariant()}")
