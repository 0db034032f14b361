"""Walk through the half pair nu^{1/2} + nu^{-1/2} lifted with alpha = 2, and the wide pair that fails."""
from thetagl.certify import certify_theta
from thetagl.duality import check_dual_sum_identity
from thetagl.geometry import chain, hasse_diagram, orbit_dim
from thetagl.params import adams_threshold_ok, format_parameter, parse_parameter, theta_lift_param

for text in ("nu^{1/2}+nu^{-1/2}", "nu^{3/2}+nu^{-3/2}"):
    phi = parse_parameter(text)
    lift = theta_lift_param(phi, 2)
    chk = check_dual_sum_identity(phi, 2)
    print(f"phi = {format_parameter(phi)}")
    print(f"  phi_2 = {format_parameter(lift)}")
    print(f"  threshold {'holds' if adams_threshold_ok(phi, 2) else 'fails'}")
    print(f"  dual of phi_2 = {format_parameter(chk.lhs)}, sum of duals = {format_parameter(chk.rhs)}")
    rep = certify_theta(phi, 2)
    for c in rep.chains:
        print(f"  {c.chain}: certificate clauses {c.certificate.clauses}")
    print(f"  fixed point: {rep.fixed_point}")

V = chain((2, 2))
h = hasse_diagram(V)
print("orbits of the (2,2) chain, open first:")
for t in h.nodes:
    print(f"  dim {orbit_dim(V, t)}: {format_parameter(t.to_multisegment())}")
