"""Hedging VaR against every model within L-infinity distance eps.

X ~ Exp(1), pricing density gamma(x) = x, bounded positions 0 <= g <= 1,
p = 0.9, budget 0.5. The plain VaR optimizer pays out 1 only above
VaR_p(gamma) = log 10; an adversary moving X by 0.01 pushes enough mass
past that line to make the realized VaR 1. The worst-case optimizer moves
the threshold out by eps and pays a higher floor q, after which no
adversary in the ball can do better than q.

Run: python3 demos/worst_case_var.py
"""

from riskrobust import DroSpec, Exponential, MarketModel, PricingDensity, solve_dro_var_bd, solve_var_bd, worst_case_var
from riskrobust.solution import Constraint, ProblemSpec

model = MarketModel(Exponential(1.0), PricingDensity.linear(1.0))
spec = ProblemSpec(0.9, 0.5, Constraint.BOUNDED, 1.0)

plain = solve_var_bd(model, spec)
print(f"plain optimizer: q' = {plain.params['q_prime']:.10f}")
for eps in (0.001, 0.01, 0.1):
    wc_plain = worst_case_var(model, plain, 0.9, eps, n_adversarial=200)
    g = solve_dro_var_bd(model, DroSpec(spec, eps))
    wc = worst_case_var(model, g, 0.9, eps, n_adversarial=200)
    print(f"eps {eps:<6g} plain worst case {wc_plain:.4f}   robust q {g.params['q']:.10f}  worst case {wc:.10f}")
