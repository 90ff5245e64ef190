"""ES is robust in L-q but not in the weak (Prokhorov) topology.

With probability eps the loss gains eps**-2. The two laws are within
Prokhorov distance eps, yet the ES of the position grows like 1/eps: the
spike is rare enough to be invisible to weak convergence and large enough
to dominate the tail average.

Run: python3 demos/tail_spike.py
"""

from riskrobust import Exponential, MarketModel, MetricKind, PricingDensity, TailSpike, probe, solve_es_ns
from riskrobust.solution import Constraint, ProblemSpec

model = MarketModel(Exponential(1.0), PricingDensity.linear(1.0))
g = solve_es_ns(model, ProblemSpec(0.9, 0.5, Constraint.NO_SHORT_SELLING))
print(f"ES optimum on the model: {g.info['objective']:.10f}")

rep = probe(model, g, "es", TailSpike(), MetricKind.prokhorov(), [0.1, 0.01, 0.001], 0.9, n_samples=500_000)
print(f"{'eps':>8} {'Prokhorov':>10} {'ES gap':>14} {'stderr':>10}")
for pt in rep.points:
    print(f"{pt.eps:>8g} {pt.distance:>10.5f} {pt.solvency_gap:>14.4f} {pt.mc_stderr:>10.4f}")
print(f"verdict: {rep.verdict.value}")
