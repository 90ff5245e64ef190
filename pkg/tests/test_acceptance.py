"""Acceptance suite: one PASS/FAIL line per criterion.

Each ``criterion_N`` returns a list of ``(check, ok, detail)`` and the
wall time is compared with its budget. Under pytest every criterion is a
test and the lines are repeated in the terminal summary; run the file
directly to print the lines without pytest.
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from riskrobust import (
    DroSpec,
    EmpiricalAtoms,
    Exponential,
    LemmaA2,
    Lognormal,
    MarketModel,
    MetricKind,
    Noise,
    PricingDensity,
    Scale,
    Shift,
    SolutionFunction,
    TailSpike,
    Uniform,
    check_continuity_criterion,
    es,
    es_cm_witness,
    prokhorov_discrete,
    probe,
    rho_continuity,
    solve_dro_var_bd,
    solve_es_bd,
    solve_es_cm,
    solve_es_ns,
    solve_var_bd,
    solve_var_ns,
    var,
    var_cm_witness_sequence,
    worst_case_var,
)
from riskrobust.perturbations import stream
from riskrobust.risk_measures import es_empirical, var_empirical
from riskrobust.robustness import Guarantee, Verdict
from riskrobust.solution import Constraint, ProblemSpec
from riskrobust.var_optimizers import price, solve_var_cm

LINF, L2, PW = MetricKind.linf(), MetricKind.lq(2.0), MetricKind.prokhorov()
DELTAS = [0.1, 0.01, 0.001]
FULL_SAMPLES = 1_000_000
PKG_ROOT = Path(__file__).resolve().parents[1]

RESULTS: list = []


def uniform_model():
    return MarketModel(Uniform(0.0, 1.0), PricingDensity.constant())


def exp_model():
    return MarketModel(Exponential(1.0), PricingDensity.linear(1.0))


def close(name, got, want, tol):
    return (name, abs(got - want) <= tol, f"got {got!r}, want {want!r} +- {tol:g}")


def holds(name, ok, detail=""):
    return (name, bool(ok), detail)


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------


def criterion_1():
    checks = []
    dists = {"uniform": Uniform(0.0, 1.0), "exponential": Exponential(1.0), "lognormal": Lognormal(0.0, 1.0)}
    rng = np.random.default_rng(20240611)
    for name, dist in dists.items():
        law = oracles.LAWS[name]
        xs = law.rvs(size=FULL_SAMPLES, random_state=rng)  # iid, so the stderr is honest
        for p in (0.5, 0.9, 0.99):
            v, e = oracles.var_oracle(law, p), oracles.es_oracle(law, p)
            checks.append(close(f"VaR {name} p={p}", var(dist, p), v, 1e-8))
            checks.append(close(f"ES {name} p={p}", es(dist, p), e, 1e-8))
            se_v = oracles.var_sample_stderr(law, p, xs.size)
            se_e = oracles.es_sample_stderr(xs, p)
            checks.append(close(f"empirical VaR {name} p={p}", var_empirical(xs, p), v, 3 * se_v))
            checks.append(close(f"empirical ES {name} p={p}", es_empirical(xs, p), e, 3 * se_e))
    return checks


def criterion_2():
    g = solve_var_ns(uniform_model(), ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING))
    q = g.params["q"]
    return [
        close("q", q, (1.8 - math.sqrt(2.4)) / 2, 1e-9),
        holds("budget residual", abs(price(uniform_model(), g) - 0.2) < 1e-8),
        close("VaR of g(X)", g.pushforward(Uniform(0.0, 1.0)).quantile(0.9), q, 1e-9),
        holds("q below VaR_p(X)", q < 0.9 == var(Uniform(0.0, 1.0), 0.9), f"q = {q!r}"),
    ]


def criterion_3():
    g = solve_var_bd(exp_model(), ProblemSpec(0.9, 0.5, Constraint.BOUNDED, 1.0))
    qp = g.params["q_prime"]
    return [
        close("q' vs quadrature oracle", qp, oracles.var_bd_exp_q(), 1e-6),
        close("q' vs stated value", qp, 0.2534437, 1e-6),
        holds("V2 verified", g.info["V2"]["holds"]),
    ]


def criterion_4():
    model = uniform_model()
    spec = ProblemSpec(0.9, 0.2, Constraint.COMPLETE_MARKET)
    seq = var_cm_witness_sequence(model, spec, [-1.0, -10.0, -100.0])
    checks = []
    for d, g in zip(seq.parameters, seq):
        checks.append(close(f"budget d={d:g}", price(model, g), 0.2, 1e-8))
        checks.append(holds(f"VaR = d exactly, d={d:g}", g.pushforward(model.x_dist).quantile(0.9) == d))
    try:
        solve_var_cm(model, spec)
        checks.append(holds("solver reports no minimizer", False))
    except Exception as exc:  # Nonexistence
        checks.append(holds("solver reports no minimizer", type(exc).__name__ == "Nonexistence"))
    return checks


def criterion_5():
    model = uniform_model()
    g = solve_var_ns(model, ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING))
    q = g.params["q"]
    checks = []
    for metric in (LINF, L2, PW):
        rep = probe(model, g, "var", Shift(), metric, DELTAS, 0.9)
        checks.append(holds(f"verdict {metric.label}", rep.verdict is Verdict.NON_ROBUST, rep.verdict.value))
        for d, pt in zip(DELTAS, rep.points):
            checks.append(holds(f"gap >= 0.77 at {d:g} ({metric.label})", pt.solvency_gap >= 0.77))
            checks.append(close(f"gap = 0.9 + d - q at {d:g} ({metric.label})", pt.solvency_gap, 0.9 + d - q, 1e-12))
            if metric is PW:
                checks.append(holds(f"distance <= d at {d:g} ({metric.label})", pt.distance <= d + 1e-12,
                                    f"{pt.distance!r}"))
            else:
                checks.append(close(f"distance = d at {d:g} ({metric.label})", pt.distance, d, 1e-15))
    # the same gaps from 10^6 coupled draws, without the pushforward
    xs = Uniform(0.0, 1.0).sample(stream(20240611), FULL_SAMPLES, stratified=False)
    for d in DELTAS:
        gap = var_empirical(g(xs + d), 0.9) - var_empirical(g(xs), 0.9)
        checks.append(holds(f"Monte Carlo gap >= 0.77 at {d:g}", gap >= 0.77, f"{gap!r}"))
    rep = probe(model, g, "var", LemmaA2(0.9, 0.9), LINF, DELTAS, 0.9, n_samples=FULL_SAMPLES)
    checks.append(holds("smearing verdict linf (10^6 draws)", rep.verdict is Verdict.NON_ROBUST, rep.verdict.value))
    return checks


def criterion_6():
    model = uniform_model()
    g = solve_es_ns(model, ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING))
    _, r_grid, _ = oracles.es_ns_uniform_grid()
    checks = [close("r vs grid oracle", g.params["r"], r_grid, 1e-6),
              close("r vs stated value", g.params["r"], 0.2254033, 1e-6)]
    for metric in (LINF, L2):
        for fam, n in ((Shift(), FULL_SAMPLES), (LemmaA2(0.9, 0.9), FULL_SAMPLES)):
            rep = probe(model, g, "es", fam, metric, DELTAS, 0.9, n_samples=n)
            tag = f"{fam.kind} {metric.label}"
            checks.append(holds(f"verdict {tag}", rep.verdict is Verdict.ROBUST, rep.verdict.value))
            for d, pt in zip(DELTAS, rep.points):
                checks.append(holds(f"gap <= d + 3 se at {d:g} ({tag})",
                                    abs(pt.solvency_gap) <= d + 3 * pt.mc_stderr, f"{pt.solvency_gap!r}"))
            gaps = [abs(x) for x in rep.gaps]
            checks.append(holds(f"gap non-increasing ({tag})", all(b <= a for a, b in zip(gaps, gaps[1:])), f"{gaps}"))
            checks.append(holds(f"gap < 1e-3 at 1e-3 ({tag})", gaps[-1] < 1e-3, f"{gaps[-1]!r}"))
    return checks


def criterion_7():
    model = uniform_model()
    g = solve_es_cm(model, ProblemSpec(0.9, 0.2, Constraint.COMPLETE_MARKET))
    checks = [holds("constant x0", g(0.0) == g(0.5) == g(1.0) == 0.2)]
    for fam in (Shift(), Scale(), Noise(), LemmaA2(0.9, 0.9), TailSpike()):
        rep = probe(model, g, "es", fam, LINF, DELTAS, 0.9, n_samples=100_000)
        checks.append(holds(f"zero gap under {fam.kind}", rep.gaps == [0.0] * 3, f"{rep.gaps}"))
    seq = es_cm_witness(exp_model(), ProblemSpec(0.9, 0.0, Constraint.COMPLETE_MARKET), [0.0, 1.0, 10.0, 100.0])
    slope = -math.exp(-10.0)
    checks.append(holds("slope k - y", abs(seq.slope / slope - 1.0) <= 1e-12, f"{seq.slope!r}"))
    for lam, v in zip(seq.parameters, seq.objective_values):
        ok = v == 0.0 if lam == 0 else abs(v / (lam * slope) - 1.0) <= 1e-12
        checks.append(holds(f"ES linear in lambda at {lam:g}", ok, f"{v!r}"))
    return checks


def criterion_8():
    model = exp_model()
    g = solve_es_ns(model, ProblemSpec(0.9, 0.5, Constraint.NO_SHORT_SELLING))
    rep = probe(model, g, "es", TailSpike(), PW, DELTAS, 0.9, n_samples=FULL_SAMPLES)
    dists = [pt.distance for pt in rep.points]
    return [
        holds("verdict NonRobust", rep.verdict is Verdict.NON_ROBUST, rep.verdict.value),
        holds("not Robust", rep.verdict is not Verdict.ROBUST),
        holds("Prokhorov distance vanishes", all(d <= e + 1e-12 for d, e in zip(dists, DELTAS)), f"{dists}"),
        holds("gap does not vanish", min(rep.gaps) > 1.0, f"{rep.gaps}"),
    ]


def criterion_9():
    model = exp_model()
    base = ProblemSpec(0.9, 0.5, Constraint.BOUNDED, 1.0)
    g = solve_dro_var_bd(model, DroSpec(base, 0.1))
    q = g.params["q"]
    wc = worst_case_var(model, g, 0.9, 0.1, n_adversarial=1000)
    rep = probe(model, g, "var", Shift(), LINF, [0.1, 0.05, 0.01, 0.001], 0.9)
    g0 = solve_dro_var_bd(model, DroSpec(base, 1e-8))
    qp = solve_var_bd(model, base).params["q_prime"]
    return [
        close("q vs oracle", q, oracles.dro_exp_q(), 1e-6),
        close("q vs stated value", q, 0.2775837, 1e-6),
        holds("worst case over 10^3 adversaries <= q + 1e-9", wc <= q + 1e-9, f"{wc!r}"),
        holds("verdict Robust under linf up to eps", rep.verdict is Verdict.ROBUST, rep.verdict.value),
        close("eps -> 0 limit", g0.params["q"], qp, 1e-6),
    ]


def _law(rng):
    n = int(rng.integers(1, 7))
    return EmpiricalAtoms(rng.normal(scale=0.5, size=n), rng.dirichlet(np.ones(n)))


def criterion_10():
    checks = []
    # "exact" means equal up to the rounding of the same pairwise distance
    for d in (0.0, 0.1, 0.4, 0.99, 1.0, 3.0):
        got = prokhorov_discrete(EmpiricalAtoms([0.0]), EmpiricalAtoms([d]))
        checks.append(close(f"point masses at distance {d:g}", got,
                            oracles.prokhorov_bruteforce([0.0], [1.0], [d], [1.0]), 1e-15))
    rng = np.random.default_rng(10)
    for k in range(40):
        xs, ys = np.round(rng.random(2), 2), np.round(rng.random(2), 2)
        xw, yw = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
        got = prokhorov_discrete(EmpiricalAtoms(xs, xw), EmpiricalAtoms(ys, yw))
        checks.append(close(f"2-atom instance {k}", got, oracles.prokhorov_bruteforce(xs, xw, ys, yw), 1e-15))
    worst_sym = worst_tri = 0.0
    in_range = True
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        a, b, c = _law(rng), _law(rng), _law(rng)
        ab, ba = prokhorov_discrete(a, b), prokhorov_discrete(b, a)
        worst_sym = max(worst_sym, abs(ab - ba))
        worst_tri = max(worst_tri, prokhorov_discrete(a, c) - ab - prokhorov_discrete(b, c))
        in_range &= 0.0 <= ab <= 1.0
    checks.append(holds("symmetry on 10^3 instances", worst_sym <= 1e-9, f"worst {worst_sym:g}"))
    checks.append(holds("triangle inequality on 10^3 instances", worst_tri <= 1e-9, f"worst {worst_tri:g}"))
    checks.append(holds("values in [0, 1]", in_range))
    return checks


def criterion_11():
    uni, ex = uniform_model(), exp_model()
    ns_u = ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING)
    bd_e = ProblemSpec(0.9, 0.5, Constraint.BOUNDED, 1.0)
    capped = solve_es_ns(uni, ns_u)
    checks = [
        holds("X ^ r is the capped identity", capped(0.1) == 0.1 and capped(0.99) == capped.params["r"]),
        holds("GuaranteedRobust for (X ^ r, ES, Lq)",
              check_continuity_criterion(capped, rho_continuity("es"), L2) is Guarantee.GUARANTEED_ROBUST),
    ]
    jumps = {
        "var_ns": solve_var_ns(uni, ns_u),
        "var_bd": solve_var_bd(ex, bd_e),
        "var_cm_witness": list(var_cm_witness_sequence(uni, ProblemSpec(0.9, 0.2, Constraint.COMPLETE_MARKET), [-1.0]))[0],
        "dro_var_bd": solve_dro_var_bd(ex, DroSpec(bd_e, 0.1)),
        "es_ns (exponential)": solve_es_ns(ex, ProblemSpec(0.9, 0.5, Constraint.NO_SHORT_SELLING)),
        "es_bd": solve_es_bd(ex, bd_e),
        "es_cm_witness": list(es_cm_witness(ex, ProblemSpec(0.9, 0.0, Constraint.COMPLETE_MARKET), [1.0]))[0],
    }
    for name, g in jumps.items():
        checks.append(holds(f"{name} has a jump", bool(g.jump_locations())))
        got = {check_continuity_criterion(g, rho_continuity(rho, ui), m)
               for rho in ("var", "es") for ui in (False, True) for m in (LINF, L2, PW)}
        checks.append(holds(f"NoGuarantee for {name}", got == {Guarantee.NO_GUARANTEE}, f"{got}"))
    return checks


def _compare_once(out_dir, a, b):
    env = dict(os.environ, PYTHONHASHSEED="0")
    res = subprocess.run([sys.executable, "-m", "riskrobust", "compare", "--config", a, "--config", b,
                          "--out-dir", out_dir], capture_output=True, env=env, cwd=PKG_ROOT)
    return res.returncode, res.stdout, (Path(out_dir) / "comparison.csv").read_bytes() if res.returncode == 0 else b""


def criterion_12():
    checks = []
    for a, b in (("var_ns_uniform", "es_ns_uniform"), ("var_ns_uniform_lemma", "es_ns_uniform_lemma")):
        with tempfile.TemporaryDirectory() as t1, tempfile.TemporaryDirectory() as t2:
            r1, out1, csv1 = _compare_once(t1, a, b)
            r2, out2, csv2 = _compare_once(t2, a, b)
        checks.append(holds(f"{a} vs {b} exits 0", r1 == r2 == 0, f"{r1}, {r2}"))
        checks.append(holds(f"{a} vs {b} byte-identical", csv1 == csv2 and out1 == out2 and len(csv1) > 0))
    return checks


# criterion -> (description, runtime budget in seconds or None)
CRITERIA = {
    1: ("risk measures vs quadrature and sampling", 10.0),
    2: ("VaR no-short-selling golden instance", 1.0),
    3: ("VaR bounded golden instance", 5.0),
    4: ("VaR complete-market nonexistence witness", None),
    5: ("VaR solution is not robust", 30.0),
    6: ("ES solution is robust", 30.0),
    7: ("ES complete market", None),
    8: ("ES tail spike under Prokhorov", None),
    9: ("worst-case VaR golden instance", None),
    10: ("Prokhorov distance suite", None),
    11: ("continuity criterion checker", None),
    12: ("compare is deterministic", None),
}


def evaluate(n):
    desc, budget = CRITERIA[n]
    t0 = time.perf_counter()
    try:
        checks = globals()[f"criterion_{n}"]()
    except Exception as exc:  # report, never hide
        checks = [holds("raised", False, f"{type(exc).__name__}: {exc}")]
    elapsed = time.perf_counter() - t0
    if budget is not None:
        checks.append(holds(f"runtime < {budget:g} s", elapsed < budget, f"{elapsed:.2f} s"))
    failed = [c for c in checks if not c[1]]
    status = "FAIL" if failed else "PASS"
    line = f"{status} criterion {n:>2}: {desc} ({len(checks) - len(failed)}/{len(checks)} checks, {elapsed:.2f} s)"
    for name, _, detail in failed:
        line += f"\n    failed: {name}: {detail}"
    RESULTS.append(line)
    print(line)
    return failed


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    failed = evaluate(n)
    assert not failed, failed


if __name__ == "__main__":
    bad = sum(bool(evaluate(n)) for n in sorted(CRITERIA))
    sys.exit(1 if bad else 0)
