import math

import numpy as np
import pytest

from riskrobust import (
    DomainError,
    DroSpec,
    Exponential,
    LemmaA2,
    MarketModel,
    MetricKind,
    PricingDensity,
    Shift,
    SolutionFunction,
    TailSpike,
    Uniform,
    check_continuity_criterion,
    es_cm_witness,
    probe,
    rho_continuity,
    solve_dro_var_bd,
    solve_es_bd,
    solve_es_cm,
    solve_es_ns,
    solve_var_bd,
    solve_var_ns,
    var_cm_witness,
)
from riskrobust.metrics import Kind
from riskrobust.robustness import GapPoint, Guarantee, Verdict, decide
from riskrobust.solution import Constraint, ProblemSpec

LINF, L2, PW = MetricKind.linf(), MetricKind.lq(2.0), MetricKind.prokhorov()
METRICS = (LINF, L2, PW)
DELTAS = [0.1, 0.01, 0.001]


@pytest.fixture(scope="module")
def uniform():
    return MarketModel(Uniform(0.0, 1.0), PricingDensity.constant())


@pytest.fixture(scope="module")
def exp_linear():
    return MarketModel(Exponential(1.0), PricingDensity.linear(1.0))


@pytest.fixture(scope="module")
def var_ns(uniform):
    return solve_var_ns(uniform, ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING))


@pytest.fixture(scope="module")
def es_ns(uniform):
    return solve_es_ns(uniform, ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING))


def pt(gap, stderr=0.0):
    return GapPoint(0.1, 0.1, gap, 0.0, gap, stderr, "analytic")


# --------------------------------------------------------------------------
# decision rule
# --------------------------------------------------------------------------


def test_decide():
    assert decide([pt(0.8), pt(0.78), pt(0.77)]) is Verdict.NON_ROBUST
    assert decide([pt(0.1), pt(0.01), pt(0.0)]) is Verdict.ROBUST
    assert decide([pt(0.1), pt(0.0), pt(1e-3)]) is Verdict.INCONCLUSIVE  # rebounds above tau
    assert decide([pt(0.0), pt(0.5), pt(0.0)]) is Verdict.INCONCLUSIVE  # grows before it vanishes
    assert decide([pt(0.5), pt(0.0), pt(0.5)]) is Verdict.INCONCLUSIVE
    assert decide([]) is Verdict.INCONCLUSIVE
    assert decide([pt(0.5), pt(0.5)]) is Verdict.INCONCLUSIVE  # too short to call NonRobust


def test_noisy_last_point_cannot_hide_a_gap():
    # precise points pin the curve near 0.77; the last one is too noisy to see it
    points = [pt(0.79, 1e-4), pt(0.776, 5e-5), pt(0.7748, 2e-5), pt(0.7746, 0.09)]
    for p, d in zip(points, (0.1, 0.01, 0.001, 1e-4)):
        p.distance = d
    assert decide(points) is Verdict.INCONCLUSIVE


def test_tau_scales_with_stderr():
    assert pt(0.0, 0.0).tau == pytest.approx(1e-5)
    assert decide([pt(0.02, 0.01)] * 3) is Verdict.ROBUST
    assert decide([pt(0.2, 0.01)] * 3) is Verdict.NON_ROBUST


# --------------------------------------------------------------------------
# probe
# --------------------------------------------------------------------------


def test_var_shift_gap_is_the_jump(uniform, var_ns):
    q = var_ns.params["q"]
    for metric in METRICS:
        rep = probe(uniform, var_ns, "var", Shift(), metric, DELTAS, 0.9)
        assert rep.verdict is Verdict.NON_ROBUST
        for d, point in zip(DELTAS, rep.points):
            assert point.solvency_gap == pytest.approx(0.9 + d - q, abs=1e-12)
            assert point.solvency_gap >= 0.77
        if metric is PW:
            assert all(p.distance <= d + 1e-12 for d, p in zip(DELTAS, rep.points))
        else:
            assert [p.distance for p in rep.points] == DELTAS


def test_var_smearing_probe_is_non_robust(uniform, var_ns):
    rep = probe(uniform, var_ns, "var", LemmaA2(0.9, 0.9), LINF, DELTAS, 0.9, n_samples=200_000)
    assert rep.verdict is Verdict.NON_ROBUST
    assert all(p.mode == "monte_carlo" and p.distance <= p.eps for p in rep.points)
    assert min(rep.gaps) > 0.7


def test_es_shift_is_robust(uniform, es_ns):
    for metric in (LINF, L2):
        rep = probe(uniform, es_ns, "es", Shift(), metric, DELTAS, 0.9)
        assert rep.verdict is Verdict.ROBUST
        assert all(abs(p.solvency_gap) <= d + 1e-12 for d, p in zip(DELTAS, rep.points))


def test_es_smearing_probe_is_robust(uniform, es_ns):
    rep = probe(uniform, es_ns, "es", LemmaA2(0.9, 0.9), LINF, DELTAS, 0.9, n_samples=200_000)
    assert rep.verdict is Verdict.ROBUST
    assert all(abs(p.solvency_gap) <= d + 3 * p.mc_stderr + 1e-12 for d, p in zip(DELTAS, rep.points))


def test_constant_position_has_zero_gap(uniform):
    g = SolutionFunction.constant(0.2)
    for fam in (Shift(), LemmaA2(0.9, 0.9), TailSpike()):
        for rho in ("var", "es"):
            rep = probe(uniform, g, rho, fam, LINF, DELTAS, 0.9, n_samples=20_000)
            assert rep.gaps == [0.0, 0.0, 0.0] and rep.verdict is Verdict.ROBUST


def test_tail_spike_defeats_es_under_prokhorov(exp_linear):
    g = solve_es_ns(exp_linear, ProblemSpec(0.9, 0.5, Constraint.NO_SHORT_SELLING))
    rep = probe(exp_linear, g, "es", TailSpike(), PW, DELTAS, 0.9, n_samples=200_000)
    assert rep.verdict is Verdict.NON_ROBUST
    dists = [p.distance for p in rep.points]
    assert dists == pytest.approx(DELTAS, abs=1e-12)
    assert all(b > a for a, b in zip(rep.gaps, rep.gaps[1:]))


def test_optimality_gap_is_reported(uniform, var_ns):
    spec = ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING)
    rep = probe(uniform, var_ns, "var", Shift(), LINF, DELTAS, 0.9,
                resolve=lambda m: solve_var_ns(m, spec))
    for point in rep.points:
        assert point.optimality_gap is not None
        assert point.optimality_gap + point.optimality_shift == pytest.approx(point.solvency_gap, abs=1e-12)


def test_probe_is_deterministic(uniform, var_ns):
    a = probe(uniform, var_ns, "var", LemmaA2(0.9, 0.9), LINF, DELTAS, 0.9, n_samples=10_000, seed=5)
    b = probe(uniform, var_ns, "var", LemmaA2(0.9, 0.9), LINF, DELTAS, 0.9, n_samples=10_000, seed=5)
    assert a.to_dict() == b.to_dict()


def test_probe_validation(uniform, var_ns):
    with pytest.raises(DomainError):
        probe(uniform, var_ns, "var", Shift(), LINF, [0.01, 0.1], 0.9)
    with pytest.raises(DomainError):
        probe(uniform, var_ns, "var", Shift(), LINF, [0.1, 0.0], 0.9)
    with pytest.raises(DomainError):
        probe(uniform, var_ns, "median", Shift(), LINF, DELTAS, 0.9)


def test_report_serializes(uniform, var_ns):
    d = probe(uniform, var_ns, "var", Shift(), L2, DELTAS, 0.9).to_dict()
    assert d["metric"] == "lq:2" and d["verdict"] == "NonRobust" and len(d["gap_curve"]) == 3


# --------------------------------------------------------------------------
# structural criterion
# --------------------------------------------------------------------------


def shipped_solutions(uniform, exp_linear):
    ns_u = ProblemSpec(0.9, 0.2, Constraint.NO_SHORT_SELLING)
    cm_u = ProblemSpec(0.9, 0.2, Constraint.COMPLETE_MARKET)
    bd_e = ProblemSpec(0.9, 0.5, Constraint.BOUNDED, 1.0)
    return {
        "var_ns": solve_var_ns(uniform, ns_u),
        "var_bd": solve_var_bd(exp_linear, bd_e),
        "var_cm_witness": var_cm_witness(uniform, cm_u, -5.0),
        "dro_var_bd": solve_dro_var_bd(exp_linear, DroSpec(bd_e, 0.1)),
        "es_ns_uniform": solve_es_ns(uniform, ns_u),
        "es_ns_exp": solve_es_ns(exp_linear, ProblemSpec(0.9, 0.5, Constraint.NO_SHORT_SELLING)),
        "es_bd": solve_es_bd(exp_linear, bd_e),
        "es_cm": solve_es_cm(uniform, cm_u),
        "es_cm_witness": list(es_cm_witness(exp_linear, ProblemSpec(0.9, 0.0, Constraint.COMPLETE_MARKET), [1.0]))[0],
    }


def test_rho_continuity():
    assert rho_continuity("var") == frozenset()
    assert rho_continuity("es") == {Kind.LINF, Kind.LQ}
    assert rho_continuity("es", uniformly_integrable=True) == {Kind.LINF, Kind.LQ, Kind.PROKHOROV}
    with pytest.raises(DomainError):
        rho_continuity("mean")


def test_criterion_is_exhaustive_over_shipped_forms(uniform, exp_linear):
    sols = shipped_solutions(uniform, exp_linear)
    continuous = {"es_ns_uniform", "es_cm"}
    for name, g in sols.items():
        assert (not g.jump_locations()) == (name in continuous), name
        for rho in ("var", "es"):
            for ui in (False, True):
                cont = rho_continuity(rho, ui)
                for metric in METRICS:
                    got = check_continuity_criterion(g, cont, metric)
                    want = name in continuous and metric.kind in cont
                    assert (got is Guarantee.GUARANTEED_ROBUST) == want, (name, rho, metric.label)


def test_capped_identity_is_guaranteed_under_lq(uniform, es_ns):
    r = es_ns.params["r"]
    assert es_ns(0.1) == 0.1 and es_ns(0.95) == pytest.approx(r)
    assert check_continuity_criterion(es_ns, rho_continuity("es"), L2) is Guarantee.GUARANTEED_ROBUST
    assert check_continuity_criterion(es_ns, rho_continuity("es"), PW) is Guarantee.NO_GUARANTEE
