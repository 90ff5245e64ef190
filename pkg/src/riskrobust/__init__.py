"""Optimal VaR and ES hedging positions and the robustness of their optimizers."""

from .dro_optimizer import DroSpec, solve_dro_var_bd, worst_case_var
from .errors import AssumptionError, DomainError, Nonexistence, NumericError
from .es_optimizers import es_cm_witness, solve_es_bd, solve_es_cm, solve_es_ns
from .market_model import (
    EmpiricalAtoms,
    Exponential,
    Lognormal,
    MarketModel,
    Pareto,
    PricingDensity,
    Uniform,
    check_assumptions,
    expect_gamma_indicator,
    quantile,
)
from .metrics import MetricKind, coupled_distance, prokhorov_discrete
from .perturbations import LemmaA2, Noise, Scale, Shift, TailSpike
from .risk_measures import es, es_dual_check, var
from .robustness import RobustnessReport, check_continuity_criterion, probe, rho_continuity
from .solution import Constraint, ProblemSpec, SolutionFunction
from .var_optimizers import solve_var_bd, solve_var_ns, var_cm_witness, var_cm_witness_sequence

__version__ = "0.1.0"
