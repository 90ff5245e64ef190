"""Experiment configuration files.

A config is a JSON object::

    {
      "schema_version": 1,
      "name": "var_ns_uniform",
      "model": {"x": {"family": "uniform", "params": {"a": 0, "b": 1}},
                "gamma": {"kind": "constant", "params": {}}},
      "problem": {"constraint": "ns", "p": 0.9, "x0": 0.2, "m": null, "epsilon": null},
      "rho": "var",
      "perturb": {"kind": "shift", "params": {}, "eps_grid": [0.1, 0.01, 0.001]},
      "metric": ["linf", "lq:2", "prokhorov"],
      "n_samples": 1000000,
      "seed": 20240101
    }

``metric`` may be a single name or a list. ``problem.epsilon`` turns a
bounded VaR problem into its worst-case version over the L-infinity ball.
Configs shipped with the package can be referred to by name.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List, Optional

from .dro_optimizer import DroSpec
from .errors import DomainError
from .market_model import MarketModel, PricingDensity, make_distribution
from .metrics import MetricKind
from .perturbations import LemmaA2, PerturbationFamily, make_family
from .solution import Constraint, ProblemSpec

SCHEMA_VERSION = 1


class ConfigError(DomainError):
    """The configuration file is malformed or inconsistent."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    raw: dict
    model: MarketModel
    problem: ProblemSpec
    dro: Optional[DroSpec]
    rho: str
    family: PerturbationFamily
    metrics: List[MetricKind]
    eps_grid: List[float]
    n_samples: int
    seed: int

    def instance_key(self):
        """Model and problem blocks, used to check two configs describe the same instance."""
        return json.dumps({"model": self.raw["model"], "problem": self.raw["problem"]}, sort_keys=True)


def bundled_configs() -> List[str]:
    root = resources.files("riskrobust") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read(path_or_name: str) -> dict:
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text()
    else:
        name = path.name[:-5] if path.name.endswith(".json") else path.name
        res = resources.files("riskrobust") / "configs" / f"{name}.json"
        if not res.is_file():
            raise ConfigError(f"config {path_or_name!r} is neither a file nor a bundled config")
        text = res.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _get(block, key, kind=None, required=True, default=None, where=""):
    if not isinstance(block, dict):
        raise ConfigError(f"{where or 'config'} must be an object")
    if key not in block or block[key] is None:
        if required:
            raise ConfigError(f"missing key {where + '.' if where else ''}{key}")
        return default
    val = block[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise ConfigError(f"{where}.{key} must be a finite number")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{where}.{key} must be an integer")
        return val
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{where}.{key} has the wrong type")
    return val


def build_gamma(block: dict) -> PricingDensity:
    kind = _get(block, "kind", str, where="model.gamma").lower()
    params = _get(block, "params", dict, required=False, default={}, where="model.gamma")
    try:
        if kind == "constant":
            return PricingDensity.constant(float(params.get("value", 1.0)))
        if kind == "linear":
            return PricingDensity.linear(float(params.get("slope", 1.0)))
        if kind == "exp_tilt":
            return PricingDensity.exp_tilt(float(params["theta"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad gamma parameters: {exc}") from None
    raise ConfigError(f"unknown gamma kind {kind!r}")


def build_model(block: dict) -> MarketModel:
    x = _get(block, "x", dict, where="model")
    family = _get(x, "family", str, where="model.x")
    params = _get(x, "params", dict, required=False, default={}, where="model.x")
    dist = make_distribution(family, **params)
    gamma = build_gamma(_get(block, "gamma", dict, required=False, default={"kind": "constant"}, where="model"))
    return MarketModel(dist, gamma)


def build_problem(block: dict):
    constraint = _get(block, "constraint", str, where="problem")
    try:
        kind = Constraint(constraint)
    except ValueError:
        raise ConfigError(f"unknown constraint {constraint!r}; expected cm, ns or bd") from None
    spec = ProblemSpec(
        p=_get(block, "p", float, where="problem"),
        x0=_get(block, "x0", float, where="problem"),
        constraint=kind,
        m=_get(block, "m", float, required=False, where="problem"),
    )
    eps = _get(block, "epsilon", float, required=False, where="problem")
    dro = DroSpec(spec, eps) if eps is not None else None
    return spec, dro


def build_family(block: dict, model: MarketModel, p: float) -> PerturbationFamily:
    kind = _get(block, "kind", str, where="perturb")
    params = dict(_get(block, "params", dict, required=False, default={}, where="perturb"))
    if kind.lower() == "lemma_a2":
        # threshold defaults to VaR_p(X) with phi the identity
        params.setdefault("p", p)
        if params.get("a") is None:
            params["a"] = float(model.x_dist.quantile(p))
        return LemmaA2(float(params["a"]), float(params["p"]),
                       quantile_coupled=bool(params.get("quantile_coupled", False)))
    return make_family(kind, **params)


def parse(data: dict) -> ExperimentConfig:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    name = _get(data, "name", str, required=False, default="experiment")
    model = build_model(_get(data, "model", dict))
    problem, dro = build_problem(_get(data, "problem", dict))
    if dro is not None and problem.constraint is not Constraint.BOUNDED:
        raise ConfigError("problem.epsilon is only supported for bounded problems")
    rho = _get(data, "rho", str).lower()
    if rho not in ("var", "es"):
        raise ConfigError(f"rho must be 'var' or 'es', got {rho!r}")
    if dro is not None and rho != "var":
        raise ConfigError("the worst-case problem is only defined for rho = var")
    perturb = _get(data, "perturb", dict)
    family = build_family(perturb, model, problem.p)
    eps_grid = _get(perturb, "eps_grid", list, where="perturb")
    if not eps_grid or not all(isinstance(e, (int, float)) and not isinstance(e, bool) and e > 0 for e in eps_grid):
        raise ConfigError("perturb.eps_grid must be a nonempty list of positive numbers")
    eps_grid = [float(e) for e in eps_grid]
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ConfigError("perturb.eps_grid must be strictly decreasing")
    metric = _get(data, "metric", None)
    names = [metric] if isinstance(metric, str) else metric
    if not isinstance(names, list) or not names or not all(isinstance(m, str) for m in names):
        raise ConfigError("metric must be a name or a list of names")
    metrics = [MetricKind.parse(m) for m in names]
    n_samples = _get(data, "n_samples", int, required=False, default=200_000)
    if n_samples < 100:
        raise ConfigError("n_samples must be at least 100")
    seed = _get(data, "seed", int)
    return ExperimentConfig(name, data, model, problem, dro, rho, family, metrics, eps_grid, n_samples, seed)


def load(path_or_name: str, seed: Optional[int] = None, samples: Optional[int] = None) -> ExperimentConfig:
    data = _read(path_or_name)
    if seed is not None:
        data["seed"] = seed
    if samples is not None:
        data["n_samples"] = samples
    return parse(data)
