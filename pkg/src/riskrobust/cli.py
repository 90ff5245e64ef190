"""Command line entry point.

Verbs::

    riskrobust solve --config CFG [--out-dir DIR]
    riskrobust probe --config CFG [--out-dir DIR] [--seed N] [--samples N]
    riskrobust compare --config A --config B [--out-dir DIR] [--seed N] [--samples N]
    riskrobust check-assumptions --config CFG [--out-dir DIR]

``CFG`` is a path to a JSON config or the name of a bundled one (see
``riskrobust.config``). Exit codes: 0 success, 2 invalid input, 3 a
structural assumption fails (or there is no minimizer to probe), 4 a
numerical routine failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import dro_optimizer, es_optimizers, var_optimizers
from .config import ConfigError, ExperimentConfig, bundled_configs, load
from .errors import AssumptionError, DomainError, Nonexistence, NumericError
from .market_model import check_assumptions
from .robustness import RobustnessReport, probe
from .solution import Constraint, SolutionFunction

EXIT_OK, EXIT_INVALID, EXIT_ASSUMPTION, EXIT_NUMERIC = 0, 2, 3, 4
GAP_HEADER = ["eps", "metric", "rho_at_Z", "rho_at_X", "solvency_gap", "mc_stderr"]


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def jsonable(obj):
    """Plain JSON types; floats keep their shortest round-trip repr and
    non-finite values become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value"):
        return obj.value
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(x) -> str:
    """17 significant digits: enough to round-trip any double."""
    v = _num(x)
    return v if isinstance(v, str) else format(v, ".17g")


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


def solve_config(cfg: ExperimentConfig) -> SolutionFunction:
    if cfg.dro is not None:
        return dro_optimizer.solve_dro_var_bd(cfg.model, cfg.dro)
    solver = var_optimizers.solve if cfg.rho == "var" else es_optimizers.solve
    return solver(cfg.model, cfg.problem)


def _problem_record(cfg: ExperimentConfig) -> Dict:
    rec = cfg.problem.to_dict()
    rec["epsilon"] = cfg.dro.epsilon if cfg.dro is not None else None
    rec["rho"] = cfg.rho
    return rec


def solution_record(cfg: ExperimentConfig, g: Optional[SolutionFunction], witness=None) -> Dict:
    rec = {
        "schema_version": 1,
        "name": cfg.name,
        "problem": _problem_record(cfg),
        "assumptions": check_assumptions(cfg.model, cfg.problem.p).to_dict(),
    }
    if g is not None:
        rec["status"] = "solved"
        rec["solution"] = g.to_dict()
        rec["objective"] = g.info.get("objective", g.info.get("worst_case_objective"))
        rec["diagnostics"] = {k: v for k, v in g.info.items() if k != "objective"}
    else:
        rec["status"] = "no_minimizer"
        rec["witness"] = {
            "parameters": list(witness.parameters),
            "objective_values": witness.objective_values,
        }
    return rec


def _resolver(cfg: ExperimentConfig):
    if cfg.dro is not None:
        return lambda model: dro_optimizer.solve_dro_var_bd(model, cfg.dro)
    solver = var_optimizers.solve if cfg.rho == "var" else es_optimizers.solve
    return lambda model: solver(model, cfg.problem)


def probe_config(cfg: ExperimentConfig, g: SolutionFunction) -> List[RobustnessReport]:
    return [
        probe(cfg.model, g, cfg.rho, cfg.family, metric, cfg.eps_grid, cfg.problem.p,
              n_samples=cfg.n_samples, seed=cfg.seed, resolve=_resolver(cfg))
        for metric in cfg.metrics
    ]


def gap_csv(reports: List[RobustnessReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAP_HEADER)
    for rep in reports:
        for pt in rep.points:
            w.writerow([fmt(pt.eps), rep.metric.label, fmt(pt.rho_at_Z), fmt(pt.rho_at_X),
                        fmt(pt.solvency_gap), fmt(pt.mc_stderr)])
    return buf.getvalue()


def report_record(cfg: ExperimentConfig, g: SolutionFunction, reports: List[RobustnessReport]) -> Dict:
    verdicts = {rep.metric.label: rep.verdict.value for rep in reports}
    return {
        "schema_version": 1,
        "name": cfg.name,
        "problem": _problem_record(cfg),
        "family": cfg.family.to_dict(),
        "n_samples": cfg.n_samples,
        "seed": cfg.seed,
        "objective": g.info.get("objective", g.info.get("worst_case_objective")),
        "params": g.params,
        "verdicts": verdicts,
        "verdict": _overall(reports),
        "probes": [rep.to_dict() for rep in reports],
    }


def _overall(reports: List[RobustnessReport]) -> str:
    vals = {rep.verdict.value for rep in reports}
    return vals.pop() if len(vals) == 1 else "Mixed"


def _write(out_dir: Optional[str], files: Dict[str, str]):
    if out_dir is None:
        return
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (root / name).write_text(text)


# --------------------------------------------------------------------------
# verbs
# --------------------------------------------------------------------------


def cmd_solve(args) -> int:
    cfg = load(args.config[0], args.seed, args.samples)
    try:
        g, witness = solve_config(cfg), None
    except Nonexistence as exc:
        g, witness = None, exc.witness
    text = dumps(solution_record(cfg, g, witness))
    _write(args.out_dir, {"solution.json": text})
    if args.out_dir is None:
        sys.stdout.write(text)
    return EXIT_OK


def _solve_for_probe(cfg):
    try:
        return solve_config(cfg)
    except Nonexistence as exc:
        raise AssumptionError(f"no minimizer to probe: {exc}") from None


def cmd_probe(args) -> int:
    cfg = load(args.config[0], args.seed, args.samples)
    g = _solve_for_probe(cfg)
    reports = probe_config(cfg, g)
    files = {
        "solution.json": dumps(solution_record(cfg, g)),
        "gap_curve.csv": gap_csv(reports),
        "report.json": dumps(report_record(cfg, g, reports)),
    }
    _write(args.out_dir, files)
    sys.stdout.write(_summary(cfg, g, reports))
    return EXIT_OK


def _summary(cfg, g, reports) -> str:
    lines = [f"{cfg.name}: objective {fmt(g.info.get('objective', g.info.get('worst_case_objective')))}"]
    for rep in reports:
        lines.append(f"  {rep.metric.label:>10}: {rep.verdict.value} (gap at smallest eps {fmt(rep.limit_gap_estimate)})")
    return "\n".join(lines) + "\n"


def compare_table(cfgs, sols, reps) -> str:
    """Two-column table; per-eps gap rows are sorted by decreasing eps."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["quantity"] + [f"{c.name}[{c.rho}]" for c in cfgs])

    def row(label, vals):
        w.writerow([label] + vals)

    row("objective", [fmt(g.info.get("objective", g.info.get("worst_case_objective"))) for g in sols])
    row("max_jump", [fmt(max((abs(s) for _, s in g.jump_locations()), default=0.0)) for g in sols])
    labels = [rep.metric.label for rep in reps[0]]
    for i, label in enumerate(labels):
        row(f"limit_gap[{label}]", [fmt(r[i].limit_gap_estimate) for r in reps])
        row(f"verdict[{label}]", [r[i].verdict.value for r in reps])
    eps = sorted({pt.eps for r in reps for rep in r for pt in rep.points}, reverse=True)
    for i, label in enumerate(labels):
        for e in eps:
            vals = []
            for r in reps:
                hit = [pt.solvency_gap for pt in r[i].points if pt.eps == e]
                vals.append(fmt(hit[0]) if hit else "")
            row(f"gap[{label}][eps={fmt(e)}]", vals)
    return buf.getvalue()


def cmd_compare(args) -> int:
    if len(args.config) != 2:
        raise ConfigError("compare needs exactly two configs")
    cfgs = [load(c, args.seed, args.samples) for c in args.config]
    if cfgs[0].instance_key() != cfgs[1].instance_key():
        raise ConfigError("compared configs must share the model and problem blocks")
    if [m.label for m in cfgs[0].metrics] != [m.label for m in cfgs[1].metrics]:
        raise ConfigError("compared configs must use the same metrics")
    sols = [_solve_for_probe(c) for c in cfgs]
    reps = [probe_config(c, g) for c, g in zip(cfgs, sols)]
    table = compare_table(cfgs, sols, reps)
    _write(args.out_dir, {"comparison.csv": table})
    sys.stdout.write(table)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load(args.config[0], args.seed, args.samples)
    report = check_assumptions(cfg.model, cfg.problem.p)
    text = dumps({"schema_version": 1, "name": cfg.name, "p": cfg.problem.p, "assumptions": report.to_dict()})
    _write(args.out_dir, {"assumptions.json": text})
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "probe": cmd_probe, "compare": cmd_compare, "check-assumptions": cmd_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskrobust",
        description="Solve VaR/ES hedging problems and probe the robustness of their optimizers.",
        epilog="bundled configs: " + ", ".join(bundled_configs()),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", action="append", required=True,
                       help="config file or bundled config name (twice for compare)")
        p.add_argument("--out-dir", default=None, help="directory for output files")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--samples", type=int, default=None, help="override the Monte Carlo sample size")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except AssumptionError as exc:
        print(f"assumption error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NumericError as exc:
        print(f"numeric error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, KeyError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def run(config_path: str, out_dir: Optional[str] = None, seed: Optional[int] = None,
        samples: Optional[int] = None) -> int:
    """Solve, probe and write all outputs for one config; returns the exit code."""
    argv = ["probe", "--config", config_path]
    if out_dir is not None:
        argv += ["--out-dir", out_dir]
    if seed is not None:
        argv += ["--seed", str(seed)]
    if samples is not None:
        argv += ["--samples", str(samples)]
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
