"""Command-line runner.

Every subcommand writes one report (CSV rows or JSON) holding the resolved
configuration, the instance it ran on, the results, provenance and wall time.
Exit status: 0 on success, 2 on invalid input, 3 when a search exceeds its
budget, 1 when ``selftest`` finds a failing check.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .constructions import (
    eps_construct,
    random_shrink,
    sec3_constant_factor,
    theorem1_construct,
)
from .instances import (
    handcrafted_auction_revenue,
    make_intro_instance,
    make_regular_instance,
    regular_mixed_economy,
)
from .io import (
    Instance,
    InstanceError,
    dump_instance,
    instance_document,
    load_instance,
    parse_instance,
    report_csv,
    report_json,
)
from .revenue import (
    exact_second_price_revenue,
    exact_welfare,
    monte_carlo_revenue,
    myerson_optimal_revenue,
    second_price_with_reserve_revenue,
)
from .search import (
    DEFAULT_LIMIT,
    OBJECTIVES,
    BudgetExceeded,
    best_homogeneous,
    hill_climb,
    ideal_revenue,
)
from .selftest import run_selftest

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("revenue", "ideal", "homog", "construct", "shrink", "instance", "certify", "selftest")


@dataclass
class RunConfig:
    command: str
    instance: str | None = None
    objective: str | None = None
    eps: float | None = None
    seed: int | None = None
    tries: int | None = None
    samples: int | None = None
    budget: int = DEFAULT_LIMIT
    format: str = "csv"
    output: str | None = None
    economy: str | None = None
    L: float = 0.0
    H: float = math.inf
    reserve: float | None = None
    heuristic: bool = False
    restarts: int = 5
    family: str | None = None
    n: int | None = None
    h: float | None = None
    grid: int = 200
    family_eps: float | None = None
    full: bool = False
    timing: bool = True


def parse_counts(text: str) -> dict[str, int]:
    """``"D1=1,D2=9"`` (or ``×``/``x`` in place of ``=``) to a label -> count mapping."""
    out: dict[str, int] = {}
    for part in text.replace(" ", ",").split(","):
        if not part:
            continue
        for sep in ("=", "×", "x"):
            if sep in part:
                lab, _, c = part.rpartition(sep)
                break
        else:
            raise InstanceError(f"--economy: cannot parse {part!r}; expected label=count")
        try:
            out[lab] = out.get(lab, 0) + int(c)
        except ValueError:
            raise InstanceError(f"--economy: count in {part!r} is not an integer") from None
    if not out:
        raise InstanceError("--economy: empty")
    return out


def _counts_text(labels, counts) -> str:
    return " ".join(f"{lab}×{c}" for lab, c in zip(labels, counts) if c)


def _family_instance(cfg: RunConfig) -> Instance:
    if cfg.family == "intro":
        n = cfg.n or 10
        eps = cfg.family_eps
        if eps is None and cfg.command in ("instance", "certify"):
            eps = cfg.eps
        eps = 1e-3 if eps is None else eps
        pool = make_intro_instance(n, eps)
        specs = [
            {"label": "D1", "type": "constant", "value": 1.0},
            {"label": "D2", "type": "two_point", "low": 0.0, "high": 1.0 / (n * eps), "p_high": eps},
        ]
        fam = {"name": "intro", "n": n, "eps": eps}
    elif cfg.family == "regular":
        n = cfg.n or 3
        h = cfg.h if cfg.h is not None else 1e4
        pool = make_regular_instance(n, h, cfg.grid)
        specs = [
            {"label": "ER", "type": "equal_revenue", "h": float(h), "grid": cfg.grid},
            {"label": "C", "type": "constant", "value": float(n)},
        ]
        fam = {"name": "regular", "n": n, "h": float(h), "grid": cfg.grid}
    else:
        raise InstanceError(f"--family: expected intro or regular, got {cfg.family!r}")
    return Instance(pool, {}, None, fam, specs)


def _resolve_instance(cfg: RunConfig) -> Instance:
    if cfg.instance:
        if cfg.family:
            raise InstanceError("give either --instance or --family, not both")
        return load_instance(cfg.instance)
    if cfg.family:
        return _family_instance(cfg)
    raise InstanceError("an instance is required: pass --instance PATH or --family NAME")


def _param(cfg: RunConfig, inst: Instance, name: str, default):
    v = getattr(cfg, name)
    if v is None:
        v = inst.params.get(name, default)
    return v


def _instance_doc(inst: Instance) -> dict:
    return instance_document(inst.pool, inst.specs or None, inst.params, inst.economy_counts, inst.family)


def _objective(cfg: RunConfig, default: str) -> str:
    obj = cfg.objective or default
    if obj not in OBJECTIVES:
        raise InstanceError(f"--objective: expected one of {OBJECTIVES}, got {obj!r}")
    return obj


# -- subcommands ---------------------------------------------------------------


def cmd_revenue(cfg: RunConfig, inst: Instance):
    counts = parse_counts(cfg.economy) if cfg.economy else None
    e = inst.economy(counts)
    if e.n < 2:
        raise InstanceError("revenue needs an economy with at least two bidders")
    samples = _param(cfg, inst, "samples", None)
    if samples:
        seed = _param(cfg, inst, "seed", 0)
        rep = monte_carlo_revenue(e, int(samples), int(seed), cfg.L, cfg.H)
    else:
        seed = None
        rep = exact_second_price_revenue(e, cfg.L, cfg.H)
    row = rep.as_row()
    extra = {"n": e.n, "welfare": exact_welfare(e), "optimal_auction": myerson_optimal_revenue(e)}
    if cfg.reserve is not None:
        extra["reserve"] = cfg.reserve
        extra["reserve_revenue"] = second_price_with_reserve_revenue(e, cfg.reserve)
    used = counts or inst.economy_counts
    prov = {"economy": used, "L": cfg.L, "H": cfg.H, "seed": seed}
    return [row], list(row), {**row, **extra}, prov


def _ideal_like(cfg: RunConfig, inst: Instance, homog: bool):
    obj = _objective(cfg, "optimal_auction")
    pool = inst.pool
    if homog:
        res = best_homogeneous(pool, obj)
    elif cfg.heuristic:
        res = hill_climb(pool, obj, cfg.restarts, _param(cfg, inst, "seed", 0))
    else:
        res = ideal_revenue(pool, obj, cfg.budget)
    row = {
        "objective": obj,
        "value": res.value,
        "economy": res.describe(),
        "economies_scanned": res.economies_scanned,
        "heuristic": res.heuristic,
    }
    prov = {"counts": list(res.counts), "labels": res.labels, "budget": cfg.budget}
    if cfg.heuristic and not homog:
        prov["seed"] = _param(cfg, inst, "seed", 0)
        prov["restarts"] = cfg.restarts
    return [row], list(row), row, prov


def cmd_ideal(cfg, inst):
    return _ideal_like(cfg, inst, homog=False)


def cmd_homog(cfg, inst):
    return _ideal_like(cfg, inst, homog=True)


def _grouping_summary(plan) -> dict:
    return {
        "L": plan.L,
        "H": plan.H,
        "step": plan.step,
        "gamma": plan.gamma,
        "m": plan.m,
        "k": plan.k,
        "big_threshold": plan.big_threshold,
        "group_sizes": [len(g) for g in plan.groups],
        "groups": [list(g) for g in plan.groups],
        "degenerate": plan.degenerate,
        "threshold_mass": plan.threshold_mass,
        "flagged": plan.flagged,
    }


def cmd_construct(cfg: RunConfig, inst: Instance):
    pool = inst.pool
    labels = pool.labels
    obj = _objective(cfg, "second_price")
    eps = _param(cfg, inst, "eps", None)
    columns = ["objective", "method", "revenue", "ideal", "ratio", "distinct_distributions", "groups", "economy"]
    if obj == "optimal_auction":
        plan, rev = theorem1_construct(pool, cfg.budget)
        ideal = plan.provenance["opt"]
        row = {
            "objective": obj,
            "method": "homogeneous_reserve",
            "revenue": rev,
            "ideal": ideal,
            "ratio": rev / ideal if ideal > 0 else 1.0,
            "distinct_distributions": 1,
            "groups": "",
            "economy": f"{labels[plan.pool_index]}×{pool.n}",
        }
        prov = {**plan.provenance, "case": plan.case, "reserve": plan.reserve, "pool_index": plan.pool_index}
        return [row], columns, {**row, "reserve": plan.reserve, "case": plan.case}, prov
    if eps is None:
        choice = sec3_constant_factor(pool, cfg.budget)
        ideal = choice.provenance["opt"]
        row = {
            "objective": obj,
            "method": "homogeneous_second_price",
            "revenue": choice.revenue,
            "ideal": ideal,
            "ratio": choice.revenue / ideal if ideal > 0 else 1.0,
            "distinct_distributions": 1,
            "groups": "",
            "economy": f"{labels[choice.pool_index]}×{pool.n}",
        }
        prov = {**choice.provenance, "case": choice.case, "pool_index": choice.pool_index}
        return [row], columns, {**row, "case": choice.case}, prov
    seed = int(_param(cfg, inst, "seed", 0))
    tries = int(_param(cfg, inst, "tries", 100))
    res = eps_construct(pool, float(eps), seed, tries, cfg.budget)
    counts = [res.pool_indices.count(k) for k in range(len(labels))]
    row = {
        "objective": obj,
        "method": "few_distributions",
        "revenue": res.revenue,
        "ideal": res.opt_value,
        "ratio": res.ratio,
        "distinct_distributions": res.distinct_distributions,
        "groups": res.grouping.k,
        "economy": _counts_text(labels, counts),
    }
    prov = {**res.provenance, "pool_indices": res.pool_indices, "grouping": _grouping_summary(res.grouping)}
    full = {**row, "attempt_revenues": res.attempt_revenues, "flagged": res.grouping.flagged}
    return [row], columns, full, prov


def cmd_shrink(cfg: RunConfig, inst: Instance):
    counts = parse_counts(cfg.economy) if cfg.economy else None
    e = inst.economy(counts)
    eps = _param(cfg, inst, "eps", None)
    if eps is None:
        raise InstanceError("shrink needs --eps")
    seed = int(_param(cfg, inst, "seed", 0))
    tries = int(_param(cfg, inst, "tries", 100))
    res = random_shrink(e, float(eps), seed, tries)
    row = {
        "revenue": res.revenue,
        "base_revenue": res.base_revenue,
        "mean_revenue": res.mean_revenue,
        "std_error": res.std_error,
        "subsets": res.subsets,
        "kept": " ".join(map(str, res.kept)),
    }
    prov = {"economy": counts or inst.economy_counts, "eps": eps, "seed": seed, "tries": tries, "removed": list(res.removed)}
    return [row], list(row), row, prov


def cmd_certify(cfg: RunConfig, inst: Instance):
    obj = _objective(cfg, "optimal_auction")
    pool = inst.pool
    ideal = ideal_revenue(pool, obj, cfg.budget)
    homog = best_homogeneous(pool, obj)
    ratio = homog.value / ideal.value if ideal.value > 0 else 1.0
    row = {
        "objective": obj,
        "ideal": ideal.value,
        "ideal_economy": ideal.describe(),
        "homogeneous": homog.value,
        "homogeneous_economy": homog.describe(),
        "ratio": ratio,
    }
    full = dict(row)
    if inst.family and inst.family.get("name") == "regular":
        full["mixed_economy_optimal_auction"] = myerson_optimal_revenue(regular_mixed_economy(pool))
        full["handcrafted_auction"] = handcrafted_auction_revenue(pool)
    prov = {"ideal_counts": list(ideal.counts), "homogeneous_counts": list(homog.counts), "budget": cfg.budget}
    return [row], list(row), full, prov


def cmd_selftest(cfg: RunConfig, inst):
    seed = cfg.seed if cfg.seed is not None else 0
    results = run_selftest(quick=not cfg.full, seed=seed)
    rows = [
        {"check": r.name, "status": "pass" if r.passed else "FAIL", "cases": r.cases, "detail": r.detail}
        for r in results
    ]
    return rows, ["check", "status", "cases", "detail"], {"checks": rows}, {"seed": seed, "full": cfg.full}


HANDLERS = {
    "revenue": cmd_revenue,
    "ideal": cmd_ideal,
    "homog": cmd_homog,
    "construct": cmd_construct,
    "shrink": cmd_shrink,
    "certify": cmd_certify,
    "selftest": cmd_selftest,
}


def _config_record(cfg: RunConfig) -> dict:
    rec = asdict(cfg)
    rec.pop("output")
    rec.pop("timing")
    return {k: v for k, v in rec.items() if v is not None}


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def execute(cfg: RunConfig, inst: Instance | None = None) -> tuple[str, list[dict]]:
    """Run one subcommand and return the rendered report and its CSV rows.

    ``inst`` overrides ``--instance``/``--family`` resolution.
    """
    t0 = time.perf_counter()
    if cfg.format not in ("csv", "json"):
        raise InstanceError(f"--format: expected csv or json, got {cfg.format!r}")
    if cfg.command not in HANDLERS:
        raise InstanceError(f"unknown command {cfg.command!r}")
    if inst is None and cfg.command != "selftest":
        inst = _resolve_instance(cfg)
    rows, columns, result, prov = HANDLERS[cfg.command](cfg, inst)
    wall = time.perf_counter() - t0 if cfg.timing else None
    if cfg.format == "csv":
        if cfg.timing:
            columns = columns + ["wall_time_s"]
            rows = [{**r, "wall_time_s": round(wall, 6)} for r in rows]
        return report_csv(rows, columns), rows
    report = {
        "command": cfg.command,
        "config": _config_record(cfg),
        "result": result,
        "provenance": prov,
        "wall_time_s": wall,
    }
    if inst is not None:
        report["instance"] = _instance_doc(inst)
    return report_json(report), rows


def replay(report: dict) -> str:
    """Re-run a JSON report from its embedded configuration and instance."""
    rec = dict(report["config"])
    for key in ("L", "H"):
        if isinstance(rec.get(key), str):
            rec[key] = float(rec[key])
    rec.update(output=None, format="json", timing=False)
    inst = parse_instance(report["instance"]) if "instance" in report else None
    text, _ = execute(RunConfig(**rec), inst)
    return text


def run(cfg: RunConfig) -> int:
    try:
        if cfg.command == "instance":
            _emit(dump_instance(_instance_doc(_family_instance(cfg))), cfg.output)
            return EXIT_OK
        text, rows = execute(cfg)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(text, cfg.output)
    if cfg.command == "selftest" and any(r["status"] != "pass" for r in rows):
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", help="TOML instance file")
    common.add_argument("--family", choices=("intro", "regular"), help="built-in instance family")
    common.add_argument("--n", type=int, help="bidder count for --family")
    common.add_argument("--h", type=float, help="equal-revenue cap for --family regular")
    common.add_argument("--grid", type=int, default=200, help="equal-revenue grid size")
    common.add_argument("--family-eps", type=float, help="high-value probability for --family intro")
    common.add_argument("--objective", choices=OBJECTIVES)
    common.add_argument("--eps", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--tries", type=int)
    common.add_argument("--budget", type=int, default=DEFAULT_LIMIT, help="maximum multisets to enumerate")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--no-timing", dest="timing", action="store_false", help="omit wall time from the report")

    parser = argparse.ArgumentParser(prog="homog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("revenue", parents=[common], help="second-price revenue of one economy")
    p.add_argument("--economy", help="bidders per label, e.g. D1=1,D2=9")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact evaluation (default)")
    mode.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--L", type=float, default=0.0, help="low/middle band boundary")
    p.add_argument("--H", type=float, default=math.inf, help="middle/high band boundary")
    p.add_argument("--reserve", type=float, help="also report revenue with this reserve")

    for name, text in (("ideal", "best economy over all multisets"), ("homog", "best homogeneous economy")):
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "ideal":
            p.add_argument("--heuristic", action="store_true", help="hill climbing instead of enumeration")
            p.add_argument("--restarts", type=int, default=5)

    sub.add_parser("construct", parents=[common], help="run a revenue-guarantee construction")

    p = sub.add_parser("shrink", parents=[common], help="best random (1-eps) subset of an economy")
    p.add_argument("--economy", help="bidders per label, e.g. D1=6,D2=4")

    sub.add_parser("instance", parents=[common], help="write a built-in family as an instance file")
    sub.add_parser("certify", parents=[common], help="homogeneous versus ideal revenue ratio")

    p = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    p.add_argument("--full", action="store_true", help="five times more cases")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields and k != "exact"})


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
