"""Scenario runner: ``python -m duallabor run --mode steady-state --config my.cfg --out results``.

Every mode writes ``trajectory.csv`` and ``report.json`` into ``--out``;
``compare`` adds ``pareto.json``; ``--sweep`` writes ``sweep.jsonl`` instead.
Exit codes: 0 success, 1 configuration error, 2 steady-state run that did not
converge.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import abm, equilibrium, scenario
from .dynamics import initial_state
from .hiring import BLIND, STATDISC
from .market import ModelError

MODES = ("dynamics", "abm", "steady-state", "compare", "diagnose")
EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _summary(report):
    return {
        "converged": report.converged,
        "T": report.T_convergence,
        "g_tilde": report.g_tilde,
        "pi_tilde": report.pi_tilde,
        "w_tilde": report.w_tilde,
        "symmetric": report.symmetric,
    }


def _initial(scn):
    g_B, g_W = scn.g0
    return initial_state(scn.params, scn.forms, *scn.pi0, g_B=g_B, g_W=g_W)


def execute(mode: str, scn: scenario.Scenario, out: str | None):
    """Run one scenario; returns ``(exit_code, summary, artifacts)`` and writes files when ``out`` is set."""
    p, forms, regime = scn.params, scn.forms, scn.regime
    tol, max_t = scn.get("run.tol"), scn.get("run.max_t")
    artifacts = {"config": scn.values, "config_text": scenario.dump(scn.values), "mode": mode}
    code = EXIT_OK
    traj = None
    extra = {}

    if mode in ("dynamics", "steady-state", "diagnose"):
        horizon = scn.get("run.steps") if mode == "dynamics" else max_t
        traj, rep = equilibrium.run_to_steady_state(_initial(scn), p, regime, forms, tol, horizon)
        summary = _summary(rep)
        artifacts["report"] = rep.to_dict()
        if mode == "steady-state":
            try:
                direct = equilibrium.solve_fixed_point_direct(p, regime, forms, start=scn.pi0, tol=min(tol, 1e-10))
                direct.pop("thresholds")
                artifacts["direct_fixed_point"] = direct
            except equilibrium.NonConvergence as exc:
                artifacts["direct_fixed_point"] = {"error": str(exc)}
            if not rep.converged:
                code = EXIT_NONCONVERGED
        if mode == "diagnose":
            diag = equilibrium.contraction_diagnostics(p, regime, forms, rep.w_tilde)
            artifacts["diagnostics"] = diag.to_dict()
            summary["contractive"] = diag.contractive
    elif mode == "abm":
        cfg = abm.SimConfig(p, forms, regime, n=scn.get("abm.n"), seed=scn.get("run.seed"),
                            steps=scn.get("run.steps"), pi0=scn.pi0,
                            effort_policy=scn.get("abm.effort_policy"), event_log=scn.get("abm.event_log"),
                            wage_schedule=scn.get("abm.wage_schedule"))
        traj, summ = abm.simulate(cfg)
        artifacts["report"] = summ
        final = summ["final"]
        summary = {
            "converged": None,
            "T": len(traj.rows),
            "g_tilde": {"B": final.get("g_B"), "W": final.get("g_W")},
            "pi_tilde": {"B": final.get("pi_B"), "W": final.get("pi_W")},
            "w_tilde": final.get("w"),
            "symmetric": None,
        }
        if cfg.event_log and out:
            extra["events"] = traj
    elif mode == "compare":
        others = [replace(regime, tag=BLIND), replace(regime, tag=STATDISC)]
        trajs = {}
        par, res = equilibrium.compare_regimes(_initial(scn), p, forms, others, tol, max_t, trajectories=trajs)
        traj = trajs["parity"]
        summary = _summary(par)
        artifacts["report"] = {"parity": par.to_dict(), **{tag: r.to_dict() for tag, (r, _) in res.items()}}
        pareto = {tag: v.to_dict() for tag, (_, v) in res.items()}
        summary["dominates"] = {tag: v.dominates for tag, (_, v) in res.items()}
        extra["pareto"] = pareto
    else:
        raise scenario.ConfigError(f"unknown mode {mode!r}; choose from {', '.join(MODES)}")

    artifacts["summary"] = summary
    if out:
        os.makedirs(out, exist_ok=True)
        traj.to_csv(os.path.join(out, "trajectory.csv"))
        _write_json(os.path.join(out, "report.json"), artifacts)
        if "pareto" in extra:
            _write_json(os.path.join(out, "pareto.json"), {"config": scn.values, "verdicts": extra["pareto"]})
        if "events" in extra:
            extra["events"].write_events(os.path.join(out, "events.jsonl"))
    return code, summary, artifacts


def summary_line(mode, code, summary) -> str:
    g = summary.get("g_tilde") or {}
    fmt = lambda v: "nan" if v is None else f"{v:.6f}"  # noqa: E731
    parts = [f"mode={mode}", f"converged={summary.get('converged')}", f"T={summary.get('T')}",
             f"g_B={fmt(g.get('B'))}", f"g_W={fmt(g.get('W'))}", f"symmetric={summary.get('symmetric')}"]
    if "dominates" in summary:
        parts.append("dominates=" + ",".join(f"{k}:{v}" for k, v in sorted(summary["dominates"].items())))
    parts.append(f"exit={code}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# sweeps


def parse_grid(items) -> list[tuple[str, list[str]]]:
    grid = {}
    for item in items:
        if "=" not in item:
            raise scenario.ConfigError(f"sweep {item!r} is not key=v1,v2,...")
        key, raw = (s.strip() for s in item.split("=", 1))
        if key not in scenario.KEY_TYPES:
            raise scenario.ConfigError(f"sweep: unknown key {key!r}")
        vals = [v.strip() for v in raw.split(",") if v.strip()]
        if not vals:
            raise scenario.ConfigError(f"sweep: no values for {key!r}")
        grid[key] = vals
    return sorted(grid.items())


def grid_points(grid) -> list[list[str]]:
    """Cartesian product in lexicographic order over the sorted keys; an empty grid gives one point."""
    keys = [k for k, _ in grid]
    return [[f"{k}={v}" for k, v in zip(keys, combo)] for combo in itertools.product(*[v for _, v in grid])]


def _sweep_point(args):
    mode, base_values, overrides = args
    values = dict(base_values)
    for item in overrides:
        key, val = scenario.parse_override(item)
        values[key] = val
    try:
        scn = scenario.build(values)
        code, summary, _ = execute(mode, scn, None)
    except ModelError as exc:
        return {"overrides": overrides, "exit": EXIT_CONFIG, "error": str(exc)}
    return {"overrides": overrides, "exit": code, "summary": summary}


def sweep(mode, scn, grid, out, jobs=1):
    points = grid_points(grid)
    tasks = [(mode, scn.values, pt) for pt in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "sweep.jsonl"), "w") as fh:
        for r in results:
            fh.write(json.dumps(_clean(r), sort_keys=True) + "\n")
    return max((r["exit"] for r in results), default=EXIT_OK), results


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="duallabor", description="Dual labor market scenario runner.")
    ap.add_argument("command", nargs="?", default="run", choices=("run", "sweep"))
    ap.add_argument("--mode", default="steady-state", choices=MODES)
    ap.add_argument("--config", help="key = value scenario file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2,...")
    ap.add_argument("--max-t", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    for flag, key in ((args.seed, "run.seed"), (args.max_t, "run.max_t"), (args.tol, "run.tol")):
        if flag is not None:
            overrides.append(f"{key}={flag}")
    try:
        scn = scenario.load(args.config, overrides)
        if args.command == "sweep" or args.sweep:
            grid = parse_grid(args.sweep)
            code, results = sweep(args.mode, scn, grid, args.out, max(1, args.jobs))
            print(f"mode={args.mode} sweep points={len(results)} out={os.path.join(args.out, 'sweep.jsonl')} exit={code}")
            return code
        code, summary, _ = execute(args.mode, scn, args.out)
    except scenario.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"output error: {args.out}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(summary_line(args.mode, code, summary))
    return code


if __name__ == "__main__":
    sys.exit(main())
