"""Command-line entry point: simulate, fit, next, serve.

Every subcommand is a thin wrapper over the library; data goes to stdout
(or files), diagnostics to stderr, exit code 0 on success.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .bt import ComparisonMatrix, fit_bt
from .errors import PairrankError
from .information import DEFAULT_QUADRATURE_ORDER, gh_nodes_weights, utility_graph
from .matrix_io import read_matrix_csv
from .metrics import rescale_fisher, rescale_neg_inv, saving_budget
from .sampling import SamplerState, next_batch
from .simulation import (
    DEFAULT_EVAL_POINTS,
    STRATEGIES,
    SimulationConfig,
    budget_to_reach,
    run_replications,
    summarize,
    write_trajectories_csv,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairrank", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pairrank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the Monte Carlo sampling simulation")
    sim.add_argument("--config", type=Path, help="JSON config; flags below override it")
    sim.add_argument("--n", type=int, default=None, help="number of items (default 20)")
    sim.add_argument("--error-rate", type=float, default=None, help="vote inversion probability (default 0.1)")
    sim.add_argument("--budget", type=float, default=None, help="budget in standard trial numbers (default 15)")
    sim.add_argument("--strategies", type=str, default=None,
                     help=f"comma-separated subset of {','.join(STRATEGIES)}")
    sim.add_argument("--reps", type=int, default=None, help="repetitions (default 100)")
    sim.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    sim.add_argument("--eval-points", type=str, default=None,
                     help="comma-separated standard trial numbers to record at")
    sim.add_argument("--quad-order", type=int, default=None, help="quadrature order (default 30)")
    sim.add_argument("--jobs", type=int, default=None, help="parallel worker processes (default 1)")
    sim.add_argument("--out-dir", type=Path, default=Path("results"), help="output directory")
    sim.add_argument("--rescaled", action="store_true",
                     help="also print the arctanh / -1/y rescaled table")

    fit = sub.add_parser("fit", help="fit scores from a comparison-matrix CSV")
    fit.add_argument("matrix", type=Path, help="CSV with rows item_a,item_b,count_a_wins")
    fit.add_argument("--prior-count", type=int, default=0, help="virtual wins per ordered pair (default 0)")
    fit.add_argument("--json", action="store_true", help="machine-readable output")

    nxt = sub.add_parser("next", help="print the next pair(s) to compare for a matrix CSV")
    nxt.add_argument("matrix", type=Path)
    nxt.add_argument("--prior-count", type=int, default=1,
                     help="virtual wins per ordered pair used for fitting (default 1)")
    nxt.add_argument("--quad-order", type=int, default=DEFAULT_QUADRATURE_ORDER)
    nxt.add_argument("--json", action="store_true")

    srv = sub.add_parser("serve", help="run the annotation service")
    srv.add_argument("--config", type=Path, help="JSON service config")
    srv.add_argument("--data-dir", type=Path, default=None)
    srv.add_argument("--host", type=str, default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--staleness", type=float, default=None, help="MST refit staleness seconds")
    srv.add_argument("--quad-order", type=int, default=None)
    return parser


def cmd_simulate(args) -> int:
    base = SimulationConfig.from_json(args.config) if args.config else SimulationConfig()
    overrides = {}
    if args.n is not None:
        overrides["n"] = args.n
    if args.error_rate is not None:
        overrides["error_rate"] = args.error_rate
    if args.budget is not None:
        overrides["budget"] = args.budget
    if args.strategies is not None:
        overrides["strategies"] = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.eval_points is not None:
        overrides["eval_points"] = tuple(float(p) for p in args.eval_points.split(","))
    if args.quad_order is not None:
        overrides["quad_order"] = args.quad_order
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    config = SimulationConfig(**{**base.to_kwargs(), **overrides})

    started = time.time()
    by_strategy = run_replications(config)
    elapsed = time.time() - started
    summary = summarize(by_strategy)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = args.out_dir / "trajectories.csv"
    write_trajectories_csv(csv_path, by_strategy)
    payload = {"config": config.to_dict(), "elapsed_seconds": elapsed, "strategies": summary}
    savings = _saving_budget_report(config, summary)
    if savings:
        payload["saving_budget"] = savings
    json_path = args.out_dir / "summary.json"
    json_path.write_text(json.dumps(payload, indent=2))

    _print_summary_table(config, summary, rescaled=args.rescaled)
    if savings:
        print("\nSaving budget vs FPC-15 (percent of comparisons avoided):")
        for strategy, entry in savings.items():
            for metric, value in entry.items():
                shown = "not reached" if value is None else f"{value:.2f}%"
                print(f"  {strategy:>12s}  {metric:<7s} {shown}")
    print(f"\nwrote {csv_path} and {json_path}", file=sys.stderr)
    print(f"elapsed: {elapsed:.1f}s", file=sys.stderr)
    return 0


def _saving_budget_report(config: SimulationConfig, summary: dict) -> dict:
    """Bs per adaptive strategy, measured against FPC's final-point means."""
    if "fpc" not in summary:
        return {}
    fpc = summary["fpc"]
    report: dict = {}
    for strategy, entry in summary.items():
        if strategy == "fpc":
            continue
        per_metric = {}
        for metric, higher_better in (("kendall", True), ("plcc", True), ("rmse", False)):
            target = fpc[metric]["mean"][-1]
            votes = budget_to_reach(entry["votes"], entry[metric]["mean"], target,
                                    higher_is_better=higher_better)
            per_metric[metric] = None if votes is None else saving_budget(votes, config.n)
        report[strategy] = per_metric
    return report


def _print_summary_table(config: SimulationConfig, summary: dict, rescaled: bool = False) -> None:
    print(f"n={config.n} reps={config.reps} error_rate={config.error_rate} "
          f"budget={config.budget} seed={config.seed}")
    for strategy, entry in summary.items():
        print(f"\nstrategy: {strategy} ({entry['repetitions']} reps)")
        header = f"  {'budget':>8s} {'votes':>6s}"
        for metric in ("kendall", "plcc", "rmse"):
            header += f"  {metric + ' mean±ci':>18s}"
        print(header)
        for k, (b, v) in enumerate(zip(entry["budget_axis"], entry["votes"])):
            row = f"  {b:8.3f} {v:6d}"
            for metric in ("kendall", "plcc", "rmse"):
                mean = entry[metric]["mean"][k]
                ci = (entry[metric]["ci95_high"][k] - entry[metric]["ci95_low"][k]) / 2
                if rescaled:
                    if metric == "rmse":
                        mean = rescale_neg_inv(mean) if mean != 0 else float("-inf")
                    else:
                        mean = rescale_fisher(mean)
                row += f"  {mean:10.4f}±{ci:7.4f}"
            print(row)


def _load_matrix(path: Path, prior_count: int):
    items, matrix = read_matrix_csv(path)
    if prior_count:
        matrix = ComparisonMatrix.from_counts(matrix.observed_counts(), prior_count=prior_count)
    return items, matrix


def cmd_fit(args) -> int:
    items, matrix = _load_matrix(args.matrix, args.prior_count)
    estimate = fit_bt(matrix)
    stderr = estimate.standard_errors()
    ranking = sorted(range(len(items)), key=lambda k: (-estimate.scores[k], k))
    if args.json:
        print(json.dumps({
            "items": items,
            "scores": [float(v) for v in estimate.scores],
            "stderr": [float(v) for v in stderr],
            "ranking": ranking,
        }))
    else:
        print(f"{'rank':>4s}  {'item':<24s} {'score':>10s} {'stderr':>10s}")
        for rank, idx in enumerate(ranking, start=1):
            print(f"{rank:>4d}  {items[idx]:<24s} {estimate.scores[idx]:>10.4f} {stderr[idx]:>10.4f}")
    return 0


def cmd_next(args) -> int:
    items, matrix = _load_matrix(args.matrix, args.prior_count)
    estimate = fit_bt(matrix)
    graph = utility_graph(estimate, gh_nodes_weights(args.quad_order))
    state = SamplerState(matrix.n, matrix.observed_total())
    batch = next_batch(graph, state)
    mode = "GM" if matrix.observed_total() <= state.standard_trial_votes else "MST"
    if args.json:
        print(json.dumps({
            "mode": mode,
            "observed_total": matrix.observed_total(),
            "pairs": [[i, j] for i, j in batch],
            "items": [[items[i], items[j]] for i, j in batch],
            "utilities": [float(graph.utilities[i, j]) for i, j in batch],
        }))
    else:
        print(f"mode: {mode} (observed votes: {matrix.observed_total()}, "
              f"one standard trial: {state.standard_trial_votes})")
        for i, j in batch:
            print(f"  {items[i]} vs {items[j]}  (U = {graph.utilities[i, j]:.6g})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import ExperimentStore, ServiceConfig

    overrides = {
        "data_dir": args.data_dir,
        "refit_staleness_s": args.staleness,
        "quad_order": args.quad_order,
    }
    try:
        config = ServiceConfig.from_sources(args.config, overrides=overrides)
    except ValueError:
        overrides["data_dir"] = Path("pairrank-data")
        config = ServiceConfig.from_sources(args.config, overrides=overrides)
    store = ExperimentStore(config)
    app = create_app(store)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        store.close()
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "next":
            return cmd_next(args)
        if args.command == "serve":
            return cmd_serve(args)
    except PairrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
