"""Command-line front end: generate-net, train, evaluate, plot.

Exit codes: 0 success, 2 usage or validation failure, 3 runtime abort
(non-finite loss during training).  The NETSIEGE_OUT environment variable
sets the default output directory; an optional JSON config file supplies
defaults and individual flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from netsiege.config import RunConfig
from netsiege.errors import NetsiegeError, TrainingAborted
from netsiege.evaluation import (
    MATRIX_CSV_HEADER,
    CrossEvalResult,
    evaluate_matchup,
    matchup_cell_seeds,
)
from netsiege.game import AttackerKind, GraphParams
from netsiege.netgraph import generate_network, save_graph
from netsiege.training import TrainingRegime, run_training

ENV_OUT_DIR = "NETSIEGE_OUT"


def _default_out_dir() -> str:
    return os.environ.get(ENV_OUT_DIR, "runs")


def _load_run_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return RunConfig.load(path)


# ---------------------------------------------------------------------------
# generate-net
# ---------------------------------------------------------------------------

def cmd_generate_net(args) -> int:
    graph = generate_network(
        args.nodes, args.density, (args.vuln_min, args.vuln_max), args.seed
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_graph(graph, out)
    n, m = graph.n_nodes, graph.edge_count()
    density = m / (n * (n - 1) / 2)
    print(f"wrote {out}")
    print(f"nodes={n} edges={m} density={density:.3f} high_value={graph.high_value_id()}")
    return 0


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _load_run_config(args.config)
    if args.epochs is not None:
        cfg.training.epochs = args.epochs
    if args.seed is not None:
        cfg.training.seed = args.seed
    if args.nodes is not None:
        cfg.training.n_nodes = args.nodes
    if args.density is not None:
        cfg.training.edge_density = args.density
    if args.checkpoint_every is not None:
        cfg.training.checkpoint_every = args.checkpoint_every
    if args.max_timesteps is not None:
        cfg.game.max_timesteps = args.max_timesteps
        cfg.game.defender_win_reward = cfg.game.max_defender_cost() * args.max_timesteps
    regime = TrainingRegime(args.regime)
    out_dir = args.out or str(Path(_default_out_dir()) / f"{regime.value}-seed{cfg.training.seed}")

    run = run_training(
        regime,
        cfg.game,
        cfg.defender,
        cfg.rl,
        cfg.training.graph_params(),
        epochs=cfg.training.epochs,
        seed=cfg.training.seed,
        out_dir=out_dir,
        checkpoint_every=cfg.training.checkpoint_every,
        hippo_config=cfg.hippo,
    )
    trailing = float(np.mean(run.defender_rewards()[-100:]))
    print(f"run directory: {out_dir}")
    print(f"trailing-100 mean defender reward: {trailing!r}")
    print(f"draw counts: {json.dumps(run.draw_counts, sort_keys=True)}")
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def _parse_labeled_path(spec: str) -> tuple[str, str]:
    if "=" in spec:
        label, path = spec.split("=", 1)
        return label, path
    return Path(spec).stem, spec


def _eval_cell(job: dict) -> dict:
    """One matchup, runnable in a worker process."""
    report = evaluate_matchup(
        job["defender_path"],
        job["attacker_path"],
        AttackerKind(job["attacker_kind"]),
        job["n_episodes"],
        GraphParams(job["n_nodes"], job["density"], tuple(job["vuln_range"])),
        job["cell_seed"],
        sample=job["sample"],
        defender_label=job["label"],
        bin_count=job["bins"],
    )
    return report.to_dict()


def cmd_evaluate(args) -> int:
    cfg = _load_run_config(args.config)
    episodes = args.episodes if args.episodes is not None else cfg.eval.episodes
    bins = args.bins if args.bins is not None else cfg.eval.bins
    n_nodes = args.nodes if args.nodes is not None else cfg.eval.n_nodes
    density = args.density if args.density is not None else cfg.eval.edge_density
    sample = not args.greedy

    defenders = [_parse_labeled_path(d) for d in args.defender]
    attackers: dict[str, str] = {}
    if args.attacker_ransomware:
        attackers[AttackerKind.RANSOMWARE.value] = args.attacker_ransomware
    if args.attacker_apt:
        attackers[AttackerKind.APT.value] = args.attacker_apt
    if not attackers:
        print("error: need at least one of --attacker-ransomware / --attacker-apt",
              file=sys.stderr)
        return 2
    for _, p in defenders:
        if not Path(p).exists():
            print(f"error: defender checkpoint not found: {p}", file=sys.stderr)
            return 2
    for p in attackers.values():
        if not Path(p).exists():
            print(f"error: attacker checkpoint not found: {p}", file=sys.stderr)
            return 2

    out_dir = Path(args.out or Path(_default_out_dir()) / "eval")
    out_dir.mkdir(parents=True, exist_ok=True)

    kinds = list(attackers.keys())
    seeds = matchup_cell_seeds(args.seed, len(defenders) * len(kinds))
    jobs = []
    i = 0
    for label, dpath in defenders:
        for kind in kinds:
            jobs.append(
                {
                    "label": label,
                    "defender_path": dpath,
                    "attacker_kind": kind,
                    "attacker_path": attackers[kind],
                    "n_episodes": episodes,
                    "n_nodes": n_nodes,
                    "density": density,
                    "vuln_range": list(cfg.eval.vuln_range),
                    "cell_seed": seeds[i],
                    "sample": sample,
                    "bins": bins,
                }
            )
            i += 1

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_eval_cell, jobs))
    else:
        results = [_eval_cell(job) for job in jobs]

    lines = [MATRIX_CSV_HEADER]
    for rep in results:
        label, kind = rep["defender_label"], rep["attacker_type"]
        report_path = out_dir / f"report_{label}_{kind}.json"
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(rep, fh, sort_keys=True, indent=2)
        lines.append(
            f"{label},{kind},{rep['mean']!r},{rep['iqm']!r},{rep['win_rate']!r},"
            f"{rep['n_episodes']}"
        )
        print(
            f"{label} vs {kind}: mean={rep['mean']:.2f} iqm={rep['iqm']:.2f} "
            f"win_rate={rep['win_rate']:.3f}"
        )
    (out_dir / "matrix.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out_dir / 'matrix.csv'}")
    return 0


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

def cmd_plot(args) -> int:
    from netsiege import plotting

    out_dir = Path(args.out or Path(_default_out_dir()) / "plots")
    out_dir.mkdir(parents=True, exist_ok=True)
    wrote_any = False

    for log in args.training_log or []:
        out = out_dir / f"{Path(log).stem}_curves.svg"
        plotting.plot_training_curves(log, out, smooth_order=args.smooth_order)
        print(f"wrote {out}")
        wrote_any = True

    if args.eval_csv:
        for metric in ("mean", "iqm", "win_rate"):
            out = out_dir / f"bars_{metric}.svg"
            plotting.plot_eval_bars(args.eval_csv, out, metric=metric)
            print(f"wrote {out}")
        wrote_any = True

    if args.reports:
        reports = []
        for path in args.reports:
            with open(path, encoding="utf-8") as fh:
                reports.append(json.load(fh))
        for attacker_type in sorted({r["attacker_type"] for r in reports}):
            out = out_dir / f"hist_{attacker_type}.svg"
            plotting.plot_score_distributions(reports, out, attacker_type)
            print(f"wrote {out}")
        wrote_any = True

    if not wrote_any:
        print("error: nothing to plot; pass --training-log, --eval-csv, or --reports",
              file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netsiege",
        description="Network attack-defense self-play laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate-net", help="generate a random connected network")
    g.add_argument("--nodes", type=int, default=50, help="node count (>= 2)")
    g.add_argument("--density", type=float, default=0.6, help="edge density in (0, 1]")
    g.add_argument("--vuln-min", type=float, default=0.2, help="vulnerability lower bound")
    g.add_argument("--vuln-max", type=float, default=0.8, help="vulnerability upper bound")
    g.add_argument("--seed", type=int, default=0, help="generation seed")
    g.add_argument("--out", required=True, help="output text file")
    g.set_defaults(func=cmd_generate_net)

    t = sub.add_parser("train", help="train defender and attacker(s) by self-play")
    t.add_argument(
        "--regime",
        required=True,
        choices=[r.value for r in TrainingRegime],
        help="training setting",
    )
    t.add_argument("--epochs", type=int, help="training episodes")
    t.add_argument("--seed", type=int, help="master seed")
    t.add_argument("--nodes", type=int, help="training graph node count")
    t.add_argument("--density", type=float, help="training graph edge density")
    t.add_argument("--max-timesteps", type=int, help="episode step limit")
    t.add_argument("--checkpoint-every", type=int, help="checkpoint cadence (epochs)")
    t.add_argument("--config", help="JSON run-config file")
    t.add_argument("--out", help="run directory (default from NETSIEGE_OUT)")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="cross-evaluate defender checkpoints")
    e.add_argument(
        "--defender",
        action="append",
        required=True,
        help="defender checkpoint, optionally label=path (repeatable)",
    )
    e.add_argument("--attacker-ransomware", help="ransomware attacker checkpoint")
    e.add_argument("--attacker-apt", help="APT attacker checkpoint")
    e.add_argument("--episodes", type=int, help="episodes per matchup")
    e.add_argument("--nodes", type=int, help="evaluation graph node count")
    e.add_argument("--density", type=float, help="evaluation graph edge density")
    e.add_argument("--bins", type=int, help="histogram bin count")
    e.add_argument("--seed", type=int, default=0, help="evaluation seed")
    e.add_argument("--greedy", action="store_true", help="argmax actions instead of sampling")
    e.add_argument("--jobs", type=int, default=1, help="parallel matchup processes")
    e.add_argument("--config", help="JSON run-config file")
    e.add_argument("--out", help="report directory")
    e.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="emit SVG charts from logs and reports")
    p.add_argument("--training-log", action="append", help="training CSV (repeatable)")
    p.add_argument("--eval-csv", help="evaluation matrix CSV")
    p.add_argument("--reports", nargs="+", help="matchup report JSON files")
    p.add_argument("--smooth-order", type=int, default=5, help="polynomial smoothing order")
    p.add_argument("--out", help="chart directory")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TrainingAborted as exc:
        print(f"error: training aborted: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"diagnostics: {json.dumps(exc.diagnostics, sort_keys=True, default=str)}",
                  file=sys.stderr)
        return 3
    except NetsiegeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
