"""Command-line interface: run, compare, optimize, graph.

Exit codes: 0 success, 1 configuration/validation problems, 2 runtime
invariant breaches or evaluation failures. Each subcommand writes its
delimited outputs (and figures unless disabled) into the output
directory and prints a short summary plus the paths it wrote.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ScenarioConfig, default_config, load_config
from .engine import compare, run
from .errors import ConfigError, EvaluationError, InvariantError, MatesimError
from .institutions import preset_rules
from .network import small_world_sigma, snapshot, write_edge_list
from .optimizer import optimize
from .reports import (
    frames_to_csv,
    write_comparison_csv,
    write_comparison_json,
    write_optimizer_csv,
    write_run_json,
)

__all__ = ["main", "build_parser", "parse_seeds"]


def parse_seeds(spec: str) -> list[int]:
    """Parse a seed list: '0..9' (inclusive range) or '1,5,7' or '4'."""
    spec = spec.strip()
    if ".." in spec:
        lo_str, hi_str = spec.split("..", 1)
        try:
            lo, hi = int(lo_str), int(hi_str)
        except ValueError:
            raise ConfigError(f"bad seed range {spec!r}, expected like 0..9")
        if hi < lo:
            raise ConfigError(f"seed range {spec!r} is empty")
        return list(range(lo, hi + 1))
    try:
        return [int(part) for part in spec.split(",") if part.strip() != ""]
    except ValueError:
        raise ConfigError(f"bad seed list {spec!r}, expected like 1,2,3 or 0..9")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matesim",
        description="Agent-based mating-market simulator: capped polyamory vs monogamy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario config file (YAML)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_run = sub.add_parser("run", help="run one simulation")
    common(p_run)
    p_run.add_argument("--seed", type=int, help="run seed (overrides config)")
    p_run.add_argument("--preset", choices=["sps", "monogamy"], help="institution preset")

    p_cmp = sub.add_parser("compare", help="paired-seed comparison of both presets")
    common(p_cmp)
    p_cmp.add_argument("--seeds", required=True, help="seed list, e.g. 0..9 or 1,2,3")

    p_opt = sub.add_parser("optimize", help="GA search over institution parameters")
    common(p_opt)
    p_opt.add_argument("--seed", type=int, required=True, help="optimizer seed")

    p_graph = sub.add_parser("graph", help="run and export the final mating graph")
    common(p_graph)
    p_graph.add_argument("--seed", type=int, help="run seed (overrides config)")
    p_graph.add_argument("--preset", choices=["sps", "monogamy"], help="institution preset")
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else default_config()
    return config


def _out_dir(args, config: ScenarioConfig) -> str:
    out = args.out if args.out else config.output.directory
    os.makedirs(out, exist_ok=True)
    return out


def _figures_enabled(args, config: ScenarioConfig) -> bool:
    return config.output.figures and not args.no_figures


def _cmd_run(args) -> int:
    config = _load(args)
    rules = preset_rules(args.preset) if args.preset else config.institution
    record = run(config, seed=args.seed, rules=rules)
    out = _out_dir(args, config)
    stem = f"run_{record.institution}_{record.seed}"
    csv_path = os.path.join(out, f"{stem}.csv")
    json_path = os.path.join(out, f"{stem}.json")
    frames_to_csv(record, csv_path)
    write_run_json(record, json_path)
    written = [csv_path, json_path]
    if _figures_enabled(args, config):
        from .figures import run_figures

        written += run_figures(record, out, stem)
    final = record.final_frame
    print(
        f"{record.institution} seed {record.seed}: {len(record.frames)} steps, "
        f"tfr {final.tfr:.3f}, mean welfare {final.mean_welfare:.3f}, "
        f"gini wealth {final.gini_wealth:.3f}, "
        f"unpartnered male frac {final.unpartnered_male_frac:.3f}"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_compare(args) -> int:
    config = _load(args)
    seeds = parse_seeds(args.seeds)
    report = compare(config, seeds)
    out = _out_dir(args, config)
    stem = f"compare_{seeds[0]}_{seeds[-1]}"
    csv_path = os.path.join(out, f"{stem}.csv")
    json_path = os.path.join(out, f"{stem}.json")
    write_comparison_csv(report, csv_path)
    write_comparison_json(report, json_path)
    written = [csv_path, json_path]
    if _figures_enabled(args, config):
        from .figures import comparison_figures

        written += comparison_figures(report, out, stem)
    n = len(report.pairs)
    pos = report.count(lambda p: p.welfare_delta > 0)
    tfr_up = report.count(lambda p: p.tfr_a > p.tfr_b)
    gini_down = report.count(lambda p: p.gini_wealth_a < p.gini_wealth_b)
    print(
        f"{report.institution_a} vs {report.institution_b} over {n} paired seeds: "
        f"welfare delta positive {pos}/{n}, tfr higher {tfr_up}/{n}, "
        f"wealth gini lower {gini_down}/{n}"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_optimize(args) -> int:
    config = _load(args)
    result = optimize(config, args.seed)
    out = _out_dir(args, config)
    stem = f"optimize_{args.seed}"
    csv_path = os.path.join(out, f"{stem}.csv")
    write_optimizer_csv(result.history, csv_path)
    written = [csv_path]
    if _figures_enabled(args, config):
        from .figures import optimizer_figure

        written += optimizer_figure(result.history, out, stem)
    best = result.best
    print(
        f"best genome after {len(result.history)} generations "
        f"(fitness {best.fitness:.4f}): spouse_cap {best.spouse_cap}, "
        f"companion_cap {best.companion_cap}, "
        f"rearing_subsidy {best.rearing_subsidy:.3f}, "
        f"motherhood_penalty_rate {best.motherhood_penalty_rate:.3f}, "
        f"divorce_hazard {best.divorce_hazard:.3f}"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_graph(args) -> int:
    import numpy as np

    config = _load(args)
    rules = preset_rules(args.preset) if args.preset else config.institution
    record = run(config, seed=args.seed, rules=rules)
    graph = snapshot(record.final_population)
    out = _out_dir(args, config)
    stem = f"graph_{record.institution}_{record.seed}"
    edge_path = os.path.join(out, f"{stem}.edges")
    write_edge_list(graph, edge_path)
    written = [edge_path]
    if _figures_enabled(args, config):
        from .figures import graph_figure

        written += graph_figure(graph, out, stem)
    summary = record.graph_summary
    sigma = small_world_sigma(graph, np.random.default_rng(record.seed))
    sigma_text = "degenerate" if sigma.degenerate else f"{sigma.sigma:.3f}"
    print(
        f"graph at step {graph.step}: {summary['nodes']} nodes, "
        f"{summary['edges']} edges, clustering {summary['clustering']:.4f}, "
        f"avg path length {summary['avg_path_length']:.3f}, "
        f"small-world sigma {sigma_text}, "
        f"B bridging share {summary['b_bridging_share']:.3f}"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "compare": _cmd_compare,
    "optimize": _cmd_optimize,
    "graph": _cmd_graph,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InvariantError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MatesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
