"""Command-line entry point.

Subcommands cover the full pipeline: mine rules, evaluate a scenario,
sweep the support grid, apply a saved rule file to a dataset, inspect
granules, and dump any dataset back out in the generic CSV format.

Exit codes: 0 on success, 1 on data/input errors (one-line diagnostic on
stderr), 2 on bad command-line flags (argparse's own convention).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .granules import enumerate_granules
from .loaders import dump_generic, load_data
from .model import GraleError, MMER
from .evaluate import (
    ExperimentConfig,
    Scenario,
    SplitSpec,
    report_csv,
    run_experiment,
    sweep,
    sweep_csv,
)
from .recommend import recommend, recommendations_csv
from .rules import MiningParams, load_rules, mine, save_rules


def _write_text(path: str, text: str) -> None:
    """Write atomically so a crash can't leave a half-written file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".grale-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        _write_text(output, text)


def _add_data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        default=None,
        help="dataset directory (falls back to $GRALE_DATA_DIR)",
    )
    parser.add_argument(
        "--format",
        choices=["movielens", "generic"],
        default="movielens",
        dest="data_format",
        help="input layout (default: movielens)",
    )


def _add_param_flags(parser: argparse.ArgumentParser, require_support: bool) -> None:
    parser.add_argument("--ms", type=float, required=require_support,
                        help="minimum user-side granule support")
    parser.add_argument("--mt", type=float, required=require_support,
                        help="minimum item-side granule support")
    parser.add_argument("--sc", type=float, default=0.3,
                        help="minimum source coverage (default 0.3)")
    parser.add_argument("--tc", type=float, default=0.3,
                        help="target coverage threshold (default 0.3)")


def _load(args) -> MMER:
    data_dir = args.data_dir or os.environ.get("GRALE_DATA_DIR")
    if not data_dir:
        raise GraleError("no dataset: pass --data-dir or set GRALE_DATA_DIR")
    return load_data(data_dir, args.data_format)


def _params(args) -> MiningParams:
    if args.ms is None or args.mt is None:
        raise GraleError("this command needs --ms and --mt")
    return MiningParams(ms=args.ms, mt=args.mt, sc=args.sc, tc=args.tc)


def _cmd_mine(args) -> int:
    es = _load(args)
    ruleset = mine(es, _params(args))
    if args.output is None or args.output == "-":
        from io import StringIO

        buf = StringIO()
        save_rules(ruleset, buf)
        sys.stdout.write(buf.getvalue())
    else:
        directory = os.path.dirname(os.path.abspath(args.output))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".grale-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                save_rules(ruleset, handle)
            os.replace(tmp, args.output)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    print(f"mined {len(ruleset)} rules from {es.n_users} users x {es.n_items} items",
          file=sys.stderr)
    return 0


def _config_header(args, es: MMER, scenario: Scenario,
                   params: MiningParams | None) -> str:
    parts = [
        f"# grale {args.command}",
        f"# data={args.data_dir or os.environ.get('GRALE_DATA_DIR')}"
        f" format={args.data_format} fingerprint={es.fingerprint()}",
    ]
    line = (f"# scenario={scenario.value} trainFraction={args.train_fraction}"
            f" reps={args.reps} seed={args.seed} workers={args.workers}")
    if params is not None:
        line += f" ms={params.ms} mt={params.mt} sc={params.sc} tc={params.tc}"
    parts.append(line)
    return "\n".join(parts) + "\n"


def _cmd_evaluate(args) -> int:
    es = _load(args)
    scenario = Scenario.parse(args.scenario)
    params = None if scenario is Scenario.RANDOM else _params(args)
    cfg = ExperimentConfig(
        scenario=scenario,
        params=params,
        split=SplitSpec(train_fraction=args.train_fraction, seed=args.seed),
        repetitions=args.reps,
        record_train=not args.no_train_accuracy,
    )
    report = run_experiment(es, cfg, workers=args.workers)
    text = _config_header(args, es, scenario, params) + report_csv(report)
    _emit(text, args.output)
    return 0


def _cmd_sweep(args) -> int:
    es = _load(args)
    scenario = Scenario.parse(args.scenario)
    if scenario is Scenario.RANDOM:
        raise GraleError("sweep needs a rule-based scenario")
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError as exc:
        raise GraleError(f"bad --grid value: {exc}") from None
    if not grid:
        raise GraleError("--grid must list at least one support value")
    table = sweep(
        es,
        scenario,
        grid,
        sc=args.sc,
        tc=args.tc,
        split=SplitSpec(train_fraction=args.train_fraction, seed=args.seed),
        repetitions=args.reps,
        record_train=not args.no_train_accuracy,
        workers=args.workers,
    )
    header = (
        f"# grale sweep\n"
        f"# data={args.data_dir or os.environ.get('GRALE_DATA_DIR')}"
        f" format={args.data_format} fingerprint={es.fingerprint()}\n"
        f"# scenario={scenario.value} grid={args.grid} sc={args.sc} tc={args.tc}"
        f" trainFraction={args.train_fraction} reps={args.reps}"
        f" seed={args.seed} workers={args.workers}\n"
    )
    _emit(header + sweep_csv(table), args.output)
    return 0


def _cmd_recommend(args) -> int:
    es = _load(args)
    ruleset = load_rules(args.rules, expected_fingerprint=es.fingerprint())
    recs = recommend(ruleset, es.user_system, es.item_system)
    _emit(recommendations_csv(recs, es.user_system, es.item_system), args.output)
    print(f"{recs.total_pairs} recommendations for {es.n_users} users",
          file=sys.stderr)
    return 0


def _cmd_inspect_granules(args) -> int:
    es = _load(args)
    system = es.user_system if args.side == "user" else es.item_system
    granules = enumerate_granules(system, args.min_support)
    _emit("\n".join(granules.dump_lines()) + "\n", args.output)
    return 0


def _cmd_dump_mmer(args) -> int:
    es = _load(args)
    out_dir = args.output
    if out_dir is None or out_dir == "-":
        raise GraleError("dump-mmer needs -o pointing at a directory")
    os.makedirs(out_dir, exist_ok=True)
    dump_generic(es, out_dir)
    print(f"wrote users.csv, items.csv, edges.csv to {out_dir}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grale",
        description="granular association rules for cold-start recommendation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_mine = sub.add_parser("mine", help="mine rules and write a rule file")
    _add_data_flags(p_mine)
    _add_param_flags(p_mine, require_support=True)
    p_mine.add_argument("-o", "--output", default=None, help="rule file (default stdout)")
    p_mine.set_defaults(func=_cmd_mine)

    p_eval = sub.add_parser("evaluate", help="run one scenario over repeated splits")
    _add_data_flags(p_eval)
    _add_param_flags(p_eval, require_support=False)
    p_eval.add_argument("--scenario", default="both-new",
                        help="random | train-on-train | new-user | new-item | both-new")
    p_eval.add_argument("--train-fraction", type=float, default=0.6)
    p_eval.add_argument("--reps", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.add_argument("--no-train-accuracy", action="store_true",
                        help="skip scoring the rules on their own training block")
    p_eval.add_argument("-o", "--output", default=None, help="report CSV (default stdout)")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_sweep = sub.add_parser("sweep", help="evaluate a grid of ms=mt support values")
    _add_data_flags(p_sweep)
    p_sweep.add_argument("--grid", required=True,
                         help="comma-separated support values, e.g. 0.01,0.02,0.04")
    p_sweep.add_argument("--sc", type=float, default=0.3)
    p_sweep.add_argument("--tc", type=float, default=0.3)
    p_sweep.add_argument("--scenario", default="both-new")
    p_sweep.add_argument("--train-fraction", type=float, default=0.6)
    p_sweep.add_argument("--reps", type=int, default=20)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--no-train-accuracy", action="store_true")
    p_sweep.add_argument("-o", "--output", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rec = sub.add_parser("recommend", help="apply a saved rule file to a dataset")
    _add_data_flags(p_rec)
    p_rec.add_argument("--rules", required=True, help="rule file from `grale mine`")
    p_rec.add_argument("-o", "--output", default=None)
    p_rec.set_defaults(func=_cmd_recommend)

    p_gran = sub.add_parser("inspect-granules", help="list frequent granules on one side")
    _add_data_flags(p_gran)
    p_gran.add_argument("--side", choices=["user", "item"], required=True)
    p_gran.add_argument("--min-support", type=float, required=True)
    p_gran.add_argument("-o", "--output", default=None)
    p_gran.set_defaults(func=_cmd_inspect_granules)

    p_dump = sub.add_parser("dump-mmer", help="re-export the dataset as generic CSVs")
    _add_data_flags(p_dump)
    p_dump.add_argument("-o", "--output", default=None, help="output directory")
    p_dump.set_defaults(func=_cmd_dump_mmer)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraleError, ValueError) as exc:
        print(f"grale: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"grale: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
