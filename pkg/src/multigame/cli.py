"""Command-line entry point: ``multigame {run,validate,list,summary}``.

Exit status: 0 on success, 1 on invalid input, 2 on a runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from multigame.config import ConfigError, load_tournament_spec
from multigame.engine import run_tournament
from multigame.errors import MultigameError
from multigame.games import DEFAULT_IDENTITY, GameType, num_choices, make_spec
from multigame.stats import MalformedRecords, finalize_dataset, format_summary, read_records, summarize
from multigame.strategies import STRATEGIES

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

GAME_NOTES = {
    GameType.IPD: "Iterated Prisoner's Dilemma: 2 players, choices 0=Cooperate 1=Defect, params T,R,P,S",
    GameType.MG: "Minority Game: odd N >= 3, binary choice, minority side wins +1",
    GameType.LPGG: "Linear Public Goods Game: N >= 2, contribute 0..endowment, params endowment,mpcr",
}


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_validate(config: str) -> int:
    try:
        load_tournament_spec(config)
    except OSError as exc:
        _err(f"{config}: cannot read: {exc.strerror or exc}")
        return EXIT_INVALID
    except ConfigError as exc:
        for diag in exc.diagnostics:
            _err(f"{config}: {diag}")
        return EXIT_INVALID
    print("OK")
    return EXIT_OK


def cmd_run(config: str, seed: int | None = None, out: str | None = None) -> int:
    try:
        plan = load_tournament_spec(config)
    except OSError as exc:
        _err(f"{config}: cannot read: {exc.strerror or exc}")
        return EXIT_INVALID
    except ConfigError as exc:
        for diag in exc.diagnostics:
            _err(f"{config}: {diag}")
        return EXIT_INVALID
    if seed is not None and not 0 <= seed < 2**64:
        _err(f"--seed must be an unsigned 64-bit integer, got {seed}")
        return EXIT_INVALID
    try:
        artifacts = run_tournament(plan, seed=seed)
        paths = finalize_dataset(artifacts.sink, out or plan.output.dir, artifacts.trace, plan.output.summary)
    except MultigameError as exc:
        _err(f"run failed: {exc}")
        return EXIT_RUNTIME
    for path in paths:
        print(path)
    if plan.output.summary:
        print(format_summary(summarize(artifacts.records)))
    return EXIT_OK


def cmd_list() -> int:
    print("Games:")
    sample_players = {GameType.IPD: 2, GameType.MG: 3, GameType.LPGG: 4}
    for gt in GameType:
        q = num_choices(make_spec(gt, sample_players[gt]))
        print(f"  {gt.value:<5} q={q:<3} identity={DEFAULT_IDENTITY[gt].value:<10} {GAME_NOTES[gt]}")
    print("Strategies:")
    for name in sorted(STRATEGIES):
        d = STRATEGIES[name].descriptor
        print(f"  {d.name}: {d.summary}")
        print(f"    applies to: {d.applicability}")
        for p in d.params:
            print(f"    param {p.describe()}")
    return EXIT_OK


def cmd_summary(records_path: str) -> int:
    try:
        records = read_records(records_path)
    except MalformedRecords as exc:
        _err(f"{records_path}: {exc}")
        return EXIT_INVALID
    except MultigameError as exc:
        _err(str(exc))
        return EXIT_INVALID
    print(format_summary(summarize(records)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multigame", description="Run multi-game agent tournaments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="validate and run a tournament")
    run.add_argument("--config", required=True, metavar="PATH")
    run.add_argument("--seed", type=int, metavar="N", help="override the config seed")
    run.add_argument("--out", metavar="DIR", help="override the output directory")

    validate = sub.add_parser("validate", help="check a tournament description without running it")
    validate.add_argument("--config", required=True, metavar="PATH")

    sub.add_parser("list", help="list game types and strategies")

    summary = sub.add_parser("summary", help="summarize a records.csv file")
    summary.add_argument("--in", dest="records", required=True, metavar="PATH")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.command == "run":
        return cmd_run(args.config, args.seed, args.out)
    if args.command == "validate":
        return cmd_validate(args.config)
    if args.command == "list":
        return cmd_list()
    return cmd_summary(args.records)


if __name__ == "__main__":
    sys.exit(main())
