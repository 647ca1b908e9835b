"""Per-round statistics: the record sink, dataset files and summary tables."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

from multigame.errors import IoFailure, MultigameError, OrderViolation

RECORD_HEADER = (
    "tournament_id",
    "game_index",
    "game_type",
    "round",
    "agent_id",
    "strategy",
    "move",
    "payoff",
    "cumulative_payoff",
)
SUMMARY_HEADER = ("metric", "key", "game_type", "value")


class StatsRecord(NamedTuple):
    tournament_id: str
    game_index: int
    game_type: str
    round_index: int
    agent_id: str
    strategy: str
    move: int
    payoff: float
    cumulative_payoff: float


def format_real(x: float) -> str:
    """Fixed-point with at most 6 fractional digits and no exponent."""
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def record_row(r: StatsRecord) -> list[str]:
    return [
        r.tournament_id,
        str(r.game_index),
        r.game_type,
        str(r.round_index),
        r.agent_id,
        r.strategy,
        str(r.move),
        format_real(r.payoff),
        format_real(r.cumulative_payoff),
    ]


class StatsSink:
    """Append-only store of records for one tournament run."""

    def __init__(self) -> None:
        self.records: list[StatsRecord] = []
        self._last_key: tuple[int, int, str] | None = None
        self._cumulative: dict[str, float] = {}

    def record_round(self, records: Iterable[StatsRecord]) -> None:
        for rec in records:
            key = (rec.game_index, rec.round_index, rec.agent_id)
            if self._last_key is not None and key <= self._last_key:
                raise OrderViolation(f"record {key} appended after {self._last_key}")
            expected = self._cumulative.get(rec.agent_id, 0.0) + rec.payoff
            if abs(expected - rec.cumulative_payoff) > 1e-9 * max(1.0, abs(expected)):
                raise OrderViolation(
                    f"cumulative payoff of {rec.agent_id} is {rec.cumulative_payoff}, expected {expected}"
                )
            self._cumulative[rec.agent_id] = rec.cumulative_payoff
            self._last_key = key
            self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)


def write_records_csv(records: Iterable[StatsRecord], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_HEADER)
        writer.writerows(record_row(r) for r in records)


def finalize_dataset(
    sink: StatsSink,
    output_dir: str | Path,
    trace: Sequence[Any] = (),
    summary: bool = True,
) -> list[Path]:
    """Write records.csv, trace.jsonl and optionally summary.csv."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "records.csv", out / "trace.jsonl"]
        write_records_csv(sink.records, paths[0])
        with open(paths[1], "w", encoding="utf-8", newline="\n") as fh:
            for event in trace:
                fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
        if summary:
            paths.append(out / "summary.csv")
            with open(paths[2], "w", encoding="utf-8", newline="") as fh:
                fh.write(summary_csv(summarize(sink.records)))
    except OSError as exc:
        raise IoFailure(f"cannot write dataset to {out}: {exc}") from exc
    return paths


@dataclass
class SummaryTable:
    agent_totals: dict[str, float] = field(default_factory=dict)
    strategy_means: dict[tuple[str, str], float] = field(default_factory=dict)
    mg_volatility: dict[int, float] = field(default_factory=dict)
    mg_mean_winners: dict[int, float] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, str, str, str]]:
        out = [("total_payoff", a, "", format_real(v)) for a, v in sorted(self.agent_totals.items())]
        out += [
            ("mean_payoff_per_round", s, g, format_real(v)) for (s, g), v in sorted(self.strategy_means.items())
        ]
        out += [("mg_volatility", str(g), "MG", format_real(v)) for g, v in sorted(self.mg_volatility.items())]
        out += [("mg_mean_winners", str(g), "MG", format_real(v)) for g, v in sorted(self.mg_mean_winners.items())]
        return out


def attendance_volatility(attendance: Sequence[int], n: int) -> float:
    """Population variance of per-round attendance divided by N."""
    if not attendance:
        return 0.0
    mean = sum(attendance) / len(attendance)
    return sum((a - mean) ** 2 for a in attendance) / len(attendance) / n


def summarize(records: Iterable[StatsRecord], discard: int = 0) -> SummaryTable:
    """Summary tables; ``discard`` drops each game's first rounds from MG metrics."""
    table = SummaryTable()
    sums: dict[tuple[str, str], float] = defaultdict(float)
    counts: dict[tuple[str, str], int] = defaultdict(int)
    # game -> round -> [attendance, players, winners]
    mg_rounds: dict[int, dict[int, list[int]]] = defaultdict(dict)
    for r in records:
        table.agent_totals[r.agent_id] = r.cumulative_payoff
        key = (r.strategy, r.game_type)
        sums[key] += r.payoff
        counts[key] += 1
        if r.game_type == "MG" and r.round_index >= discard:
            cell = mg_rounds[r.game_index].setdefault(r.round_index, [0, 0, 0])
            cell[0] += r.move == 1
            cell[1] += 1
            cell[2] += r.payoff > 0
    table.strategy_means = {k: sums[k] / counts[k] for k in sums}
    for game, rounds in mg_rounds.items():
        cells = [rounds[i] for i in sorted(rounds)]
        n = cells[0][1]
        table.mg_volatility[game] = attendance_volatility([c[0] for c in cells], n)
        table.mg_mean_winners[game] = sum(c[2] for c in cells) / len(cells)
    return table


def summary_csv(table: SummaryTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    writer.writerows(table.rows())
    return buf.getvalue()


def format_summary(table: SummaryTable) -> str:
    lines = ["Per-agent total payoff:"]
    width = max((len(a) for a in table.agent_totals), default=0)
    for agent, total in sorted(table.agent_totals.items()):
        lines.append(f"  {agent:<{width}}  {format_real(total)}")
    lines.append("Mean payoff per round by strategy and game:")
    for (strategy, game), mean in sorted(table.strategy_means.items()):
        lines.append(f"  {strategy:<24} {game:<5} {format_real(mean)}")
    if table.mg_volatility:
        lines.append("Minority Game attendance volatility (sigma^2/N):")
        for game, vol in sorted(table.mg_volatility.items()):
            winners = format_real(table.mg_mean_winners[game])
            lines.append(f"  game {game}: {format_real(vol)} (mean winners per round {winners})")
    return "\n".join(lines)


class MalformedRecords(MultigameError, ValueError):
    def __init__(self, row: int, message: str, last_good: int) -> None:
        self.row = row
        self.last_good = last_good
        super().__init__(f"row {row}: {message} (last good row: {last_good})")


def read_records(path: str | Path) -> list[StatsRecord]:
    """Parse a records.csv file; rows are numbered from 1 after the header."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != RECORD_HEADER:
                raise MalformedRecords(0, f"header must be {','.join(RECORD_HEADER)}", 0)
            out: list[StatsRecord] = []
            for row_no, row in enumerate(reader, start=1):
                if len(row) != len(RECORD_HEADER):
                    raise MalformedRecords(row_no, f"expected {len(RECORD_HEADER)} fields, got {len(row)}", row_no - 1)
                try:
                    rec = StatsRecord(
                        row[0], int(row[1]), row[2], int(row[3]), row[4], row[5],
                        int(row[6]), float(row[7]), float(row[8]),
                    )
                except ValueError as exc:
                    raise MalformedRecords(row_no, str(exc), row_no - 1) from None
                out.append(rec)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return out
