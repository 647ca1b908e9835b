from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import CONFIGS
from multigame.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main


def write_config(tmp_path, document, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def test_run_three_group_scenario(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(CONFIGS / "mixed_mg_ipd.json"), "--out", str(out)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert str(out / "records.csv") in printed
    assert "Per-agent total payoff" in printed
    rows = (out / "records.csv").read_text().splitlines()
    assert len(rows) == 1 + 100 * 9 + 100 * 2
    assert (out / "summary.csv").exists()


def test_seed_override_is_reproducible(tmp_path):
    cfg = str(CONFIGS / "mixed_mg_ipd.json")
    for d in ("x", "y", "z"):
        seed = "8" if d == "z" else "7"
        assert main(["run", "--config", cfg, "--seed", seed, "--out", str(tmp_path / d)]) == EXIT_OK
    x, y, z = ((tmp_path / d / "records.csv").read_bytes() for d in "xyz")
    assert x == y and x != z
    first = json.loads((tmp_path / "x" / "trace.jsonl").read_text().splitlines()[0])
    assert first["detail"]["seed"] == 7 and first["detail"]["seed_source"] == "override"


def test_run_rejects_even_minority_game(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"specVersion": 1, "agents": [{"count": 4, "strategy": "Random"}], "games": [{"type": "MG", "rounds": 3}]},
    )
    out = tmp_path / "never"
    assert main(["run", "--config", cfg, "--out", str(out)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "games[0].players: MG requires odd playerCount >= 3, got 4" in err
    assert not out.exists()


def test_run_negative_seed_rejected(capsys):
    assert main(["run", "--config", str(CONFIGS / "tft_ipd.json"), "--seed", "-1"]) == EXIT_INVALID
    assert "--seed" in capsys.readouterr().err


def test_run_unwritable_output_is_runtime_failure(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", "--config", str(CONFIGS / "tft_ipd.json"), "--out", str(blocker / "o")]) == EXIT_RUNTIME
    assert "run failed" in capsys.readouterr().err


def test_validate_ok(capsys):
    assert main(["validate", "--config", str(CONFIGS / "mixed_bestplay.json")]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "OK"


def test_validate_reports_each_violation(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {
            "specVersion": 1,
            "agents": [{"count": 4, "strategy": "Random"}],
            "games": [{"type": "MG", "rounds": 2}, {"type": "LPGG", "rounds": 2, "params": {"mpcr": 1.5}}],
        },
    )
    assert main(["validate", "--config", cfg]) == EXIT_INVALID
    lines = capsys.readouterr().err.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith(f"{cfg}: games[0].players:")
    assert lines[1].startswith(f"{cfg}: games[1].params.mpcr:")


def test_validate_syntax_error_location(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"specVersion": 1,\n "agents": }')
    assert main(["validate", "--config", str(path)]) == EXIT_INVALID
    assert "line 2, column 12: syntax error" in capsys.readouterr().err


def test_validate_missing_file(tmp_path, capsys):
    assert main(["validate", "--config", str(tmp_path / "nope.json")]) == EXIT_INVALID
    assert "cannot read" in capsys.readouterr().err


def test_list_is_stable_and_complete(capsys):
    assert main(["list"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["list"]) == EXIT_OK
    assert capsys.readouterr().out == first
    for word in ("IPD", "MG", "LPGG", "Random", "FixedChoice", "TitForTat", "BestPlay", "Bag", "memory"):
        assert word in first


def test_summary_of_tit_for_tat_run(tmp_path, capsys):
    assert main(["run", "--config", str(CONFIGS / "tft_ipd.json"), "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    assert main(["summary", "--in", str(tmp_path / "records.csv")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "a1  300" in out and "a2  300" in out


def test_summary_reports_volatility_for_mg(tmp_path, capsys):
    assert main(["run", "--config", str(CONFIGS / "mg_lpgg.json"), "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    assert main(["summary", "--in", str(tmp_path / "records.csv")]) == EXIT_OK
    assert "attendance volatility" in capsys.readouterr().out


def test_summary_truncated_file(tmp_path, capsys):
    assert main(["run", "--config", str(CONFIGS / "tft_ipd.json"), "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "records.csv"
    text = path.read_text()
    path.write_text(text[: text.rfind(",")])
    capsys.readouterr()
    assert main(["summary", "--in", str(path)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "row 200" in err
    assert "last good row: 199" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "multigame", "list"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "BestPlay" in proc.stdout


@pytest.mark.parametrize("argv", [[], ["bogus"], ["run"]])
def test_bad_usage_exits_nonzero(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code != 0
