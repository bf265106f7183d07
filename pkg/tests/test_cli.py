import json
from pathlib import Path

import pytest

from grs.cli import main

CASES = Path(__file__).resolve().parent.parent / "cases"
CASE2 = str(CASES / "case2_parallel.m")
CASE5 = str(CASES / "case5_restoration.m")
DMG2 = str(CASES / "damage2_both.json")


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for sub in ("parse", "mrsp", "rop", "redispatch", "pipeline", "heuristic",
                "gen-damage"):
        assert sub in out


def test_parse_command(tmp_path):
    out = tmp_path / "net.json"
    assert main(["parse", "--case", CASE2, "--out", str(out)]) == 0
    net = json.loads(out.read_text())
    assert len(net["buses"]) == 2
    assert net["base_mva"] == 100.0


def test_rop_periods_zero_is_input_error(tmp_path):
    rc = main(["rop", "--case", CASE2, "--damage", DMG2, "--periods", "0",
               "--out", str(tmp_path / "plan.json")])
    assert rc == 2


def test_missing_case_is_input_error(tmp_path):
    rc = main(["parse", "--case", str(tmp_path / "nope.m"), "--out", "-"])
    assert rc == 2


def test_gen_damage_deterministic(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        rc = main(["gen-damage", "--case", CASE5, "--fraction", "0.35",
                   "--seed", "7", "--out", str(out)])
        assert rc == 0
    assert a.read_bytes() == b.read_bytes()
    scenario = json.loads(a.read_text())
    assert scenario["branch"] and scenario["gen"]


def test_gen_damage_kinds_filter(tmp_path):
    out = tmp_path / "branch_only.json"
    rc = main(["gen-damage", "--case", CASE5, "--fraction", "0.25",
               "--kinds", "branch", "--seed", "1", "--out", str(out)])
    assert rc == 0
    scenario = json.loads(out.read_text())
    assert scenario["branch"] and not scenario["gen"]


def test_rop_then_redispatch_commands(tmp_path):
    plan = tmp_path / "plan.json"
    rc = main(["rop", "--case", CASE2, "--damage", DMG2, "--periods", "2",
               "--out", str(plan)])
    assert rc == 0
    report = tmp_path / "report.json"
    csv = tmp_path / "report.csv"
    rc = main(["redispatch", "--case", CASE2, "--damage", DMG2, "--periods", "2",
               "--plan", str(plan), "--out", str(report), "--csv", str(csv)])
    assert rc == 0
    rep = json.loads(report.read_text())
    assert rep["estimated_ens_mwh"] == pytest.approx(140.0, abs=1e-6)
    assert csv.read_text().startswith("period,served_mw,shed_mw,ens_mwh")


def test_pipeline_command_byte_identical(tmp_path):
    outs = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        rc = main(["pipeline", "--case", CASE2, "--damage", DMG2,
                   "--periods", "2", "--formulation", "dc", "--out", str(out)])
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    result = json.loads(outs[0])
    assert result["estimated_ens_mwh"] == pytest.approx(140.0)
    assert "timings_s" not in result


def test_pipeline_infeasible_exit_code(tmp_path):
    # a case whose full load can never be served -> the final-period model
    # (everything restored) still sheds, which the ROP tolerates, but MRSP
    # preprocessing must report infeasibility
    bad_case = tmp_path / "bad.m"
    bad_case.write_text("""
function mpc = bad
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0.0  0.0 0 0 1 1.0 0.0 230 1 1.1 0.9;
  2 1 100.0 0.0 0 0 1 1.0 0.0 230 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 900 -900 1.0 100 1 200 0; ];
mpc.branch = [
  1 2 0.0 0.1 0.0 30 30 30 0 0 1 -30 30;
  1 2 0.0 0.1 0.0 30 30 30 0 0 1 -30 30;
];
""")
    rc = main(["pipeline", "--case", str(bad_case), "--damage", DMG2,
               "--periods", "2", "--mrsp", "--out", str(tmp_path / "x.json")])
    assert rc == 1


def test_heuristic_command(tmp_path):
    out = tmp_path / "h.json"
    rc = main(["heuristic", "--case", CASE2, "--damage", DMG2, "--periods", "2",
               "--out", str(out)])
    assert rc == 0
    result = json.loads(out.read_text())
    assert result["plan"]["formulation"] == "heuristic"
    assert result["report"]["true_ens_mwh"] > 0


def test_dump_lp(tmp_path):
    lp = tmp_path / "model.lp"
    rc = main(["mrsp", "--case", CASE2, "--damage", DMG2,
               "--out", str(tmp_path / "m.json"), "--dump-lp", str(lp)])
    assert rc == 0
    assert "Subject To" in lp.read_text()


def test_batch_scenarios(tmp_path):
    scen_dir = tmp_path / "scenarios"
    scen_dir.mkdir()
    (scen_dir / "one.json").write_text('{"branch": [1], "gen": [], "bus": []}')
    (scen_dir / "two.json").write_text('{"branch": [1, 2], "gen": [], "bus": []}')
    out_dir = tmp_path / "results"
    rc = main(["pipeline", "--case", CASE2, "--periods", "2",
               "--scenarios", str(scen_dir), "--out-dir", str(out_dir)])
    assert rc == 0
    assert (out_dir / "one.result.json").exists()
    assert (out_dir / "two.result.json").exists()
