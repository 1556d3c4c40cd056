import csv
import io
import json
import subprocess
import sys

import pytest

from netmigrate.cli import main
from netmigrate.instance import load_instance, save_instance
from netmigrate.lbbd import Config, run
from netmigrate.report import CSV_COLUMNS, csv_row, summarize, to_csv


def test_summary_of_single_pair(single_pair):
    doc = run(single_pair).to_dict(single_pair)
    rep = summarize(doc, single_pair)
    assert rep.cost == 163200 and rep.shifts == 2
    assert rep.histogram == {360: 2, 480: 0}
    # two 360-minute shifts, 20 migration minutes each, no travel
    assert rep.working_fraction == pytest.approx(40 / 720)
    assert rep.windows[0].travel_min == 0


def test_summary_of_empty_solution(single_pair):
    rep = summarize({"windows": []}, single_pair)
    assert rep.cost == 0 and rep.working_fraction == 0.0


def test_csv_header_and_row(single_pair):
    doc = run(single_pair).to_dict(single_pair)
    text = to_csv([csv_row(doc, summarize(doc, single_pair))])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == CSV_COLUMNS
    assert rows[0]["cost_cents"] == "163200" and rows[0]["shifts"] == "2"


@pytest.fixture
def instance_file(tmp_path, single_pair):
    path = tmp_path / "inst.json"
    save_instance(single_pair, path)
    return path


def test_solve_and_report(tmp_path, instance_file):
    out = tmp_path / "sol.json"
    assert main(["solve", "--instance", str(instance_file), "--out", str(out), "--gap", "0"]) == 0
    doc = json.loads(out.read_text())
    assert doc["status"] == "optimal" and doc["cost_cents"] == 163200
    assert (tmp_path / "sol.csv").exists()
    csv_out = tmp_path / "again.csv"
    assert main(["report", "--instance", str(instance_file), "--solution", str(out), "--out", str(csv_out)]) == 0
    assert "163200" in csv_out.read_text()


def test_oracle_command(tmp_path, instance_file):
    out = tmp_path / "exact.json"
    assert main(["oracle", "--instance", str(instance_file), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["cost_cents"] == 163200


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["generate", "--seed", "7", "--mu", "2.5", "--sigma", "1.25", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = load_instance(a)
    assert inst.resources.num_windows == 3 and sum(inst.phi) > 0


def test_generate_tiny(tmp_path):
    path = tmp_path / "t.json"
    assert main(["generate", "--tiny", "--infeasible", "--seed", "3", "--out", str(path)]) == 0
    assert load_instance(path).name == "tiny-3"


def test_malformed_input_exits_with_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--instance", str(bad)]) == 1
    assert main(["solve", "--instance", str(tmp_path / "missing.json")]) == 1
    assert "invalid input" in capsys.readouterr().err


def test_oracle_limit_exits_with_2(tmp_path, instance_file, capsys):
    assert main(["oracle", "--instance", str(instance_file), "--oracle-limits", "max_circuits=0"]) == 2
    assert "limit" in capsys.readouterr().err
    assert main(["oracle", "--instance", str(instance_file), "--oracle-limits", "bogus=1"]) == 1


def test_console_entry_point(instance_file):
    proc = subprocess.run([sys.executable, "-m", "netmigrate.cli", "solve", "--instance", str(instance_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["cost_cents"] == 163200
