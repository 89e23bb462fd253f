import csv
import io
import json

import pytest

from osram_mttkrp.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, main, run_experiment
from osram_mttkrp.config import CONFIG_ENV_VAR
from osram_mttkrp.memtech import ESRAM_PAPER
from osram_mttkrp.report import CSV_HEADER, emit_csv
from osram_mttkrp.simulator import AcceleratorConfig, compare, simulate_all_modes
from osram_mttkrp.tensor_io import generate_synthetic
from osram_mttkrp.workloads import BUNDLED


@pytest.fixture(scope="module")
def tiny_comparison():
    t = generate_synthetic(BUNDLED["tiny"])
    cfg = AcceleratorConfig()
    return compare(simulate_all_modes(t, cfg), simulate_all_modes(t, cfg.with_tech(ESRAM_PAPER)))


def test_csv_shape(tiny_comparison):
    rows = list(csv.reader(io.StringIO(emit_csv([tiny_comparison]))))
    assert rows[0] == CSV_HEADER
    body = rows[1:]
    assert len(body) == 9
    ratio = [r for r in body if "/" in r[2]]
    assert len(ratio) == 3
    assert all(r[3] == "" and r[6] and r[7] for r in ratio)
    assert emit_csv([]) == ",".join(CSV_HEADER) + "\n"


def test_csv_values_trace_to_results(tiny_comparison):
    rows = list(csv.DictReader(io.StringIO(emit_csv([tiny_comparison]))))
    cand = tiny_comparison.candidate
    first = rows[0]
    m = cand.modes[0]
    assert (int(first["cycles"]), int(first["hits"]), int(first["bytes_dram"])) == (m.mode_cycles, m.hits, m.bytes_dram)
    assert float(first["energy_pj"]) == m.energy.total
    assert float(rows[2]["speedup"]) == tiny_comparison.modes[0].speedup


def test_happy_path(tmp_path, capsys):
    assert run_experiment(None, output_dir=tmp_path, synthetic="tiny") == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["comparison.csv", "comparison.json", "report_esram-paper.json", "report_osram-paper.json", "summary.txt"]
    rep = json.loads((tmp_path / "report_osram-paper.json").read_text())
    assert rep["tensor"] == "tiny" and len(rep["modes"]) == 3
    assert "speedup" in capsys.readouterr().out


def test_reruns_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run_experiment(None, output_dir=tmp_path / d, synthetic="tiny") == EXIT_OK
    for name in ("comparison.csv", "comparison.json", "report_osram-paper.json", "report_esram-paper.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_budget_violation_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "big.json"
    cfg.write_text(json.dumps({"accelerator": {"dma_buffer_bytes": 2_500_000}}))
    assert run_experiment(cfg, output_dir=tmp_path / "out", synthetic="tiny") == EXIT_CONFIG
    assert "54 MB" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_missing_tensor(tmp_path, capsys):
    code = run_experiment(None, str(tmp_path / "nope.tns"), tmp_path / "out")
    assert code == EXIT_INPUT
    assert "not found" in capsys.readouterr().err


def test_malformed_tensor(tmp_path, capsys):
    p = tmp_path / "bad.tns"
    p.write_text("1 1 1 1.0\n1 2 x\n")
    assert run_experiment(None, str(p), tmp_path / "out") == EXIT_INPUT
    assert "line 2" in capsys.readouterr().err


def test_no_workload_is_usage_error(tmp_path):
    assert run_experiment(None, output_dir=tmp_path) == EXIT_CONFIG


def test_simulate_with_file_and_trace(tmp_path):
    tns = tmp_path / "t.tns"
    tns.write_text("1 1 1 1.0\n2 1 3 2.0\n2 2 2 0.5\n")
    trace = tmp_path / "trace.txt"
    code = main(["simulate", "--tensor", str(tns), "--out", str(tmp_path / "o"), "--trace", str(trace), "--tech", "baseline"])
    assert code == EXIT_OK
    assert (tmp_path / "o" / "report_esram-paper.json").exists()
    lines = trace.read_text().splitlines()
    assert len(lines) == 3 * 3 * 2  # nonzeros x modes x input modes
    assert all(len(l.split()) == 5 and l.split()[-1] in "HM" for l in lines)


def test_analyze(tmp_path, capsys):
    assert main(["analyze", "--synthetic", "tiny", "--out", str(tmp_path)]) == EXIT_OK
    out = json.loads((tmp_path / "analysis.json").read_text())
    assert out["vertices"] == 12 and out["hyperedges"] == 64
    assert out["modes"][0]["compute_ops"] == 3 * 64 * 16
    assert out["modes"][0]["traffic_elements"] == 64 + 2 * 64 * 16 + 4 * 16


def test_validate_uses_env(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"workload": {"rank": 8}}))
    monkeypatch.setenv(CONFIG_ENV_VAR, str(cfg))
    assert main(["validate"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["workload"]["rank"] == 8


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_CONFIG


def test_inline_synthetic_and_seed(tmp_path):
    spec = json.dumps({"dims": [5, 6, 7], "nnz": 40, "skew": 0.5})
    assert main(["compare", "--synthetic", spec, "--seed", "3", "--out", str(tmp_path)]) == EXIT_OK
    assert main(["compare", "--synthetic", "{oops", "--out", str(tmp_path)]) == EXIT_CONFIG
