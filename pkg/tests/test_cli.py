import json

import pytest
from click.testing import CliRunner

from detectbench.cli import cli
from detectbench.config import BENCHMARKS_DIR, GOLDEN_DIR


@pytest.fixture
def runner():
    return CliRunner()


def write_config(path, **overrides):
    data = {"benchmarks": ["crc32"], "schemes": [{"scheme": "dmr"}, {"scheme": "rsmt"}], "n_faults": 4, "seed": 3}
    data.update(overrides)
    path.write_text(json.dumps(data))
    return path


def test_asm_prints_listing(runner):
    result = runner.invoke(cli, ["asm", str(BENCHMARKS_DIR / "crc32.asm")])
    assert result.exit_code == 0
    assert "HALT" in result.output
    assert "instructions" in result.output


def test_asm_reports_assembly_errors(runner, tmp_path):
    source = tmp_path / "bad.asm"
    source.write_text("LOADI r1, 1\nFROB r1\n")
    result = runner.invoke(cli, ["asm", str(source)])
    assert result.exit_code == 1
    assert "line 2" in result.output


def test_run_json_is_reproducible(runner):
    args = ["run", "crc32", "--scheme", "pardet", "--checkers", "2", "--format", "json"]
    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)
    assert first.exit_code == 0
    assert first.output == second.output
    report = json.loads(first.output)
    assert report["scheme"] == "pardet[chk=2]"
    assert report["status"] == "halted"


def test_run_with_fault(runner, tmp_path):
    # cycle 100 is the SHR of the crc register, which reads the flipped bit 5 at once
    out = tmp_path / "run.json"
    result = runner.invoke(cli, ["run", "crc32", "--scheme", "dmr", "--fault", "transient:r1:5:100",
                                 "--out", str(out)])
    assert result.exit_code == 0
    assert "Detected" in result.output
    report = json.loads(out.read_text())
    assert report["outcome"]["outcome"] == "detected"
    assert report["outcome"]["latency_cycles"] == 0
    assert report["events"][0]["cycle"] == 100


@pytest.mark.parametrize("args", [
    ["run", "crc32", "--fault", "bogus"],
    ["run", "no-such-kernel"],
    ["run", "crc32", "--scheme", "rsmt", "--buffer", "0"],
])
def test_run_configuration_errors_exit_1(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 1
    assert "Error" in result.output


def test_campaign_writes_reports(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["campaign", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / "report.json").read_text())
    assert [s["scheme"] for s in report["schemes"]] == ["dmr", "rsmt[buf=10]"]
    assert (out / "tradeoffs.md").is_file()


def test_campaign_seed_option_overrides_file(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json")
    out = tmp_path / "results"
    result = runner.invoke(cli, ["campaign", "--config", str(config), "--seed", "11", "--out", str(out),
                                 "--format", "json"])
    assert result.exit_code == 0, result.output
    assert json.loads((out / "report.json").read_text())["config"]["seed"] == 11
    assert not (out / "ipc.csv").exists()


def test_campaign_invalid_config_exits_1(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json", n_faults=-3)
    result = runner.invoke(cli, ["campaign", "--config", str(config), "--out", str(tmp_path / "r")])
    assert result.exit_code == 1


def test_campaign_golden_failure_exits_2(runner, tmp_path):
    spin = tmp_path / "spin.asm"
    spin.write_text("spin: JUMP spin\n")
    config = write_config(tmp_path / "experiment.json", benchmarks=[str(spin)],
                          limits={"max_cycles": 1000})
    result = runner.invoke(cli, ["campaign", "--config", str(config), "--out", str(tmp_path / "r")])
    assert result.exit_code == 2


def test_report_reemits_stored_campaign(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json")
    out = tmp_path / "results"
    assert runner.invoke(cli, ["campaign", "--config", str(config), "--out", str(out),
                               "--format", "json"]).exit_code == 0
    result = runner.invoke(cli, ["report", str(out / "report.json"), "--format", "csv"])
    assert result.exit_code == 0, result.output
    assert (out / "efficiency_transient.csv").is_file()


def test_sweep(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json", n_faults=3)
    out = tmp_path / "sweep"
    result = runner.invoke(cli, ["sweep", "--config", str(config), "--knob", "rsmt_buffer", "--values", "2,5",
                                 "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("scheme,rsmt_buffer,")
    assert [line.split(",")[:2] for line in lines[1:]] == [["rsmt[buf=2]", "2"], ["rsmt[buf=5]", "5"]]
    assert "Slowdown is the same" in result.output


def test_sweep_rejects_bad_values(runner, tmp_path):
    config = write_config(tmp_path / "experiment.json")
    result = runner.invoke(cli, ["sweep", "--config", str(config), "--knob", "rsmt_buffer", "--values", "a,b"])
    assert result.exit_code == 1


def test_golden_writes_fixtures(runner, tmp_path):
    result = runner.invoke(cli, ["golden", "crc32", "matmul", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    for name in ("crc32", "matmul"):
        assert (tmp_path / f"{name}.bin").read_bytes() == (GOLDEN_DIR / f"{name}.bin").read_bytes()
