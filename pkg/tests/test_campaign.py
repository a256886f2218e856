import json

import pytest

from detectbench.campaign.engine import golden_run, run_campaign, run_single
from detectbench.campaign.models import CampaignReport, ExperimentConfig, resolve_benchmark
from detectbench.campaign.report import emit_report, tradeoff_rows
from detectbench.campaign.sweep import apply_knob, run_sweep, write_sweep
from detectbench.config import INSTALL_DIR
from detectbench.core.assembler import assemble
from detectbench.core.isa import MachineLimits
from detectbench.errors import ConfigError, GoldenRunError
from detectbench.injection.faults import parse_fault
from detectbench.metrics.classification import OUTCOME_ORDER, OutcomeClass
from detectbench.schemes.configs import DmrConfig, RsmtConfig

SMALL = {
    "benchmarks": ["crc32"],
    "schemes": [
        {"scheme": "dmr"},
        {"scheme": "rsmt", "buffer_capacity": 10},
        {"scheme": "pardet", "n_checkers": 3},
    ],
    "n_faults": 12,
    "seed": 7,
    "workers": 1,
}


@pytest.fixture(scope="module")
def small_config():
    return ExperimentConfig.from_dict(SMALL)


@pytest.fixture(scope="module")
def small_report(small_config):
    return run_campaign(small_config)


def test_campaign_covers_every_scheme(small_report):
    assert [r.scheme for r in small_report.schemes] == ["dmr", "rsmt[buf=10]", "pardet[chk=3]"]
    assert small_report.violations == []
    info = small_report.benchmarks[0]
    assert info.name == "crc32" and len(info.faults) == 12


def test_campaign_metrics(small_report):
    dmr = small_report.get("crc32", "dmr")
    rsmt = small_report.get("crc32", "rsmt[buf=10]")
    pardet = small_report.get("crc32", "pardet[chk=3]")
    for report in (dmr, rsmt, pardet):
        breakdown = report.efficiency["all"]
        assert breakdown.n == 12
        assert sum(breakdown.fraction(c) for c in OUTCOME_ORDER) == pytest.approx(1.0)
        assert len(report.outcomes) == 12
    for report in (dmr, rsmt):
        assert report.efficiency["all"].counts[OutcomeClass.SDC] == 0
    assert dmr.slowdown == 1.0
    assert rsmt.slowdown == pytest.approx(2.0)
    assert 1.0 <= pardet.slowdown < rsmt.slowdown
    assert rsmt.slack_insns.max <= 10
    assert pardet.checker_stats is not None
    assert dmr.area_overhead == 1.0


def test_every_scheme_sees_the_same_faults(small_report):
    ids = [[o.fault_id for o in r.outcomes] for r in small_report.schemes]
    assert ids[0] == ids[1] == ids[2] == list(range(12))


def test_campaign_is_deterministic(small_config, small_report):
    again = run_campaign(small_config)
    assert again.model_dump_json() == small_report.model_dump_json()


@pytest.mark.slow
def test_worker_count_does_not_change_the_report(small_config, small_report):
    parallel = run_campaign(small_config.with_overrides(workers=3))
    assert parallel.model_dump_json() == small_report.model_dump_json()


def test_report_files_round_trip(small_report, tmp_path):
    written = emit_report(small_report, ["json", "csv", "markdown"], tmp_path)
    names = {p.name for p in written}
    assert {"report.json", "efficiency_transient.csv", "latency_hist.csv", "ipc.csv", "area.csv",
            "power.csv", "checkers.csv", "tradeoffs.md"} <= names
    assert CampaignReport.load(tmp_path / "report.json") == small_report
    ipc = (tmp_path / "ipc.csv").read_text().splitlines()
    assert ipc[0] == "benchmark,scheme,cycles,commits,ipc,slowdown"
    assert len(ipc) == 4


def test_emit_report_rejects_unknown_format(small_report, tmp_path):
    with pytest.raises(ConfigError):
        emit_report(small_report, ["pdf"], tmp_path)


def test_tradeoff_rows(small_report):
    rows = {row.scheme: row for row in tradeoff_rows(small_report)}
    assert rows["dmr"].slowdown == 1.0
    assert rows["rsmt[buf=10]"].area_overhead == pytest.approx(0.0604)
    assert rows["pardet[chk=3]"].power_overhead > rows["rsmt[buf=10]"].power_overhead


def test_single_point_sweep_reproduces_the_campaign(small_config, small_report, tmp_path):
    sweep = run_sweep(small_config, "rsmt_buffer", [10])
    assert sweep.points[0].report.model_dump_json() == small_report.model_dump_json()
    assert [row.scheme for row in sweep.rows] == ["rsmt[buf=10]"]
    written = write_sweep(sweep, tmp_path, ["csv", "markdown"])
    assert (tmp_path / "sweep.csv").is_file()
    assert (tmp_path / "rsmt_buffer=10" / "ipc.csv") in written


def test_apply_knob(small_config):
    swept = apply_knob(small_config, "pardet_checkers", 6)
    assert [s.label() for s in swept.schemes] == ["dmr", "rsmt[buf=10]", "pardet[chk=6]"]
    with pytest.raises(ConfigError):
        apply_knob(small_config, "clock_speed", 2)
    with pytest.raises(ConfigError):
        apply_knob(ExperimentConfig(schemes=[DmrConfig()]), "rsmt_buffer", 5)
    with pytest.raises(ConfigError):
        run_sweep(small_config, "rsmt_buffer", [])


def test_experiment_config_validation():
    with pytest.raises(ConfigError, match="more than once"):
        ExperimentConfig.from_dict({"schemes": [{"scheme": "dmr"}, {"scheme": "dmr"}]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"n_faults": 0})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"colour": "blue"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"schemes": [{"scheme": "rsmt", "buffer_capacity": 0}]})
    config = ExperimentConfig.from_dict({"schemes": [{"scheme": "rsmt"}, {"scheme": "rsmt", "buffer_capacity": 2}]})
    assert [type(s) for s in config.schemes] == [RsmtConfig, RsmtConfig]


def test_experiment_file_and_environment(tmp_path, monkeypatch):
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps({"benchmarks": ["qsort"], "seed": 1, "n_faults": 5}))
    monkeypatch.setenv("DETECTBENCH_SEED", "99")
    monkeypatch.setenv("DETECTBENCH_WORKERS", "2")
    config = ExperimentConfig.from_file(path)
    assert (config.seed, config.workers, config.n_faults) == (99, 2, 5)
    monkeypatch.setenv("DETECTBENCH_SEED", "many")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(path)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "missing.json")
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / "broken.json")


def test_report_excludes_execution_settings(small_report):
    assert "workers" not in small_report.config
    assert "output_dir" not in small_report.config
    assert small_report.config["seed"] == 7


def test_resolve_benchmark(tmp_path):
    assert resolve_benchmark("crc32").name == "crc32.asm"
    own = tmp_path / "mine.asm"
    own.write_text("HALT\n")
    assert resolve_benchmark(str(own)) == own
    with pytest.raises(ConfigError):
        resolve_benchmark("no-such-kernel")


def test_golden_run_must_halt():
    program = assemble("spin: JUMP spin", name="spin")
    with pytest.raises(GoldenRunError):
        golden_run(program, MachineLimits(max_cycles=500))


def test_run_single(load_benchmark, limits):
    program = load_benchmark("crc32")
    report = run_single(program, RsmtConfig(), limits, parse_fault("transient:r1:0:100"))
    assert report.scheme == "rsmt[buf=10]"
    assert report.status == "detected"
    assert report.outcome.outcome is OutcomeClass.DETECTED
    assert report.slowdown == pytest.approx(2.0)
    assert report.events[0].cause == "result_mismatch"
    clean = run_single(program, DmrConfig(), limits)
    assert clean.status == "halted" and clean.outcome is None and clean.fault is None


def test_shipped_configs_load():
    for path in sorted((INSTALL_DIR / "configs").glob("*.json")):
        assert ExperimentConfig.from_file(path).n_faults >= 1


def test_config_schema_documents_every_field():
    schema = json.loads((INSTALL_DIR / "docs" / "config_schema.json").read_text())
    assert set(schema["properties"]) == set(ExperimentConfig.model_fields)
    rsmt = schema["$defs"]["RsmtConfig"]["properties"]
    assert set(rsmt) == set(RsmtConfig.model_fields)
