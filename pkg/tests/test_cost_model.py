import pytest

from detectbench.campaign.engine import golden_run
from detectbench.errors import CampaignError, ConfigError
from detectbench.metrics.cost_model import (
    PowerParams,
    area_overhead,
    energy_overhead,
    power_overhead,
    run_energy,
)
from detectbench.schemes.base_scheme import CoreActivity, SchemeRunResult, SchemeStatus
from detectbench.schemes.configs import DmrConfig, PardetConfig, RsmtConfig, UnprotectedConfig
from detectbench.schemes.dmr import run_dmr
from detectbench.schemes.pardet import run_pardet
from detectbench.schemes.rsmt import run_rsmt


@pytest.mark.parametrize("config, expected", [
    (UnprotectedConfig(), 0.0),
    (DmrConfig(), 1.0),
    (RsmtConfig(), 0.0604),
    (RsmtConfig(buffer_capacity=50), 0.062),
    (PardetConfig(), 0.24),
    (PardetConfig(n_checkers=6), 0.48),
])
def test_area_overhead(config, expected):
    assert round(area_overhead(config), 4) == pytest.approx(expected)


def test_area_overhead_accepts_json_blocks():
    assert area_overhead({"scheme": "pardet", "n_checkers": 3}) == pytest.approx(0.24)
    with pytest.raises(ConfigError):
        area_overhead({"scheme": "tmr"})


def test_run_energy_charges_cores_and_uncore():
    run = SchemeRunResult(scheme="x", status=SchemeStatus.HALTED, cycles=10, commits=10,
                          activity=[CoreActivity("main", "main", 10, 10), CoreActivity("c0", "checker", 20, 5)])
    # main 10 + 2*10, checker 0.3*20 + 0.6*5, uncore 10
    assert run_energy(run) == pytest.approx(30 + 9 + 10)


@pytest.fixture(scope="module")
def fault_free_runs(limits, load_benchmark):
    program = load_benchmark("fir-filter")
    return {
        "none": golden_run(program, limits),
        "dmr": run_dmr(program, limits),
        "rsmt": run_rsmt(program, limits),
        "pardet": run_pardet(program, limits),
    }


def test_power_ordering(fault_free_runs):
    base = fault_free_runs["none"]
    power = {name: power_overhead(run, base) for name, run in fault_free_runs.items()}
    assert power["none"] == pytest.approx(0.0)
    assert power["dmr"] == pytest.approx(0.75)
    assert power["dmr"] > power["pardet"] > power["rsmt"] > 0.0
    assert power["rsmt"] == pytest.approx(0.015)


def test_rsmt_energy_is_the_redundant_commits_when_static_power_is_off(fault_free_runs):
    params = PowerParams(main_static_per_cycle=0.0, uncore_static_per_cycle=0.0)
    overhead = energy_overhead(fault_free_runs["rsmt"], fault_free_runs["none"], params)
    assert overhead == pytest.approx(1.0)


def test_zero_baseline_is_rejected(fault_free_runs):
    empty = SchemeRunResult(scheme="none", status=SchemeStatus.HALTED, cycles=0, commits=0)
    with pytest.raises(CampaignError):
        power_overhead(fault_free_runs["dmr"], empty)
    with pytest.raises(CampaignError):
        energy_overhead(fault_free_runs["dmr"], empty)
