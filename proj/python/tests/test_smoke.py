import json
from pathlib import Path

import pytest

import mtmlca

ROOT = Path(__file__).resolve().parents[2]


def test_value_model_closed_forms():
    cfg = mtmlca.InstanceConfig()
    inst = mtmlca.generate_instance(cfg, 3)
    assert inst.num_items == 12
    assert inst.kinds == ["local", "regional", "national"]
    empty = mtmlca.Bundle(12)
    full = mtmlca.Bundle.full(12)
    for i in range(inst.num_bidders):
        assert mtmlca.true_value(inst, i, empty) == 0.0
        assert mtmlca.true_value(inst, i, full) > 0.0


def test_network_is_monotone_and_round_trips():
    net = mtmlca.new_mvnn(4, seed=7)
    assert net.satisfies_constraints()
    assert net(mtmlca.Bundle(4)) == 0.0
    small = mtmlca.Bundle.from_string("1000")
    large = mtmlca.Bundle.from_string("1101")
    assert net(small) <= net(large)
    again = mtmlca.Mvnn.from_json(net.to_json())
    assert again(large) == net(large)
    assert mtmlca.bounded_relu(3.0, 1.0) == 1.0


def test_reported_wdp_and_vcg():
    cols, welfare, payments = mtmlca.solve_reported_wdp(
        2, [[("10", 5.0), ("11", 7.0)], [("01", 4.0)]]
    )
    assert cols == ["10", "01"]
    assert welfare == 9.0
    assert payments == [0.0, 2.0]


def test_wilcoxon():
    stat, p = mtmlca.wilcoxon_one_tailed([(1, 0), (2, 0), (3, 0)])
    assert stat == 0.0
    assert p == 0.125


def test_full_information_auction_is_efficient():
    cfg = mtmlca.InstanceConfig()
    cfg.regions = 2
    cfg.blocks_per_region = 2
    inst = mtmlca.generate_instance(cfg, 1)
    out = mtmlca.run_mlca(inst, "mt-f", q_max=15, seed=1, epochs=32)
    assert out["efficiency"] == 1.0
    assert all(len(r) == 15 for r in out["reports"])
    assert all(p >= -1e-9 for p in out["payments"])


def test_experiment_and_summary(tmp_path):
    out = tmp_path / "smoke"
    rows = mtmlca.run_experiment(ROOT / "configs" / "smoke.json", out)
    assert rows == 6
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header == "setting,seed,method,efficiency,revenue,runtime_ms"
    summary = mtmlca.summarize(out)
    assert summary.splitlines()[0].startswith("setting,method,runs")


def test_config_errors_raise(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"settings": [{"id": "s", "instance": {}}], "mlca": {"qq_max": 3}}))
    with pytest.raises(mtmlca.ConfigError, match="qq_max"):
        mtmlca.run_experiment(bad, tmp_path / "out")
    cfg = mtmlca.InstanceConfig()
    cfg.regions = 0
    with pytest.raises(mtmlca.ConfigError):
        mtmlca.generate_instance(cfg, 0)
