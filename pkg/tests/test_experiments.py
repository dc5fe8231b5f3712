import json

import numpy as np
import pytest

from varsamp.experiments import (RESULT_COLUMNS, ConfigError, ExperimentConfig, planted_spike_matrix,
                                 results_csv, run, write_outputs)

SMALL = {
    "E1": {"m_values": [60], "params": {"n": 4, "nodes": 65}},
    "E2": {"m_values": [40], "params": {"N": 60, "n": 4}},
    "E3": {"m_values": [30], "params": {"nodes": 65, "p": 8, "s": 1}},
    "E4": {"m_values": [10], "params": {"N": 16, "hidden": 6, "mc_samples": 50, "restarts": 2, "steps": 30}},
    "E5": {"m_values": [8], "params": {"N": 8, "s": 1, "m1": 2}},
    "E6": {"m_values": [8], "params": {"N": 16, "n": 3}},
}


def _cfg(exp, **kw):
    d = {"experiment": exp, "trials": 3, "seed": 7, **SMALL[exp], **kw}
    return ExperimentConfig.from_dict(d)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E9"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E1", "bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E1", "m_values": [20, 10]})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E2", "m_values": "chernoff"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E1", "trials": 0})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E1", "noise": {"kind": "cauchy"}})
    with pytest.raises(ConfigError):
        run(_cfg("E1", params={"bogus": 1}))
    with pytest.raises(ConfigError):
        run(_cfg("E1", schemes=["magic"]))


def test_config_from_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": "E1", "description": "x", "m_values": [5]}))
    assert ExperimentConfig.from_json(p).m_values == (5,)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "missing.json")


@pytest.mark.parametrize("exp", sorted(SMALL))
def test_each_experiment_runs(exp):
    rows, summary = run(_cfg(exp))
    assert len(rows) == 2 * 3
    assert summary["experiment"] == exp
    for g in summary["groups"]:
        assert 0 <= g["wilson_low"] <= g["frequency"] <= g["wilson_high"] <= 1
        assert g["bound_violations"] == 0


@pytest.mark.parametrize("exp", ["E1", "E5"])
def test_worker_count_does_not_change_rows(exp):
    a, _ = run(_cfg(exp))
    b, _ = run(_cfg(exp, workers=3))
    assert results_csv(a) == results_csv(b)


def test_trial_seeds_match_across_schemes():
    rows, _ = run(_cfg("E5"))
    assert [r.seed for r in rows if r.scheme == "half_half"] == [r.seed for r in rows if r.scheme == "random"]


def test_write_outputs(tmp_path):
    cfg = _cfg("E6", record_timing=True)
    rows, summary = run(cfg)
    paths = write_outputs(cfg, rows, summary, tmp_path)
    assert [p.name for p in paths] == ["e6_results.csv", "e6_summary.json", "e6_timings.csv"]
    header = paths[0].read_text().splitlines()[0].split(",")
    assert header == RESULT_COLUMNS and "runtime_ms" not in header
    assert "q_mean_within_3se" in json.loads(paths[1].read_text())["extra"]["m=8"]


def test_e1_chernoff_default():
    cfg = ExperimentConfig.from_dict({"experiment": "E1", "trials": 1, "m_values": "chernoff",
                                      "params": {"n": 2, "nodes": 33}})
    _, summary = run(cfg)
    assert summary["m_values"] == [summary["extra"]["chernoff_m"]]


def test_planted_spike_matrix_shape(rng):
    X = planted_spike_matrix(50, 4, 10.0, 0.1, rng)
    assert X.shape == (50, 4) and np.linalg.matrix_rank(X) == 4


def test_e2_median_ratio_decreases_with_m():
    cfg = ExperimentConfig.from_dict({"experiment": "E2", "trials": 40, "seed": 0,
                                      "m_values": [10, 20, 40, 80, 160], "params": {"N": 100, "n": 4}})
    _, summary = run(cfg)
    for scheme in ("leverage", "uniform"):
        med = [g["median_ratio"] for g in summary["groups"] if g["scheme"] == scheme]
        assert all(a >= b for a, b in zip(med, med[1:])) and med[-1] >= 1.0
