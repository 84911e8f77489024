import json

import pytest

from veritas.experiments import (
    ConfigError,
    EXPERIMENTS,
    ExperimentConfig,
    run,
    validate,
)


def _config(experiment, tmp_path, seed=7, **options):
    return ExperimentConfig(experiment=experiment, seed=seed,
                            out_dir=str(tmp_path / "out"), options=options)


def test_validate_probability_out_of_range(tmp_path):
    cfg = _config("thm6_regime", tmp_path, process={"alpha": 1.2})
    assert any("probability out of range" in v for v in validate(cfg))


def test_validate_missing_seed(tmp_path):
    cfg = _config("thm6_regime", tmp_path, seed=None)
    assert any(v.startswith("seed:") for v in validate(cfg))


def test_validate_broken_clock_switch_step(tmp_path):
    cfg = _config("thm4_5_broken_clock", tmp_path,
                  horizon=50, process={"n": 50})
    assert any("process.n" in v for v in validate(cfg))


def test_validate_unknown_experiment(tmp_path):
    cfg = _config("thm11_bogus", tmp_path)
    assert any("unknown experiment" in v for v in validate(cfg))


def test_run_rejects_invalid_config(tmp_path):
    with pytest.raises(ConfigError):
        run(_config("thm6_regime", tmp_path, seed=None))


def test_config_from_json_roundtrip():
    cfg = ExperimentConfig.from_json(json.dumps({
        "schema_version": 1,
        "experiment": "thm3_calibration",
        "seed": 42,
        "out_dir": "somewhere",
        "criterion": {"epsilon": 0.02},
    }))
    assert cfg.experiment == "thm3_calibration"
    assert cfg.resolved()["criterion"]["epsilon"] == 0.02
    # Unspecified sub-keys keep their defaults.
    assert cfg.resolved()["criterion"]["target_alpha"] == 0.7


def test_thm6_report_values(tmp_path):
    report = run(_config("thm6_regime", tmp_path, horizon=20_000))
    stats = report.statistics
    assert 0.45 < stats["unconditional_frequency"] < 0.55
    assert 0.17 < stats["oracle_masked_frequency"] < 0.23
    assert report.verdicts["success_criterion"] == "NotLearned"
    out = tmp_path / "out"
    for name in ("path.csv", "records.csv", "p_k.csv", "trace.dat", "trace.png",
                 "report.json"):
        assert (out / name).exists()


def test_thm3_report(tmp_path):
    report = run(_config("thm3_calibration", tmp_path, seed=42))
    assert report.verdicts["calibration"] == "Converged"
    assert abs(report.statistics["p_k_final"] - 0.7) < 0.01


def test_thm4_5_report(tmp_path):
    report = run(_config("thm4_5_broken_clock", tmp_path, seed=3, horizon=20_000))
    assert report.verdicts["success_criterion"] == "NotLearned"
    assert abs(report.statistics["p_k_final"] - 0.898) < 0.01


def test_thm7_report(tmp_path):
    report = run(_config("thm7_equivalence", tmp_path, sweep=100))
    assert report.verdicts["observational_equivalence"] == "Equivalent"
    assert report.statistics["max_objective_gap"] <= 1e-12
    assert report.statistics["argmax_mismatches"] == 0


def test_thm8_report(tmp_path):
    report = run(_config("thm8_mle", tmp_path, seed=11))
    assert report.verdicts["mle"] == "Recovered"
    assert report.statistics["ll_trace_non_decreasing"] is True
    assert report.statistics["gradcheck_max_err"] <= 1e-4


def test_thm9_report(tmp_path):
    report = run(_config("thm9_ngram", tmp_path))
    assert report.verdicts["direct_observation"] == "DirectlyObservable"
    assert (tmp_path / "out" / "ngram_counts.tsv").exists()


def test_thm10_report(tmp_path):
    report = run(_config("thm10_rstar", tmp_path, horizon=2_000))
    assert report.verdicts["distance_to_hidden_truth"] == "NotEvaluable"
    assert report.verdicts["distance_with_oracle_truth"] == "Evaluable"
    assert isinstance(report.statistics["oracle_distance"], float)
    assert report.statistics["blind_reason"]


def _data_files(out_dir):
    return sorted(p for p in out_dir.iterdir()
                  if p.suffix in (".csv", ".dat", ".tsv", ".json"))


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_reruns_byte_identical(experiment, tmp_path):
    small = {
        "thm3_calibration": {"horizon": 2_000},
        "thm4_5_broken_clock": {"horizon": 2_000},
        "thm6_regime": {"horizon": 2_000},
        "thm7_equivalence": {"sweep": 50},
        "thm8_mle": {"samples": 500, "iterations": 50},
        "thm9_ngram": {"sample_sentences": 20},
        "thm10_rstar": {"horizon": 1_000},
    }[experiment]
    run(ExperimentConfig(experiment, 7, str(tmp_path / "a"), dict(small)))
    run(ExperimentConfig(experiment, 7, str(tmp_path / "b"), dict(small)))
    files_a = _data_files(tmp_path / "a")
    files_b = _data_files(tmp_path / "b")
    assert [p.name for p in files_a] == [p.name for p in files_b]
    for pa, pb in zip(files_a, files_b):
        if pa.name == "report.json":
            ra = json.loads(pa.read_text())
            rb = json.loads(pb.read_text())
            ra["config"].pop("out_dir")
            rb["config"].pop("out_dir")
            assert ra == rb
        else:
            assert pa.read_bytes() == pb.read_bytes()


def test_summary_mentions_verdicts(tmp_path):
    report = run(_config("thm9_ngram", tmp_path))
    text = report.summary()
    assert "direct_observation" in text
    assert "wall time" in text
