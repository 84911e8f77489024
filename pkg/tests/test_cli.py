import json

import pytest

from veritas.cli import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, main


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("VERITAS_NO_COLOR", "1")


def _write_config(tmp_path, **overrides):
    cfg = {
        "schema_version": 1,
        "experiment": "thm9_ngram",
        "seed": 7,
        "out_dir": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_success(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == EXIT_OK
    captured = capsys.readouterr()
    assert "run complete" in captured.out
    assert (tmp_path / "out" / "report.json").exists()


def test_run_seed_and_out_overrides(tmp_path):
    cfg = _write_config(tmp_path, seed=None)
    out = tmp_path / "elsewhere"
    assert main(["run", "--config", str(cfg), "--seed", "5", "--out", str(out)]) == EXIT_OK
    assert (out / "report.json").exists()


def test_run_validation_failure_exit_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, experiment="thm6_regime", seed=None)
    assert main(["run", "--config", str(cfg)]) == EXIT_VALIDATION
    assert "seed" in capsys.readouterr().out


def test_run_missing_config_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_VALIDATION


def test_ngram_query(tmp_path, capsys):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b\n")
    rc = main(["ngram", "--corpus", str(corpus), "--sentence", "a b", "--n", "2"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "1/2" in out
    assert "equal      : True" in out


def test_ngram_sentence_too_long_exit_3(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("a b c\n")
    rc = main(["ngram", "--corpus", str(corpus), "--sentence", "a b c", "--n", "2"])
    assert rc == EXIT_RUNTIME


def test_ngram_empty_corpus_exit_2(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("\n\n")
    assert main(["ngram", "--corpus", str(corpus), "--sentence", "a"]) == EXIT_VALIDATION


def _write_model(tmp_path):
    model = {
        "points": ["a", "b"],
        "valuation": {"a": ["p"], "b": ["p"]},
        "accessibility": {"1": [["a", "a"], ["a", "b"], ["b", "a"], ["b", "b"]]},
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model))
    return path


def test_logic_evaluate(tmp_path, capsys):
    model = _write_model(tmp_path)
    rc = main(["logic", "--model", str(model), "--point", "a",
               "--formula", "K{1} p"])
    assert rc == EXIT_OK
    assert "True" in capsys.readouterr().out


def test_logic_bad_formula_exit_2(tmp_path):
    model = _write_model(tmp_path)
    rc = main(["logic", "--model", str(model), "--point", "a", "--formula", "p &"])
    assert rc == EXIT_VALIDATION


def test_logic_unknown_point_exit_3(tmp_path):
    model = _write_model(tmp_path)
    rc = main(["logic", "--model", str(model), "--point", "zz", "--formula", "p"])
    assert rc == EXIT_RUNTIME
