import pytest

from veritas.rng import derive, seed_state
from veritas.processes import (
    IID,
    BrokenClock,
    RegimeSwitch,
    oracle_selection,
    simulate,
    truth_at,
)


def test_iid_constant_truth():
    path = simulate(IID(horizon=3, alpha=0.7), seed_state(1))
    assert path.truths() == [0.7, 0.7, 0.7]


def test_regime_switch_alternates():
    spec = RegimeSwitch(horizon=4, alpha=0.2, beta=0.8)
    assert [truth_at(spec, t) for t in range(4)] == [0.2, 0.8, 0.2, 0.8]


def test_broken_clock_piecewise():
    spec = BrokenClock(horizon=4, pre=0.5, n=2, post=0.9)
    assert [truth_at(spec, t) for t in range(4)] == [0.5, 0.5, 0.9, 0.9]


def test_broken_clock_boundary():
    spec = BrokenClock(horizon=200, pre=0.3, n=100, post=0.9)
    assert truth_at(spec, 99) == 0.3
    assert truth_at(spec, 100) == 0.9


def test_truth_at_out_of_range():
    with pytest.raises(ValueError):
        truth_at(IID(horizon=3, alpha=0.5), 3)


def test_spec_validation():
    with pytest.raises(ValueError):
        IID(horizon=0, alpha=0.5)
    with pytest.raises(ValueError):
        IID(horizon=3, alpha=1.2)
    with pytest.raises(ValueError):
        BrokenClock(horizon=10, pre=0.5, n=10, post=0.9)


def test_alternating_split_balanced():
    for horizon in (1, 2, 7, 100, 101):
        spec = RegimeSwitch(horizon=horizon, alpha=0.2, beta=0.8)
        n_alpha = sum(1 for t in range(horizon) if truth_at(spec, t) == 0.2)
        n_beta = horizon - n_alpha
        assert n_alpha - n_beta in (0, 1)


def test_simulate_reproducible():
    spec = RegimeSwitch(horizon=500, alpha=0.2, beta=0.8)
    a = simulate(spec, derive(11, 0))
    b = simulate(spec, derive(11, 0))
    assert a == b


def test_outcome_matches_regime_truth():
    path = simulate(BrokenClock(horizon=50, pre=0.0, n=25, post=1.0), seed_state(2))
    assert all(s.outcome == 0 for s in path.steps[:25])
    assert all(s.outcome == 1 for s in path.steps[25:])


def test_oracle_selection_regime():
    path = simulate(RegimeSwitch(horizon=10, alpha=0.2, beta=0.8), seed_state(3))
    mask = oracle_selection(path, 0.2)
    assert mask == [1, 0, 1, 0, 1, 0, 1, 0, 1, 0]


def test_oracle_selection_iid():
    path = simulate(IID(horizon=5, alpha=0.7), seed_state(3))
    assert oracle_selection(path, 0.7) == [1] * 5
    assert oracle_selection(path, 0.2) == [0] * 5


def test_unconditional_and_masked_frequencies():
    # Time average tends to (alpha+beta)/2, the oracle-masked average to alpha.
    path = simulate(RegimeSwitch(horizon=200_000, alpha=0.2, beta=0.8), derive(7, 0))
    freq = sum(path.outcomes()) / len(path)
    assert abs(freq - 0.5) < 0.01
    mask = oracle_selection(path, 0.2)
    masked = [s.outcome for s, m in zip(path.steps, mask) if m]
    assert abs(sum(masked) / len(masked) - 0.2) < 0.01


def test_path_csv_roundtrip(tmp_path):
    path = simulate(RegimeSwitch(horizon=5, alpha=0.2, beta=0.8), seed_state(1))
    out = tmp_path / "path.csv"
    path.write_csv(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,truth,outcome,regime"
    assert len(lines) == 6
    assert lines[1].startswith("0,0.2,")
