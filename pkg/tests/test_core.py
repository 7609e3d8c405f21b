"""Scenario types, behavior factories, validation, no-signaling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellcalc import (
    Behavior,
    BellFunctional,
    DeterministicStrategy,
    LocalModel,
    QuantumModel,
    Scenario,
    ScenarioMismatchError,
    ValidationError,
    behavior_from_local,
    behavior_from_quantum,
    hermitian_part,
    no_signaling_check,
    pair,
    validate,
)
from conftest import chsh_optimal_probs, random_local_model


def test_scenario_rejects_nonpositive_counts():
    with pytest.raises(ValidationError):
        Scenario(0, 1, 2, 2)
    with pytest.raises(ValidationError):
        Scenario(1, 1, 2, -2)


def test_functional_shape_is_enforced(scenario_2222):
    with pytest.raises(ValidationError):
        BellFunctional(scenario_2222, np.zeros((2, 2, 2)))


def test_pair_on_deterministic_strategy_picks_coefficients(chsh):
    # all-zero outputs pick T[x][y][0][0] for every input pair
    strategy = DeterministicStrategy((0, 0), (0, 0))
    behavior = strategy.behavior(chsh.scenario)
    expected = chsh.coeffs[:, :, 0, 0].sum()
    assert pair(chsh, behavior) == pytest.approx(expected, abs=1e-12)
    assert expected == 2.0


def test_pair_rejects_mismatched_scenarios(chsh):
    other = Scenario(2, 2, 3, 3)
    behavior = Behavior(other, np.full(other.shape, 1.0 / 9.0), "complete")
    with pytest.raises(ScenarioMismatchError):
        pair(chsh, behavior)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_pair_is_bilinear_in_the_functional(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    s = Scenario(2, 2, 2, 2)
    t1 = rng.standard_normal(s.shape)
    t2 = rng.standard_normal(s.shape)
    probs = np.full(s.shape, 0.25)
    q = Behavior(s, probs, "complete")
    lhs = pair(BellFunctional(s, alpha * t1 + beta * t2), q)
    rhs = alpha * pair(BellFunctional(s, t1), q) + beta * pair(BellFunctional(s, t2), q)
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_behavior_from_local_accumulates_weights(scenario_2222, rng):
    model = random_local_model(rng, scenario_2222, n_strategies=4)
    behavior = behavior_from_local(model, scenario_2222)
    assert behavior.completeness == "complete"
    # each block must be a probability distribution
    np.testing.assert_allclose(behavior.probs.sum(axis=(2, 3)), 1.0, atol=1e-12)
    assert validate(behavior) == ()


def test_behavior_from_local_subnormalized_total(scenario_2222, rng):
    model = random_local_model(rng, scenario_2222, total=0.4)
    behavior = behavior_from_local(model, scenario_2222)
    assert behavior.completeness == "incomplete"
    np.testing.assert_allclose(behavior.probs.sum(axis=(2, 3)), 0.4, atol=1e-12)


def test_behavior_from_local_rejects_negative_weight(scenario_2222):
    strategy = DeterministicStrategy((0, 0), (0, 0))
    model = LocalModel(((-0.1, strategy), (1.1, strategy)))
    with pytest.raises(ValidationError):
        behavior_from_local(model, scenario_2222)


def test_behavior_from_local_rejects_overweight(scenario_2222):
    strategy = DeterministicStrategy((0, 0), (0, 0))
    model = LocalModel(((0.7, strategy), (0.7, strategy)))
    with pytest.raises(ValidationError):
        behavior_from_local(model, scenario_2222)


def test_behavior_from_local_rejects_out_of_range_outputs(scenario_2222):
    strategy = DeterministicStrategy((0, 5), (0, 0))
    with pytest.raises(ValidationError):
        behavior_from_local(LocalModel(((1.0, strategy),)), scenario_2222)


def test_quantum_behavior_matches_closed_form(chsh_optimal_model):
    behavior = behavior_from_quantum(chsh_optimal_model)
    np.testing.assert_allclose(behavior.probs, chsh_optimal_probs(), atol=1e-12)


def test_quantum_behavior_rejects_invalid_model(chsh_optimal_model):
    bad_state = np.asarray(chsh_optimal_model.state) * 2.0
    model = QuantumModel(
        2, 2, bad_state,
        chsh_optimal_model.alice_povms, chsh_optimal_model.bob_povms,
        completeness="complete",
    )
    with pytest.raises(ValidationError):
        behavior_from_quantum(model)


def test_validate_reports_negative_probability(scenario_2222):
    probs = np.full(scenario_2222.shape, 0.25)
    probs[0, 0, 0, 0] = -0.01
    probs[0, 0, 1, 1] = 0.27
    report = validate(Behavior(scenario_2222, probs, "complete"))
    assert any("negative" in v.constraint for v in report)
    locations = " ".join(v.location for v in report)
    assert "probs[0][0][0][0]" in locations


def test_validate_reports_overweight_incomplete_block(scenario_2222):
    probs = np.full(scenario_2222.shape, 0.3)
    report = validate(Behavior(scenario_2222, probs, "incomplete"))
    assert report
    assert all(v.constraint == "block mass <= 1" for v in report)


def test_validate_accepts_tiny_negative_slack(scenario_2222):
    probs = np.full(scenario_2222.shape, 0.25)
    probs[0, 0, 0, 0] = -5e-10  # within feasibility slack
    probs[0, 0, 1, 1] += 0.25 + 5e-10
    assert validate(Behavior(scenario_2222, probs, "complete")) == ()


def test_validate_quantum_model_catches_bad_povm(chsh_optimal_model):
    povms = [list(p) for p in chsh_optimal_model.alice_povms]
    povms[0][0] = povms[0][0] * 1.5  # no longer sums to identity
    model = QuantumModel(
        2, 2, chsh_optimal_model.state,
        tuple(tuple(p) for p in povms), chsh_optimal_model.bob_povms,
        completeness="complete",
    )
    report = validate(model)
    assert any("identity" in v.constraint for v in report)


def test_validate_quantum_model_catches_nonunit_trace(chsh_optimal_model):
    model = QuantumModel(
        2, 2, np.asarray(chsh_optimal_model.state) * 0.9,
        chsh_optimal_model.alice_povms, chsh_optimal_model.bob_povms,
        completeness="complete",
    )
    report = validate(model)
    assert any(v.constraint == "unit trace" for v in report)


def test_no_signaling_clean_for_local(local_behavior_2222):
    result = no_signaling_check(local_behavior_2222)
    assert result.ok
    assert result.max_residual <= 1e-12


def test_no_signaling_flags_constructed_leak(scenario_2222):
    probs = np.full(scenario_2222.shape, 0.25)
    # Alice's marginal for x=1 differs by 0.1 between Bob's inputs
    probs[1, 0] = np.array([[0.4, 0.0], [0.1, 0.5]])
    behavior = Behavior(scenario_2222, probs, "complete")
    result = no_signaling_check(behavior)
    assert not result.ok
    assert result.max_residual == pytest.approx(0.1, abs=1e-12)
    assert "alice" in result.location


def test_no_signaling_rejects_incomplete(scenario_2222):
    behavior = Behavior(scenario_2222, np.full(scenario_2222.shape, 0.1), "incomplete")
    with pytest.raises(ValidationError):
        no_signaling_check(behavior)


def test_hermitian_part_is_idempotent(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = hermitian_part(g)
    np.testing.assert_allclose(h, h.conj().T, atol=1e-14)
    np.testing.assert_allclose(hermitian_part(h), h, atol=1e-14)


def test_local_model_total_weight(scenario_2222, rng):
    model = random_local_model(rng, scenario_2222, total=0.8)
    assert model.total_weight == pytest.approx(0.8, abs=1e-12)
    assert model.completeness == "incomplete"
