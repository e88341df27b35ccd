import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from moraldyad.model import HarmEdge, LockMode
from moraldyad.operators import (
    AppraisalClass,
    DegenerateEvidenceError,
    IntentPosterior,
    SuppressedSide,
    appraise_counterfactual,
    infer_intent_bayes,
    infer_intent_heuristic,
    proximity_prior,
    typecast,
    uniform_prior,
)

UNIT = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


# ---------------------------------------------------------------------------
# Typecasting
# ---------------------------------------------------------------------------

def test_projection_scales_smaller_coordinate():
    result = typecast(0.9, 0.8, sigma_t=0.5)
    assert result.intentionality_out == 0.9
    assert result.vulnerability_out == pytest.approx(0.5 / 0.9, abs=1e-12)
    assert result.suppressed_dimension is SuppressedSide.PATIENT_SIDE
    assert not result.complexity_flag


def test_zero_sensitivity_is_identity():
    rng = random.Random(3)
    for _ in range(100):
        a, p = rng.random(), rng.random()
        result = typecast(a, p, sigma_t=0.0)
        assert (result.intentionality_out, result.vulnerability_out) == (a, p)
        assert not result.complexity_flag


def test_near_tie_flickers():
    result = typecast(0.9, 0.9, sigma_t=0.8, tie_epsilon=0.05)
    assert result.complexity_flag
    assert (result.intentionality_out, result.vulnerability_out) == (0.9, 0.9)
    assert result.suppressed_dimension is SuppressedSide.NONE


def test_lock_overrides_dominance_and_tie():
    result = typecast(0.3, 0.9, sigma_t=0.8, lock=LockMode.LOCKED_AGENT)
    assert result.suppressed_dimension is SuppressedSide.PATIENT_SIDE
    assert result.intentionality_out == 0.3
    assert result.vulnerability_out == pytest.approx(0.2 / 0.3, abs=1e-12)

    tied = typecast(0.9, 0.9, sigma_t=0.8, lock=LockMode.LOCKED_PATIENT, tie_epsilon=0.05)
    assert not tied.complexity_flag
    assert tied.suppressed_dimension is SuppressedSide.AGENT_SIDE


@settings(max_examples=500, deadline=None)
@given(UNIT, UNIT, UNIT, st.sampled_from(list(LockMode)),
       st.floats(min_value=1e-6, max_value=0.3, allow_nan=False))
def test_idempotence_exact(a, p, sigma, lock, eps):
    once = typecast(a, p, sigma, lock, eps)
    twice = typecast(once.intentionality_out, once.vulnerability_out, sigma, lock, eps)
    assert twice.intentionality_out == once.intentionality_out
    assert twice.vulnerability_out == once.vulnerability_out


@settings(max_examples=500, deadline=None)
@given(UNIT, UNIT, UNIT, st.sampled_from(list(LockMode)),
       st.floats(min_value=1e-6, max_value=0.3, allow_nan=False))
def test_constraint_satisfied(a, p, sigma, lock, eps):
    result = typecast(a, p, sigma, lock, eps)
    if not result.complexity_flag:
        assert result.intentionality_out * result.vulnerability_out <= (1.0 - sigma) + 1e-9
    assert 0.0 <= result.intentionality_out <= 1.0
    assert 0.0 <= result.vulnerability_out <= 1.0


def test_monotone_suppression_in_sigma():
    rng = random.Random(11)
    for _ in range(300):
        a, p = rng.random(), rng.random()
        lock = rng.choice(list(LockMode))
        sigmas = sorted(rng.random() for _ in range(4))
        outputs = []
        for sigma in sigmas:
            result = typecast(a, p, sigma, lock, 0.05)
            if lock is LockMode.LOCKED_AGENT:
                tracked = result.vulnerability_out
            elif lock is LockMode.LOCKED_PATIENT:
                tracked = result.intentionality_out
            else:
                tracked = min(result.intentionality_out, result.vulnerability_out)
            outputs.append(tracked)
        for earlier, later in zip(outputs, outputs[1:]):
            assert later <= earlier


# ---------------------------------------------------------------------------
# Valence-dependent inference
# ---------------------------------------------------------------------------

def test_heuristic_worked_example():
    assert infer_intent_heuristic(0.4, 0.5, -1.0, 0.5) == pytest.approx(0.55, abs=1e-12)
    assert infer_intent_heuristic(0.4, 0.5, 1.0, 0.5) == 0.4
    assert infer_intent_heuristic(0.7, 0.9, -1.0, 0.0) == 0.7


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=0.0, max_value=0.999, allow_nan=False),
       st.floats(min_value=1e-6, max_value=1.0, allow_nan=False),
       st.floats(min_value=1e-6, max_value=1.0, allow_nan=False))
def test_knobe_asymmetry(prior_a, suffering, gain):
    harm = infer_intent_heuristic(prior_a, suffering, -1.0, gain)
    help_ = infer_intent_heuristic(prior_a, suffering, 1.0, gain)
    assert harm > help_
    assert prior_a <= harm <= 1.0
    assert harm - prior_a <= (1.0 - prior_a) + 1e-15


# ---------------------------------------------------------------------------
# Bayesian inference
# ---------------------------------------------------------------------------

def test_bayes_worked_examples():
    prior = uniform_prior((0.0, 0.5, 1.0))
    observed = infer_intent_bayes(prior, True, 1.0, 0.1)
    assert observed.masses == pytest.approx((0.0606, 0.3333, 0.6061), abs=1e-4)
    assert observed.point_estimate == pytest.approx(0.7727, abs=1e-4)

    absent = infer_intent_bayes(prior, False, 1.0, 0.1)
    assert absent.masses == pytest.approx((0.6667, 0.3333, 0.0), abs=1e-4)
    assert absent.point_estimate == pytest.approx(0.1667, abs=1e-4)


def test_point_mass_prior_stays_put():
    prior = IntentPosterior((0.5,), (1.0,), 0.5)
    posterior = infer_intent_bayes(prior, True, 0.7, 0.2)
    assert posterior.masses == (1.0,)
    assert posterior.point_estimate == 0.5


def test_degenerate_evidence_raises():
    prior = IntentPosterior((0.0,), (1.0,), 0.0)
    with pytest.raises(DegenerateEvidenceError):
        infer_intent_bayes(prior, True, 1.0, 0.0)


def exact_posterior(grid, masses, observed, causality, background):
    """Brute-force oracle in exact rational arithmetic."""
    eps = Fraction(background)
    h = Fraction(causality)
    unnormalized = []
    for level, mass in zip(grid, masses):
        like = eps + (1 - eps) * Fraction(level) * h
        if not observed:
            like = 1 - like
        unnormalized.append(Fraction(mass) * like)
    total = sum(unnormalized)
    return [u / total for u in unnormalized]


def test_posterior_matches_exact_oracle():
    rng = random.Random(21)
    for _ in range(300):
        size = rng.randint(1, 7)
        grid = tuple(sorted(rng.sample([i / 20 for i in range(21)], size)))
        weights = [rng.random() + 1e-9 for _ in grid]
        total = sum(weights)
        masses = tuple(w / total for w in weights)
        observed = rng.random() < 0.5
        causality = rng.random()
        background = rng.uniform(0.05, 0.9)
        posterior = infer_intent_bayes(IntentPosterior(grid, masses, 0.0),
                                       observed, causality, background)
        oracle = exact_posterior(grid, masses, observed, causality, background)
        assert sum(posterior.masses) == pytest.approx(1.0, abs=1e-9)
        for got, want in zip(posterior.masses, oracle):
            assert got == pytest.approx(float(want), abs=1e-9)


def test_posterior_mean_monotone_in_causality_when_observed():
    rng = random.Random(5)
    for _ in range(200):
        size = rng.randint(2, 6)
        grid = tuple(sorted(rng.sample([i / 10 for i in range(11)], size)))
        prior = proximity_prior(grid, rng.random())
        background = rng.uniform(0.05, 0.9)
        h_low, h_high = sorted((rng.random(), rng.random()))
        low = infer_intent_bayes(prior, True, h_low, background)
        high = infer_intent_bayes(prior, True, h_high, background)
        assert high.point_estimate >= low.point_estimate - 1e-12


def test_heuristic_and_bayes_agree_directionally():
    rng = random.Random(9)
    for _ in range(200):
        prior_a = rng.random()
        suffering = rng.uniform(0.01, 1.0)
        gain = rng.uniform(0.01, 1.0)
        boosted = infer_intent_heuristic(prior_a, suffering, -1.0, gain)
        plain = infer_intent_heuristic(prior_a, 0.0, -1.0, gain)
        assert boosted >= plain

        grid = (0.0, 0.25, 0.5, 0.75, 1.0)
        prior = proximity_prior(grid, prior_a)
        background = rng.uniform(0.05, 0.9)
        causality = rng.uniform(0.01, 1.0)
        seen = infer_intent_bayes(prior, True, causality, background)
        unseen = infer_intent_bayes(prior, False, causality, background)
        assert seen.point_estimate >= unseen.point_estimate - 1e-12


def test_proximity_prior_shape():
    prior = proximity_prior((0.0, 0.5, 1.0), 1.0)
    assert prior.masses[2] > prior.masses[0]
    assert sum(prior.masses) == pytest.approx(1.0, abs=1e-12)
    degenerate = proximity_prior((1.0,), 0.0)
    assert degenerate.masses == (1.0,)


# ---------------------------------------------------------------------------
# Counterfactual appraisal
# ---------------------------------------------------------------------------

def edge_with(exogenous: float) -> HarmEdge:
    return HarmEdge(id="e", agent_id="a", patient_id="p",
                    exogenous_sufficiency=exogenous)


def test_appraisal_cases():
    tragic = appraise_counterfactual(edge_with(0.9), 0.5)
    assert tragic.classification is AppraisalClass.TRAGEDY
    assert tragic.reassigned_agent is not None

    caused = appraise_counterfactual(edge_with(0.0), 0.5)
    assert caused.classification is AppraisalClass.MIND_CAUSED
    assert caused.reassigned_agent is None

    boundary = appraise_counterfactual(edge_with(0.5), 0.5)
    assert boundary.classification is AppraisalClass.TRAGEDY


def test_appraisal_pure_function():
    rng = random.Random(2)
    for _ in range(100):
        exo, threshold = rng.random(), rng.random()
        first = appraise_counterfactual(edge_with(exo), threshold)
        second = appraise_counterfactual(edge_with(exo), threshold)
        assert first == second
        assert (first.classification is AppraisalClass.TRAGEDY) == (exo >= threshold)
