"""Per-dyad psychological operators.

Three value-level mechanisms applied to each scored dyad:

* typecasting: an inverse coupling between one entity's intentionality and
  vulnerability, realized as an idempotent projection onto the constraint
  region A*P <= 1 - sensitivity;
* valence-dependent intent inference: observed bad outcomes raise inferred
  intentionality (heuristic boost or discrete Bayesian update);
* counterfactual appraisal: would the outcome have happened anyway? If so the
  event is a tragedy and blame shifts to a systemic agent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .model import HarmEdge, LockMode


class SuppressedSide(Enum):
    NONE = "none"
    AGENT_SIDE = "agent_side"
    PATIENT_SIDE = "patient_side"


class AppraisalClass(Enum):
    MIND_CAUSED = "mind_caused"
    TRAGEDY = "tragedy"


@dataclass(frozen=True)
class TypecastResult:
    intentionality_out: float
    vulnerability_out: float
    complexity_flag: bool
    suppressed_dimension: SuppressedSide


@dataclass(frozen=True)
class AppraisalResult:
    classification: AppraisalClass
    reassigned_agent: Optional[str]  # present iff classification is TRAGEDY


@dataclass(frozen=True)
class IntentPosterior:
    grid: tuple[float, ...]
    masses: tuple[float, ...]
    point_estimate: float


class DegenerateEvidenceError(ValueError):
    """Prior support and likelihood are disjoint: the posterior has no mass."""


# Id designated for the systemic stand-in agent of a tragedy reassignment.
SYSTEM_AGENT_ID = "system"


def typecast(intentionality: float, vulnerability: float, sigma_t: float,
             lock: LockMode = LockMode.NONE, tie_epsilon: float = 0.05) -> TypecastResult:
    """Project one entity's (intentionality, vulnerability) pair onto A*P <= 1 - sigma_t.

    Inside the constraint region the pair passes through. Near-equal coordinates
    with no lock cannot settle on a single role and flicker (complexity_flag) with
    values unchanged. Otherwise the non-dominant coordinate is scaled down until
    the product sits on the boundary; locks force which side is suppressed
    regardless of which coordinate dominates. The projection is exactly
    idempotent: re-applying it returns the same values.
    """
    tau = 1.0 - sigma_t
    if intentionality * vulnerability <= tau:
        return TypecastResult(intentionality, vulnerability, False, SuppressedSide.NONE)
    if abs(intentionality - vulnerability) < tie_epsilon and lock is LockMode.NONE:
        return TypecastResult(intentionality, vulnerability, True, SuppressedSide.NONE)

    if lock is LockMode.LOCKED_AGENT:
        side = SuppressedSide.PATIENT_SIDE
    elif lock is LockMode.LOCKED_PATIENT:
        side = SuppressedSide.AGENT_SIDE
    elif intentionality < vulnerability:
        side = SuppressedSide.AGENT_SIDE
    else:
        side = SuppressedSide.PATIENT_SIDE

    if side is SuppressedSide.AGENT_SIDE:
        kept = vulnerability
        scaled = tau / kept
        # Nudge below the boundary if rounding overshot, so re-application is a no-op.
        while scaled * kept > tau:
            scaled = math.nextafter(scaled, 0.0)
        return TypecastResult(scaled, vulnerability, False, side)
    kept = intentionality
    scaled = tau / kept
    while scaled * kept > tau:
        scaled = math.nextafter(scaled, 0.0)
    return TypecastResult(intentionality, scaled, False, side)


def infer_intent_heuristic(prior_a: float, suffering: float, valence: float,
                           knobe_gain: float) -> float:
    """Valence-asymmetric intent inference (the side-effect effect).

    Bad outcomes back-fill intent: A' = A + gain * (-valence) * suffering * (1 - A).
    Good outcomes leave intent untouched; there is no symmetric discount.
    """
    if valence >= 0:
        return prior_a
    return prior_a + knobe_gain * (-valence) * suffering * (1.0 - prior_a)


def uniform_prior(grid: tuple[float, ...] | list[float]) -> IntentPosterior:
    grid = tuple(grid)
    mass = 1.0 / len(grid)
    masses = tuple(mass for _ in grid)
    return IntentPosterior(grid, masses, _mean(grid, masses))


def proximity_prior(grid: tuple[float, ...] | list[float], center: float) -> IntentPosterior:
    """Prior concentrated near a declared intentionality: weight 1 - |level - center|.

    Degenerates to uniform if every grid level sits at distance 1 from the center.
    """
    grid = tuple(grid)
    weights = [1.0 - abs(level - center) for level in grid]
    total = sum(weights)
    if total <= 0.0:
        return uniform_prior(grid)
    masses = tuple(w / total for w in weights)
    return IntentPosterior(grid, masses, _mean(grid, masses))


def _mean(grid: tuple[float, ...], masses: tuple[float, ...]) -> float:
    return sum(a * m for a, m in zip(grid, masses))


def suffering_likelihood(intent_level: float, causality: float, background: float) -> float:
    """Pr(suffering occurs | intent level, causal strength): accidents happen at
    the background rate even with intent absent."""
    return background + (1.0 - background) * intent_level * causality


def infer_intent_bayes(prior: IntentPosterior, suffering_observed: bool, causality: float,
                       background: float) -> IntentPosterior:
    """Discrete evidential update of intent from the presence or absence of suffering."""
    unnormalized = []
    for level, mass in zip(prior.grid, prior.masses):
        likelihood = suffering_likelihood(level, causality, background)
        if not suffering_observed:
            likelihood = 1.0 - likelihood
        unnormalized.append(mass * likelihood)
    total = sum(unnormalized)
    if total <= 0.0:
        raise DegenerateEvidenceError("posterior has zero mass on the whole grid")
    masses = tuple(u / total for u in unnormalized)
    return IntentPosterior(prior.grid, masses, _mean(prior.grid, masses))


def appraise_counterfactual(edge: HarmEdge, tragedy_threshold: float) -> AppraisalResult:
    """Retroactive do-nothing test: would the outcome occur with intent removed?

    At or above the threshold the event reclassifies as a tragedy and blame is
    designated to a systemic agent (ties go to "would have happened anyway").
    """
    if edge.exogenous_sufficiency >= tragedy_threshold:
        return AppraisalResult(AppraisalClass.TRAGEDY, SYSTEM_AGENT_ID)
    return AppraisalResult(AppraisalClass.MIND_CAUSED, None)
