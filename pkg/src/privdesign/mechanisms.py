"""Reference mechanisms for publishing a count, privacy checks and ex-ante value."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LOG_TOL,
    BeliefDistribution,
    DecisionProblem,
    SignalMatrix,
    StatePrior,
    ValidationError,
    as_budget,
)
from .decision import interim_values
from .polytope import adjacency_pairs


@dataclass(frozen=True, eq=False)
class ObliviousMechanism:
    """A mechanism that sees only the count: ``signal.probs[w, s]``."""

    signal: SignalMatrix
    label: str = ""

    @property
    def n(self) -> int:
        return self.signal.probs.shape[0] - 1

    @classmethod
    def from_array(cls, probs, label: str = "", outputs=None) -> "ObliviousMechanism":
        return cls(SignalMatrix.from_array(probs, outputs), label)


def geometric(eps, n: int) -> ObliviousMechanism:
    """Two-sided geometric noise added to the count, truncated to {0, ..., N}.

    Mass that would land below 0 or above N is folded onto the endpoints,
    which leaves the induced posteriors unchanged.
    """
    eps = as_budget(eps).epsilon
    r = math.exp(-eps)
    states = np.arange(n + 1)
    dist = np.abs(states[:, None] - states[None, :])
    probs = (1 - r) / (1 + r) * r**dist
    if n > 0:
        probs[:, [0, n]] = (1 / (1 + r)) * r ** dist[:, [0, n]]
    else:
        probs[:] = 1.0
    return ObliviousMechanism.from_array(probs, f"geometric(eps={eps:g})")


def uninformative(n: int) -> ObliviousMechanism:
    return ObliviousMechanism.from_array(np.ones((n + 1, 1)), "uninformative")


def identity(n: int) -> ObliviousMechanism:
    """Publishes the count exactly; not private for any finite ε."""
    return ObliviousMechanism.from_array(np.eye(n + 1), "identity")


def garble(mech: ObliviousMechanism, kernel) -> ObliviousMechanism:
    """Post-process every output through a row-stochastic ``kernel[s, s']``."""
    kernel = SignalMatrix.from_array(kernel).probs
    if kernel.shape[0] != mech.signal.probs.shape[1]:
        raise ValidationError("garbling kernel rows must match the mechanism's outputs")
    return ObliviousMechanism.from_array(mech.signal.probs @ kernel, f"garbled {mech.label}".strip())


def induced_distribution(mech: ObliviousMechanism, mu0: StatePrior) -> BeliefDistribution:
    """Distribution of the data user's posterior about the count.

    Outputs with zero probability are dropped and outputs that lead to the
    same posterior are merged.
    """
    prior = np.asarray(getattr(mu0, "probs", mu0), dtype=float)
    if prior.size != mech.n + 1:
        raise ValidationError(f"mechanism has {mech.n + 1} input states, prior has {prior.size}")
    joint = prior[:, None] * mech.signal.probs
    marginal = joint.sum(axis=0)
    keep = marginal > 0
    posteriors = (joint[:, keep] / marginal[keep]).T
    return BeliefDistribution.merged(posteriors, marginal[keep])


@dataclass(frozen=True)
class PrivacyReport:
    private: bool
    worst_log_ratio: float  # may be inf

    def __bool__(self) -> bool:
        return self.private


def verify_dp(mech: ObliviousMechanism, eps, tol: float = LOG_TOL) -> PrivacyReport:
    """Check every output's probability ratio between adjacent counts against ``e**eps``.

    Two zeros are fine; a zero next to a positive entry is an infinite ratio.
    """
    eps = as_budget(eps).epsilon
    p = mech.signal.probs
    worst = _worst_log_ratio(p[:-1], p[1:])
    return PrivacyReport(bool(worst <= eps + tol), worst)


def verify_database_dp(probs, n: int, eps, tol: float = LOG_TOL) -> PrivacyReport:
    """Same check for a mechanism over databases, ``probs[theta, s]``, across every adjacent pair."""
    eps = as_budget(eps).epsilon
    probs = np.asarray(probs, dtype=float)
    if probs.shape[0] != 2**n:
        raise ValidationError(f"expected {2**n} database rows, got {probs.shape[0]}")
    lo, hi = np.array(adjacency_pairs(n)).T
    worst = _worst_log_ratio(probs[lo], probs[hi])
    return PrivacyReport(bool(worst <= eps + tol), worst)


def _worst_log_ratio(lo: np.ndarray, hi: np.ndarray) -> float:
    both_zero = (lo == 0) & (hi == 0)
    one_zero = (lo == 0) ^ (hi == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(np.log(hi) - np.log(lo))
    ratios = np.where(both_zero, 0.0, np.where(one_zero, np.inf, ratios))
    return float(ratios.max()) if ratios.size else 0.0


def mechanism_value(mech: ObliviousMechanism, mu0: StatePrior, dp: DecisionProblem) -> float:
    """Data user's expected payoff from acting on the mechanism's output."""
    dist = induced_distribution(mech, mu0)
    return math.fsum(dist.weights * interim_values(dist.support, dp))
