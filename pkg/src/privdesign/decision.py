"""Decision maker's interim value and payoff structure."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DecisionProblem, StatePrior, ValidationError


@dataclass(frozen=True)
class ValueEvaluation:
    value: float
    optimal_action_index: int


def _probs(mu, n_states: int) -> np.ndarray:
    probs = np.asarray(getattr(mu, "probs", mu), dtype=float)
    if probs.shape != (n_states,):
        raise ValidationError(f"belief has shape {probs.shape}, decision problem has {n_states} states")
    return probs


def interim_value(mu, dp: DecisionProblem) -> ValueEvaluation:
    """Best expected payoff at belief ``mu``; ties go to the lowest action index."""
    expected = dp.payoffs @ _probs(mu, dp.n + 1)
    best = int(np.argmax(expected))  # argmax returns the first maximiser
    return ValueEvaluation(float(expected[best]), best)


def interim_values(beliefs: np.ndarray, dp: DecisionProblem) -> np.ndarray:
    """Vectorised ``interim_value(...).value`` over the rows of ``beliefs``."""
    beliefs = np.atleast_2d(np.asarray(beliefs, dtype=float))
    if beliefs.shape[1] != dp.n + 1:
        raise ValidationError("belief rows do not match the decision problem's states")
    return (beliefs @ dp.payoffs.T).max(axis=1)


@dataclass(frozen=True)
class SupermodularityReport:
    supermodular: bool
    # (a, a', w, w') index quadruple with a<a', w<w' where increasing differences fail
    violation: tuple[int, int, int, int] | None = None

    def __bool__(self) -> bool:
        return self.supermodular


def is_supermodular(dp: DecisionProblem, tol: float = 1e-12) -> SupermodularityReport:
    """Increasing differences in (action, state), checked on adjacent pairs.

    Adjacent pairs are enough: any larger rectangle telescopes into adjacent
    ones.
    """
    u = dp.payoffs
    cross = u[1:, 1:] - u[:-1, 1:] - u[1:, :-1] + u[:-1, :-1]
    bad = np.argwhere(cross < -tol)
    if bad.size == 0:
        return SupermodularityReport(True)
    a, w = (int(x) for x in bad[0])
    return SupermodularityReport(False, (a, a + 1, w, w + 1))


def full_information_value(mu0: StatePrior, dp: DecisionProblem) -> float:
    """Expected payoff when the state is revealed exactly."""
    return float(_probs(mu0, dp.n + 1) @ dp.payoffs.max(axis=0))
