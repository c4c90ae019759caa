"""Shared value types: priors, beliefs, decision problems and privacy budgets.

States are zero-indexed counts ``0..N``.  Databases are indexed by the
integer whose binary expansion is the type profile, with respondent 1 as
the most significant bit, so ``(0, 1) -> 1`` and ``(1, 0) -> 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# L1 tolerance for "sums to one".
NORM_TOL = 1e-9
# Absolute tolerance on log-ratio constraints.
LOG_TOL = 1e-9
# L-infinity distance under which two beliefs are the same point.
DEDUP_TOL = 1e-7
# Weights at or below this are dropped from reported supports.
PRUNE_TOL = 1e-12


class ValidationError(ValueError):
    """Input does not satisfy a type invariant."""


class CapExceededError(ValueError):
    """Requested enumeration is larger than the configured cap."""


class RankError(ValueError):
    """A support set that must be linearly independent is not."""


def _frozen_array(values, *, ndim: int = 1) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("entries must be finite")
    arr.setflags(write=False)
    return arr


def _check_distribution(probs: np.ndarray, what: str, *, strict: bool) -> None:
    if probs.size == 0:
        raise ValidationError(f"{what} is empty")
    if strict and np.any(probs <= 0):
        raise ValidationError(f"{what} must have full support (all entries > 0)")
    if np.any(probs < 0):
        raise ValidationError(f"{what} has negative entries")
    if abs(math.fsum(probs) - 1.0) > NORM_TOL:
        raise ValidationError(f"{what} sums to {math.fsum(probs)!r}, not 1")


@dataclass(frozen=True)
class EpsilonBudget:
    """Privacy loss in natural-log units."""

    epsilon: float

    def __post_init__(self):
        eps = float(self.epsilon)
        if not (math.isfinite(eps) and eps > 0):
            raise ValidationError(f"epsilon must be positive and finite, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    def __float__(self) -> float:
        return self.epsilon


def as_budget(eps: EpsilonBudget | float) -> EpsilonBudget:
    return eps if isinstance(eps, EpsilonBudget) else EpsilonBudget(eps)


@dataclass(frozen=True, eq=False)
class StatePrior:
    """Full-support prior over the states ``0..N``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        _check_distribution(probs, "state prior", strict=True)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        """Number of respondents N."""
        return self.probs.size - 1

    @classmethod
    def uniform(cls, n: int) -> "StatePrior":
        return cls(np.full(n + 1, 1.0 / (n + 1)))


@dataclass(frozen=True, eq=False)
class StateBelief:
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        _check_distribution(probs, "state belief", strict=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return self.probs.size - 1


@dataclass(frozen=True, eq=False)
class DatabaseBelief:
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs)
        _check_distribution(probs, "database belief", strict=False)
        if probs.size & (probs.size - 1):
            raise ValidationError(f"database belief length {probs.size} is not a power of two")
        object.__setattr__(self, "probs", probs)

    @property
    def n_respondents(self) -> int:
        return self.probs.size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class DatabasePrior:
    """Full-support prior over the ``2**N`` databases, in binary index order."""

    n_respondents: int
    probs: np.ndarray

    def __post_init__(self):
        n = int(self.n_respondents)
        if n < 1:
            raise ValidationError("need at least one respondent")
        probs = _frozen_array(self.probs)
        if probs.size != 2**n:
            raise ValidationError(f"database prior has {probs.size} entries, expected {2**n}")
        _check_distribution(probs, "database prior", strict=True)
        object.__setattr__(self, "n_respondents", n)
        object.__setattr__(self, "probs", probs)

    def is_symmetric(self, tol: float = NORM_TOL) -> bool:
        """True iff permuting respondents never changes a database's probability."""
        counts = state_index(self.n_respondents)
        for w in range(self.n_respondents + 1):
            block = self.probs[counts == w]
            if block.max() - block.min() > tol:
                return False
        return True

    def state_prior(self) -> StatePrior:
        return StatePrior(project_belief(self.probs).probs)


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Finite ordered action set with a payoff table ``payoffs[a, w]``."""

    actions: np.ndarray
    payoffs: np.ndarray

    def __post_init__(self):
        actions = _frozen_array(self.actions)
        payoffs = _frozen_array(self.payoffs, ndim=2)
        if actions.size == 0:
            raise ValidationError("need at least one action")
        if np.any(np.diff(actions) <= 0):
            raise ValidationError("actions must be strictly increasing")
        if payoffs.shape[0] != actions.size:
            raise ValidationError(
                f"payoff table has {payoffs.shape[0]} rows for {actions.size} actions"
            )
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "payoffs", payoffs)

    @property
    def n(self) -> int:
        return self.payoffs.shape[1] - 1

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], actions: Sequence[float] | None = None):
        rows = np.asarray(rows, dtype=float)
        if actions is None:
            actions = np.arange(rows.shape[0], dtype=float)
        return cls(np.asarray(actions, dtype=float), rows)


class BeliefDistribution:
    """Finitely supported distribution over beliefs.

    ``support`` is a ``(J, d)`` array whose rows are beliefs (over states or
    over databases); ``weights`` has length ``J``.  Rows must be pairwise
    distinct beyond ``DEDUP_TOL``; use :meth:`merged` to build one from raw
    pairs that may repeat.
    """

    __slots__ = ("support", "weights")

    def __init__(self, support, weights):
        support = np.array(support, dtype=float)
        if support.ndim == 1:
            support = support[None, :]
        weights = np.array(weights, dtype=float).reshape(-1)
        if support.ndim != 2 or support.shape[0] != weights.size:
            raise ValidationError("support rows and weights disagree in length")
        if not (np.all(np.isfinite(support)) and np.all(np.isfinite(weights))):
            raise ValidationError("support and weights must be finite")
        if np.any(weights < 0):
            raise ValidationError("weights must be nonnegative")
        if abs(math.fsum(weights) - 1.0) > NORM_TOL:
            raise ValidationError(f"weights sum to {math.fsum(weights)!r}, not 1")
        for row in support:
            _check_distribution(row, "support belief", strict=False)
        if support.shape[0] > 1:
            gaps = np.abs(support[:, None, :] - support[None, :, :]).max(axis=2)
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() <= DEDUP_TOL:
                raise ValidationError("support contains duplicate beliefs")
        support.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    def __setattr__(self, name, value):
        raise AttributeError("BeliefDistribution is immutable")

    def __len__(self) -> int:
        return self.weights.size

    def __repr__(self) -> str:
        return f"BeliefDistribution(J={len(self)}, dim={self.support.shape[1]})"

    @classmethod
    def merged(cls, beliefs: Iterable, weights: Iterable[float], tol: float = DEDUP_TOL):
        """Build a distribution, merging beliefs closer than ``tol`` and dropping zero weights."""
        rows: list[np.ndarray] = []
        mass: list[float] = []
        for belief, w in zip(beliefs, weights):
            if w <= 0:
                continue
            belief = np.asarray(getattr(belief, "probs", belief), dtype=float)
            for k, row in enumerate(rows):
                if np.abs(row - belief).max() <= tol:
                    mass[k] += w
                    break
            else:
                rows.append(belief)
                mass.append(float(w))
        total = math.fsum(mass)
        return cls(np.array(rows), np.array(mass) / total)

    @classmethod
    def point_mass(cls, belief) -> "BeliefDistribution":
        return cls(np.asarray(getattr(belief, "probs", belief), dtype=float)[None, :], [1.0])

    def mean(self) -> np.ndarray:
        return self.weights @ self.support

    def bayes_plausible(self, prior, tol: float = NORM_TOL) -> bool:
        prior = np.asarray(getattr(prior, "probs", prior), dtype=float)
        return bool(np.abs(self.mean() - prior).sum() <= tol)

    def state_beliefs(self) -> list[StateBelief]:
        return [StateBelief(row) for row in self.support]


@dataclass(frozen=True, eq=False)
class SignalMatrix:
    """Row-stochastic table ``probs[w, j]`` of output ``j`` given input ``w``."""

    outputs: tuple
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen_array(self.probs, ndim=2)
        outputs = tuple(self.outputs)
        if len(outputs) != probs.shape[1]:
            raise ValidationError(f"{len(outputs)} output labels for {probs.shape[1]} columns")
        if np.any(probs < 0):
            raise ValidationError("signal probabilities must be nonnegative")
        sums = probs.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL)
        if bad.size:
            raise ValidationError(f"row {int(bad[0])} sums to {float(sums[bad[0]])!r}, not 1")
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_array(cls, probs, outputs=None) -> "SignalMatrix":
        probs = np.asarray(probs, dtype=float)
        if outputs is None:
            outputs = tuple(range(probs.shape[1]))
        return cls(tuple(outputs), probs)


def state_of_database(theta: Sequence[int]) -> int:
    """Number of type-1 respondents in a bit pattern."""
    return int(sum(1 for b in theta if b))


def database_index(theta: Sequence[int]) -> int:
    """Index of a type profile; respondent 1 is the most significant bit."""
    idx = 0
    for b in theta:
        idx = (idx << 1) | (1 if b else 0)
    return idx


def database_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def state_index(n: int) -> np.ndarray:
    """Popcount of every database index ``0..2**n - 1``."""
    idx = np.arange(2**n)
    counts = np.zeros(2**n, dtype=int)
    for k in range(n):
        counts += (idx >> k) & 1
    return counts


def projection_matrix(n: int) -> np.ndarray:
    """``(N+1, 2**N)`` 0/1 matrix mapping database beliefs to state beliefs."""
    counts = state_index(n)
    proj = np.zeros((n + 1, 2**n))
    proj[counts, np.arange(2**n)] = 1.0
    return proj


def project_belief(pi) -> StateBelief:
    """Collapse a belief over databases onto the count of type-1 respondents."""
    probs = np.asarray(getattr(pi, "probs", pi), dtype=float)
    n = probs.size.bit_length() - 1
    if probs.size != 2**n:
        raise ValidationError(f"length {probs.size} is not a power of two")
    out = np.bincount(state_index(n), weights=probs, minlength=n + 1)
    return StateBelief(out)


def symmetric_prior_from_state_prior(mu0: StatePrior, n: int | None = None) -> DatabasePrior:
    """The unique exchangeable database prior whose count distribution is ``mu0``."""
    if n is None:
        n = mu0.n
    if mu0.probs.size != n + 1:
        raise ValidationError(f"state prior has {mu0.probs.size} entries, expected {n + 1}")
    counts = state_index(n)
    binom = np.array([math.comb(n, w) for w in range(n + 1)], dtype=float)
    return DatabasePrior(n, mu0.probs[counts] / binom[counts])
