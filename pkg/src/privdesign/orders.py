"""Orders on distributions of posteriors about the count.

``uprr_compare`` tests the uniform-peaked relative risk order: every
posterior of the dominant distribution must have a peak state such that its
likelihood ratio against every posterior of the other distribution rises up
to the peak and falls after it.  ``frechet_representation`` turns a labelled
distribution of posteriors into a joint law of (state, uniform quantile), on
which the supermodular order reduces to comparing bivariate CDFs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NORM_TOL, BeliefDistribution, DecisionProblem, StatePrior, ValidationError, as_budget
from .decision import interim_values, is_supermodular
from .polytope import ObliviousPolytope, oblivious_membership

PEAK_TOL = 1e-9


@dataclass(frozen=True)
class PeakAssignment:
    peaks: tuple[int, ...]  # peaks[j] for support belief j of the dominant distribution
    feasible_sets: tuple[frozenset, ...]

    def __post_init__(self):
        for j, (p, fs) in enumerate(zip(self.peaks, self.feasible_sets)):
            if p not in fs:
                raise ValidationError(f"peak {p} for belief {j} is not in its feasible set")


def _positive_support(tau: BeliefDistribution, what: str) -> np.ndarray:
    if np.any(tau.support <= 0):
        raise ValidationError(f"{what} has a belief with a zero entry; relative risks are undefined")
    return tau.support


def feasible_peaks(mu: np.ndarray, others: np.ndarray, tol: float = PEAK_TOL) -> frozenset:
    """States at which ``mu / other`` can peak, for every row ``other`` at once.

    Steps are compared in logs: a step counts as rising if it is at least
    ``-tol`` and as falling if it is at most ``tol``.
    """
    steps = np.diff(np.log(mu)[None, :] - np.log(others), axis=1)  # (J', N)
    n = mu.size - 1
    rising = np.all(steps >= -tol, axis=0)
    falling = np.all(steps <= tol, axis=0)
    # peak k needs rising on steps 0..k-1 and falling on steps k..N-1
    rise_ok = np.concatenate([[True], np.cumprod(rising).astype(bool)])
    fall_ok = np.concatenate([np.cumprod(falling[::-1])[::-1].astype(bool), [True]])
    return frozenset(int(k) for k in range(n + 1) if rise_ok[k] and fall_ok[k])


def uprr_compare(
    tau: BeliefDistribution,
    tau_prime: BeliefDistribution,
    peaks=None,
    tol: float = PEAK_TOL,
) -> PeakAssignment | None:
    """Whether ``tau`` dominates ``tau_prime`` in the uniform-peaked relative risk order.

    Returns the peak assignment, or ``None`` when some posterior of ``tau``
    has no valid peak.  By default each posterior gets its smallest valid
    peak; pass ``peaks`` to check a specific assignment instead (``None`` is
    returned if any proposed peak is invalid).
    """
    S = _positive_support(tau, "dominant distribution")
    T = _positive_support(tau_prime, "dominated distribution")
    if S.shape[1] != T.shape[1]:
        raise ValidationError("distributions are over different state spaces")
    sets = tuple(feasible_peaks(mu, T, tol) for mu in S)
    if any(not s for s in sets):
        return None
    if peaks is None:
        chosen = tuple(min(s) for s in sets)
    else:
        chosen = tuple(int(p) for p in peaks)
        if len(chosen) != len(sets) or any(p not in s for p, s in zip(chosen, sets)):
            return None
    return PeakAssignment(chosen, sets)


def upper_bound_peaks(tau: BeliefDistribution, mu0, eps) -> tuple[int, ...]:
    """For each posterior, the largest state where its upper privacy bound binds, or 0 if none."""
    if not isinstance(mu0, StatePrior):
        mu0 = StatePrior(np.asarray(mu0, dtype=float))
    poly = ObliviousPolytope(as_budget(eps), mu0)
    out = []
    for row in tau.support:
        binding = oblivious_membership(row, poly).binding_upper
        out.append(max(binding) if binding else 0)
    return tuple(out)


# ---------------------------------------------------------------------------
# Frechet representations


@dataclass(frozen=True, eq=False)
class FrechetRepresentation:
    """Piecewise-constant joint density of (state, x) on ``Omega x [0, 1]``.

    On segment k, ``x`` runs from ``breakpoints[k]`` to ``breakpoints[k+1]``
    and the state density is ``segment_beliefs[k]``; ``labels[k]`` is the
    label value shared by the posteriors pooled into that segment.
    """

    breakpoints: np.ndarray
    segment_beliefs: np.ndarray
    labels: np.ndarray

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def state_marginal(self) -> np.ndarray:
        return self.lengths @ self.segment_beliefs

    def _overlap(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        lo = self.breakpoints[:-1]
        return np.clip(xs[:, None] - lo[None, :], 0.0, self.lengths[None, :])  # (len(xs), K)

    def x_marginal_cdf(self, xs) -> np.ndarray:
        return self._overlap(xs) @ self.segment_beliefs.sum(axis=1)

    def cdf_grid(self, xs) -> np.ndarray:
        """``F[w, i] = P(state <= w, x <= xs[i])`` for every state w."""
        cum = np.cumsum(self.segment_beliefs, axis=1)  # (K, N+1)
        return (self._overlap(xs) @ cum).T

    def cdf(self, w: int, x: float) -> float:
        return float(self.cdf_grid([x])[int(w), 0])

    def expectation(self, h) -> float:
        """``E[h(state, label)]`` integrated segment by segment; ``h(states, label)`` must vectorise over states."""
        states = np.arange(self.segment_beliefs.shape[1])
        terms = [
            length * float(belief @ np.asarray(h(states, t), dtype=float))
            for length, belief, t in zip(self.lengths, self.segment_beliefs, self.labels)
        ]
        return math.fsum(terms)


def frechet_representation(tau: BeliefDistribution, labels) -> FrechetRepresentation:
    """Pool posteriors with equal labels and lay the pools out on [0, 1] in label order."""
    labels = np.asarray(labels, dtype=float)
    if labels.shape != (len(tau),):
        raise ValidationError(f"need one label per support belief, got {labels.shape}")
    if not np.all(np.isfinite(labels)):
        raise ValidationError("labels must be finite")
    values = np.unique(labels)
    masses, beliefs = [], []
    for v in values:
        idx = np.flatnonzero(labels == v)
        m = math.fsum(tau.weights[idx])
        masses.append(m)
        beliefs.append(tau.weights[idx] @ tau.support[idx] / m)
    cuts = [0.0]
    for k in range(1, len(masses)):
        cuts.append(math.fsum(masses[:k]))
    cuts.append(1.0)
    return FrechetRepresentation(np.array(cuts), np.array(beliefs), values)


@dataclass(frozen=True)
class DominanceReport:
    dominates: bool
    worst_violation: float  # max of G - F over the grid; <= 0 when F dominates

    def __bool__(self) -> bool:
        return self.dominates


def spm_dominates(F: FrechetRepresentation, G: FrechetRepresentation, tol: float = 1e-9) -> DominanceReport:
    """Whether F dominates G in the supermodular order (F's CDF is everywhere at least G's).

    Both CDFs are linear in x between breakpoints, so checking the union of
    breakpoints at every state is exact.
    """
    if F.segment_beliefs.shape[1] != G.segment_beliefs.shape[1]:
        raise ValidationError("representations are over different state spaces")
    if np.abs(F.state_marginal() - G.state_marginal()).sum() > NORM_TOL:
        raise ValidationError("representations have different state marginals, so they are not comparable")
    xs = np.union1d(F.breakpoints, G.breakpoints)
    gap = G.cdf_grid(xs) - F.cdf_grid(xs)
    worst = float(gap.max())
    return DominanceReport(worst <= tol, worst)


def supermodular_value_dominance(
    tau: BeliefDistribution, tau_prime: BeliefDistribution, dp: DecisionProblem
) -> tuple[float, float]:
    """Expected interim value of a supermodular decision maker under each distribution."""
    if not is_supermodular(dp):
        raise ValidationError("decision problem is not supermodular")
    if np.abs(tau.mean() - tau_prime.mean()).sum() > NORM_TOL:
        raise ValidationError("distributions average to different priors")
    first = math.fsum(tau.weights * interim_values(tau.support, dp))
    second = math.fsum(tau_prime.weights * interim_values(tau_prime.support, dp))
    return first, second
