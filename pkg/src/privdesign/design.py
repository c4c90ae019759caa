"""Optimal ε-private publication: the designer's linear program and its mechanism.

The designer picks a Bayes-plausible distribution of posteriors supported on
the privacy polytope.  Because the objective is linear in the distribution
and the polytope has finitely many vertices, it suffices to put weight on
vertices, so the problem is a finite LP over vertex weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    NORM_TOL,
    PRUNE_TOL,
    BeliefDistribution,
    DatabasePrior,
    DecisionProblem,
    RankError,
    SignalMatrix,
    StatePrior,
    ValidationError,
    as_budget,
    projection_matrix,
    state_index,
)
from .decision import interim_values
from .polytope import (
    DEFAULT_MAX_DATABASES,
    DEFAULT_MAX_N,
    DatabasePolytope,
    ObliviousPolytope,
    enumerate_database_vertices,
    oblivious_vertex_matrix,
    tilt_vector,
)
from .simplex import LPError, solve_lp


@dataclass(frozen=True, eq=False)
class DesignSolution:
    optimum: float
    distribution: BeliefDistribution
    signatures: tuple | None  # aligned with the support; None for database solutions
    signal: SignalMatrix
    support_values: np.ndarray

    @property
    def support_size(self) -> int:
        return len(self.distribution)


@dataclass(frozen=True)
class SupportWeights:
    weights: np.ndarray
    bayes_plausible: bool
    residual: float


def weights_for_support(support, prior, tol: float = NORM_TOL) -> SupportWeights:
    """Weights that average the support beliefs back to the prior.

    With a linearly independent support there is at most one such weight
    vector; it is the least-squares projection of the prior onto the span of
    the support.  ``bayes_plausible`` is false when that projection misses
    the prior or puts negative weight somewhere.
    """
    rows = np.array([np.asarray(getattr(s, "probs", s), dtype=float) for s in support])
    prior = np.asarray(getattr(prior, "probs", prior), dtype=float)
    if rows.ndim != 2 or rows.shape[1] != prior.size:
        raise ValidationError("support beliefs and prior have different dimensions")
    M = rows.T
    if np.linalg.matrix_rank(M) < M.shape[1]:
        raise RankError(f"{M.shape[1]} support beliefs are not linearly independent")
    weights, *_ = np.linalg.lstsq(M, prior, rcond=None)
    residual = float(np.abs(M @ weights - prior).sum())
    plausible = bool(residual <= tol and np.all(weights >= -PRUNE_TOL))
    return SupportWeights(weights, plausible, residual)


def build_signal_matrix(distribution: BeliefDistribution, prior, outputs=None) -> SignalMatrix:
    """Mechanism whose posteriors are exactly the support of ``distribution``.

    Output ``j`` is sent from input ``w`` with probability
    ``weight_j * belief_j(w) / prior(w)``; Bayes' rule then returns belief_j.
    """
    prior = np.asarray(getattr(prior, "probs", prior), dtype=float)
    if not distribution.bayes_plausible(prior):
        raise ValidationError("distribution does not average to the prior")
    probs = distribution.support.T * distribution.weights[None, :] / prior[:, None]
    # rounding leaves rows a few ulps off 1; renormalise so downstream checks stay exact
    probs = probs / probs.sum(axis=1, keepdims=True)
    return SignalMatrix.from_array(probs, outputs)


def signature_tilts(signatures, eps, n: int) -> np.ndarray:
    """Matrix whose column j is the tilt vector of signature j, shape ``(N+1, J)``."""
    eps = as_budget(eps).epsilon
    return np.column_stack([tilt_vector(s, eps, n) for s in signatures])


def signal_from_signatures(signatures, eps, n: int) -> SignalMatrix:
    """Closed-form mechanism for a vertex support: ``Psi @ diag(c)`` with ``Psi @ c = 1``.

    The result does not depend on the prior; the prior only determines which
    supports are feasible.
    """
    psi = signature_tilts(signatures, eps, n)
    coef = np.linalg.solve(psi.T @ psi, psi.T @ np.ones(n + 1))
    if np.abs(psi @ coef - 1.0).max() > 1e-9 or np.any(coef < -PRUNE_TOL):
        raise ValidationError("signatures do not form a valid mechanism")
    return SignalMatrix.from_array(psi * coef[None, :], [str(s) for s in signatures])


def _solve_vertex_lp(vertices: np.ndarray, values: np.ndarray, prior: np.ndarray):
    res = solve_lp(values, vertices.T, prior, maximize=True)
    if res.status != "optimal":
        # the prior is interior, so the LP is always feasible and bounded
        raise LPError(f"design LP returned status {res.status!r}")
    cols = [j for j in res.basis if res.x[j] > PRUNE_TOL]
    sw = weights_for_support(vertices[cols], prior)
    weights = np.clip(sw.weights, 0.0, None)
    weights /= math.fsum(weights)
    return cols, weights


def solve_oblivious(mu0: StatePrior, dp: DecisionProblem, eps, max_n: int = DEFAULT_MAX_N) -> DesignSolution:
    """Best distribution of posteriors about the count reachable by an ε-private oblivious mechanism.

    Columns are the ``2**N`` vertices in ascending signature bitmask order;
    Bland's rule on that order makes the returned basis deterministic.
    """
    if dp.n != mu0.n:
        raise ValidationError(f"decision problem has N={dp.n}, prior has N={mu0.n}")
    poly = ObliviousPolytope(as_budget(eps), mu0)
    sigs, vertices = oblivious_vertex_matrix(poly, max_n)
    values = interim_values(vertices, dp)
    cols, weights = _solve_vertex_lp(vertices, values, mu0.probs)
    support_sigs = tuple(sigs[j] for j in cols)
    dist = BeliefDistribution(vertices[cols], weights)
    signal = build_signal_matrix(dist, mu0, [str(s) for s in support_sigs])
    optimum = math.fsum(weights * values[cols])
    return DesignSolution(optimum, dist, support_sigs, signal, values[cols].copy())


def solve_database(
    pi0: DatabasePrior, dp: DecisionProblem, eps, max_databases: int = DEFAULT_MAX_DATABASES
) -> DesignSolution:
    """Same problem over beliefs about the whole database, allowing non-oblivious mechanisms."""
    if dp.n != pi0.n_respondents:
        raise ValidationError(f"decision problem has N={dp.n}, prior has N={pi0.n_respondents}")
    poly = DatabasePolytope(as_budget(eps), pi0)
    vertices = np.array([v.probs for v in enumerate_database_vertices(poly, max_databases)])
    values = interim_values(vertices @ projection_matrix(pi0.n_respondents).T, dp)
    cols, weights = _solve_vertex_lp(vertices, values, pi0.probs)
    dist = BeliefDistribution(vertices[cols], weights)
    signal = build_signal_matrix(dist, pi0)
    optimum = math.fsum(weights * values[cols])
    return DesignSolution(optimum, dist, None, signal, values[cols].copy())


@dataclass(frozen=True, eq=False)
class ExponentialMechanism:
    """Publishes output j with probability proportional to ``exp(eps * q(theta, j)) * base(j)``.

    ``state_queries[w, j]`` is the score of output j for any database with
    count w; the score depends on the database only through its count.
    """

    epsilon: float
    state_queries: np.ndarray
    base_measure: np.ndarray

    @property
    def n(self) -> int:
        return self.state_queries.shape[0] - 1

    def query(self, theta) -> np.ndarray:
        return self.state_queries[int(sum(theta))]

    def database_queries(self) -> np.ndarray:
        """Score table over all ``2**N`` databases in index order."""
        return self.state_queries[state_index(self.n)]

    def state_signal(self) -> np.ndarray:
        w = np.exp(self.epsilon * self.state_queries) * self.base_measure[None, :]
        return w / w.sum(axis=1, keepdims=True)

    def database_signal(self) -> np.ndarray:
        return self.state_signal()[state_index(self.n)]


def exponential_parameterization(solution: DesignSolution, eps) -> ExponentialMechanism:
    """Rewrite an optimal vertex-supported mechanism as an exponential mechanism."""
    if solution.signatures is None:
        raise ValueError("exponential form needs a support made of signature vertices")
    eps = as_budget(eps).epsilon
    n = solution.distribution.support.shape[1] - 1
    signs = np.column_stack([s.signs(n) for s in solution.signatures])
    queries = np.vstack([np.zeros(len(solution.signatures)), np.cumsum(signs, axis=0)])
    psi = np.exp(eps * queries)
    coef = np.linalg.solve(psi.T @ psi, psi.T @ np.ones(n + 1))
    return ExponentialMechanism(eps, queries, coef / coef.sum())
