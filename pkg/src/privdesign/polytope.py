"""Sets of ε-differentially private posteriors and their vertices.

Two polytopes live here.  ``ObliviousPolytope`` is the set of beliefs about
the count whose log likelihood ratio between adjacent counts moves at most ε
away from the prior's.  ``DatabasePolytope`` is the same object over full
databases, with one constraint pair per pair of databases differing in one
respondent.  All constraint checks are done on log ratios so that the
tolerance is absolute regardless of how small the probabilities get.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEDUP_TOL,
    LOG_TOL,
    NORM_TOL,
    CapExceededError,
    DatabaseBelief,
    DatabasePrior,
    EpsilonBudget,
    StateBelief,
    StatePrior,
    ValidationError,
    as_budget,
    project_belief,
    projection_matrix,
)
from .simplex import find_feasible

DEFAULT_MAX_N = 20
DEFAULT_MAX_DATABASES = 16


@dataclass(frozen=True, order=True)
class UpperBoundSignature:
    """States ``1..N`` at which a vertex sits on the upper privacy bound."""

    phi: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        phi = frozenset(int(w) for w in self.phi)
        if any(w < 1 for w in phi):
            raise ValidationError("signature states must be >= 1")
        object.__setattr__(self, "phi", phi)

    @property
    def bitmask(self) -> int:
        return sum(1 << (w - 1) for w in self.phi)

    @classmethod
    def from_bitmask(cls, mask: int) -> "UpperBoundSignature":
        return cls(frozenset(k + 1 for k in range(mask.bit_length()) if mask >> k & 1))

    def signs(self, n: int) -> np.ndarray:
        """+1 where the upper bound binds, -1 where the lower bound does, for states 1..n."""
        if self.phi and max(self.phi) > n:
            raise ValidationError(f"signature {sorted(self.phi)} has states beyond N={n}")
        return np.array([1.0 if w in self.phi else -1.0 for w in range(1, n + 1)])

    def __str__(self) -> str:
        return "{" + ",".join(str(w) for w in sorted(self.phi)) + "}"


def tilt_vector(signature: UpperBoundSignature, epsilon: float, n: int) -> np.ndarray:
    """Multiplicative tilt of the prior that produces the vertex with this signature.

    Entry ``w`` is ``exp(eps * sum_{i<=w} (+1 if i in phi else -1))``.
    """
    steps = np.concatenate([[0.0], np.cumsum(signature.signs(n))])
    return np.exp(float(epsilon) * steps)


@dataclass(frozen=True)
class ObliviousPolytope:
    epsilon: EpsilonBudget
    mu0: StatePrior

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_budget(self.epsilon))

    @property
    def n(self) -> int:
        return self.mu0.n

    def log_shift(self, mu) -> np.ndarray:
        """Posterior-minus-prior log ratio between states w and w-1, for w = 1..N."""
        probs = np.asarray(getattr(mu, "probs", mu), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(probs)
            shift = np.diff(logs) - np.diff(np.log(self.mu0.probs))
        return np.where(np.isnan(shift), -np.inf, shift)


@dataclass(frozen=True)
class MembershipReport:
    """Signed slacks of every privacy constraint (negative means violated)."""

    member: bool
    upper_slack: np.ndarray
    lower_slack: np.ndarray
    tol: float = LOG_TOL

    @property
    def binding_upper(self) -> list[int]:
        return [int(w) + 1 for w in np.flatnonzero(np.abs(self.upper_slack) < self.tol)]

    @property
    def binding_lower(self) -> list[int]:
        return [int(w) + 1 for w in np.flatnonzero(np.abs(self.lower_slack) < self.tol)]

    @property
    def n_binding(self) -> int:
        return len(self.binding_upper) + len(self.binding_lower)

    @property
    def violations(self) -> list[tuple[int, str]]:
        out = [(int(w) + 1, "upper") for w in np.flatnonzero(self.upper_slack < -self.tol)]
        out += [(int(w) + 1, "lower") for w in np.flatnonzero(self.lower_slack < -self.tol)]
        return sorted(out)


def oblivious_membership(mu, poly: ObliviousPolytope, tol: float = LOG_TOL) -> MembershipReport:
    """Check a belief about the count against every adjacent-state privacy bound.

    A belief with a zero entry is never a member: some adjacent ratio is then
    infinite or undefined.
    """
    probs = np.asarray(getattr(mu, "probs", mu), dtype=float)
    if probs.size != poly.n + 1:
        raise ValidationError(f"belief has {probs.size} states, polytope has {poly.n + 1}")
    eps = poly.epsilon.epsilon
    if np.any(probs <= 0):
        shift = poly.log_shift(probs)
        upper = np.where(np.isfinite(shift), eps - shift, -np.inf)
        lower = np.where(np.isfinite(shift), eps + shift, -np.inf)
        return MembershipReport(False, upper, lower, tol)
    shift = poly.log_shift(probs)
    upper = eps - shift
    lower = eps + shift
    member = bool(np.all(upper >= -tol) and np.all(lower >= -tol))
    return MembershipReport(member, upper, lower, tol)


def oblivious_vertex(signature: UpperBoundSignature, poly: ObliviousPolytope) -> StateBelief:
    """Vertex of the oblivious polytope with upper bounds binding exactly on ``signature``."""
    return StateBelief(_vertex_rows(np.array([signature.bitmask]), poly)[0])


def _vertex_rows(masks: np.ndarray, poly: ObliviousPolytope) -> np.ndarray:
    n = poly.n
    bits = (masks[:, None] >> np.arange(n)[None, :]) & 1
    steps = np.concatenate([np.zeros((masks.size, 1)), np.cumsum(2.0 * bits - 1.0, axis=1)], axis=1)
    logw = np.log(poly.mu0.probs)[None, :] + poly.epsilon.epsilon * steps
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    return w / w.sum(axis=1, keepdims=True)


def oblivious_vertex_matrix(poly: ObliviousPolytope, max_n: int = DEFAULT_MAX_N):
    """All ``2**N`` vertices as rows, ordered by signature bitmask.

    Returns ``(signatures, V)`` with ``V`` of shape ``(2**N, N+1)``.
    """
    if poly.n > max_n:
        raise CapExceededError(f"N={poly.n} exceeds the oblivious vertex cap {max_n}")
    masks = np.arange(2**poly.n)
    sigs = [UpperBoundSignature.from_bitmask(int(m)) for m in masks]
    return sigs, _vertex_rows(masks, poly)


def enumerate_oblivious_vertices(poly: ObliviousPolytope, max_n: int = DEFAULT_MAX_N):
    """Every vertex paired with its signature, in ascending bitmask order."""
    sigs, rows = oblivious_vertex_matrix(poly, max_n)
    return [(s, StateBelief(r)) for s, r in zip(sigs, rows)]


# ---------------------------------------------------------------------------
# database polytope


def adjacency_pairs(n: int) -> list[tuple[int, int]]:
    """Each unordered pair of databases at Hamming distance one, once, as (lower, upper)."""
    pairs = []
    for theta in range(2**n):
        for k in range(n):
            bit = 1 << (n - 1 - k)
            if not theta & bit:
                pairs.append((theta, theta | bit))
    return pairs


@dataclass(frozen=True)
class DatabasePolytope:
    epsilon: EpsilonBudget
    pi0: DatabasePrior
    adjacency: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "epsilon", as_budget(self.epsilon))
        if not self.adjacency:
            object.__setattr__(self, "adjacency", tuple(adjacency_pairs(self.pi0.n_respondents)))

    @property
    def n(self) -> int:
        return self.pi0.n_respondents

    def log_shift(self, pi) -> np.ndarray:
        """Posterior-minus-prior log ratio ``pi(hi)/pi(lo)`` for each adjacent pair."""
        probs = np.asarray(getattr(pi, "probs", pi), dtype=float)
        lo, hi = np.array(self.adjacency).T
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(probs)
            logp0 = np.log(self.pi0.probs)
            shift = (logs[hi] - logs[lo]) - (logp0[hi] - logp0[lo])
        return shift

    def constraint_rows(self, signs) -> np.ndarray:
        """Linear rows ``pi(hi)/p0(hi) - exp(s*eps) pi(lo)/p0(lo)`` for the given sign per pair."""
        eps = self.epsilon.epsilon
        p0 = self.pi0.probs
        rows = np.zeros((len(self.adjacency), p0.size))
        for r, ((lo, hi), s) in enumerate(zip(self.adjacency, signs)):
            rows[r, hi] = 1.0 / p0[hi]
            rows[r, lo] = -math.exp(s * eps) / p0[lo]
        return rows


@dataclass(frozen=True)
class DatabaseMembership:
    member: bool
    n_binding: int
    upper_slack: np.ndarray
    lower_slack: np.ndarray


def database_membership(pi, poly: DatabasePolytope, tol: float = LOG_TOL) -> DatabaseMembership:
    """Check every adjacent-database privacy bound; count how many bind."""
    probs = np.asarray(getattr(pi, "probs", pi), dtype=float)
    if probs.size != 2**poly.n:
        raise ValidationError(f"belief has {probs.size} entries, polytope has {2**poly.n}")
    eps = poly.epsilon.epsilon
    shift = poly.log_shift(probs)
    if np.any(probs <= 0):
        bad = np.where(np.isfinite(shift), shift, np.nan)
        upper = np.where(np.isnan(bad), -np.inf, eps - bad)
        lower = np.where(np.isnan(bad), -np.inf, eps + bad)
        return DatabaseMembership(False, 0, upper, lower)
    upper = eps - shift
    lower = eps + shift
    member = bool(np.all(upper >= -tol) and np.all(lower >= -tol))
    n_binding = int(np.sum(np.abs(upper) < tol) + np.sum(np.abs(lower) < tol))
    return DatabaseMembership(member, n_binding, upper, lower)


def _canonical(beliefs: list[np.ndarray]) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for b in beliefs:
        if not any(np.abs(b - k).max() <= DEDUP_TOL for k in kept):
            kept.append(b)
    kept.sort(key=lambda b: tuple(np.round(-b, 9)))
    return kept


def _height_functions(n: int):
    """Integer labelings of the n-cube, zero at the origin, changing by ±1 along every edge."""
    size = 2**n
    heights = [0] * size
    lower_nbrs = [[t ^ (1 << k) for k in range(n) if t >> k & 1] for t in range(size)]

    def extend(t):
        if t == size:
            yield tuple(heights)
            return
        options = None
        for nb in lower_nbrs[t]:
            cand = {heights[nb] - 1, heights[nb] + 1}
            options = cand if options is None else options & cand
        for h in sorted(options):
            heights[t] = h
            yield from extend(t + 1)

    yield from extend(1)


def _database_vertices_heights(poly: DatabasePolytope) -> list[np.ndarray]:
    n, eps = poly.n, poly.epsilon.epsilon
    size = 2**n
    logp0 = np.log(poly.pi0.probs)
    lo, hi = np.array(poly.adjacency).T
    found = []
    for h in _height_functions(n):
        h = np.asarray(h, dtype=float)
        # Binding system: every adjacent pair at the sign implied by the labeling,
        # plus the simplex equality.  Keep it only if it pins down a unique point.
        signs = h[hi] - h[lo]
        system = np.vstack([poly.constraint_rows(signs), np.ones(size)])
        if np.linalg.matrix_rank(system) < size:
            continue
        rhs = np.zeros(system.shape[0])
        rhs[-1] = 1.0
        sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        logw = logp0 + eps * h
        closed = np.exp(logw - logw.max())
        closed /= closed.sum()
        if np.abs(sol - closed).max() > 1e-8:
            continue
        if database_membership(closed, poly).member:
            found.append(closed)
    return found


def _database_vertices_subsets(poly: DatabasePolytope, batch: int = 20000) -> list[np.ndarray]:
    """Exhaustive search over binding sets of ``2**N - 1`` constraints.

    Upper and lower bounds of one pair cannot bind together at a strictly
    positive point, so each candidate picks ``2**N - 1`` distinct pairs and a
    sign for each.
    """
    size = 2**poly.n
    n_pairs = len(poly.adjacency)
    lo, hi = np.array(poly.adjacency).T
    up_rows = poly.constraint_rows(np.ones(n_pairs))
    down_rows = poly.constraint_rows(-np.ones(n_pairs))
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    found = []

    def candidates():
        for subset in itertools.combinations(range(n_pairs), size - 1):
            idx = np.array(subset)
            for signs in itertools.product((1, -1), repeat=size - 1):
                s = np.array(signs)
                yield np.where(s[:, None] > 0, up_rows[idx], down_rows[idx])

    gen = candidates()
    while True:
        chunk = list(itertools.islice(gen, batch))
        if not chunk:
            break
        systems = np.stack([np.vstack([c, np.ones((1, size))]) for c in chunk])
        sv = np.linalg.svd(systems, compute_uv=False)
        ok = sv[:, -1] > 1e-10 * sv[:, 0]
        if not ok.any():
            continue
        sols = np.linalg.solve(systems[ok], np.broadcast_to(rhs, (int(ok.sum()), size))[..., None])[..., 0]
        for sol in sols:
            if np.all(sol > 0) and database_membership(sol, poly).member:
                found.append(sol)
    return found


def enumerate_database_vertices(
    poly: DatabasePolytope, max_databases: int = DEFAULT_MAX_DATABASES, method: str = "heights"
) -> list[DatabaseBelief]:
    """All vertices of the database polytope.

    ``method="subsets"`` tries every binding set of ``2**N - 1`` constraints
    (exhaustive, practical up to N=3).  ``method="heights"`` only tries binding
    sets whose implied log tilts are consistent around every 4-cycle of the
    cube, which at a strictly positive vertex are the only sets that can be
    full rank; it reaches the cap of 16 databases quickly.  Both return the
    same vertex list in the same canonical order.
    """
    if 2**poly.n > max_databases:
        raise CapExceededError(f"2**N={2**poly.n} databases exceeds the cap {max_databases}")
    if method == "heights":
        raw = _database_vertices_heights(poly)
    elif method == "subsets":
        raw = _database_vertices_subsets(poly)
    else:
        raise ValueError(f"unknown method {method!r}")
    return [DatabaseBelief(v) for v in _canonical(raw)]


# ---------------------------------------------------------------------------
# projection


@dataclass(frozen=True)
class ProjectedVertex:
    index: int
    database_belief: DatabaseBelief
    state_belief: StateBelief
    report: MembershipReport


@dataclass(frozen=True)
class ProjectionGapReport:
    n_database_vertices: int
    outside: list  # ProjectedVertex whose projection leaves the oblivious polytope
    unattained: list  # oblivious-vertex signatures with no database preimage
    certified_equal: bool


def preimage_in_database_polytope(target, poly_db: DatabasePolytope) -> np.ndarray | None:
    """Some member of the database polytope whose projection is ``target``, via a feasibility LP."""
    target = np.asarray(getattr(target, "probs", target), dtype=float)
    size = 2**poly_db.n
    n_pairs = len(poly_db.adjacency)
    ineq = np.vstack([
        poly_db.constraint_rows(np.ones(n_pairs)),        # hi/p0 - e^eps lo/p0 <= 0
        -poly_db.constraint_rows(-np.ones(n_pairs)),      # e^-eps lo/p0 - hi/p0 <= 0
    ])
    proj = projection_matrix(poly_db.n)
    m_eq, m_in = proj.shape[0], ineq.shape[0]
    A = np.zeros((m_eq + m_in, size + m_in))
    A[:m_eq, :size] = proj
    A[m_eq:, :size] = ineq
    A[m_eq:, size:] = np.eye(m_in)
    b = np.concatenate([target, np.zeros(m_in)])
    x = find_feasible(A, b)
    return None if x is None else x[:size]


def projection_gap(
    poly_db: DatabasePolytope,
    poly_ob: ObliviousPolytope,
    max_databases: int = DEFAULT_MAX_DATABASES,
) -> ProjectionGapReport:
    """Compare the projected database polytope with the oblivious polytope.

    Projections of database vertices that fall outside the oblivious polytope
    are witnesses that oblivious mechanisms lose generality.  Equality is
    certified when there are none and every oblivious vertex has a preimage.
    """
    if poly_db.n != poly_ob.n:
        raise ValidationError("polytopes describe different numbers of respondents")
    if abs(poly_db.epsilon.epsilon - poly_ob.epsilon.epsilon) > 0:
        raise ValidationError("polytopes use different privacy budgets")
    projected_prior = project_belief(poly_db.pi0).probs
    if np.abs(projected_prior - poly_ob.mu0.probs).sum() > NORM_TOL:
        raise ValidationError("state prior is not the projection of the database prior")

    vertices = enumerate_database_vertices(poly_db, max_databases)
    outside = []
    for i, v in enumerate(vertices):
        mu = project_belief(v)
        rep = oblivious_membership(mu, poly_ob)
        if not rep.member:
            outside.append(ProjectedVertex(i, v, mu, rep))

    unattained = []
    for sig, vertex in enumerate_oblivious_vertices(poly_ob):
        pre = preimage_in_database_polytope(vertex, poly_db)
        if pre is None or not database_membership(pre / pre.sum(), poly_db, tol=1e-7).member:
            unattained.append(sig)
    return ProjectionGapReport(len(vertices), outside, unattained, not outside and not unattained)
