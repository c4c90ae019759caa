"""Independent reference computations for the test suite.

Nothing here calls into the library's solvers or enumerators; the point is a
second route to the same numbers.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

# Databases in the order the counterexample lists them:
# (000) (100) (010) (001) (110) (101) (011) (111)
LISTED_ORDER = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]


def binary_index(bits) -> int:
    """Respondent 1 is the most significant bit."""
    out = 0
    for b in bits:
        out = 2 * out + int(b)
    return out


def from_listed_order(values) -> np.ndarray:
    out = np.zeros(8)
    for bits, v in zip(LISTED_ORDER, values):
        out[binary_index(bits)] = v
    return out


def correlated_prior(delta: float) -> np.ndarray:
    """Three respondents where the third copies the second with probability 1 - delta."""
    d = delta
    return from_listed_order([(1 - d) / 3, (1 - d) / 6, d / 6, d / 3, d / 3, d / 6, (1 - d) / 6, (1 - d) / 3])


def correlated_tilt(eps: float = 1.0) -> np.ndarray:
    e = math.exp(-eps)
    return from_listed_order([e**2, e**3, e, e, e**2, e**2, 1.0, e])


def vertex(mu0, eps, phi) -> np.ndarray:
    """Oblivious vertex built by walking the ratio chain one state at a time."""
    mu0 = np.asarray(mu0, dtype=float)
    n = mu0.size - 1
    w = [1.0]
    for state in range(1, n + 1):
        step = math.exp(eps) if state in phi else math.exp(-eps)
        w.append(w[-1] * step * mu0[state] / mu0[state - 1])
    w = np.array(w) * mu0[0]
    return w / w.sum()


def all_signatures(n: int):
    return [frozenset(s) for r in range(n + 1) for s in itertools.combinations(range(1, n + 1), r)]


def in_oblivious_set(mu, mu0, eps, tol=1e-9) -> bool:
    """Ratio-domain membership check."""
    mu, mu0 = np.asarray(mu, float), np.asarray(mu0, float)
    if np.any(mu <= 0):
        return False
    r = (mu[1:] / mu[:-1]) / (mu0[1:] / mu0[:-1])
    return bool(np.all(r <= math.exp(eps) * (1 + tol)) and np.all(r >= math.exp(-eps) * (1 - tol)))


def brute_force_design(mu0, eps, payoffs, weights_fn=None):
    """Best value over every linearly independent vertex subset that can average to the prior.

    Returns ``(value, signatures, weights)``.  ``weights_fn(support, mu0)``
    may be supplied; by default an ordinary least-squares solve is used.
    """
    mu0 = np.asarray(mu0, float)
    payoffs = np.asarray(payoffs, float)
    n = mu0.size - 1
    sigs = all_signatures(n)
    verts = [vertex(mu0, eps, s) for s in sigs]
    vals = [max(float(u @ v) for u in payoffs) for v in verts]
    best = (-math.inf, None, None)
    for k in range(1, n + 2):
        for idx in itertools.combinations(range(len(sigs)), k):
            M = np.array([verts[i] for i in idx]).T
            if np.linalg.matrix_rank(M) < k:
                continue
            if weights_fn is None:
                w, *_ = np.linalg.lstsq(M, mu0, rcond=None)
                if np.abs(M @ w - mu0).max() > 1e-10 or w.min() < -1e-12:
                    continue
            else:
                res = weights_fn([verts[i] for i in idx], mu0)
                if not res.bayes_plausible:
                    continue
                w = res.weights
            value = float(sum(w[j] * vals[i] for j, i in enumerate(idx)))
            if value > best[0] + 1e-12:
                best = (value, [sigs[i] for i in idx], w)
    return best


def linprog_design(vertices, values, prior) -> float:
    """Optimum of the vertex LP from an external solver."""
    from scipy.optimize import linprog

    res = linprog(-np.asarray(values), A_eq=np.asarray(vertices).T, b_eq=prior, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def folded_geometric(eps: float, n: int, reach: int = 400) -> np.ndarray:
    """Untruncated two-sided geometric noise, with outputs outside 0..N clamped to the ends."""
    r = math.exp(-eps)
    c = (1 - r) / (1 + r)
    out = np.zeros((n + 1, n + 1))
    for w in range(n + 1):
        for s in range(-reach, n + reach + 1):
            out[w, min(max(s, 0), n)] += c * r ** abs(s - w)
    return out


def posteriors(signal, mu0):
    """Bayes' rule column by column, skipping zero-probability outputs."""
    signal, mu0 = np.asarray(signal, float), np.asarray(mu0, float)
    beliefs, weights = [], []
    for s in range(signal.shape[1]):
        joint = [signal[w, s] * mu0[w] for w in range(mu0.size)]
        total = math.fsum(joint)
        if total > 0:
            beliefs.append(np.array(joint) / total)
            weights.append(total)
    return beliefs, weights


def expected_value(beliefs, weights, payoffs) -> float:
    payoffs = np.asarray(payoffs, float)
    return math.fsum(w * max(float(u @ b) for u in payoffs) for b, w in zip(beliefs, weights))


def random_supermodular_payoffs(rng, n_actions: int, n: int, scale: float = 1.0) -> np.ndarray:
    """Payoff rows built as running sums of increments that rise in the state."""
    base = rng.normal(size=n + 1) * scale
    rows = [base]
    for _ in range(n_actions - 1):
        incr = np.sort(rng.normal(size=n + 1)) * scale + rng.normal() * scale
        rows.append(rows[-1] + incr)
    return np.array(rows)


def random_full_support(rng, size: int, floor: float = 0.02) -> np.ndarray:
    p = rng.dirichlet(np.ones(size)) + floor
    return p / p.sum()


def random_symmetric_database_prior(rng, n: int) -> np.ndarray:
    """Exchangeable prior: probability of a database depends only on its count."""
    mu0 = random_full_support(rng, n + 1)
    counts = np.array([bin(t).count("1") for t in range(2**n)])
    return np.array([mu0[c] / math.comb(n, c) for c in counts])


def transport_direct(beliefs, weights, labels, h) -> float:
    """E over posteriors of E_mu h(state, label)."""
    total = []
    for b, w, t in zip(beliefs, weights, labels):
        total.append(w * math.fsum(b[y] * h(y, t) for y in range(len(b))))
    return math.fsum(total)
