"""Acceptance gate: eight end-to-end criteria, each with its own tolerance and time budget.

Every criterion prints one PASS/FAIL line (shown even without ``-s``).
"""
import contextlib
import functools
import math
import time

import numpy as np
from conftest import STEEP_OPTIMUM, USHAPE_OPTIMUM

from generators import random_private_mechanism, random_vertex_distribution
from oracles import (
    brute_force_design,
    correlated_prior,
    correlated_tilt,
    expected_value,
    posteriors,
    random_full_support,
    random_supermodular_payoffs,
    random_symmetric_database_prior,
    transport_direct,
)
from privdesign.core import DatabasePrior, DecisionProblem, StatePrior, project_belief
from privdesign.decision import is_supermodular
from privdesign.design import build_signal_matrix, exponential_parameterization, solve_database, solve_oblivious, weights_for_support
from privdesign.mechanisms import ObliviousMechanism, geometric, induced_distribution, mechanism_value, verify_dp
from privdesign.orders import frechet_representation, spm_dominates, supermodular_value_dominance, upper_bound_peaks, uprr_compare
from privdesign.polytope import (
    DatabasePolytope,
    ObliviousPolytope,
    database_membership,
    oblivious_membership,
    projection_gap,
)

SEED = 20240611


@contextlib.contextmanager
def criterion(capsys, number: int, title: str, budget: float):
    """Time the block, print its verdict, and fail if it errors or overruns."""
    info = {}
    start = time.perf_counter()
    error = None
    try:
        yield info
    except Exception as exc:  # reported below, then re-raised
        error = exc
    elapsed = time.perf_counter() - start
    over = elapsed > budget
    ok = error is None and not over
    detail = info.get("detail", "")
    if error is not None:
        detail = f"{type(error).__name__}: {error}".splitlines()[0]
    elif over:
        detail = f"over time budget ({budget:g} s)"
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title} ({elapsed:.2f} s / {budget:g} s) {detail}")
    if error is not None:
        raise error
    assert not over, f"criterion {number} took {elapsed:.2f} s, budget {budget} s"


def _sigsets(solution):
    return [sorted(s.phi) for s in solution.signatures]


def test_criterion_1_steep_bet(capsys, uniform2, steep_bet):
    with criterion(capsys, 1, "steep bet reproduces its optimal support", 1.0) as info:
        sol = solve_oblivious(uniform2, steep_bet, 1.0)
        assert _sigsets(sol) == [[], [1], [1, 2]]
        best, sigs, _ = brute_force_design(uniform2.probs, 1.0, steep_bet.payoffs, weights_fn=weights_for_support)
        assert sorted(sorted(s) for s in sigs) == [[], [1], [1, 2]]
        assert abs(sol.optimum - best) <= 1e-8
        assert abs(sol.optimum - STEEP_OPTIMUM) <= 1e-12
        info["detail"] = f"optimum={sol.optimum:.12f} oracle={best:.12f}"


def test_criterion_2_u_shaped_bet(capsys, uniform2, u_shaped_bet):
    with criterion(capsys, 2, "u-shaped bet reproduces its support and gap", 1.0) as info:
        sol = solve_oblivious(uniform2, u_shaped_bet, 1.0)
        assert _sigsets(sol) == [[1], [2]]
        best, _, _ = brute_force_design(uniform2.probs, 1.0, u_shaped_bet.payoffs, weights_fn=weights_for_support)
        assert abs(sol.optimum - best) <= 1e-8 and abs(sol.optimum - USHAPE_OPTIMUM) <= 1e-12
        geo = mechanism_value(geometric(1.0, 2), uniform2, u_shaped_bet)
        gap = sol.optimum - geo
        assert gap > 1e-3
        info["detail"] = f"optimum={sol.optimum:.12f} geometric={geo:.12f} gap={gap:.6f}"


def test_criterion_3_geometric_optimal_for_supermodular(capsys):
    rng = np.random.default_rng(SEED + 3)
    with criterion(capsys, 3, "geometric attains the optimum, 200 supermodular instances", 30.0) as info:
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(2, 7))
            k = int(rng.integers(2, 6))
            eps = float(rng.uniform(0.1, 3.0))
            mu0 = StatePrior(random_full_support(rng, n + 1))
            dp = DecisionProblem.from_rows(random_supermodular_payoffs(rng, k, n))
            assert is_supermodular(dp)
            opt = solve_oblivious(mu0, dp, eps).optimum
            geo = mechanism_value(geometric(eps, n), mu0, dp)
            worst = max(worst, abs(opt - geo))
            assert abs(opt - geo) <= 1e-7, (n, k, eps, opt, geo)
        info["detail"] = f"max |optimum - geometric| = {worst:.2e}"


@functools.lru_cache(maxsize=None)
def dominance_pairs():
    """100 random private mechanisms, each paired with the geometric mechanism on its prior."""
    rng = np.random.default_rng(SEED + 4)
    pairs = []
    for _ in range(100):
        n = int(rng.integers(1, 6))
        eps = float(rng.uniform(0.1, 3.0))
        mu0 = StatePrior(random_full_support(rng, n + 1))
        tau_g = induced_distribution(geometric(eps, n), mu0)
        other = induced_distribution(random_private_mechanism(rng, mu0, eps), mu0)
        pairs.append((n, eps, mu0, tau_g, other))
    return tuple(pairs)


def test_criterion_4_geometric_uprr_dominates(capsys):
    with criterion(capsys, 4, "geometric UPRR-dominates 100 random private mechanisms", 10.0) as info:
        pairs = dominance_pairs()
        for n, eps, mu0, tau_g, other in pairs:
            peaks = upper_bound_peaks(tau_g, mu0, eps)
            assert peaks == tuple(range(n + 1))
            assert uprr_compare(tau_g, other, peaks=peaks) is not None, (n, eps)
        info["detail"] = f"{len(pairs)} pairs comparable"


def test_criterion_5_value_and_spm_dominance(capsys):
    rng = np.random.default_rng(SEED + 5)
    with criterion(capsys, 5, "value and supermodular-order dominance", 30.0) as info:
        worst_value = math.inf
        checked = 0
        for n, eps, mu0, tau_g, other in dominance_pairs():
            peaks = upper_bound_peaks(tau_g, mu0, eps)
            assert uprr_compare(tau_g, other, peaks=peaks) is not None
            F = frechet_representation(tau_g, peaks)
            G = frechet_representation(other, upper_bound_peaks(other, mu0, eps))
            assert spm_dominates(F, G)
            for j in range(50):
                dp = DecisionProblem.from_rows(random_supermodular_payoffs(rng, int(rng.integers(2, 5)), n))
                a, b = supermodular_value_dominance(tau_g, other, dp)
                assert a >= b - 1e-9, (n, eps, a, b)
                worst_value = min(worst_value, a - b)
                if j == 0:
                    # second route to the same two values
                    pa = expected_value(tau_g.support, tau_g.weights, dp.payoffs)
                    pb = expected_value(other.support, other.weights, dp.payoffs)
                    assert abs(pa - a) <= 1e-9 and abs(pb - b) <= 1e-9
                checked += 1
        info["detail"] = f"{checked} comparisons, min value margin {worst_value:.2e}"


def test_criterion_6_oblivious_equivalence(capsys):
    rng = np.random.default_rng(SEED + 6)
    with criterion(capsys, 6, "oblivious equivalence and the correlated counterexample", 120.0) as info:
        # (a) two respondents, asymmetric priors
        for _ in range(50):
            eps = float(rng.uniform(0.1, 3.0))
            pi0 = DatabasePrior(2, random_full_support(rng, 4))
            assert not pi0.is_symmetric()
            gap = projection_gap(DatabasePolytope(eps, pi0), ObliviousPolytope(eps, pi0.state_prior()))
            assert gap.outside == [], eps

        # (b) three respondents, exchangeable priors
        for _ in range(20):
            eps = float(rng.uniform(0.1, 3.0))
            pi0 = DatabasePrior(3, random_symmetric_database_prior(rng, 3))
            mu0 = pi0.state_prior()
            gap = projection_gap(DatabasePolytope(eps, pi0), ObliviousPolytope(eps, mu0))
            assert gap.outside == [], eps
            dp = DecisionProblem.from_rows(rng.normal(size=(int(rng.integers(2, 5)), 4)))
            db = solve_database(pi0, dp, eps).optimum
            ob = solve_oblivious(mu0, dp, eps).optimum
            assert abs(db - ob) <= 1e-7, (eps, db, ob)

        # (c) correlated prior
        pi0 = correlated_prior(1e-3)
        pi_hat = correlated_tilt(1.0) * pi0
        pi_hat /= pi_hat.sum()
        prior = DatabasePrior(3, pi0)
        assert database_membership(pi_hat, DatabasePolytope(1.0, prior)).member
        rep = oblivious_membership(project_belief(pi_hat), ObliviousPolytope(1.0, prior.state_prior()))
        assert not rep.member and (2, "upper") in rep.violations
        info["detail"] = f"counterexample projection violates {rep.violations}"


def test_criterion_7_structural_invariants(capsys, uniform2, steep_bet, u_shaped_bet):
    rng = np.random.default_rng(SEED + 7)
    with criterion(capsys, 7, "structural invariants of solved instances", 10.0) as info:
        instances = [(uniform2, steep_bet, 1.0), (uniform2, u_shaped_bet, 1.0)]
        for _ in range(100):
            n = int(rng.integers(1, 6))
            mu0 = StatePrior(random_full_support(rng, n + 1))
            payoffs = rng.normal(size=(int(rng.integers(2, 6)), n + 1))
            instances.append((mu0, DecisionProblem.from_rows(payoffs), float(rng.uniform(0.1, 3.0))))
        worst_exp = 0.0
        for mu0, dp, eps in instances:
            n = mu0.n
            sol = solve_oblivious(mu0, dp, eps)
            d = sol.distribution
            assert d.bayes_plausible(mu0)
            assert np.linalg.matrix_rank(d.support.T) == len(d)
            P = ObliviousPolytope(eps, mu0)
            for sig, belief in zip(sol.signatures, d.support):
                rep = oblivious_membership(belief, P)
                assert rep.member and rep.n_binding == n
                assert set(rep.binding_upper) == set(sig.phi)
            probs = sol.signal.probs
            assert np.all(probs >= 0) and np.abs(probs.sum(axis=1) - 1).max() <= 1e-9
            assert verify_dp(ObliviousMechanism(sol.signal), eps)
            beliefs, weights = posteriors(probs, mu0.probs)
            assert np.allclose(beliefs, d.support, atol=1e-10)
            assert np.allclose(weights, d.weights, atol=1e-10)
            em = exponential_parameterization(sol, eps)
            diff = np.abs(em.state_signal() - probs).max()
            worst_exp = max(worst_exp, diff)
            assert diff <= 1e-9
        info["detail"] = f"{len(instances)} instances, max exponential-form error {worst_exp:.1e}"


def test_criterion_8_frechet(capsys):
    rng = np.random.default_rng(SEED + 8)
    with criterion(capsys, 8, "Frechet marginals and transport identity", 5.0) as info:
        worst = 0.0
        for _ in range(60):
            n = int(rng.integers(1, 6))
            eps = float(rng.uniform(0.1, 3.0))
            mu0 = StatePrior(random_full_support(rng, n + 1))
            if rng.random() < 0.5:
                tau = random_vertex_distribution(rng, mu0, eps)
                assert tau.bayes_plausible(mu0)
                tau = induced_distribution(ObliviousMechanism(build_signal_matrix(tau, mu0)), mu0)
            else:
                tau = induced_distribution(random_private_mechanism(rng, mu0, eps), mu0)
            labels = rng.integers(0, 5, size=len(tau)).astype(float)
            F = frechet_representation(tau, labels)
            assert np.abs(F.state_marginal() - mu0.probs).max() <= 1e-12
            xs = np.concatenate([rng.uniform(size=20), F.breakpoints])
            assert np.abs(F.x_marginal_cdf(xs) - xs).max() <= 1e-12
            table = rng.normal(size=(n + 1, 5)) * 10

            def h(y, t):
                return table[y, int(t)]

            gap = abs(F.expectation(h) - transport_direct(tau.support, tau.weights, labels, h))
            worst = max(worst, gap)
            assert gap <= 1e-9
        info["detail"] = f"max transport error {worst:.1e}"
