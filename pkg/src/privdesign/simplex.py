"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``max c @ x  s.t.  A @ x == b, x >= 0``.  Problems here are small
(at most a few dozen rows and a few thousand columns), so a full tableau is
simpler and more predictable than a revised method.  The returned solution
is always basic, which the design solver relies on for support
independence.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None
    value: float | None
    basis: tuple[int, ...]
    iterations: int


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    tab -= np.outer(col_vals, tab[row])
    tab[:, col] = 0.0
    tab[row, col] = 1.0


def _run(tab: np.ndarray, basis: list[int], n_cols: int, max_iter: int) -> tuple[str, int]:
    """Iterate on a tableau whose last row holds reduced costs (minimisation form).

    Only the first ``n_cols`` columns may enter.  Bland's rule: enter the
    lowest-index improving column, leave on the lowest-index basic variable
    among ratio-test ties.
    """
    m = tab.shape[0] - 1
    for it in range(max_iter):
        costs = tab[-1, :n_cols]
        candidates = np.flatnonzero(costs < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal", it
        col = int(candidates[0])
        column = tab[:m, col]
        positive = column > PIVOT_TOL
        if not positive.any():
            return "unbounded", it
        ratios = np.full(m, np.inf)
        ratios[positive] = tab[:m, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + PIVOT_TOL * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(tab, row, col)
        basis[row] = col
    raise LPError(f"simplex did not terminate in {max_iter} iterations")


def solve_lp(c, A_eq, b_eq, *, maximize: bool = True, max_iter: int = 50_000) -> LPResult:
    """Solve a standard-form LP and return a basic optimal solution."""
    c = np.asarray(c, dtype=float)
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError("dimension mismatch between c, A_eq and b_eq")

    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # Phase 1: minimise the sum of artificials (columns n..n+m-1).
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _, it1 = _run(tab, basis, n, max_iter)
    if -tab[-1, -1] > FEAS_TOL * max(1.0, b.sum()):
        return LPResult("infeasible", None, None, tuple(), it1)

    # Drive zero-level artificials out of the basis; drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(tab[r, :n]) > PIVOT_TOL)
            if nz.size == 0:
                continue
            _pivot(tab, r, int(nz[0]))
            basis[r] = int(nz[0])
        keep.append(r)

    # Phase 2 on the original columns, in minimisation form.
    cost = -c if maximize else c.copy()
    tab2 = np.zeros((len(keep) + 1, n + 1))
    tab2[:-1, :n] = tab[keep, :n]
    tab2[:-1, -1] = tab[keep, -1]
    basis = [basis[r] for r in keep]
    tab2[-1, :n] = cost
    for r, j in enumerate(basis):
        tab2[-1] -= cost[j] * tab2[r]
    status, it2 = _run(tab2, basis, n, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, None, tuple(basis), it1 + it2)

    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = max(tab2[r, -1], 0.0)
    value = float(c @ x)
    return LPResult("optimal", x, value, tuple(sorted(basis)), it1 + it2)


def find_feasible(A_eq, b_eq, **kw) -> np.ndarray | None:
    """A basic feasible point of ``A x == b, x >= 0``, or ``None``."""
    A = np.asarray(A_eq, dtype=float)
    res = solve_lp(np.zeros(A.shape[1]), A, b_eq, **kw)
    return res.x if res.status == "optimal" else None
