"""Two-phase primal simplex in exact rational arithmetic.

Internal to the solver: computes continuous-relaxation bounds.  Dense
tableau over ``fractions.Fraction`` with Bland's rule, so the method
terminates and every returned value is exact; no tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"

_FLIP = {"<=": ">=", ">=": "<=", "=": "="}


@dataclass
class LpResult:
    status: str
    value: Fraction | None
    solution: list[Fraction] | None


def solve_lp(costs, rows, lowers, uppers, max_pivots: int = 50_000) -> LpResult:
    """Minimize ``costs . x`` subject to ``rows`` and box bounds.

    ``rows`` holds (coefficients, sense, rhs) with sense in {"<=", ">=", "="};
    every bound must be finite with lower <= upper.  Returns the exact
    optimum and one optimal point, or the status explaining why none exists.
    """
    n = len(costs)
    costs = [Fraction(c) for c in costs]
    lowers = [Fraction(b) for b in lowers]
    uppers = [Fraction(b) for b in uppers]
    if any(lo > up for lo, up in zip(lowers, uppers)):
        return LpResult(INFEASIBLE, None, None)
    shift_value = sum(c * lo for c, lo in zip(costs, lowers))

    # shift to y = x - lower >= 0, append box rows y_j <= cap_j, and
    # normalize right-hand sides to be non-negative
    work: list[tuple[list[Fraction], str, Fraction]] = []
    for coeffs, sense, rhs in rows:
        coeffs = [Fraction(a) for a in coeffs]
        rhs = Fraction(rhs) - sum(a * lo for a, lo in zip(coeffs, lowers) if a)
        if rhs < 0:
            coeffs = [-a for a in coeffs]
            rhs = -rhs
            sense = _FLIP[sense]
        work.append((coeffs, sense, rhs))
    for j in range(n):
        row = [ZERO] * n
        row[j] = ONE
        work.append((row, "<=", uppers[j] - lowers[j]))

    m = len(work)
    n_slack = sum(1 for _, sense, _ in work if sense != "=")
    n_art = sum(1 for _, sense, _ in work if sense != "<=")
    real_cols = n + n_slack
    width = real_cols + n_art + 1

    # rows 0..m-1: constraints; row m: phase-2 costs; row m+1: phase-1 costs
    height = m + (2 if n_art else 1)
    tableau = [[ZERO] * width for _ in range(height)]
    basis = [-1] * m
    slack_at = n
    art_at = real_cols
    for r, (coeffs, sense, rhs) in enumerate(work):
        row = tableau[r]
        for j, a in enumerate(coeffs):
            row[j] = a
        row[width - 1] = rhs
        if sense == "<=":
            row[slack_at] = ONE
            basis[r] = slack_at
            slack_at += 1
        else:
            if sense == ">=":
                row[slack_at] = -ONE
                slack_at += 1
            row[art_at] = ONE
            basis[r] = art_at
            art_at += 1

    pivots_left = max_pivots
    if n_art:
        phase1 = tableau[m + 1]
        for r in range(m):
            if basis[r] >= real_cols:
                row = tableau[r]
                for j in range(width):
                    if row[j]:
                        phase1[j] -= row[j]
        status, used = _run_simplex(tableau, basis, m, real_cols, m + 1, pivots_left)
        if status == ITERATION_LIMIT:
            return LpResult(ITERATION_LIMIT, None, None)
        pivots_left -= used
        if tableau[m + 1][width - 1] != 0:
            return LpResult(INFEASIBLE, None, None)
        for r in range(m):
            # leftover artificials sit at value zero; pivot them out on any
            # structural column, or leave redundant rows in place
            if basis[r] >= real_cols:
                pivot_col = next((j for j in range(real_cols) if tableau[r][j]), None)
                if pivot_col is not None:
                    _pivot(tableau, basis, r, pivot_col)

    cost_row = tableau[m]
    for j in range(width):
        cost_row[j] = ZERO
    for j, c in enumerate(costs):
        cost_row[j] = c
    for r in range(m):
        j = basis[r]
        if j < width - 1 and cost_row[j]:
            factor = cost_row[j]
            row = tableau[r]
            for k in range(width):
                if row[k]:
                    cost_row[k] -= factor * row[k]

    status, _ = _run_simplex(tableau, basis, m, real_cols, m, pivots_left)
    if status != OPTIMAL:
        return LpResult(status, None, None)

    y = [ZERO] * (width - 1)
    for r in range(m):
        y[basis[r]] = tableau[r][width - 1]
    solution = [y[j] + lowers[j] for j in range(n)]
    value = -tableau[m][width - 1] + shift_value
    return LpResult(OPTIMAL, value, solution)


def _run_simplex(tableau, basis, m, num_cols, cost_row_index, max_pivots):
    """Bland-rule pivoting until optimal, unbounded, or out of pivots."""
    cost_row = tableau[cost_row_index]
    rhs_col = len(cost_row) - 1
    pivots = 0
    while True:
        entering = next((j for j in range(num_cols) if cost_row[j] < 0), None)
        if entering is None:
            return OPTIMAL, pivots
        best_ratio = None
        leaving = None
        for r in range(m):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][rhs_col] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[r] < basis[leaving])):
                    best_ratio = ratio
                    leaving = r
        if leaving is None:
            return UNBOUNDED, pivots
        _pivot(tableau, basis, leaving, entering)
        pivots += 1
        if pivots >= max_pivots:
            return ITERATION_LIMIT, pivots


def _pivot(tableau, basis, pivot_row, pivot_col):
    row = tableau[pivot_row]
    inv = ONE / row[pivot_col]
    if inv != 1:
        for k in range(len(row)):
            if row[k]:
                row[k] *= inv
    for other in tableau:
        if other is row:
            continue
        factor = other[pivot_col]
        if factor:
            for k in range(len(other)):
                if row[k]:
                    other[k] -= factor * row[k]
    basis[pivot_row] = pivot_col
