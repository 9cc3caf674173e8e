"""Exact solver for unconstrained weighted L1 minimization problems.

Minimizes ``sum_i w_i * |row_i . v - c_i|`` over free decision variables
``v``, optionally subject to linear equality constraints.  Each absolute
value is split into a pair of non-negative slacks (``e = e+ - e-``,
``|e| = e+ + e-``) and the resulting linear program is solved with a dense
primal simplex using Bland's pivoting rule, so results are deterministic
and the method cannot cycle.

Equality constraints are eliminated exactly (Gauss-Jordan with column
pivoting) before the split reformulation, which keeps the LP always
feasible with a trivial starting basis: no phase-1 is needed.

Problem sizes here are small (a few hundred terms), so the dense tableau
is adequate and easy to audit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_1d

#: feasibility / optimality tolerance of the simplex
TOLERANCE = 1e-9

#: solver statuses
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class L1Problem:
    """Weighted sum of absolute residuals over free variables.

    ``residual_terms`` and ``penalty_terms`` are sequences of
    ``(coefficient_row, constant)`` pairs; every row must have length
    ``num_vars``.  Each residual term contributes ``|row . v - constant|``
    to the objective with weight 1; penalty term ``i`` is weighted by
    ``penalty_weights[i] >= 0``.  ``equalities`` are hard constraints
    ``row . v = constant``.
    """

    num_vars: int
    residual_terms: tuple
    penalty_terms: tuple = ()
    penalty_weights: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        if self.num_vars <= 0:
            raise ValueError("num_vars must be positive")
        if len(self.residual_terms) == 0:
            raise ValueError("need at least one residual term")
        if len(self.penalty_terms) != len(self.penalty_weights):
            raise ValueError("penalty_terms and penalty_weights length mismatch")
        for group in (self.residual_terms, self.penalty_terms, self.equalities):
            for row, const in group:
                if len(row) != self.num_vars:
                    raise ValueError(
                        f"coefficient row has length {len(row)}, expected {self.num_vars}"
                    )
                if not np.isfinite(const):
                    raise ValueError("constants must be finite")
                if not np.all(np.isfinite(np.asarray(row, dtype=float))):
                    raise ValueError("coefficient rows must be finite")
        for w in self.penalty_weights:
            if not np.isfinite(w) or w < 0:
                raise ValueError("penalty weights must be finite and >= 0")

    def rows_consts_weights(self):
        """All objective terms as arrays: (rows, constants, weights)."""
        rows = [np.asarray(r, dtype=float) for r, _ in self.residual_terms]
        rows += [np.asarray(r, dtype=float) for r, _ in self.penalty_terms]
        consts = [float(c) for _, c in self.residual_terms]
        consts += [float(c) for _, c in self.penalty_terms]
        weights = [1.0] * len(self.residual_terms) + [float(w) for w in self.penalty_weights]
        return np.array(rows), np.array(consts), np.array(weights)

    def objective_at(self, values) -> float:
        """Evaluate the objective at an arbitrary point."""
        v = check_1d("values", values)
        rows, consts, weights = self.rows_consts_weights()
        return float(weights @ np.abs(rows @ v - consts))


@dataclass(frozen=True)
class L1Solution:
    values: np.ndarray
    objective: float
    status: str
    iterations: int = 0


def _eliminate_equalities(rows, consts, eq_rows, eq_consts, num_vars):
    """Substitute equality constraints out of the objective terms.

    Returns ``(new_rows, new_consts, basis_matrix, offset, feasible)`` such
    that the original variables are recovered as ``v = basis_matrix @ u +
    offset`` from the reduced free variables ``u``.
    """
    E = np.array(eq_rows, dtype=float)
    d = np.array(eq_consts, dtype=float)
    pivot_cols = []
    pivot_rows = []
    for k in range(E.shape[0]):
        remaining = [j for j in range(num_vars) if j not in pivot_cols]
        j = remaining[int(np.argmax(np.abs(E[k, remaining])))] if remaining else None
        if j is None or abs(E[k, j]) <= TOLERANCE:
            if abs(d[k]) > TOLERANCE:
                return None, None, None, None, False  # inconsistent system
            continue  # redundant row
        # normalize and eliminate column j from the other equality rows
        scale = E[k, j]
        E[k] /= scale
        d[k] /= scale
        for i in range(E.shape[0]):
            if i != k and E[i, j] != 0.0:
                d[i] -= E[i, j] * d[k]
                E[i] -= E[i, j] * E[k]
        pivot_cols.append(j)
        pivot_rows.append(k)

    free_cols = [j for j in range(num_vars) if j not in pivot_cols]
    # v = M u + g : free variables map to themselves, pivot variables are
    # expressed through the eliminated equality rows.
    M = np.zeros((num_vars, len(free_cols)))
    g = np.zeros(num_vars)
    for u_idx, j in enumerate(free_cols):
        M[j, u_idx] = 1.0
    for k, j in zip(pivot_rows, pivot_cols):
        g[j] = d[k]
        M[j] = -E[k, free_cols]
    return rows @ M, consts - rows @ g, M, g, True


def _simplex_min(A, b, cost, basis, max_iter):
    """Dense primal simplex (minimization) with Bland's rule.

    ``A`` must already contain identity columns at ``basis`` and ``b >= 0``.
    Mutates its arguments; returns (status, iterations).
    """
    m = A.shape[0]
    reduced = cost - cost[basis] @ A
    iterations = 0
    while iterations < max_iter:
        negative = np.flatnonzero(reduced < -TOLERANCE)
        if negative.size == 0:
            return OPTIMAL, iterations
        col = int(negative[0])  # Bland: lowest eligible index enters
        direction = A[:, col]
        candidates = np.flatnonzero(direction > TOLERANCE)
        if candidates.size == 0:
            # objective is bounded below by 0, so this is a numerical breakdown
            return INFEASIBLE, iterations
        ratios = np.maximum(b[candidates], 0.0) / direction[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + TOLERANCE * max(1.0, best)]
        row = int(ties[np.argmin(basis[ties])])  # Bland: lowest basic index leaves

        pivot = A[row, col]
        A[row] /= pivot
        b[row] /= pivot
        colvals = A[:, col].copy()
        colvals[row] = 0.0
        A -= np.outer(colvals, A[row])
        b -= colvals * b[row]
        reduced = reduced - reduced[col] * A[row]
        reduced[col] = 0.0
        basis[row] = col
        iterations += 1
    return ITERATION_LIMIT, iterations


def solve_l1(problem: L1Problem) -> L1Solution:
    """Globally minimize the weighted sum of absolute terms.

    Deterministic: identical inputs yield bit-identical outputs.  The
    returned objective is re-evaluated from the solution values, so it is
    exactly ``problem.objective_at(solution.values)``.  When the optimum is
    not unique only the objective value is contractual; the particular
    vertex is fixed by Bland's rule.
    """
    rows, consts, weights = problem.rows_consts_weights()

    if problem.equalities:
        eq_rows = [r for r, _ in problem.equalities]
        eq_consts = [c for _, c in problem.equalities]
        rows_u, consts_u, M, g, ok = _eliminate_equalities(
            rows, consts, eq_rows, eq_consts, problem.num_vars
        )
        if not ok:
            return L1Solution(
                values=np.full(problem.num_vars, np.nan),
                objective=np.inf,
                status=INFEASIBLE,
            )
    else:
        rows_u, consts_u, M, g = rows, consts, None, None

    m, n = rows_u.shape
    # columns: [u+ (n), u- (n), e+ (m), e- (m)]
    num_cols = 2 * n + 2 * m
    A = np.zeros((m, num_cols))
    b = consts_u.copy()
    A[:, :n] = rows_u
    A[:, n : 2 * n] = -rows_u
    pos = np.arange(m)
    A[pos, 2 * n + pos] = -1.0  # e+
    A[pos, 2 * n + m + pos] = 1.0  # e-

    # normalize signs so b >= 0; the +1 slack column of each row starts basic
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    basis = np.where(flip, 2 * n + pos, 2 * n + m + pos).astype(np.intp)

    cost = np.concatenate([np.zeros(2 * n), weights, weights])

    status, iterations = _simplex_min(A, b, cost, basis, max_iter=100 * m)

    u = np.zeros(n)
    structural = basis < 2 * n
    for i in np.flatnonzero(structural):
        j = basis[i]
        if j < n:
            u[j] += b[i]
        else:
            u[j - n] -= b[i]
    values = M @ u + g if M is not None else u
    objective = problem.objective_at(values)
    return L1Solution(values=values, objective=objective, status=status, iterations=iterations)
