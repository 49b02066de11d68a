"""
Dense linear programming: a two-phase tableau simplex with Bland's rule,
plus a HiGHS backend through scipy for cross-checking.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
PIVOT_REL_TOL = 1e-3
OPTIMALITY_TOL = 1e-9
DRIVE_OUT_TOL = 1e-7
RHS_TOL = 1e-7
RESIDUAL_TOL = 1e-8
REFACTOR_EVERY = 25
RELATIONS = ("<=", ">=", "=")

Bound = Tuple[Optional[float], Optional[float]]
Constraint = Tuple[Sequence[float], str, float]


@dataclass
class LpProblem:
    """minimize c^T x subject to row constraints and per-variable bounds"""
    objective: np.ndarray
    constraints: List[Constraint] = field(default_factory=list)
    bounds: Optional[List[Bound]] = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        nvars = self.objective.shape[0]
        checked = []
        for a, relation, b in self.constraints:
            a = np.asarray(a, dtype=float)
            if a.shape != (nvars,):
                raise ValueError(f"Constraint has {a.shape} coefficients, expected {nvars}")
            if relation not in RELATIONS:
                raise ValueError(f"Unknown relation '{relation}'")
            checked.append((a, relation, float(b)))
        self.constraints = checked
        if self.bounds is None:
            self.bounds = [(0.0, None)] * nvars
        if len(self.bounds) != nvars:
            raise ValueError(f"Expected {nvars} bounds, got {len(self.bounds)}")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]


@dataclass
class LpResult:
    """Solution vector and status of one LP"""
    x: Optional[np.ndarray]
    status: str
    objective: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _finite(value: Optional[float]) -> bool:
    return value is not None and np.isfinite(value)


class TableauSimplex:
    """
    Two-phase simplex on a dense tableau with Bland's anti-cycling rule.

    Rows and columns are equilibrated before the tableau is built, and the
    tableau body is periodically rebuilt from the original rows and the
    current basis so that rounding drift cannot accumulate across pivots.
    """

    def __init__(self, max_pivots: Optional[int] = None, refactor_every: int = REFACTOR_EVERY):
        self.max_pivots = max_pivots
        self.refactor_every = refactor_every

    @staticmethod
    def _pivot(T: np.ndarray, row: int, col: int):
        T[row, :] /= T[row, col]
        column = T[:, col].copy()
        column[row] = 0.0
        T -= np.outer(column, T[row, :])

    @staticmethod
    def _enter(cost_row: np.ndarray, allowed: int) -> int:
        # Bland: lowest index with negative reduced cost
        candidates = np.flatnonzero(cost_row[:allowed] < -OPTIMALITY_TOL)
        return int(candidates[0]) if candidates.size else -1

    @staticmethod
    def _leave(T: np.ndarray, col: int, basis: List[int]) -> int:
        column = T[:-1, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return -1
        ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, best)]
        # tiny pivots among tied rows are skipped
        tied = tied[column[tied] >= PIVOT_REL_TOL * column[tied].max()]
        # Bland: among ties, the smallest basic variable leaves
        return int(min(tied, key=lambda r: basis[r]))

    @staticmethod
    def _price_out(T: np.ndarray, cost: np.ndarray, basis: List[int]):
        T[-1, :] = 0.0
        T[-1, :cost.shape[0]] = cost
        for r, b in enumerate(basis):
            if b < cost.shape[0] and cost[b] != 0.0:
                T[-1, :] -= cost[b] * T[r, :]

    @classmethod
    def _refactor(cls, T: np.ndarray, F: np.ndarray, rhs: np.ndarray, cost: np.ndarray,
                  basis: List[int]) -> bool:
        """Rebuild the tableau from the original rows F, rhs for the current basis"""
        m = len(basis)
        if m:
            try:
                body = np.linalg.solve(F[:, basis], np.column_stack([F, rhs]))
            except np.linalg.LinAlgError:
                return False
            if not np.all(np.isfinite(body)):
                return False
            values = body[:, -1]
            if values.min() < -RHS_TOL * (1.0 + np.abs(rhs).max()):
                return False
            body[:, -1] = np.maximum(values, 0.0)
            body[:, basis] = np.eye(m)
            T[:m, :] = body
        cls._price_out(T, cost, basis)
        return True

    def _iterate(self, T: np.ndarray, F: np.ndarray, rhs: np.ndarray, cost: np.ndarray,
                 basis: List[int], allowed: int) -> str:
        limit = self.max_pivots or 50 * (T.shape[0] + T.shape[1])
        since_refactor = 0
        for _ in range(limit):
            if since_refactor >= self.refactor_every:
                if not self._refactor(T, F, rhs, cost, basis):
                    return "numerical_failure"
                since_refactor = 0
            col = self._enter(T[-1, :-1], allowed)
            row = self._leave(T, col, basis) if col != -1 else -1
            if row == -1:
                if since_refactor:
                    # confirm the verdict on a freshly rebuilt tableau
                    if not self._refactor(T, F, rhs, cost, basis):
                        return "numerical_failure"
                    since_refactor = 0
                    continue
                return "optimal" if col == -1 else "unbounded"
            self._pivot(T, row, col)
            basis[row] = col
            since_refactor += 1
        return "numerical_failure"

    @staticmethod
    def _equilibrate(A: np.ndarray, b: np.ndarray, c: np.ndarray):
        """Max-abs row then column scaling; returns scaled data and column scales"""
        row_max = np.abs(A).max(axis=1, initial=0.0)
        row_scale = 1.0 / np.where(row_max > 0, row_max, 1.0)
        A = A * row_scale[:, None]
        b = b * row_scale
        col_max = np.abs(A).max(axis=0, initial=0.0)
        col_scale = 1.0 / np.where(col_max > 0, col_max, 1.0)
        return A * col_scale, b, c * col_scale, col_scale

    def solve_standard(self, A: np.ndarray, relations: List[str], b: np.ndarray,
                       c: np.ndarray) -> Tuple[str, Optional[np.ndarray]]:
        """minimize c^T y s.t. A y (rel) b, y >= 0"""
        c = np.asarray(c, dtype=float)
        A = np.array(A, dtype=float).reshape(-1, c.shape[0])
        b = np.array(b, dtype=float)
        relations = list(relations)
        m, nvars = A.shape

        # Nonnegative right-hand side; a >= row with zero rhs becomes a slack row
        for i in range(m):
            if b[i] < 0 or (b[i] == 0 and relations[i] == ">="):
                A[i, :] *= -1
                b[i] = -b[i]
                relations[i] = {"<=": ">=", ">=": "<=", "=": "="}[relations[i]]

        A, b, c, col_scale = self._equilibrate(A, b, c)

        num_slack = sum(1 for r in relations if r != "=")
        num_art = sum(1 for r in relations if r != "<=")
        art_start = nvars + num_slack
        total = art_start + num_art

        F = np.zeros((m, total))
        F[:, :nvars] = A
        basis: List[int] = []
        s = a = 0
        for i, relation in enumerate(relations):
            if relation == "<=":
                F[i, nvars + s] = 1.0
                basis.append(nvars + s)
                s += 1
            elif relation == ">=":
                F[i, nvars + s] = -1.0
                F[i, art_start + a] = 1.0
                basis.append(art_start + a)
                s += 1
                a += 1
            else:
                F[i, art_start + a] = 1.0
                basis.append(art_start + a)
                a += 1
        T = np.zeros((m + 1, total + 1))
        T[:m, :total] = F
        T[:m, -1] = b

        # Phase I: minimize the sum of artificials
        if num_art:
            phase1_cost = np.zeros(total)
            phase1_cost[art_start:] = 1.0
            self._price_out(T, phase1_cost, basis)
            status = self._iterate(T, F, b, phase1_cost, basis, total)
            if status != "optimal":
                return "numerical_failure", None
            if -T[-1, -1] > 1e-9 * (1.0 + np.max(np.abs(b), initial=0.0)):
                return "infeasible", None

            # Drive artificials out on the largest available pivot; rows
            # without one are redundant and dropped
            keep_rows = []
            for r in range(m):
                if basis[r] >= art_start:
                    candidates = np.abs(T[r, :art_start])
                    if art_start == 0 or candidates.max() < DRIVE_OUT_TOL:
                        continue
                    col = int(np.argmax(candidates))
                    T[r, -1] = 0.0
                    self._pivot(T, r, col)
                    basis[r] = col
                keep_rows.append(r)
            F = F[keep_rows, :art_start]
            b = b[keep_rows]
            basis = [basis[r] for r in keep_rows]
            total = art_start
            T = np.zeros((len(keep_rows) + 1, total + 1))

        phase2_cost = np.zeros(total)
        c_max = np.abs(c).max(initial=0.0)
        phase2_cost[:nvars] = c / c_max if c_max > 0 else c
        if not self._refactor(T, F, b, phase2_cost, basis):
            return "numerical_failure", None
        status = self._iterate(T, F, b, phase2_cost, basis, total)
        if status != "optimal":
            return status, None

        y = np.zeros(total)
        for r, col in enumerate(basis):
            y[col] = T[r, -1]
        return "optimal", np.clip(y[:nvars], 0.0, None) * col_scale


def _to_standard(p: LpProblem):
    """Rewrite general bounds as y >= 0 with x = offset + S y"""
    columns = []
    offset = np.zeros(p.num_vars)
    extra: List[Constraint] = []
    for j, (lower, upper) in enumerate(p.bounds):
        if _finite(lower) and _finite(upper) and lower > upper:
            return None
        if _finite(lower):
            offset[j] = lower
            columns.append((j, 1.0))
            if _finite(upper):
                extra.append((len(columns) - 1, upper - lower))
        elif _finite(upper):
            offset[j] = upper
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))

    S = np.zeros((p.num_vars, len(columns)))
    for col, (j, sign) in enumerate(columns):
        S[j, col] = sign

    rows, relations, rhs = [], [], []
    for a, relation, b in p.constraints:
        rows.append(a @ S)
        relations.append(relation)
        rhs.append(b - a @ offset)
    for col, width in extra:
        row = np.zeros(len(columns))
        row[col] = 1.0
        rows.append(row)
        relations.append("<=")
        rhs.append(width)
    A = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return A, relations, np.array(rhs, dtype=float), S, offset


def _solve_highs(p: LpProblem) -> LpResult:
    from scipy.optimize import linprog

    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for a, relation, b in p.constraints:
        if relation == "<=":
            A_ub.append(a)
            b_ub.append(b)
        elif relation == ">=":
            A_ub.append(-a)
            b_ub.append(-b)
        else:
            A_eq.append(a)
            b_eq.append(b)

    res = linprog(
        p.objective,
        A_ub=np.array(A_ub) if A_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=p.bounds,
        method="highs",
    )
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "numerical_failure")
    if status != "optimal":
        return LpResult(x=None, status=status)
    return LpResult(x=np.asarray(res.x), status=status, objective=float(res.fun))


def solve_lp(p: LpProblem, method: str = "simplex") -> LpResult:
    """
    Solve an LP.

    Args:
        p: problem in minimization form
        method: "simplex" (dense two-phase tableau) or "highs" (scipy)

    Returns:
        LpResult with status in {optimal, infeasible, unbounded, numerical_failure}
    """
    if method == "highs":
        return _solve_highs(p)
    if method != "simplex":
        raise ValueError(f"Unknown LP method '{method}'")

    standard = _to_standard(p)
    if standard is None:
        return LpResult(x=None, status="infeasible")
    A, relations, rhs, S, offset = standard
    c = p.objective @ S

    status, y = TableauSimplex().solve_standard(A, relations, rhs, c)
    if status != "optimal":
        logger.debug(f"Tableau simplex finished with status {status}")
        return LpResult(x=None, status=status)

    x = offset + S @ y
    lower = np.array([lo if _finite(lo) else -np.inf for lo, _ in p.bounds])
    upper = np.array([up if _finite(up) else np.inf for _, up in p.bounds])
    x = np.clip(x, lower, upper)
    for a, relation, b in p.constraints:
        value = a @ x
        violation = {"<=": value - b, ">=": b - value, "=": abs(value - b)}[relation]
        if violation > RESIDUAL_TOL * (1.0 + abs(b) + np.abs(a) @ np.abs(x)):
            logger.warning(f"Simplex solution violates a constraint by {violation:.3g}")
            return LpResult(x=None, status="numerical_failure")
    return LpResult(x=x, status="optimal", objective=float(p.objective @ x))
