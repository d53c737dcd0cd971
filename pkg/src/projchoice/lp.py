"""Exact vertex-enumeration solver for LPs with at most two functional rows.

Every problem in this package has the shape

    maximize c . x   s.t.  x >= 0,  lo_r <= a_r . x <= hi_r  (r = 1, 2)

so an optimal vertex has at most two nonzero coordinates. Enumerating all
basic solutions is exact and cheap for the proposal sizes we meet.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from .core import FEAS_EPS, InputError

INF = math.inf

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# optimal vertices closer than this are treated as payoff-equivalent
TIE_EPS = 1e-12


@dataclass(frozen=True)
class Row:
    coeffs: tuple[float, ...]
    lo: float = -INF
    hi: float = INF

    @classmethod
    def le(cls, coeffs, bound):
        return cls(tuple(coeffs), -INF, float(bound))

    @classmethod
    def ge(cls, coeffs, bound):
        return cls(tuple(coeffs), float(bound), INF)

    @classmethod
    def eq(cls, coeffs, bound):
        return cls(tuple(coeffs), float(bound), float(bound))

    def sides(self):
        if self.lo == self.hi:
            return (self.lo,)
        return tuple(b for b in (self.lo, self.hi) if math.isfinite(b))

    def holds(self, x, eps=FEAS_EPS) -> bool:
        ax = sum(a * xi for a, xi in zip(self.coeffs, x))
        return self.lo - eps <= ax <= self.hi + eps


@dataclass(frozen=True)
class Vertex:
    status: str
    x: tuple[float, ...] = ()
    objective: float = -INF
    support: tuple[int, ...] = ()


def _solve_square(m: list[list[float]], b: list[float]):
    """Gaussian elimination with partial pivoting; None if singular."""
    n = len(b)
    if n == 0:
        return []
    a = [row[:] + [bi] for row, bi in zip(m, b)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[piv][col]) < 1e-14:
            return None
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for k in range(col, n + 1):
                    a[r][k] -= f * a[col][k]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n] - sum(a[r][k] * x[k] for k in range(r + 1, n))
        x[r] = s / a[r][r]
    return x


def _bounded(rows, n) -> bool:
    # a row sum(a x) <= hi with all a > 0 caps every coordinate
    for r in rows:
        if math.isfinite(r.hi) and n and min(r.coeffs) > 0:
            return True
        if math.isfinite(r.lo) and n and max(r.coeffs) < 0:
            return True
    return False


def _has_improving_ray(c, rows, n, eps) -> bool:
    # extreme rays of the recession cone, normalized by sum(d) = 1
    cone = []
    for r in rows:
        lo_fin, hi_fin = math.isfinite(r.lo), math.isfinite(r.hi)
        if lo_fin and hi_fin:
            cone.append((r.coeffs, "eq"))
        elif hi_fin:
            cone.append((r.coeffs, "le"))
        elif lo_fin:
            cone.append((r.coeffs, "ge"))
    for k in range(len(cone) + 1):
        for active in itertools.combinations(range(len(cone)), k):
            if any(cone[i][1] == "eq" for i in range(len(cone)) if i not in active):
                continue
            for supp in itertools.combinations(range(n), k + 1):
                m = [[cone[i][0][j] for j in supp] for i in active]
                m.append([1.0] * len(supp))
                d_s = _solve_square(m, [0.0] * k + [1.0])
                if d_s is None or min(d_s) < -eps:
                    continue
                d = [0.0] * n
                for j, dj in zip(supp, d_s):
                    d[j] = max(dj, 0.0)
                ok = True
                for coeffs, sense in cone:
                    ad = sum(a * dj for a, dj in zip(coeffs, d))
                    if (sense == "eq" and abs(ad) > eps) or \
                       (sense == "le" and ad > eps) or (sense == "ge" and ad < -eps):
                        ok = False
                        break
                if ok and sum(ci * dj for ci, dj in zip(c, d)) > eps:
                    return True
    return False


def lp2_solve(objective: Sequence[float], rows: Sequence[Row],
              eps: float = FEAS_EPS) -> Vertex:
    """Maximize ``objective . x`` over ``x >= 0`` and the given rows.

    All basic solutions are enumerated: for every set of active rows (with a
    choice of active side) and every support of equal size, the square system
    is solved and kept if feasible within ``eps``. Among optimal vertices the
    smallest support wins, then the lexicographically smallest one.
    Status is ``optimal``, ``infeasible`` or ``unbounded``.
    """
    c = [float(x) for x in objective]
    n = len(c)
    rows = list(rows)
    if len(rows) > 2:
        raise InputError("lp2_solve handles at most two functional rows")
    for r in rows:
        if len(r.coeffs) != n:
            raise InputError("row length does not match the objective")
        if r.lo > r.hi:
            return Vertex(INFEASIBLE)

    found = []
    for k in range(len(rows) + 1):
        for active in itertools.combinations(range(len(rows)), k):
            for rhs in itertools.product(*(rows[i].sides() for i in active)):
                for supp in itertools.combinations(range(n), k):
                    m = [[rows[i].coeffs[j] for j in supp] for i in active]
                    x_s = _solve_square(m, list(rhs))
                    if x_s is None or (x_s and min(x_s) < -eps):
                        continue
                    x = [0.0] * n
                    for j, xj in zip(supp, x_s):
                        x[j] = max(xj, 0.0)
                    if not all(r.holds(x, eps) for r in rows):
                        continue
                    obj = sum(ci * xi for ci, xi in zip(c, x))
                    real = tuple(j for j in range(n) if x[j] > eps)
                    found.append((obj, real, tuple(x)))
    if not found:
        return Vertex(INFEASIBLE)
    top = max(f[0] for f in found)
    best = min((f for f in found if f[0] >= top - TIE_EPS),
               key=lambda f: (len(f[1]), f[1]))
    if not _bounded(rows, n) and _has_improving_ray(c, rows, n, eps):
        return Vertex(UNBOUNDED)
    obj, supp, x = best
    return Vertex(OPTIMAL, x, obj, supp)
