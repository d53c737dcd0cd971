"""Optimal mechanism when the agent may propose any subset of the available projects.

The principal promises the agent ``max alpha^m(u, v) u`` over the proposal
and, subject to delivering exactly that, picks the lottery that is best for
himself (the proposal-wide maximal-payoff rule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (FEAS_EPS, MULTI, Env, Mechanism, Params, Project, ProjectSet,
                   SubProb, best_response, fmt)
from .lp import OPTIMAL, Row, lp2_solve


@dataclass(frozen=True)
class LpSolution:
    weights: SubProb
    objective: float
    support: tuple[int, ...]

    @property
    def support_size(self) -> int:
        return len(self.support)

    def to_json(self) -> dict:
        return {"weights": [fmt(w) for w in self.weights.weights],
                "objective": fmt(self.objective),
                "support": list(self.support)}


def gamma(u: float, p: float, params: Params) -> float:
    """Least mass q on a project worth u to the agent such that mixing it with
    (u_min, 1) pays the agent at least p * u."""
    u0 = params.u_min
    if u == u0:
        return 0.0
    return min(max((p * u - u0) / (u - u0), 0.0), 1.0)


def _minmax_threshold(params: Params) -> float:
    return 1.0 / (1.0 + math.sqrt(1.0 - params.u_min))


def r_multi_branch(params: Params) -> str:
    """``interior`` when the worst project's v is unconstrained by v_min,
    ``boundary`` when it sits at v_min."""
    return "interior" if params.v_min < _minmax_threshold(params) else "boundary"


def r_multi_closed(params: Params) -> float:
    u0, v0 = params.u_min, params.v_min
    if u0 == 1.0:
        return 0.0
    s = math.sqrt(1.0 - u0)
    if v0 < 1.0 / (1.0 + s):
        return (1.0 - u0) / (1.0 + s) ** 2
    return (1.0 - u0) * (1.0 - v0) * v0 / (1.0 - u0 * v0)


def inner_minmax(u, v, params: Params):
    """min over p of max{(1-p) v, gamma(u, p) (1-v)}, vectorized.

    The first piece falls in p, the second is flat at 0 up to u_min/u and then
    rises linearly, so the minimum sits at their crossing; endpoints are
    checked as a fallback.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0 = params.u_min
    du = u - u0
    den = v * du + (1.0 - v) * u
    with np.errstate(divide="ignore", invalid="ignore"):
        p_star = np.where(den > 0, (v * du + (1.0 - v) * u0) / den, 1.0)
    p_star = np.clip(p_star, 0.0, 1.0)

    def piece_max(p):
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(du > 0, np.clip((p * u - u0) / du, 0.0, 1.0), 0.0)
        return np.maximum((1.0 - p) * v, g * (1.0 - v))

    out = piece_max(p_star)
    for p in (0.0, 1.0):
        out = np.minimum(out, piece_max(np.full_like(out, p)))
    return out


def r_multi_numeric(params: Params, grid_n: int = 201) -> float:
    """Grid oracle for R^m: lattice over (u, v, p) with the inner minimum
    refined at the analytic crossing."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    us = np.linspace(params.u_min, 1.0, grid_n)
    vs = np.linspace(params.v_min, 1.0, grid_n)
    ps = np.linspace(0.0, 1.0, grid_n)
    u0 = params.u_min
    best = 0.0
    V, P = np.meshgrid(vs, ps, indexing="ij")
    for u in us:
        du = u - u0
        if du > 0:
            g = np.clip((P * u - u0) / du, 0.0, 1.0)
        else:
            g = np.zeros_like(P)
        lattice = np.maximum((1.0 - P) * V, g * (1.0 - V)).min(axis=1)
        inner = np.minimum(lattice, inner_minmax(np.full_like(vs, u), vs, params))
        best = max(best, float(inner.max()))
    return best


def alpha_multi(p: Project, params: Params) -> float:
    r = r_multi_closed(params)
    if p.v >= 1.0 - r or p.u == params.u_min:
        return 1.0
    w = r / (1.0 - p.v)
    return (1.0 - w) * params.u_min / p.u + w


def alpha_multi_batch(u, v, params: Params) -> np.ndarray:
    r = r_multi_closed(params)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    top = (v >= 1.0 - r) | (u == params.u_min)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = r / (1.0 - v)
        low = (1.0 - w) * params.u_min / u + w
    return np.where(top, 1.0, low)


def u_low(proposal: ProjectSet, params: Params) -> float:
    """Payoff promised to the agent: the best the agent could get from any single
    project of the proposal."""
    return max((alpha_multi(p, params) * p.u for p in proposal), default=0.0)


def _solution(proposal: ProjectSet, vertex, offset: float = 0.0) -> LpSolution:
    if vertex.status != OPTIMAL:
        raise AssertionError(f"LP unexpectedly {vertex.status} on {proposal}")
    return LpSolution(SubProb(proposal, vertex.x), vertex.objective + offset,
                      vertex.support)


def u_bar(proposal: ProjectSet, params: Params) -> LpSolution:
    """Largest agent payoff any IC mechanism with regret <= R^m can offer."""
    u0 = params.u_min
    r = r_multi_closed(params)
    vertex = lp2_solve([p.u - u0 for p in proposal],
                       [Row.le([1.0] * len(proposal), 1.0),
                        Row.le([1.0 - p.v for p in proposal], r)])
    return _solution(proposal, vertex, offset=u0)


def solve_mm1(proposal: ProjectSet, promise: float) -> LpSolution:
    """Best lottery for the principal that pays the agent exactly ``promise``."""
    vertex = lp2_solve(proposal.vs,
                       [Row.le([1.0] * len(proposal), 1.0),
                        Row.eq(proposal.us, promise)])
    return _solution(proposal, vertex)


def pmp_choice(proposal: ProjectSet, params: Params) -> LpSolution:
    return solve_mm1(proposal, u_low(proposal, params))


def pmp_choice_mm2(proposal: ProjectSet, params: Params) -> LpSolution:
    """Same optimum as ``pmp_choice`` with the promise relaxed to the band
    [u_low, u_bar]."""
    lo = u_low(proposal, params)
    hi = u_bar(proposal, params).objective
    if lo - FEAS_EPS <= hi < lo:
        hi = lo
    vertex = lp2_solve(proposal.vs,
                       [Row.le([1.0] * len(proposal), 1.0),
                        Row(tuple(proposal.us), lo, hi)])
    return _solution(proposal, vertex)


def mm1_batch(u: np.ndarray, v: np.ndarray, promise: np.ndarray) -> np.ndarray:
    """Optimal value of the promise-keeping LP for a stack of proposals.

    Enumerates the same vertices as ``lp2_solve`` in closed form: one project
    carrying the promise alone, or two projects splitting a full unit of mass.
    """
    n, t = u.shape
    best = np.where(promise <= FEAS_EPS, 0.0, -np.inf)
    for j in range(t):
        uj, vj = u[:, j], v[:, j]
        with np.errstate(divide="ignore", invalid="ignore"):
            mass = np.where(uj > 0, promise / uj, np.where(promise <= FEAS_EPS, 1.0, np.inf))
        ok = mass <= 1.0 + FEAS_EPS
        best = np.where(ok, np.maximum(best, np.minimum(mass, 1.0) * vj), best)
    for i in range(t):
        for j in range(i + 1, t):
            ui, uj, vi, vj = u[:, i], u[:, j], v[:, i], v[:, j]
            d = ui - uj
            with np.errstate(divide="ignore", invalid="ignore"):
                wi = (promise - uj) / d
            ok = (d != 0) & (wi >= -FEAS_EPS) & (wi <= 1.0 + FEAS_EPS)
            wi = np.clip(wi, 0.0, 1.0)
            val = wi * vi + (1.0 - wi) * vj
            best = np.where(ok, np.maximum(best, val), best)
    return best


class PMPMechanism(Mechanism):
    """rho^m: promise ``u_low`` and maximize the principal's payoff."""

    name = "rho_m"

    def __init__(self, params: Params):
        self.params = params
        self.r_m = r_multi_closed(params)

    def promise(self, proposal: ProjectSet) -> float:
        return u_low(proposal, self.params)

    def promise_batch(self, u, v) -> np.ndarray:
        return (alpha_multi_batch(u, v, self.params) * u).max(axis=1)

    def choose(self, proposal: ProjectSet) -> SubProb:
        if not len(proposal):
            return SubProb.zero(proposal)
        return solve_mm1(proposal, self.promise(proposal)).weights

    def payoffs_batch(self, u, v):
        promise = self.promise_batch(u, v)
        return promise, mm1_batch(u, v, promise)

    def propose(self, type_set: ProjectSet, env: Env = MULTI) -> ProjectSet:
        if env.cap is None:
            # IC: full disclosure is agent-optimal and best for the principal
            return type_set
        return best_response(self, type_set, env)
