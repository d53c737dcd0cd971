"""Cross-module verification suite behind ``projchoice verify``.

Each check returns a pass/fail verdict and a short detail string. Random
suites are seeded, so a report is reproducible for a given level and seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adversary, extensions, multi, single
from .core import (FEAS_EPS, MULTI, PARTIAL, SINGLE, Params, Project, ProjectSet,
                   best_response, is_ic_on)
from .fixtures import FAVOURITE_BOTTOM, ORIGIN, TWO_PROJECTS

PARAM_GRID = [Params(a, b) for a in (0.0, 0.25, 0.5, 0.75)
              for b in (0.0, 0.25, 0.5, 0.75)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass(frozen=True)
class Level:
    params: tuple
    random_count: int
    oracle_grid: int
    search: adversary.SearchSpec
    mono_grid: int = 101


LEVELS = {
    "quick": Level(params=(Params(0, 0), Params(0.25, 0.5), Params(0.5, 0.0),
                           Params(0.75, 0.75)),
                   random_count=150, oracle_grid=101,
                   search=adversary.SearchSpec(41, 2, 2), mono_grid=41),
    "full": Level(params=tuple(PARAM_GRID), random_count=1000, oracle_grid=201,
                  search=adversary.SearchSpec(201, 2, 2)),
}


# -- random suites ---------------------------------------------------------

def random_type_set(rng: np.random.Generator, params: Params, size: int) -> ProjectSet:
    """Uniform projects in D; about a third snapped to a coarse grid so that
    ties in u or v and corner projects show up."""
    u = rng.uniform(params.u_min, 1.0, size)
    v = rng.uniform(params.v_min, 1.0, size)
    snap = rng.random(size) < 0.3
    u = np.where(snap, params.u_min + (1 - params.u_min) * rng.integers(0, 5, size) / 4, u)
    snap = rng.random(size) < 0.3
    v = np.where(snap, params.v_min + (1 - params.v_min) * rng.integers(0, 5, size) / 4, v)
    return ProjectSet.of(*zip(u.tolist(), v.tolist()))


def random_type_sets(params: Params, count: int, seed: int = 0,
                     sizes: tuple[int, int] = (1, 6)) -> list[ProjectSet]:
    rng = np.random.default_rng([seed, int(params.u_min * 1e6), int(params.v_min * 1e6)])
    return [random_type_set(rng, params, int(rng.integers(sizes[0], sizes[1] + 1)))
            for _ in range(count)]


def nested_pairs(params: Params, count: int, seed: int = 0):
    """Pairs (P, Q) with P a random nonempty subset of Q."""
    rng = np.random.default_rng([seed, 7, int(params.u_min * 1e6), int(params.v_min * 1e6)])
    out = []
    for big in random_type_sets(params, count, seed + 1, sizes=(1, 6)):
        keep = rng.random(len(big)) < 0.5
        keep[rng.integers(len(big))] = True
        out.append((big.subset(np.flatnonzero(keep).tolist()), big))
    return out


# -- checks ----------------------------------------------------------------

def check_closed_forms(level, seed):
    got = (single.r_single(ORIGIN), multi.r_multi_closed(ORIGIN),
           multi.r_multi_closed(Params(0, 0.75)), single.r_single(Params(1, 0)))
    want = (0.5, 0.25, 0.1875, 0.0)
    ok = all(abs(g - w) <= 1e-12 for g, w in zip(got, want))
    return ok, f"R^s, R^m at reference points = {got}"


def check_two_project_example(level, seed):
    sol = multi.pmp_choice(TWO_PROJECTS, ORIGIN)
    reg = TWO_PROJECTS.max_v() - sol.objective
    a = multi.alpha_multi(TWO_PROJECTS[1], ORIGIN)
    proposal = best_response(multi.PMPMechanism(ORIGIN), TWO_PROJECTS, MULTI)
    ok = (all(abs(w - 0.5) <= 1e-9 for w in sol.weights.weights)
          and abs(reg - 0.25) <= 1e-9 and abs(a - 0.5) <= 1e-12
          and proposal == TWO_PROJECTS)
    return ok, f"weights {sol.weights.weights}, regret {reg:.12g}, alpha_m {a:.12g}"


def check_oracle(level, seed):
    worst = max(abs(multi.r_multi_numeric(p, level.oracle_grid) - multi.r_multi_closed(p))
                for p in PARAM_GRID)
    return worst <= 2e-3, f"max |grid - closed| = {worst:.3g} (grid {level.oracle_grid})"


def check_branch_continuity(level, seed):
    worst = 0.0
    for u0 in np.linspace(0, 0.99, 100):
        thr = 1 / (1 + math.sqrt(1 - u0))
        first = (1 - u0) / (1 + math.sqrt(1 - u0)) ** 2
        worst = max(worst, abs(first - multi.r_multi_closed(Params(u0, thr))))
    return worst <= 1e-12, f"max branch jump {worst:.3g}"


def check_alpha_definition(level, seed):
    # alpha^m as the largest p with gamma(u, p)(1 - v) <= R^m, by bisection
    worst = 0.0
    for params in level.params:
        r = multi.r_multi_closed(params)
        for u in np.linspace(params.u_min, 1, 21):
            for v in np.linspace(params.v_min, 1, 21):
                if multi.gamma(u, 1.0, params) * (1 - v) <= r:
                    p = 1.0
                else:
                    lo, hi = 0.0, 1.0
                    for _ in range(60):
                        mid = (lo + hi) / 2
                        if multi.gamma(u, mid, params) * (1 - v) <= r:
                            lo = mid
                        else:
                            hi = mid
                    p = lo
                worst = max(worst, abs(p - multi.alpha_multi(Project(u, v), params)))
    return worst <= 1e-9, f"max |bisection - closed form| = {worst:.3g}"


def check_gamma(level, seed):
    bad = 0
    for params in level.params:
        for u in np.linspace(params.u_min, 1, 41):
            prev = -1.0
            for p in np.linspace(0, 1, 41):
                g = multi.gamma(u, p, params)
                lhs = params.u_min + g * (u - params.u_min)
                if lhs < p * u - FEAS_EPS or g < prev - FEAS_EPS:
                    bad += 1
                if 0 < g < 1 and abs(lhs - p * u) > FEAS_EPS:
                    bad += 1
                prev = g
    return bad == 0, f"{bad} violations"


def _singleton_grid(params, n):
    for u in np.linspace(params.u_min, 1, n):
        for v in np.linspace(params.v_min, 1, n):
            yield Project(float(u), float(v))


def check_singleton_identity(level, seed):
    worst = 0.0
    for params in level.params:
        for p in _singleton_grid(params, level.mono_grid):
            ub = multi.u_bar(ProjectSet((p,)), params).objective
            worst = max(worst, abs(ub - multi.alpha_multi(p, params) * p.u))
    return worst <= 1e-9, f"max |u_bar - alpha_m u| = {worst:.3g}"


def check_singleton_regret(level, seed):
    worst = -math.inf
    for params in level.params:
        r = multi.r_multi_closed(params)
        for p in _singleton_grid(params, level.mono_grid):
            worst = max(worst, p.v * (1 - multi.alpha_multi(p, params)) - r)
    return worst <= 1e-9, f"max singleton regret - R^m = {worst:.3g}"


def _suite(level, seed):
    for params in level.params:
        yield params, random_type_sets(params, level.random_count, seed)


def check_sandwich(level, seed):
    gap, support, n = -math.inf, 0, 0
    for params, sets in _suite(level, seed):
        for P in sets:
            ub = multi.u_bar(P, params)
            gap = max(gap, multi.u_low(P, params) - ub.objective)
            support = max(support, ub.support_size,
                          multi.pmp_choice(P, params).support_size,
                          multi.pmp_choice_mm2(P, params).support_size)
            n += 1
    return gap <= 1e-9 and support <= 2, \
        f"{n} proposals: max(u_low - u_bar) = {gap:.3g}, max support {support}"


def check_lemma_equivalence(level, seed):
    worst, n = 0.0, 0
    for params, sets in _suite(level, seed):
        for P in sets:
            worst = max(worst, abs(multi.pmp_choice(P, params).objective
                                   - multi.pmp_choice_mm2(P, params).objective))
            n += 1
    return worst <= 1e-9, f"{n} proposals, max |mm1 - mm2| = {worst:.3g}"


def check_pmp_regret(level, seed):
    worst, n = -math.inf, 0
    for params, sets in _suite(level, seed):
        r = multi.r_multi_closed(params)
        for P in sets:
            worst = max(worst, P.max_v() - multi.pmp_choice(P, params).objective - r)
            n += 1
    return worst <= 1e-9, f"{n} proposals, max(regret - R^m) = {worst:.3g}"


def check_ic(level, seed):
    fails = 0
    for params in level.params:
        ok, _ = is_ic_on(multi.PMPMechanism(params),
                         nested_pairs(params, level.random_count, seed))
        fails += not ok
    return fails == 0, f"{fails} parameter pairs with an IC violation"


def check_two_project(level, seed):
    worst, pay = -math.inf, 0.0
    for params, sets in _suite(level, seed):
        r = multi.r_multi_closed(params)
        for A in sets:
            rep = extensions.k_episode(A, extensions.KEnv(2), params)
            worst = max(worst, rep.regret - r)
            pay = max(pay, abs(rep.agent_payoff - multi.u_low(A, params)))
    full = multi.pmp_choice(FAVOURITE_BOTTOM, ORIGIN).objective
    two = extensions.k_episode(FAVOURITE_BOTTOM, extensions.KEnv(2), ORIGIN).principal_payoff
    ok = worst <= 1e-9 and pay <= 1e-9 and full - two >= 1e-6
    return ok, (f"max(regret - R^m)={worst:.3g}, max agent payoff gap={pay:.3g}, "
                f"full-vs-two gain={full - two:.4g}")


def check_single_regret(level, seed):
    worst = -math.inf
    for params, sets in _suite(level, seed):
        r = single.r_single(params)
        for A in sets:
            worst = max(worst, single.single_choice(A, params).regret - r)
    return worst <= 1e-9, f"max(regret - R^s) = {worst:.3g}"


def check_partial(level, seed):
    worst = -math.inf
    for params, sets in _suite(level, seed):
        r = single.r_single(params)
        for A in sets:
            worst = max(worst, extensions.partial_commitment_choice(A, params).regret - r)
    return worst <= 1e-9, f"max(regret - R^s) = {worst:.3g}"


def check_monotone(level, seed):
    bad = 0
    for params in level.params:
        us = np.linspace(params.u_min, 1, level.mono_grid)
        vs = np.linspace(params.v_min, 1, level.mono_grid)
        for fn in (single.alpha_single, multi.alpha_multi):
            a = np.array([[fn(Project(float(u), float(v)), params) for v in vs] for u in us])
            bad += int((np.diff(a, axis=1) < -1e-12).sum())
            bad += int((np.diff(a, axis=0) > 1e-12).sum())
    return bad == 0, f"{bad} monotonicity violations"


def _certify(level, make, env, bound):
    worst = 0.0
    for params in level.params:
        cert = adversary.wcr_search(make(params), env, level.search, params)
        worst = max(worst, abs(cert.value - bound(params)))
    return worst <= 2e-3, f"max |certified WCR - closed form| = {worst:.3g} (grid {level.search.grid_n})"


def check_wcr_single(level, seed):
    return _certify(level, single.SingleMechanism, SINGLE, single.r_single)


def check_wcr_multi(level, seed):
    return _certify(level, multi.PMPMechanism, MULTI, multi.r_multi_closed)


def check_wcr_partial(level, seed):
    return _certify(level, extensions.PartialCommitmentMechanism, PARTIAL, single.r_single)


def check_strict_ic(level, seed):
    eps = extensions.DEFAULT_EPS
    bad = 0
    for params in level.params:
        mech = extensions.StrictPMPMechanism(params, eps)
        for small, big in nested_pairs(params, level.random_count // 3, seed):
            if len(small) < len(big) and multi.u_low(small, params) > 0:
                if not mech.agent_value(small) < mech.agent_value(big):
                    bad += 1
    p = level.params[0]
    cert = adversary.wcr_search(extensions.StrictPMPMechanism(p, eps), MULTI, level.search, p)
    excess = cert.value - multi.r_multi_closed(p) - eps
    return bad == 0 and excess <= 2e-3, f"{bad} non-strict chains, WCR excess {excess:.3g}"


CHECKS: list[tuple[str, Callable]] = [
    ("closed-form values at reference parameters", check_closed_forms),
    ("two-project worked example", check_two_project_example),
    ("R^m closed form vs grid oracle", check_oracle),
    ("R^m continuous across its branch boundary", check_branch_continuity),
    ("alpha^m equals its defining maximum", check_alpha_definition),
    ("gamma bound and monotonicity", check_gamma),
    ("singleton upper payoff equals alpha^m u", check_singleton_identity),
    ("singleton regret under rho^m at most R^m", check_singleton_regret),
    ("agent promise within upper bound; LP supports <= 2", check_sandwich),
    ("promise-keeping LP and banded LP agree", check_lemma_equivalence),
    ("rho^m regret at most R^m on random proposals", check_pmp_regret),
    ("rho^m incentive compatible on nested pairs", check_ic),
    ("two-project proposals keep regret at R^m", check_two_project),
    ("single-project regret at most R^s", check_single_regret),
    ("partial commitment regret at most R^s", check_partial),
    ("approval rules monotone in u and v", check_monotone),
    ("adversarial WCR of alpha^s matches R^s", check_wcr_single),
    ("adversarial WCR of rho^m matches R^m", check_wcr_multi),
    ("adversarial WCR of rho* matches R^s", check_wcr_partial),
    ("perturbed rho^m strictly IC with WCR near R^m", check_strict_ic),
]


def run_suite(level: str = "quick", seed: int = 0, only=None) -> list[Check]:
    cfg = LEVELS[level]
    out = []
    for name, fn in CHECKS:
        if only is not None and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(cfg, seed)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(ok), detail, time.perf_counter() - t0))
    return out
