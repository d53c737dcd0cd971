"""Adversarial search over agent types for a mechanism's worst-case regret.

Types are drawn from a lattice over D. Singletons range over the whole
lattice; larger types pair one lattice point with structural anchors, the
projects (u_min, 1), (1, 1) and the column u = 1 on which the lower-bound
arguments place their witnesses. The best type found is refined on finer
local lattices and finally replayed through the scalar mechanism code, so
the certified value never depends on the vectorized search path.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .core import (FEAS_EPS, Env, InputError, Mechanism, Params, Project,
                   ProjectSet, episode, fmt, joint_cap)
from .multi import inner_minmax

DEFAULT_BUDGET = 10_000_000
CHUNK = 1 << 16
REFINE_HALF_WIDTH = 10


class SearchBudgetError(InputError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    grid_n: int = 101
    max_type_size: int = 2
    refine_rounds: int = 2

    def __post_init__(self):
        if self.grid_n < 2:
            raise InputError("grid_n must be at least 2")
        if self.max_type_size < 1:
            raise InputError("max_type_size must be at least 1")
        if self.refine_rounds < 0:
            raise InputError("refine_rounds must be nonnegative")


@dataclass(frozen=True)
class WcrCertificate:
    value: float
    witness: ProjectSet
    mechanism_id: str
    spec: SearchSpec
    params: Params
    evaluations: int = 0

    def to_json(self) -> dict:
        return {"mechanism": self.mechanism_id,
                "wcr": fmt(self.value),
                "witness": {"params": self.params.to_json(),
                            "projects": self.witness.to_json()},
                "spec": asdict(self.spec),
                "evaluations": self.evaluations}


def lower_bound_single(v: float, params: Params) -> float:
    """Regret forced on any single-project mechanism by the projects (1, v)
    and (u_min, 1)."""
    return min(1.0 - v, (1.0 - params.u_min) * v)


def lower_bound_multi(p: Project, params: Params) -> float:
    return float(inner_minmax(p.u, p.v, params))


def batch_regret(mech: Mechanism, env: Env, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Regret for a stack of types (rows of ``u``, ``v``), agent best-responding
    over every admissible sub-proposal with the same tie rule as
    ``core.best_response``."""
    n, s = u.shape
    cap = joint_cap(env, mech)
    top = s if cap is None else min(cap, s)
    agent = [np.zeros(n)]
    principal = [np.zeros(n)]
    for t in range(1, top + 1):
        for cols in itertools.combinations(range(s), t):
            cols = list(cols)
            a, w = mech.payoffs_batch(u[:, cols], v[:, cols])
            agent.append(a)
            principal.append(w)
    agent = np.stack(agent, axis=1)
    principal = np.stack(principal, axis=1)
    best_u = agent.max(axis=1, keepdims=True)
    w = np.where(agent >= best_u - FEAS_EPS, principal, -np.inf).max(axis=1)
    return v.max(axis=1) - w


def _lattice(params: Params, grid_n: int):
    us = np.linspace(params.u_min, 1.0, grid_n)
    vs = np.linspace(params.v_min, 1.0, grid_n)
    pool = np.unique(np.stack(np.meshgrid(us, vs, indexing="ij"), -1).reshape(-1, 2), axis=0)
    anchors = [(params.u_min, 1.0), (1.0, 1.0)] + [(1.0, y) for y in vs]
    anchors = np.unique(np.array(anchors), axis=0)
    return pool, anchors


def _type_blocks(pool, anchors, max_size):
    """Yield (u, v) arrays of types, one size at a time, in a fixed order."""
    yield pool[:, None, 0], pool[:, None, 1]
    for size in range(2, max_size + 1):
        combos = np.array(list(itertools.combinations(range(len(anchors)), size - 1)),
                          dtype=int).reshape(-1, size - 1)
        step = max(1, CHUNK // len(combos))
        for start in range(0, len(pool), step):
            free = pool[start:start + step]
            pts = np.concatenate(
                [np.repeat(free[:, None, :], len(combos), axis=0),
                 np.tile(anchors[combos], (len(free), 1, 1))], axis=1)
            # drop types where the free point repeats an anchor
            same = (pts[:, :1, :] == pts[:, 1:, :]).all(axis=2).any(axis=1)
            pts = pts[~same]
            if len(pts):
                yield pts[..., 0], pts[..., 1]


def count_types(spec: SearchSpec, params: Params) -> int:
    pool, anchors = _lattice(params, spec.grid_n)
    total = len(pool)
    for size in range(2, spec.max_type_size + 1):
        total += len(pool) * math.comb(len(anchors), size - 1)
    return total


def _to_set(u_row, v_row) -> ProjectSet:
    return ProjectSet.of(*zip(u_row.tolist(), v_row.tolist()))


def wcr_search(mech: Mechanism, env: Env, spec: SearchSpec = SearchSpec(),
               params: Params | None = None, budget: int = DEFAULT_BUDGET,
               workers: int = 1) -> WcrCertificate:
    """Largest regret of ``mech`` found over the type lattice.

    Deterministic for a fixed spec: blocks are folded in enumeration order and
    the first maximizer wins, whatever the number of workers.
    """
    if params is None:
        params = getattr(mech, "params", Params())
    planned = count_types(spec, params)
    refine = spec.refine_rounds * spec.max_type_size * (2 * REFINE_HALF_WIDTH + 1) ** 2
    if planned + refine > budget:
        raise SearchBudgetError(
            f"search needs {planned + refine:,} episode evaluations, over the "
            f"budget of {budget:,}; lower grid_n or max_type_size")
    pool, anchors = _lattice(params, spec.grid_n)

    def run(block):
        u, v = block
        r = batch_regret(mech, env, u, v)
        i = int(np.argmax(r))
        return float(r[i]), u[i], v[i], len(r)

    blocks = _type_blocks(pool, anchors, spec.max_type_size)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, blocks))
    else:
        results = [run(b) for b in blocks]
    best_val, best_u, best_v, evaluations = -np.inf, None, None, 0
    for val, bu, bv, n in results:
        evaluations += n
        if val > best_val:
            best_val, best_u, best_v = val, bu, bv

    hu = (1.0 - params.u_min) / (spec.grid_n - 1)
    hv = (1.0 - params.v_min) / (spec.grid_n - 1)
    offsets = np.arange(-REFINE_HALF_WIDTH, REFINE_HALF_WIDTH + 1)
    for _ in range(spec.refine_rounds):
        hu, hv = hu / 10.0, hv / 10.0
        for i in range(len(best_u)):
            cu = np.clip(best_u[i] + offsets * hu, params.u_min, 1.0)
            cv = np.clip(best_v[i] + offsets * hv, params.v_min, 1.0)
            local = np.unique(np.stack(np.meshgrid(cu, cv, indexing="ij"), -1).reshape(-1, 2), axis=0)
            u = np.repeat(best_u[None, :], len(local), axis=0)
            v = np.repeat(best_v[None, :], len(local), axis=0)
            u[:, i], v[:, i] = local[:, 0], local[:, 1]
            if len(best_u) > 1:
                others = np.delete(np.stack([best_u, best_v], -1), i, axis=0)
                dup = (local[:, None, :] == others[None, :, :]).all(axis=2).any(axis=1)
                u, v = u[~dup], v[~dup]
            if not len(u):
                continue
            r = batch_regret(mech, env, u, v)
            evaluations += len(r)
            j = int(np.argmax(r))
            if r[j] > best_val:
                best_val, best_u, best_v = float(r[j]), u[j].copy(), v[j].copy()

    witness = _to_set(best_u, best_v)
    replay = episode(mech, witness, env, exhaustive=True).regret
    if abs(replay - best_val) > FEAS_EPS:
        raise AssertionError(
            f"search value {best_val!r} does not replay on {witness}: {replay!r}")
    return WcrCertificate(replay, witness, f"{mech.name}@{env}", spec, params,
                          evaluations)
