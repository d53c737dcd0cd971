"""Variants of the multiproject setting: capped proposals, partial commitment
and a strictly incentive-compatible perturbation of rho^m."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (PARTIAL, Env, EpisodeReport, InputError, Mechanism, Params,
                   Project, ProjectSet, SubProb, episode)
from .multi import PMPMechanism, alpha_multi, alpha_multi_batch, pmp_choice, u_low
from .single import alpha_single, alpha_single_batch, is_top_tier

DEFAULT_EPS = 1e-3


def default_h(n: int) -> float:
    return n / (n + 1.0)


@dataclass(frozen=True)
class KEnv:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be at least 1")

    @property
    def env(self) -> Env:
        return Env("k", self.k)


def principal_favourite(type_set: ProjectSet) -> Project:
    """Highest-v project; among those, the one worst for the agent."""
    top_v = type_set.max_v()
    return min((p for p in type_set if p.v == top_v), key=lambda p: p.u)


def two_project_proposal(type_set: ProjectSet, params: Params) -> ProjectSet:
    """The principal's favourite project plus the agent's best stand-alone
    project under alpha^m."""
    if not len(type_set):
        return ProjectSet()
    fav = principal_favourite(type_set)
    agent = max(type_set, key=lambda p: alpha_multi(p, params) * p.u)
    return ProjectSet((fav, agent))


def k_episode(type_set: ProjectSet, env: KEnv, params: Params) -> EpisodeReport:
    if env.k < 2:
        raise InputError("k=1 is the single-project environment; use single_choice")
    proposal = two_project_proposal(type_set, params)
    if not len(proposal):
        return EpisodeReport.build(type_set, SubProb.zero(proposal))
    return EpisodeReport.build(type_set, pmp_choice(proposal, params).weights)


class PartialCommitmentMechanism(Mechanism):
    """rho*: only the principal's favourite in the proposal (lowest u among
    ties) can be picked, with the single-project approval probability."""

    name = "rho_star"

    def __init__(self, params: Params):
        self.params = params

    def choose(self, proposal: ProjectSet) -> SubProb:
        if not len(proposal):
            return SubProb.zero(proposal)
        fav = principal_favourite(proposal)
        return SubProb.point(proposal, fav, alpha_single(fav, self.params))

    def payoffs_batch(self, u, v):
        vp = v.max(axis=1)
        up = np.where(v == vp[:, None], u, np.inf).min(axis=1)
        a = alpha_single_batch(up, vp, self.params)
        return a * up, a * vp

    def propose(self, type_set: ProjectSet, env: Env = PARTIAL) -> ProjectSet:
        if not len(type_set):
            return ProjectSet()
        top = [p for p in type_set if is_top_tier(p, self.params)]
        if top:
            pick = max(top, key=lambda p: (p.u, p.v))
        else:
            pick = max(type_set, key=lambda p: alpha_single(p, self.params) * p.v)
        return ProjectSet((pick,))


def partial_commitment_choice(type_set: ProjectSet, params: Params) -> EpisodeReport:
    return episode(PartialCommitmentMechanism(params), type_set, PARTIAL)


def strict_alpha(p: Project, proposal_size: int, eps: float = DEFAULT_EPS,
                 h: Callable[[int], float] = default_h,
                 params: Params = Params()) -> float:
    """alpha^m scaled by 1 - eps + eps h(|P|), rewarding larger proposals."""
    if not 0.0 < eps < 1.0:
        raise InputError(f"eps={eps} must lie in (0, 1)")
    return _factor(proposal_size, eps, h) * alpha_multi(p, params)


def _factor(size: int, eps: float, h: Callable[[int], float]) -> float:
    hn = h(size)
    if not 0.0 <= hn <= 1.0:
        raise InputError(f"h({size})={hn} outside [0, 1]")
    if size >= 1 and not h(size - 1) < hn:
        raise InputError(f"h is not strictly increasing at {size}")
    return 1.0 - eps + eps * hn


class StrictPMPMechanism(PMPMechanism):
    """rho^m built on the size-dependent approval rule of ``strict_alpha``."""

    name = "rho_m_strict"

    def __init__(self, params: Params, eps: float = DEFAULT_EPS,
                 h: Callable[[int], float] = default_h):
        super().__init__(params)
        if not 0.0 < eps < 1.0:
            raise InputError(f"eps={eps} must lie in (0, 1)")
        self.eps = eps
        self.h = h

    def promise(self, proposal: ProjectSet) -> float:
        return _factor(len(proposal), self.eps, self.h) * u_low(proposal, self.params)

    def promise_batch(self, u, v) -> np.ndarray:
        f = _factor(u.shape[1], self.eps, self.h)
        return f * (alpha_multi_batch(u, v, self.params) * u).max(axis=1)
