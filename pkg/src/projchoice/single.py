"""Optimal mechanism when the agent may propose at most one project."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import (SINGLE, Env, EpisodeReport, InputError, Mechanism, Params,
                   Project, ProjectSet, SubProb, episode)


def r_single(params: Params) -> float:
    """Minimal worst-case regret with single-project proposals."""
    u0 = params.u_min
    return min((1.0 - u0) / (2.0 - u0), 1.0 - params.v_min)


def alpha_single(p: Project, params: Params) -> float:
    """Approval probability of a lone proposal: 1 in the top tier
    (v >= 1 - R^s) and u_min/u below it, so bottom-tier proposals are worth
    exactly u_min to the agent."""
    if p.v >= 1.0 - r_single(params) or p.u == 0.0:
        return 1.0
    return params.u_min / p.u


def alpha_single_batch(u: np.ndarray, v: np.ndarray, params: Params) -> np.ndarray:
    top = (v >= 1.0 - r_single(params)) | (u == 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = params.u_min / u
    return np.where(top, 1.0, low)


def is_top_tier(p: Project, params: Params) -> bool:
    return p.v >= 1.0 - r_single(params)


class ApprovalMechanism(Mechanism):
    """Single-project mechanism given by an approval probability alpha(u, v).

    ``alpha_batch`` may be supplied for fast adversarial search; otherwise
    ``alpha`` is vectorized elementwise.
    """

    cap = 1

    def __init__(self, alpha: Callable[[Project], float], name: str = "approval",
                 alpha_batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None):
        self.alpha = alpha
        self.alpha_batch = alpha_batch
        self.name = name

    def choose(self, proposal: ProjectSet) -> SubProb:
        if len(proposal) > 1:
            raise InputError(f"{self.name} accepts single-project proposals only")
        if not len(proposal):
            return SubProb.zero(proposal)
        return SubProb(proposal, (self.alpha(proposal[0]),))

    def payoffs_batch(self, u, v):
        if u.shape[1] != 1:
            raise InputError(f"{self.name} accepts single-project proposals only")
        u, v = u[:, 0], v[:, 0]
        if self.alpha_batch is not None:
            a = self.alpha_batch(u, v)
        else:
            a = np.array([self.alpha(Project(x, y)) for x, y in zip(u, v)])
        return a * u, a * v


class SingleMechanism(ApprovalMechanism):
    """The two-tier rule alpha^s."""

    def __init__(self, params: Params):
        self.params = params
        self.r_s = r_single(params)
        super().__init__(lambda p: alpha_single(p, params), name="alpha_s",
                         alpha_batch=lambda u, v: alpha_single_batch(u, v, params))

    def propose(self, type_set: ProjectSet, env: Env = SINGLE) -> ProjectSet:
        if not len(type_set):
            return ProjectSet()
        top = [p for p in type_set if is_top_tier(p, self.params)]
        if top:
            # favourite top-tier project; equal u goes to the higher v
            pick = max(top, key=lambda p: (p.u, p.v))
        else:
            # canonical order already puts higher v first among equal products
            pick = max(type_set, key=lambda p: alpha_single(p, self.params) * p.v)
        return ProjectSet((pick,))


def single_choice(type_set: ProjectSet, params: Params) -> EpisodeReport:
    """Agent proposes per the two-tier rule; principal approves w.p. alpha^s."""
    return episode(SingleMechanism(params), type_set, SINGLE)
