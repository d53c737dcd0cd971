"""Domain types shared by every environment: projects, type sets, lotteries,
episode reports, regret and the agent's best response."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

FEAS_EPS = 1e-9


class InputError(ValueError):
    """Malformed user input (parameters, project sets, proposals)."""


class DomainError(ValueError):
    """Quantity undefined for the given arguments."""


@dataclass(frozen=True)
class Params:
    """Bounds of the payoff rectangle ``[u_min, 1] x [v_min, 1]``."""

    u_min: float = 0.0
    v_min: float = 0.0

    def __post_init__(self):
        for name in ("u_min", "v_min"):
            x = getattr(self, name)
            if not (isinstance(x, (int, float)) and 0.0 <= x <= 1.0):
                raise InputError(f"{name}={x!r} must lie in [0, 1]")
        object.__setattr__(self, "u_min", float(self.u_min))
        object.__setattr__(self, "v_min", float(self.v_min))

    def contains(self, p: "Project") -> bool:
        return self.u_min <= p.u <= 1.0 and self.v_min <= p.v <= 1.0

    def to_json(self) -> dict:
        return {"u_min": self.u_min, "v_min": self.v_min}


@dataclass(frozen=True, order=True)
class Project:
    u: float
    v: float

    @property
    def key(self) -> tuple[float, float]:
        # canonical order: principal's favourite first, then agent's
        return (-self.v, -self.u)


@dataclass(frozen=True)
class ProjectSet:
    """Finite set of projects, deduplicated and canonically sorted
    (descending v, then descending u). Serves as agent type and proposal."""

    projects: tuple[Project, ...] = ()

    def __post_init__(self):
        uniq = {(float(p.u), float(p.v)) for p in self.projects}
        ordered = sorted((Project(u, v) for u, v in uniq), key=lambda p: p.key)
        object.__setattr__(self, "projects", tuple(ordered))

    @classmethod
    def of(cls, *pairs: Iterable[float]) -> "ProjectSet":
        return cls(tuple(Project(float(u), float(v)) for u, v in pairs))

    def __len__(self) -> int:
        return len(self.projects)

    def __iter__(self):
        return iter(self.projects)

    def __getitem__(self, i: int) -> Project:
        return self.projects[i]

    def __contains__(self, p: object) -> bool:
        return p in self.projects

    def issubset(self, other: "ProjectSet") -> bool:
        return set(self.projects) <= set(other.projects)

    def index(self, p: Project) -> int:
        return self.projects.index(p)

    def subset(self, indices: Iterable[int]) -> "ProjectSet":
        return ProjectSet(tuple(self.projects[i] for i in indices))

    @property
    def us(self) -> list[float]:
        return [p.u for p in self.projects]

    @property
    def vs(self) -> list[float]:
        return [p.v for p in self.projects]

    def max_v(self) -> float:
        if not self.projects:
            raise DomainError("empty project set has no principal favourite")
        return self.projects[0].v

    def to_json(self) -> list[dict]:
        return [{"u": fmt(p.u), "v": fmt(p.v)} for p in self.projects]


@dataclass(frozen=True)
class SubProb:
    """Subprobability over the projects of ``carrier``; ``weights`` is aligned
    with the carrier's canonical order."""

    carrier: ProjectSet
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.carrier):
            raise InputError(
                f"{len(w)} weights for a carrier of {len(self.carrier)} projects")
        if any(x < -FEAS_EPS for x in w):
            raise InputError(f"negative weight in {w}")
        if sum(w) > 1.0 + FEAS_EPS:
            raise InputError(f"weights sum to {sum(w)} > 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def zero(cls, carrier: ProjectSet) -> "SubProb":
        return cls(carrier, (0.0,) * len(carrier))

    @classmethod
    def point(cls, carrier: ProjectSet, p: Project, mass: float) -> "SubProb":
        w = [0.0] * len(carrier)
        w[carrier.index(p)] = mass
        return cls(carrier, tuple(w))

    @property
    def total(self) -> float:
        return sum(self.weights)

    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w > FEAS_EPS]

    def mass(self, p: Project) -> float:
        return self.weights[self.carrier.index(p)] if p in self.carrier else 0.0

    def agent_payoff(self) -> float:
        return sum(w * p.u for w, p in zip(self.weights, self.carrier))

    def principal_payoff(self) -> float:
        return sum(w * p.v for w, p in zip(self.weights, self.carrier))

    def to_json(self) -> list[dict]:
        return [{"u": fmt(p.u), "v": fmt(p.v), "weight": fmt(w)}
                for p, w in zip(self.carrier, self.weights)]


@dataclass(frozen=True)
class EpisodeReport:
    """Outcome of one round: the agent's proposal and the principal's lottery.

    ``regret`` is None when the type set is empty (no benchmark exists).
    """

    type_set: ProjectSet
    proposal: ProjectSet
    distribution: SubProb
    agent_payoff: float
    principal_payoff: float
    regret: float | None

    @classmethod
    def build(cls, type_set: ProjectSet, dist: SubProb) -> "EpisodeReport":
        return cls(
            type_set=type_set,
            proposal=dist.carrier,
            distribution=dist,
            agent_payoff=dist.agent_payoff(),
            principal_payoff=dist.principal_payoff(),
            regret=regret(dist, type_set) if len(type_set) else None,
        )

    def to_json(self) -> dict:
        return {
            "type_set": self.type_set.to_json(),
            "proposal": self.proposal.to_json(),
            "distribution": self.distribution.to_json(),
            "agent_payoff": fmt(self.agent_payoff),
            "principal_payoff": fmt(self.principal_payoff),
            "regret": None if self.regret is None else fmt(self.regret),
        }


def fmt(x: float) -> float:
    """Round to 12 significant digits for serialized output."""
    return float(f"{x:.12g}")


# -- environments ----------------------------------------------------------

@dataclass(frozen=True)
class Env:
    """Proposal family: ``single`` (|P| <= 1), ``k`` (|P| <= k), ``multi`` (any
    P), ``partial`` (any P, principal cannot pick a dominated project)."""

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("single", "k", "multi", "partial"):
            raise InputError(f"unknown environment {self.kind!r}")
        if self.kind == "k" and (self.k is None or self.k < 1):
            raise InputError("k-project environment needs k >= 1")

    @classmethod
    def parse(cls, text: str) -> "Env":
        text = text.strip().lower()
        if text.startswith("k="):
            try:
                k = int(text[2:])
            except ValueError:
                raise InputError(f"bad environment {text!r}") from None
            return cls("k", k)
        return cls(text)

    @property
    def cap(self) -> int | None:
        if self.kind == "single":
            return 1
        if self.kind == "k":
            return self.k
        return None

    def __str__(self) -> str:
        return f"k={self.k}" if self.kind == "k" else self.kind


SINGLE = Env("single")
MULTI = Env("multi")
PARTIAL = Env("partial")


# -- mechanisms ------------------------------------------------------------

class Mechanism:
    """A rule mapping each proposal to a lottery over its projects.

    Subclasses implement ``choose``; ``payoffs_batch`` is the vectorized twin
    used by the adversarial search, and ``propose`` may be overridden with a
    closed-form description of the agent's optimal proposal.
    """

    name = "mechanism"
    cap: int | None = None

    def choose(self, proposal: ProjectSet) -> SubProb:
        raise NotImplementedError

    def payoffs_batch(self, u: np.ndarray, v: np.ndarray):
        """Agent and principal expected payoffs for a stack of proposals.

        ``u`` and ``v`` have shape (n, t): n proposals of t projects each.
        Returns two arrays of shape (n,).
        """
        agent = np.empty(len(u))
        principal = np.empty(len(u))
        for i, (ur, vr) in enumerate(zip(u, v)):
            dist = self.choose(ProjectSet.of(*zip(ur, vr)))
            agent[i] = dist.agent_payoff()
            principal[i] = dist.principal_payoff()
        return agent, principal

    def agent_value(self, proposal: ProjectSet) -> float:
        """U(rho, P); the empty proposal is worth 0."""
        if not len(proposal):
            return 0.0
        return self.choose(proposal).agent_payoff()

    def propose(self, type_set: ProjectSet, env: Env) -> ProjectSet:
        return best_response(self, type_set, env)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def joint_cap(env: Env, mech: Mechanism) -> int | None:
    caps = [c for c in (env.cap, mech.cap) if c is not None]
    return min(caps) if caps else None


def _proposals(type_set: ProjectSet, cap: int | None):
    n = len(type_set)
    top = n if cap is None else min(cap, n)
    for size in range(top, 0, -1):
        yield from itertools.combinations(range(n), size)


def best_response(mech: Mechanism, type_set: ProjectSet, env: Env) -> ProjectSet:
    """Agent's proposal by exhaustive search over admissible subsets.

    Maximizes the agent's payoff; near-ties (within FEAS_EPS) go to the larger
    principal payoff, then to larger proposals, then lexicographically smaller
    index tuples. The empty proposal (payoff 0) is the fallback.
    """
    cands = [((), 0.0, 0.0)]
    for idx in _proposals(type_set, joint_cap(env, mech)):
        dist = mech.choose(type_set.subset(idx))
        cands.append((idx, dist.agent_payoff(), dist.principal_payoff()))
    best_u = max(c[1] for c in cands)
    cands = [c for c in cands if c[1] >= best_u - FEAS_EPS]
    best_w = max(c[2] for c in cands)
    cands = [c for c in cands if c[2] >= best_w - FEAS_EPS]
    idx = min(cands, key=lambda c: (-len(c[0]), c[0]))[0]
    return type_set.subset(idx)


def episode(mech: Mechanism, type_set: ProjectSet, env: Env,
            exhaustive: bool = False) -> EpisodeReport:
    """Agent proposes (closed-form rule unless ``exhaustive``), principal draws."""
    if exhaustive:
        proposal = best_response(mech, type_set, env)
    else:
        proposal = mech.propose(type_set, env)
    if not len(proposal):
        return EpisodeReport.build(type_set, SubProb.zero(ProjectSet()))
    return EpisodeReport.build(type_set, mech.choose(proposal))


def regret(dist: SubProb, type_set: ProjectSet) -> float:
    """Principal's best available payoff in ``type_set`` minus the expected
    payoff under ``dist``."""
    if not len(type_set):
        raise DomainError("regret is undefined for an empty type set")
    for i in dist.support():
        if dist.carrier[i] not in type_set:
            raise InputError(f"{dist.carrier[i]} is not an available project")
    return type_set.max_v() - dist.principal_payoff()


def is_ic_on(mech: Mechanism, chains: Sequence[tuple[ProjectSet, ProjectSet]]):
    """Check U(mech, P) <= U(mech, Q) on nested pairs P <= Q.

    Returns ``(True, None)`` or ``(False, (P, Q, U(P), U(Q)))`` for the first
    violating pair.
    """
    for small, big in chains:
        if not small.issubset(big):
            raise InputError("is_ic_on needs nested pairs (P subset of Q)")
        lo, hi = mech.agent_value(small), mech.agent_value(big)
        if lo > hi + FEAS_EPS:
            return False, (small, big, lo, hi)
    return True, None


# -- JSON I/O --------------------------------------------------------------

def _number(x, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{path}: expected a number, got {x!r}")
    return float(x)


def parse_type_set(data) -> tuple[Params, ProjectSet]:
    """Validate a ``{"params": {...}, "projects": [...]}`` document."""
    if not isinstance(data, dict):
        raise InputError("document root must be an object")
    raw = data.get("params", {})
    if not isinstance(raw, dict):
        raise InputError("params: expected an object")
    params = Params(_number(raw.get("u_min", 0.0), "params.u_min"),
                    _number(raw.get("v_min", 0.0), "params.v_min"))
    items = data.get("projects")
    if not isinstance(items, list):
        raise InputError("projects: expected a list")
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise InputError(f"projects[{i}]: expected an object with u and v")
        for k in ("u", "v"):
            if k not in item:
                raise InputError(f"projects[{i}].{k}: missing")
        p = Project(_number(item["u"], f"projects[{i}].u"),
                    _number(item["v"], f"projects[{i}].v"))
        if not params.u_min <= p.u <= 1.0:
            raise InputError(
                f"projects[{i}].u: {p.u} outside [{params.u_min}, 1]")
        if not params.v_min <= p.v <= 1.0:
            raise InputError(
                f"projects[{i}].v: {p.v} outside [{params.v_min}, 1]")
        out.append(p)
    return params, ProjectSet(tuple(out))


def load_type_set(path) -> tuple[Params, ProjectSet]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return parse_type_set(data)


def dump_type_set(params: Params, type_set: ProjectSet) -> dict:
    return {"params": params.to_json(), "projects": type_set.to_json()}
