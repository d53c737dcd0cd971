import numpy as np
import pytest

from projchoice import (PARTIAL, InputError, KEnv, Params, PartialCommitmentMechanism,
                        PMPMechanism, Project, ProjectSet, SearchSpec, alpha_multi,
                        alpha_single, k_episode, partial_commitment_choice,
                        pmp_choice, r_multi_closed, r_single, strict_alpha,
                        two_project_proposal, u_low, wcr_search)
from projchoice.core import Mechanism, SubProb, is_ic_on
from projchoice.extensions import StrictPMPMechanism, principal_favourite
from projchoice.fixtures import FAVOURITE_BOTTOM, SQUARE, STAR, TWO_PROJECTS
from projchoice.verify import nested_pairs, random_type_sets


def test_two_project_examples(origin):
    assert two_project_proposal(FAVOURITE_BOTTOM, origin) == ProjectSet.of(SQUARE, STAR)
    single = ProjectSet.of((0.4, 0.4))
    assert two_project_proposal(single, origin) == single
    assert two_project_proposal(TWO_PROJECTS, origin) == TWO_PROJECTS


def test_principal_favourite_lowest_u():
    a = ProjectSet.of((0.9, 0.8), (0.3, 0.8), (0.5, 0.2))
    assert principal_favourite(a) == Project(0.3, 0.8)


def test_k_episode_examples(origin):
    top = ProjectSet.of((0.6, 0.9))
    rep = k_episode(top, KEnv(2), origin)
    assert rep.distribution.weights == (1.0,) and rep.regret == 0.0
    full = pmp_choice(FAVOURITE_BOTTOM, origin).objective
    rep = k_episode(FAVOURITE_BOTTOM, KEnv(2), origin)
    assert full - rep.principal_payoff >= 1e-6
    assert rep.agent_payoff == pytest.approx(u_low(FAVOURITE_BOTTOM, origin), abs=1e-9)
    with pytest.raises(InputError):
        k_episode(top, KEnv(1), origin)


def test_k_episode_random_suite(params):
    r_m = r_multi_closed(params)
    for a in random_type_sets(params, 150, seed=4):
        rep = k_episode(a, KEnv(3), params)
        assert rep.regret <= r_m + 1e-9
        assert rep.agent_payoff == pytest.approx(u_low(a, params), abs=1e-9)
        prop = two_project_proposal(a, params)
        assert u_low(prop, params) == pytest.approx(u_low(a, params), abs=1e-15)
        assert pmp_choice(a, params).objective >= pmp_choice(prop, params).objective - 1e-9


def test_k_episode_adversarial_grid(params):
    r_m = r_multi_closed(params)
    grid = [(float(u), float(v)) for u in np.linspace(params.u_min, 1, 9)
            for v in np.linspace(params.v_min, 1, 9)]
    for i, a in enumerate(grid):
        for b in grid[i:] + [(params.u_min, 1.0)]:
            rep = k_episode(ProjectSet.of(a, b), KEnv(2), params)
            assert rep.regret <= r_m + 1e-9


def test_partial_examples(origin):
    rep = partial_commitment_choice(ProjectSet.of((0.9, 0.7), (0.4, 0.6), (0.2, 0.3)), origin)
    assert rep.proposal == ProjectSet.of((0.9, 0.7))
    assert rep.distribution.weights == (1.0,)
    rep = partial_commitment_choice(ProjectSet.of((1, 0.4)), origin)
    assert rep.distribution.weights == (0.0,)
    assert partial_commitment_choice(ProjectSet(), origin).regret is None


def test_partial_self_consistency(params):
    mech = PartialCommitmentMechanism(params)
    r_s = r_single(params)
    for a in random_type_sets(params, 150, seed=8):
        dist = mech.choose(a)
        fav = principal_favourite(a)
        assert dist.mass(fav) == alpha_single(fav, params)
        assert dist.total == dist.mass(fav)
        assert partial_commitment_choice(a, params).regret <= r_s + 1e-9


class _Generous(Mechanism):
    """Approves the principal's favourite more often than alpha^s allows."""

    name = "generous"

    def __init__(self, params):
        self.params = params

    def choose(self, proposal):
        if not len(proposal):
            return SubProb.zero(proposal)
        fav = principal_favourite(proposal)
        return SubProb.point(proposal, fav, min(1.0, alpha_single(fav, self.params) + 0.15))


def test_exceeding_partial_bound_fails_wcr(origin):
    spec = SearchSpec(11, 2, 0)
    ok = wcr_search(PartialCommitmentMechanism(origin), PARTIAL, spec, origin)
    assert ok.value <= r_single(origin) + 1e-9
    bad = wcr_search(_Generous(origin), PARTIAL, spec, origin)
    assert bad.value > r_single(origin) + 1e-3


def test_strict_alpha_examples(origin):
    p = Project(1.0, 0.3)
    base = alpha_multi(p, origin)
    assert strict_alpha(p, 2, 1e-9, params=origin) == pytest.approx(base, abs=1e-8)
    assert strict_alpha(p, 2, 0.01, params=origin) > strict_alpha(p, 1, 0.01, params=origin)
    assert strict_alpha(p, 5, 0.01, params=origin) <= base
    with pytest.raises(InputError):
        strict_alpha(p, 2, 0.0, params=origin)
    with pytest.raises(InputError):
        strict_alpha(p, 2, 0.1, h=lambda n: 0.5, params=origin)
    with pytest.raises(InputError):
        strict_alpha(p, 2, 0.1, h=lambda n: n, params=origin)


def test_strict_mechanism_is_strictly_ic(params):
    mech = StrictPMPMechanism(params)
    for small, big in nested_pairs(params, 100, seed=6):
        if len(small) < len(big) and u_low(small, params) > 0:
            assert mech.agent_value(big) > mech.agent_value(small)
    assert is_ic_on(mech, nested_pairs(params, 100, seed=6))[0]


def test_strict_mechanism_wcr(origin):
    mech = StrictPMPMechanism(origin, eps=1e-3)
    cert = wcr_search(mech, KEnv(3).env, SearchSpec(41, 2, 1), origin)
    assert cert.value <= r_multi_closed(origin) + 1e-3 + 2e-3
    assert cert.value >= r_multi_closed(origin) - 2 / 41
