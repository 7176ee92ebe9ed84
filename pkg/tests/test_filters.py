"""Belief recursions against trivial cases and the trajectory oracle."""

import json

import numpy as np
import pytest

from delshare import (
    UNREACHABLE,
    StrategyProfile,
    common_conditionals,
    conditional_from_joint,
    joint_distribution,
    make_problem,
    pi_init,
    pi_update,
    private_belief_init,
    private_conditionals,
    random_problem,
)
from delshare.filters import belief_to_csv, belief_to_json, xi_size
from delshare.info import enumerate_infosets, infoset_index
from delshare.solver import _forward_belief_pass, belief_key, pi_chain, theta_chain


def noiseless_spec(horizon=3):
    """Binary K=2 chain: observations reveal the state, transitions flip it
    when the joint action is (0, 0) and keep it otherwise."""
    eye = np.eye(2)
    obs = np.zeros((horizon - 1, 2, 4, 2))
    obs[:] = eye[None, :, None, :]
    trans = np.zeros((horizon - 1, 2, 4, 2))
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    for a in range(4):
        trans[:, :, a, :] = flip if a == 0 else eye
    return make_problem(
        horizon=horizon,
        num_controllers=2,
        delay=1,
        state_size=2,
        obs_sizes=(2, 2),
        action_sizes=(2, 2),
        initial_dist=[0.5, 0.5],
        initial_obs_kernel=[eye, eye],
        obs_kernels=[obs, obs.copy()],
        transition_kernels=trans,
        stage_cost=np.zeros((horizon, 2, 4)),
    )


def uniform_spec(horizon=3, delay=1):
    half = np.full((2, 2), 0.5)
    obs = np.full((horizon - 1, 2, 4, 2), 0.5)
    return make_problem(
        horizon=horizon,
        num_controllers=2,
        delay=delay,
        state_size=2,
        obs_sizes=(2, 2),
        action_sizes=(2, 2),
        initial_dist=[0.5, 0.5],
        initial_obs_kernel=[half, half],
        obs_kernels=[obs, obs.copy()],
        transition_kernels=np.full((horizon - 1, 2, 4, 2), 0.5),
        stage_cost=np.zeros((horizon, 2, 4)),
    )


def grid_spec(seed, delay):
    return random_problem(
        seed, horizon=3, num_controllers=2, delay=delay,
        state_size=2, obs_sizes=(2, 2), action_sizes=(2, 2),
    )


# ---------------------------------------------------------------------------
# initial private belief


def test_init_point_mass_when_noiseless():
    spec = noiseless_spec()
    b = private_belief_init(spec, 0, 1)
    # the state is identified and the other controller saw the same thing
    expected = np.zeros(xi_size(spec, 1, 0))
    expected[1 * 2 + 1] = 1.0
    np.testing.assert_allclose(b.probs, expected, atol=1e-12)


def test_init_factorizes_when_uninformative():
    spec = uniform_spec()
    b = private_belief_init(spec, 0, 0)
    np.testing.assert_allclose(b.probs, np.full(4, 0.25), atol=1e-12)


def test_init_unreachable_observation():
    spec = uniform_spec()
    dead = np.array([[1.0, 0.0], [1.0, 0.0]])  # observation 1 never occurs
    spec = make_problem(
        **{
            **{
                "horizon": spec.horizon,
                "num_controllers": 2,
                "delay": 1,
                "state_size": 2,
                "obs_sizes": (2, 2),
                "action_sizes": (2, 2),
                "initial_dist": spec.initial_dist,
                "initial_obs_kernel": [dead, dead],
                "obs_kernels": list(spec.obs_kernels),
                "transition_kernels": spec.transition_kernels,
                "stage_cost": spec.stage_cost,
            }
        }
    )
    assert private_belief_init(spec, 0, 1) is UNREACHABLE
    assert pi_init(spec, (1, 0)) is UNREACHABLE


# ---------------------------------------------------------------------------
# joint distribution


@pytest.mark.parametrize("delay", [1, 2])
def test_joint_distribution_mass_one(delay):
    spec = grid_spec(7, delay)
    profile = StrategyProfile.random(spec, 3)
    for t in range(1, 4):
        joint = joint_distribution(spec, profile, t)
        assert abs(sum(joint.probs.values()) - 1.0) < 1e-9


def test_joint_distribution_deterministic_chain():
    spec = noiseless_spec()
    profile = StrategyProfile.zeros(spec)
    joint = joint_distribution(spec, profile, spec.horizon)
    supports = [(traj, p) for traj, p in joint.probs.items() if p > 0]
    # two equally likely initial states, everything else deterministic
    assert len(supports) == 2
    assert all(abs(p - 0.5) < 1e-12 for _, p in supports)


def test_state_marginal_matches_hand_computation():
    spec = grid_spec(7, 1)
    profile = StrategyProfile.zeros(spec)  # joint action (0, 0) at t=1
    joint = joint_distribution(spec, profile, 2)
    marginal = np.zeros(2)
    for (xs, _ys, _us), p in joint.probs.items():
        marginal[xs[1]] += p
    expected = spec.initial_dist @ spec.transition_kernels[0, :, 0, :]
    np.testing.assert_allclose(marginal, expected, atol=1e-12)


def test_conditional_marginal_recovers_state_law():
    spec = grid_spec(2, 1)
    profile = StrategyProfile.random(spec, 5)
    t = 2
    joint = joint_distribution(spec, profile, t)
    beliefs = private_conditionals(spec, joint, 0)
    marginal = np.zeros(2)
    for _code, (belief, mass) in beliefs.items():
        marginal += mass * belief.probs.reshape(2, -1).sum(axis=1)
    direct = np.zeros(2)
    for (xs, _ys, _us), p in joint.probs.items():
        direct[xs[t - 1]] += p
    np.testing.assert_allclose(marginal, direct, atol=1e-9)


def test_conditional_from_joint_unreachable():
    spec = noiseless_spec()
    profile = StrategyProfile.zeros(spec)
    joint = joint_distribution(spec, profile, 1)
    # own first observation 0 paired with an impossible private record
    for iset in enumerate_infosets(spec, 1, 0):
        got = conditional_from_joint(spec, joint, iset)
        assert (got is UNREACHABLE) == (sum(
            p for (xs, ys, us), p in joint.probs.items() if ys[0][0] == iset.private.own_obs[0]
        ) == 0.0)


# ---------------------------------------------------------------------------
# recursion vs oracle (spot checks; the full grid runs in acceptance)


@pytest.mark.parametrize("delay", [1, 2])
def test_private_recursion_matches_oracle(delay):
    spec = grid_spec(7, delay)
    profile = StrategyProfile.random(spec, 3)
    for t in range(1, 4):
        joint = joint_distribution(spec, profile, t)
        for k in range(2):
            oracle = private_conditionals(spec, joint, k)
            chained, _tr, _is = _forward_belief_pass(spec, k, profile, free_own=False)
            assert set(chained[t - 1]) == set(oracle)
            for code, (belief, mass) in chained[t - 1].items():
                np.testing.assert_allclose(belief.probs, oracle[code][0].probs, atol=1e-9)
                assert abs(mass - oracle[code][1]) < 1e-9


@pytest.mark.parametrize("delay", [1, 2])
def test_central_recursions_match_oracle(delay):
    spec = grid_spec(4, delay)
    profile = StrategyProfile.random(spec, 9)
    pis = pi_chain(spec)
    thetas = theta_chain(spec, profile)
    for t in range(1, 4):
        joint = joint_distribution(spec, profile, t)
        _masses, oracle_pis, oracle_thetas = common_conditionals(spec, joint)
        for cidx, vec in oracle_pis.items():
            np.testing.assert_allclose(pis[t][cidx], vec, atol=1e-9)
        for cidx, vec in oracle_thetas.items():
            np.testing.assert_allclose(thetas[t][cidx].probs, vec, atol=1e-9)


def test_uniform_kernels_give_uniform_beliefs():
    spec = uniform_spec()
    profile = StrategyProfile.random(spec, 1)
    beliefs, _tr, _is = _forward_belief_pass(spec, 0, profile, free_own=True)
    for t in range(1, 4):
        width = xi_size(spec, t, 0)
        for _code, (belief, _mass) in beliefs[t - 1].items():
            np.testing.assert_allclose(belief.probs, np.full(width, 1.0 / width), atol=1e-9)


def test_noiseless_beliefs_are_point_masses():
    spec = noiseless_spec()
    profile = StrategyProfile.zeros(spec)
    for k in range(2):
        beliefs, _tr, _is = _forward_belief_pass(spec, k, profile, free_own=True)
        for per_t in beliefs:
            for _code, (belief, _mass) in per_t.items():
                assert abs(belief.probs.max() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# strategy independence and conditional Markov structure


def test_xi_independent_of_own_strategy():
    spec = grid_spec(3, 1)
    base = StrategyProfile.random(spec, 21)
    for alt_seed in range(3):
        alt = base.with_controller(0, StrategyProfile.random(spec, 50 + alt_seed).controller_rows(0))
        for t in range(1, 4):
            ja = joint_distribution(spec, base, t)
            jb = joint_distribution(spec, alt, t)
            ba = private_conditionals(spec, ja, 0)
            bb = private_conditionals(spec, jb, 0)
            for code in set(ba) & set(bb):
                np.testing.assert_allclose(
                    ba[code][0].probs, bb[code][0].probs, atol=1e-12
                )


def test_pi_is_a_function_of_numeric_arguments():
    spec = grid_spec(6, 1)
    pi = pi_init(spec, (1, 0))
    a = pi_update(spec, pi, (0, 1), (1, 0))
    b = pi_update(spec, pi, (0, 1), (1, 0))
    np.testing.assert_array_equal(a.probs, b.probs)


def test_conditional_markov_same_belief_same_successors():
    spec = uniform_spec()
    profile = StrategyProfile.zeros(spec)
    beliefs, transitions, isets = _forward_belief_pass(spec, 0, profile, free_own=True)
    # group epoch-2 info sets by (belief, common history); uniform kernels
    # guarantee nontrivial groups
    groups = {}
    for code, (belief, _mass) in beliefs[1].items():
        cidx = code // 2
        groups.setdefault((belief_key(belief.probs), cidx), []).append(code)
    assert any(len(v) > 1 for v in groups.values())
    for members in groups.values():
        for u in range(2):
            successor_beliefs = []
            for code in members:
                succ = sorted(
                    (beliefs[2][scode][0].probs.tolist(), p)
                    for scode, p in transitions[1][code][u]
                )
                successor_beliefs.append(succ)
            for other in successor_beliefs[1:]:
                for (pa, wa), (pb, wb) in zip(successor_beliefs[0], other):
                    np.testing.assert_allclose(pa, pb, atol=1e-12)
                    assert abs(wa - wb) < 1e-12


# ---------------------------------------------------------------------------
# exports


def test_belief_exports():
    spec = grid_spec(1, 1)
    b = private_belief_init(spec, 0, 0)
    text = belief_to_csv(b.probs)
    lines = text.strip().splitlines()
    assert lines[0] == "index,probability"
    assert len(lines) == 1 + b.probs.size
    decoded = json.loads(belief_to_json(b.probs))
    np.testing.assert_allclose(decoded, b.probs, atol=0)
