"""Independent reference implementations used only by the tests.

These are written from the problem definitions directly, on purpose not
sharing enumeration or filtering code with the library: a recursive
expected-cost evaluator and a classical single-controller belief-tree value
iteration.
"""

import numpy as np

from delshare import ProblemSpec, StrategyProfile
from delshare.info import CommonInfo, InfoSet, PrivateInfo, infoset_index


def _history_infoset(spec: ProblemSpec, ys, us, t: int, k: int) -> InfoSet:
    shared = max(t - spec.delay, 0)
    first = max(t - spec.delay + 1, 1)
    return InfoSet(
        common=CommonInfo(t=t, joint_obs=tuple(ys[:shared]), joint_actions=tuple(us[:shared])),
        private=PrivateInfo(
            t=t,
            k=k,
            own_obs=tuple(ys[e][k] for e in range(first - 1, t)),
            own_actions=tuple(us[e][k] for e in range(first - 1, t - 1)),
        ),
    )


def enumerate_cost(spec: ProblemSpec, profile: StrategyProfile) -> float:
    """Expected total cost by direct recursion over (state, history) pairs."""
    total = 0.0

    def step(t, x, ys, us, p):
        nonlocal total
        u = tuple(
            profile.action(t, k, infoset_index(spec, _history_infoset(spec, ys, us, t, k)))
            for k in range(spec.num_controllers)
        )
        joint = spec.joint_action_index(u)
        total += p * spec.stage_cost[t - 1, x, joint]
        if t == spec.horizon:
            return
        for x2 in range(spec.state_size):
            q = p * spec.transition_kernels[t - 1, x, joint, x2]
            if q <= 0.0:
                continue
            obs_probs = [spec.obs_kernels[k][t - 1, x2, joint, :] for k in range(spec.num_controllers)]
            _branch_obs(t, x2, ys, us + (u,), q, obs_probs, ())

    def _branch_obs(t, x2, ys, us, q, obs_probs, chosen):
        k = len(chosen)
        if k == spec.num_controllers:
            step(t + 1, x2, ys + (chosen,), us, q)
            return
        for y, py in enumerate(obs_probs[k]):
            if q * py > 0.0:
                _branch_obs(t, x2, ys, us, q * py, obs_probs, chosen + (y,))

    for x in range(spec.state_size):
        p0 = spec.initial_dist[x]
        if p0 <= 0.0:
            continue
        first_obs = [spec.initial_obs_kernel[k][x, :] for k in range(spec.num_controllers)]

        def seed_obs(x, p, chosen):
            k = len(chosen)
            if k == spec.num_controllers:
                step(1, x, (chosen,), (), p)
                return
            for y, py in enumerate(first_obs[k]):
                if p * py > 0.0:
                    seed_obs(x, p * py, chosen + (y,))

        seed_obs(x, p0, ())
    return total


def pomdp_value(spec: ProblemSpec) -> float:
    """Classical finite-horizon belief-tree value iteration; K must be 1."""
    assert spec.num_controllers == 1
    n = spec.horizon

    def value(t, b):
        best = np.inf
        for u in range(spec.action_sizes[0]):
            v = float(b @ spec.stage_cost[t - 1, :, u])
            if t < n:
                pred = b @ spec.transition_kernels[t - 1, :, u, :]
                for y in range(spec.obs_sizes[0]):
                    w = pred * spec.obs_kernels[0][t - 1, :, u, y]
                    mass = w.sum()
                    if mass > 1e-14:
                        v += mass * value(t + 1, w / mass)
            best = min(best, v)
        return best

    total = 0.0
    for y1 in range(spec.obs_sizes[0]):
        w = spec.initial_dist * spec.initial_obs_kernel[0][:, y1]
        mass = w.sum()
        if mass > 1e-14:
            total += mass * value(1, w / mass)
    return total
