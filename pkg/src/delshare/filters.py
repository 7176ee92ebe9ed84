"""Exact information states and the brute-force joint-distribution oracle.

Three conditional distributions are maintained:

- ``Xi`` (private): law of (current state, other controllers' private
  histories) given one controller's full information set; updated by a
  Bayes recursion driven by the controller's own new data and the newly
  shared history components.
- ``Pi`` (centralized, strategy-independent): law of the T-lagged state given
  the common history; a plain predict/correct filter on lagged data.
- ``Theta`` (centralized, strategy-dependent): law of (current state, all
  private histories) given the common history.

Every recursion has an independent oracle: :func:`joint_distribution`
enumerates all trajectory prefixes by forward chain rule, and conditionals
are obtained by direct aggregation.  Conditionals on probability-zero events
are the explicit :data:`UNREACHABLE` value, never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .info import (
    CommonInfo,
    InfoSet,
    PrivateInfo,
    StrategyProfile,
    common_index,
    common_len,
    infoset_index,
    lambda_shift,
    private_count,
    private_from_index,
    private_index,
)
from .model import ZERO_MASS, ProblemSpec


class Unreachable:
    """Marker for conditionals on probability-zero events."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREACHABLE"


UNREACHABLE = Unreachable()


@dataclass
class PrivateBelief:
    """Normalized law of (X_t, others' private histories) given one info set."""

    t: int
    k: int
    probs: np.ndarray  # flat over (x, lambda^{-k}) in xi_encode order


@dataclass
class CentralBeliefPi:
    """Normalized law of the T-lagged state given the common history; t >= T+1."""

    t: int
    probs: np.ndarray  # over states


@dataclass
class CentralBeliefTheta:
    """Normalized law of (X_t, all private histories) given the common history."""

    t: int
    probs: np.ndarray  # flat over (x, lambda^{(K)})


@dataclass
class JointDistribution:
    """Exact law of trajectory prefixes (x_{1..t}, y_{1..t}, u_{1..t})."""

    t: int
    probs: dict


def belief_to_csv(probs) -> str:
    """Render a belief vector as ``index,probability`` lines."""
    lines = ["index,probability"]
    for i, p in enumerate(np.asarray(probs)):
        lines.append(f"{i},{p!r}")
    return "\n".join(lines) + "\n"


def belief_to_json(probs) -> str:
    """Render a belief vector as a JSON array in canonical index order."""
    import json

    return json.dumps([float(p) for p in np.asarray(probs)])


# ---------------------------------------------------------------------------
# belief vector indexing


def others_of(spec: ProblemSpec, k: int) -> list[int]:
    return [j for j in range(spec.num_controllers) if j != k]


def lambda_sizes(spec: ProblemSpec, t: int, controllers) -> list[int]:
    return [private_count(spec, t, j) for j in controllers]


def block_size(sizes) -> int:
    out = 1
    for s in sizes:
        out *= s
    return out


def block_encode(digits, sizes) -> int:
    idx = 0
    for d, s in zip(digits, sizes):
        idx = idx * s + d
    return idx


def block_decode(index: int, sizes) -> tuple[int, ...]:
    out = []
    for s in reversed(sizes):
        out.append(index % s)
        index //= s
    return tuple(reversed(out))


def xi_size(spec: ProblemSpec, t: int, k: int) -> int:
    return spec.state_size * block_size(lambda_sizes(spec, t, others_of(spec, k)))


def xi_encode(spec: ProblemSpec, t: int, k: int, x: int, lams) -> int:
    sizes = lambda_sizes(spec, t, others_of(spec, k))
    return x * block_size(sizes) + block_encode(lams, sizes)


def theta_size(spec: ProblemSpec, t: int) -> int:
    return spec.state_size * block_size(lambda_sizes(spec, t, range(spec.num_controllers)))


# ---------------------------------------------------------------------------
# private recursion


def private_belief_init(spec: ProblemSpec, k: int, y1: int):
    """Law of (X_1, others' first observations) given controller k's first
    observation; :data:`UNREACHABLE` if that observation has probability zero."""
    others = others_of(spec, k)
    sizes = lambda_sizes(spec, 1, others)
    out = np.zeros((spec.state_size, block_size(sizes)))
    own = spec.initial_obs_kernel[k][:, y1] * spec.initial_dist
    for combo in product(*[range(spec.obs_sizes[j]) for j in others]):
        w = own.copy()
        for j, yj in zip(others, combo):
            w = w * spec.initial_obs_kernel[j][:, yj]
        out[:, block_encode(combo, sizes)] = w
    mass = out.sum()
    if mass < ZERO_MASS:
        return UNREACHABLE
    return PrivateBelief(t=1, k=k, probs=(out / mass).reshape(-1))


def private_belief_update(
    spec: ProblemSpec,
    belief: PrivateBelief,
    y_next: int,
    u_own: int,
    others_act,
    shared_obs: tuple[int, ...] | None = None,
    shared_actions: tuple[int, ...] | None = None,
):
    """One Bayes step of the private information state.

    ``others_act(j, lambda_index) -> action`` is the other controllers'
    decision slice at the current common history.  When the common component
    grows (``t >= T``) the newly shared joint observation/action of epoch
    ``t - T + 1`` must be supplied; the update conditions on them.
    Returns the belief at ``t+1`` or :data:`UNREACHABLE`.
    """
    vec, mass = _private_update_raw(
        spec, belief, y_next, u_own, others_act, shared_obs, shared_actions
    )
    if mass < ZERO_MASS:
        return UNREACHABLE
    return PrivateBelief(t=belief.t + 1, k=belief.k, probs=vec / mass)


def _private_update_raw(spec, belief, y_next, u_own, others_act, shared_obs, shared_actions):
    """Unnormalized update; returns (vector, mass).  The mass is the
    conditional probability of the new data given the current info set."""
    t, k = belief.t, belief.k
    big_t = spec.delay
    appending = t >= big_t
    others = others_of(spec, k)
    sizes_t = lambda_sizes(spec, t, others)
    sizes_next = lambda_sizes(spec, t + 1, others)
    nx = spec.state_size
    cur = belief.probs.reshape(nx, block_size(sizes_t))
    out = np.zeros((nx, block_size(sizes_next)))

    decoded = {
        j: [private_from_index(spec, t, j, i) for i in range(private_count(spec, t, j))]
        for j in others
    }
    obs_ranges = [range(spec.obs_sizes[j]) for j in others]

    for col in range(cur.shape[1]):
        xi_col = cur[:, col]
        if not xi_col.any():
            continue
        lam = block_decode(col, sizes_t)
        if appending:
            skip = False
            for j, lj in zip(others, lam):
                priv = decoded[j][lj]
                if priv.own_obs[0] != shared_obs[j]:
                    skip = True
                    break
                if big_t >= 2 and priv.own_actions[0] != shared_actions[j]:
                    skip = True
                    break
            if skip:
                continue
        u_other = [others_act(j, lj) for j, lj in zip(others, lam)]
        if appending and big_t == 1:
            if any(u != shared_actions[j] for j, u in zip(others, u_other)):
                continue
        joint = [0] * spec.num_controllers
        joint[k] = u_own
        for j, u in zip(others, u_other):
            joint[j] = u
        ujoint = spec.joint_action_index(joint)

        # predict, then correct with own observation (vector over x_{t+1})
        base = xi_col @ spec.transition_matrix(t, ujoint)
        base = base * spec.obs_matrix(k, t + 1, ujoint)[:, y_next]
        if not base.any():
            continue
        for combo in product(*obs_ranges):
            w = base
            for j, yj in zip(others, combo):
                w = w * spec.obs_matrix(j, t + 1, ujoint)[:, yj]
            new_lam = tuple(
                lambda_shift(spec, t, j, lj, yj, u)
                for j, lj, u, yj in zip(others, lam, u_other, combo)
            )
            out[:, block_encode(new_lam, sizes_next)] += w
    return out.reshape(-1), out.sum()


# ---------------------------------------------------------------------------
# centralized recursions


def pi_init(spec: ProblemSpec, y1: tuple[int, ...]):
    """Law of X_1 given the first joint observation; the chain starts at t = T+1."""
    p = spec.initial_dist.copy()
    for k in range(spec.num_controllers):
        p = p * spec.initial_obs_kernel[k][:, y1[k]]
    mass = p.sum()
    if mass < ZERO_MASS:
        return UNREACHABLE
    return CentralBeliefPi(t=spec.delay + 1, probs=p / mass)


def pi_update(
    spec: ProblemSpec,
    pi: CentralBeliefPi,
    shared_obs: tuple[int, ...],
    shared_actions: tuple[int, ...],
):
    """Predict with the lagged transition at the shared joint action, correct
    with all K observation kernels at the shared joint observation, normalize.
    Depends on the shared data only, never on strategy maps."""
    lag = pi.t - spec.delay  # time index of the state currently tracked
    ujoint = spec.joint_action_index(shared_actions)
    p = pi.probs @ spec.transition_matrix(lag, ujoint)
    for k in range(spec.num_controllers):
        p = p * spec.obs_matrix(k, lag + 1, ujoint)[:, shared_obs[k]]
    mass = p.sum()
    if mass < ZERO_MASS:
        return UNREACHABLE
    return CentralBeliefPi(t=pi.t + 1, probs=p / mass)


def theta_init(spec: ProblemSpec) -> CentralBeliefTheta:
    """Unconditional law of (X_1, all first observations)."""
    ks = list(range(spec.num_controllers))
    sizes = lambda_sizes(spec, 1, ks)
    out = np.zeros((spec.state_size, block_size(sizes)))
    for combo in product(*[range(spec.obs_sizes[k]) for k in ks]):
        w = spec.initial_dist.copy()
        for k, yk in zip(ks, combo):
            w = w * spec.initial_obs_kernel[k][:, yk]
        out[:, block_encode(combo, sizes)] = w
    return CentralBeliefTheta(t=1, probs=out.reshape(-1) / out.sum())


def theta_update(
    spec: ProblemSpec,
    theta: CentralBeliefTheta,
    acts,
    shared_obs: tuple[int, ...] | None = None,
    shared_actions: tuple[int, ...] | None = None,
):
    """One step of the strategy-dependent centralized information state.

    ``acts(k, lambda_index) -> action`` is the full decision slice at the
    current common history; when the common component grows the newly shared
    components must be supplied and are conditioned on.
    """
    t = theta.t
    big_t = spec.delay
    appending = t >= big_t
    ks = list(range(spec.num_controllers))
    sizes_t = lambda_sizes(spec, t, ks)
    sizes_next = lambda_sizes(spec, t + 1, ks)
    nx = spec.state_size
    cur = theta.probs.reshape(nx, block_size(sizes_t))
    out = np.zeros((nx, block_size(sizes_next)))

    decoded = {
        k: [private_from_index(spec, t, k, i) for i in range(private_count(spec, t, k))]
        for k in ks
    }
    obs_ranges = [range(spec.obs_sizes[k]) for k in ks]

    for col in range(cur.shape[1]):
        th_col = cur[:, col]
        if not th_col.any():
            continue
        lam = block_decode(col, sizes_t)
        if appending:
            skip = False
            for k, lk in zip(ks, lam):
                priv = decoded[k][lk]
                if priv.own_obs[0] != shared_obs[k]:
                    skip = True
                    break
                if big_t >= 2 and priv.own_actions[0] != shared_actions[k]:
                    skip = True
                    break
            if skip:
                continue
        u = [acts(k, lk) for k, lk in zip(ks, lam)]
        if appending and big_t == 1 and any(uk != shared_actions[k] for k, uk in zip(ks, u)):
            continue
        ujoint = spec.joint_action_index(u)
        base = th_col @ spec.transition_matrix(t, ujoint)
        if not base.any():
            continue
        for combo in product(*obs_ranges):
            w = base
            for k, yk in zip(ks, combo):
                w = w * spec.obs_matrix(k, t + 1, ujoint)[:, yk]
            new_lam = tuple(
                lambda_shift(spec, t, k, lk, yk, uk)
                for k, lk, uk, yk in zip(ks, lam, u, combo)
            )
            out[:, block_encode(new_lam, sizes_next)] += w
    mass = out.sum()
    if mass < ZERO_MASS:
        return UNREACHABLE
    return CentralBeliefTheta(t=t + 1, probs=out.reshape(-1) / mass)


# ---------------------------------------------------------------------------
# trajectory oracle


def trajectory_infoset(spec: ProblemSpec, ys, us, t: int, k: int) -> InfoSet:
    """Extract controller k's info set at epoch ``t`` from a trajectory prefix."""
    m = common_len(spec, t)
    common = CommonInfo(t=t, joint_obs=tuple(ys[:m]), joint_actions=tuple(us[:m]))
    first = max(t - spec.delay + 1, 1)
    own_obs = tuple(ys[e - 1][k] for e in range(first, t + 1))
    own_acts = tuple(us[e - 1][k] for e in range(first, t))
    return InfoSet(common=common, private=PrivateInfo(t=t, k=k, own_obs=own_obs, own_actions=own_acts))


def trajectory_lambda_index(spec: ProblemSpec, ys, us, t: int, j: int) -> int:
    first = max(t - spec.delay + 1, 1)
    priv = PrivateInfo(
        t=t,
        k=j,
        own_obs=tuple(ys[e - 1][j] for e in range(first, t + 1)),
        own_actions=tuple(us[e - 1][j] for e in range(first, t)),
    )
    return private_index(spec, priv)


def forward_trajectories(spec: ProblemSpec, profile: StrategyProfile, t_end: int, free: int | None = None):
    """All positive-probability trajectory prefixes up to epoch ``t_end``.

    With ``free=k``, controller k's actions branch over its whole action space
    instead of following the profile (the resulting weights are the exact
    probabilities of the forced-action histories).  Returns a dict mapping
    ``(xs, ys, us)`` tuples to probabilities.
    """
    partials = []
    obs_ranges = [range(s) for s in spec.obs_sizes]
    for x1 in range(spec.state_size):
        p0 = spec.initial_dist[x1]
        if p0 <= 0.0:
            continue
        for y1 in product(*obs_ranges):
            p1 = p0
            for k, yk in enumerate(y1):
                p1 *= spec.initial_obs_kernel[k][x1, yk]
            if p1 > 0.0:
                partials.append(((x1,), (y1,), (), p1))

    for t in range(1, t_end + 1):
        extended = []
        for xs, ys, us, p in partials:
            base = [
                None if k == free else profile.action(t, k, infoset_index(spec, trajectory_infoset(spec, ys, us, t, k)))
                for k in range(spec.num_controllers)
            ]
            free_choices = range(spec.action_sizes[free]) if free is not None else [None]
            for uf in free_choices:
                u_t = tuple(uf if k == free else base[k] for k in range(spec.num_controllers))
                new_us = us + (u_t,)
                if t == t_end:
                    extended.append((xs, ys, new_us, p))
                    continue
                ujoint = spec.joint_action_index(u_t)
                trow = spec.transition_matrix(t, ujoint)[xs[-1]]
                for x2 in range(spec.state_size):
                    p2 = p * trow[x2]
                    if p2 <= 0.0:
                        continue
                    for y2 in product(*obs_ranges):
                        p3 = p2
                        for k, yk in enumerate(y2):
                            p3 *= spec.obs_matrix(k, t + 1, ujoint)[x2, yk]
                        if p3 > 0.0:
                            extended.append((xs + (x2,), ys + (y2,), new_us, p3))
        partials = extended
    return {(xs, ys, us): p for xs, ys, us, p in partials}


def joint_distribution(spec: ProblemSpec, profile: StrategyProfile, t: int) -> JointDistribution:
    """Exact law of trajectory prefixes under the given strategy tuple."""
    return JointDistribution(t=t, probs=forward_trajectories(spec, profile, t))


def conditional_from_joint(spec: ProblemSpec, joint: JointDistribution, iset: InfoSet):
    """Bayes conditional of (X_t, others' private histories) given one info
    set, by direct aggregation over the joint distribution."""
    beliefs = private_conditionals(spec, joint, iset.k)
    got = beliefs.get(infoset_index(spec, iset))
    if got is None:
        return UNREACHABLE
    return got[0]


def private_conditionals(spec: ProblemSpec, joint: JointDistribution, k: int):
    """All conditionals of (X_t, lambda^{-k}) given reachable info sets of
    controller ``k``; maps info set code to (PrivateBelief, probability)."""
    t = joint.t
    others = others_of(spec, k)
    sizes = lambda_sizes(spec, t, others)
    width = block_size(sizes)
    acc: dict[int, np.ndarray] = {}
    for (xs, ys, us), p in joint.probs.items():
        idx = infoset_index(spec, trajectory_infoset(spec, ys, us, t, k))
        lams = [trajectory_lambda_index(spec, ys, us, t, j) for j in others]
        pos = xs[t - 1] * width + block_encode(lams, sizes)
        vec = acc.get(idx)
        if vec is None:
            vec = np.zeros(spec.state_size * width)
            acc[idx] = vec
        vec[pos] += p
    out = {}
    for idx, vec in acc.items():
        mass = vec.sum()
        if mass >= ZERO_MASS:
            out[idx] = (PrivateBelief(t=t, k=k, probs=vec / mass), mass)
    return out


def common_conditionals(spec: ProblemSpec, joint: JointDistribution):
    """Oracle conditionals given reachable common histories at ``joint.t``.

    Returns ``(masses, pis, thetas)`` keyed by common-history code: the
    probability of the common history, the conditional law of the lagged
    state (empty dict when ``t <= T``), and the conditional law of
    (X_t, all private histories).
    """
    t = joint.t
    ks = list(range(spec.num_controllers))
    sizes = lambda_sizes(spec, t, ks)
    width = block_size(sizes)
    lag = t - spec.delay
    pi_acc: dict[int, np.ndarray] = {}
    th_acc: dict[int, np.ndarray] = {}
    for (xs, ys, us), p in joint.probs.items():
        m = common_len(spec, t)
        cidx = common_index(
            spec, CommonInfo(t=t, joint_obs=tuple(ys[:m]), joint_actions=tuple(us[:m]))
        )
        if lag >= 1:
            vec = pi_acc.setdefault(cidx, np.zeros(spec.state_size))
            vec[xs[lag - 1]] += p
        lams = [trajectory_lambda_index(spec, ys, us, t, j) for j in ks]
        vec = th_acc.setdefault(cidx, np.zeros(spec.state_size * width))
        vec[xs[t - 1] * width + block_encode(lams, sizes)] += p
    masses = {cidx: float(vec.sum()) for cidx, vec in th_acc.items()}
    pis = {
        cidx: vec / vec.sum() for cidx, vec in pi_acc.items() if vec.sum() >= ZERO_MASS
    }
    thetas = {
        cidx: vec / vec.sum() for cidx, vec in th_acc.items() if vec.sum() >= ZERO_MASS
    }
    return masses, pis, thetas
