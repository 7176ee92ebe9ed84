"""Information patterns: common and private history components.

With delay ``T``, controller ``k`` at epoch ``t`` acts on

- the common component: all joint observations and joint actions up to epoch
  ``t - T`` (empty while ``t <= T``), and
- its private component: its own observations on the window ``t-T+1..t`` and
  its own actions on ``t-T+1..t-1`` (windows truncated at the start of time).

Every history object has a dense canonical index obtained by mixed-radix
encoding of its components in field order (first component most significant),
so enumeration order and lexicographic order coincide.  Strategy tables are
flat arrays indexed by these codes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import InconsistentHistory, ValidationError
from .model import ProblemSpec


def _mixed_encode(digits, radices) -> int:
    idx = 0
    for d, r in zip(digits, radices):
        idx = idx * r + d
    return idx


def _mixed_decode(index: int, radices) -> tuple[int, ...]:
    out = []
    for r in reversed(radices):
        out.append(index % r)
        index //= r
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class CommonInfo:
    """Shared history: joint observations and actions for epochs ``1..t-T``."""

    t: int
    joint_obs: tuple[tuple[int, ...], ...]
    joint_actions: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class PrivateInfo:
    """Controller ``k``'s recent own observations and actions not yet shared."""

    t: int
    k: int
    own_obs: tuple[int, ...]
    own_actions: tuple[int, ...]


@dataclass(frozen=True)
class InfoSet:
    common: CommonInfo
    private: PrivateInfo

    @property
    def t(self) -> int:
        return self.common.t

    @property
    def k(self) -> int:
        return self.private.k


# ---------------------------------------------------------------------------
# counting and canonical codes


def common_len(spec: ProblemSpec, t: int) -> int:
    return max(t - spec.delay, 0)


def _common_radices(spec: ProblemSpec, t: int) -> list[int]:
    m = common_len(spec, t)
    return list(spec.obs_sizes) * m + list(spec.action_sizes) * m


def common_count(spec: ProblemSpec, t: int) -> int:
    c = 1
    for r in _common_radices(spec, t):
        c *= r
    return c


def common_index(spec: ProblemSpec, common: CommonInfo) -> int:
    digits = [y for ys in common.joint_obs for y in ys]
    digits += [u for us in common.joint_actions for u in us]
    return _mixed_encode(digits, _common_radices(spec, common.t))


def common_from_index(spec: ProblemSpec, t: int, index: int) -> CommonInfo:
    m = common_len(spec, t)
    big_k = spec.num_controllers
    digits = _mixed_decode(index, _common_radices(spec, t))
    obs = tuple(tuple(digits[e * big_k : (e + 1) * big_k]) for e in range(m))
    rest = digits[m * big_k :]
    acts = tuple(tuple(rest[e * big_k : (e + 1) * big_k]) for e in range(m))
    return CommonInfo(t=t, joint_obs=obs, joint_actions=acts)


def enumerate_common(spec: ProblemSpec, t: int) -> list[CommonInfo]:
    """All common histories at epoch ``t`` in canonical (lexicographic) order."""
    return [common_from_index(spec, t, i) for i in range(common_count(spec, t))]


def private_obs_len(spec: ProblemSpec, t: int) -> int:
    return min(spec.delay, t)


def private_act_len(spec: ProblemSpec, t: int) -> int:
    return min(spec.delay - 1, t - 1)


def _private_radices(spec: ProblemSpec, t: int, k: int) -> list[int]:
    return [spec.obs_sizes[k]] * private_obs_len(spec, t) + [
        spec.action_sizes[k]
    ] * private_act_len(spec, t)


def private_count(spec: ProblemSpec, t: int, k: int) -> int:
    c = 1
    for r in _private_radices(spec, t, k):
        c *= r
    return c


def private_index(spec: ProblemSpec, private: PrivateInfo) -> int:
    digits = list(private.own_obs) + list(private.own_actions)
    return _mixed_encode(digits, _private_radices(spec, private.t, private.k))


def private_from_index(spec: ProblemSpec, t: int, k: int, index: int) -> PrivateInfo:
    no = private_obs_len(spec, t)
    digits = _mixed_decode(index, _private_radices(spec, t, k))
    return PrivateInfo(t=t, k=k, own_obs=tuple(digits[:no]), own_actions=tuple(digits[no:]))


def enumerate_private(spec: ProblemSpec, t: int, k: int) -> list[PrivateInfo]:
    """All private histories of controller ``k`` at epoch ``t``, canonical order."""
    return [private_from_index(spec, t, k, i) for i in range(private_count(spec, t, k))]


def infoset_count(spec: ProblemSpec, t: int, k: int) -> int:
    return common_count(spec, t) * private_count(spec, t, k)


def infoset_index(spec: ProblemSpec, iset: InfoSet) -> int:
    pc = private_count(spec, iset.t, iset.k)
    return common_index(spec, iset.common) * pc + private_index(spec, iset.private)


def infoset_from_index(spec: ProblemSpec, t: int, k: int, index: int) -> InfoSet:
    pc = private_count(spec, t, k)
    return InfoSet(
        common=common_from_index(spec, t, index // pc),
        private=private_from_index(spec, t, k, index % pc),
    )


def enumerate_infosets(spec: ProblemSpec, t: int, k: int) -> list[InfoSet]:
    return [infoset_from_index(spec, t, k, i) for i in range(infoset_count(spec, t, k))]


# ---------------------------------------------------------------------------
# successor structure


def successor_infoset(
    spec: ProblemSpec,
    iset: InfoSet,
    y_next: int,
    u_own: int,
    shared_obs: tuple[int, ...] | None = None,
    shared_actions: tuple[int, ...] | None = None,
) -> InfoSet:
    """The info set at ``t+1`` reached from ``iset`` with new own data and,
    when the common component grows (``t >= T``), the newly shared joint
    observation and joint action of epoch ``t - T + 1``.

    The own components of ``shared_obs``/``shared_actions`` must agree with
    what ``iset`` already records; otherwise :class:`InconsistentHistory`.
    """
    t, k, big_t = iset.t, iset.k, spec.delay
    if t + 1 > spec.horizon:
        raise ValueError("successor beyond the horizon")

    if t >= big_t:
        if shared_obs is None or shared_actions is None:
            raise ValueError("common component grows at this epoch; shared data required")
        # own components of the newly shared epoch s = t - T + 1
        y_s_own = iset.private.own_obs[0]
        u_s_own = u_own if big_t == 1 else iset.private.own_actions[0]
        if shared_obs[k] != y_s_own or shared_actions[k] != u_s_own:
            raise InconsistentHistory(
                f"shared epoch {t - big_t + 1} disagrees with recorded own history"
            )
        common = CommonInfo(
            t=t + 1,
            joint_obs=iset.common.joint_obs + (tuple(shared_obs),),
            joint_actions=iset.common.joint_actions + (tuple(shared_actions),),
        )
    else:
        if shared_obs is not None or shared_actions is not None:
            raise ValueError("common component does not grow while t < T")
        common = CommonInfo(t=t + 1, joint_obs=(), joint_actions=())

    obs = iset.private.own_obs + (y_next,)
    acts = iset.private.own_actions + (u_own,)
    obs = obs[len(obs) - private_obs_len(spec, t + 1) :]
    acts = acts[len(acts) - private_act_len(spec, t + 1) :] if private_act_len(spec, t + 1) else ()
    return InfoSet(common=common, private=PrivateInfo(t=t + 1, k=k, own_obs=obs, own_actions=acts))


def predecessor_infoset(spec: ProblemSpec, iset: InfoSet) -> tuple[InfoSet, int]:
    """Invert :func:`successor_infoset`: the unique parent and the own action
    ``u_{t-1}^k`` that leads from it to ``iset``."""
    t, k, big_t = iset.t, iset.k, spec.delay
    if t < 2:
        raise ValueError("epoch 1 info sets have no predecessor")

    dropped_obs = dropped_act = None
    if common_len(spec, t) > common_len(spec, t - 1):
        dropped_obs = iset.common.joint_obs[-1]
        dropped_act = iset.common.joint_actions[-1]
        common = CommonInfo(
            t=t - 1,
            joint_obs=iset.common.joint_obs[:-1],
            joint_actions=iset.common.joint_actions[:-1],
        )
    else:
        common = CommonInfo(t=t - 1, joint_obs=iset.common.joint_obs, joint_actions=iset.common.joint_actions)

    obs = iset.private.own_obs[:-1]
    if dropped_obs is not None:
        obs = (dropped_obs[k],) + obs
    if big_t == 1:
        u_prev = dropped_act[k]
        acts: tuple[int, ...] = ()
    else:
        u_prev = iset.private.own_actions[-1]
        acts = iset.private.own_actions[:-1]
        if dropped_act is not None:
            acts = (dropped_act[k],) + acts
    parent = InfoSet(common=common, private=PrivateInfo(t=t - 1, k=k, own_obs=obs, own_actions=acts))
    assert len(parent.private.own_obs) == private_obs_len(spec, t - 1)
    assert len(parent.private.own_actions) == private_act_len(spec, t - 1)
    return parent, u_prev


def other_strategy_args(
    spec: ProblemSpec,
    common: CommonInfo,
    k: int,
    y_s_other: dict[int, int],
) -> dict[int, InfoSet]:
    """Reconstruct, for every ``j != k``, the full argument of controller j's
    decision at epoch ``s = t - T + 1`` from the common history at ``t`` and
    the one free variable ``y_s^j``.

    ``y_s_other`` maps each ``j != k`` to that free observation.
    """
    t, big_t = common.t, spec.delay
    s = t - big_t + 1
    if s < 1:
        raise IndexError(f"epoch {s} before the start of time")

    m_s = common_len(spec, s)
    common_s = CommonInfo(
        t=s, joint_obs=common.joint_obs[:m_s], joint_actions=common.joint_actions[:m_s]
    )
    out: dict[int, InfoSet] = {}
    for j in range(spec.num_controllers):
        if j == k:
            continue
        # private window of j at s: obs for epochs max(s-T+1,1)..s, actions ..s-1
        first_obs = max(s - big_t + 1, 1)
        obs = tuple(common.joint_obs[e - 1][j] for e in range(first_obs, s)) + (y_s_other[j],)
        acts = tuple(common.joint_actions[e - 1][j] for e in range(first_obs, s))
        out[j] = InfoSet(
            common=common_s,
            private=PrivateInfo(t=s, k=j, own_obs=obs, own_actions=acts),
        )
    return out


def lambda_shift(
    spec: ProblemSpec, t: int, j: int, lam_index: int, y_next: int, u_cur: int
) -> int:
    """Index of ``lambda_{t+1}^j`` obtained from ``lambda_t^j`` by appending
    the new observation and action and dropping components that became shared."""
    priv = private_from_index(spec, t, j, lam_index)
    obs = priv.own_obs + (y_next,)
    acts = priv.own_actions + (u_cur,)
    obs = obs[len(obs) - private_obs_len(spec, t + 1) :]
    na = private_act_len(spec, t + 1)
    acts = acts[len(acts) - na :] if na else ()
    return private_index(spec, PrivateInfo(t=t + 1, k=j, own_obs=obs, own_actions=acts))


# ---------------------------------------------------------------------------
# strategies


class StrategyProfile:
    """A full K-tuple of deterministic strategies.

    ``actions[k][t-1]`` is an integer array over all canonical info set codes
    of controller ``k`` at epoch ``t``; entry value is the chosen action.
    """

    def __init__(self, spec: ProblemSpec, actions: list[list[np.ndarray]]):
        self.spec = spec
        self.actions = actions

    @classmethod
    def zeros(cls, spec: ProblemSpec) -> "StrategyProfile":
        return cls(
            spec,
            [
                [np.zeros(infoset_count(spec, t, k), dtype=np.int64) for t in range(1, spec.horizon + 1)]
                for k in range(spec.num_controllers)
            ],
        )

    @classmethod
    def random(cls, spec: ProblemSpec, seed: int) -> "StrategyProfile":
        rng = np.random.default_rng(seed)
        return cls(
            spec,
            [
                [
                    rng.integers(0, spec.action_sizes[k], size=infoset_count(spec, t, k)).astype(np.int64)
                    for t in range(1, spec.horizon + 1)
                ]
                for k in range(spec.num_controllers)
            ],
        )

    def action(self, t: int, k: int, iset_or_index) -> int:
        idx = iset_or_index
        if isinstance(idx, InfoSet):
            idx = infoset_index(self.spec, idx)
        return int(self.actions[k][t - 1][idx])

    def controller_rows(self, k: int) -> list[np.ndarray]:
        return [row.copy() for row in self.actions[k]]

    def with_controller(self, k: int, rows: list[np.ndarray]) -> "StrategyProfile":
        actions = [
            [r.copy() for r in self.actions[j]] if j != k else [np.asarray(r, dtype=np.int64).copy() for r in rows]
            for j in range(self.spec.num_controllers)
        ]
        return StrategyProfile(self.spec, actions)

    def slice_at(self, t: int, common: CommonInfo):
        """Decision slice at a fixed common history: ``(j, lambda_index) -> action``."""
        cidx = common_index(self.spec, common)
        rows = self.actions

        def act(j: int, lam_index: int) -> int:
            return int(rows[j][t - 1][cidx * private_count(self.spec, t, j) + lam_index])

        return act

    def to_dict(self) -> dict:
        return {
            "num_controllers": self.spec.num_controllers,
            "horizon": self.spec.horizon,
            "actions": [[row.tolist() for row in per_k] for per_k in self.actions],
        }

    @classmethod
    def from_dict(cls, spec: ProblemSpec, data: dict) -> "StrategyProfile":
        if data.get("num_controllers") != spec.num_controllers or data.get("horizon") != spec.horizon:
            raise ValidationError("strategy file does not match the problem dimensions")
        actions = []
        for k in range(spec.num_controllers):
            per_k = []
            for t in range(1, spec.horizon + 1):
                row = np.asarray(data["actions"][k][t - 1], dtype=np.int64)
                if row.shape != (infoset_count(spec, t, k),):
                    raise ValidationError(f"strategy row ({t}, {k}) has wrong length")
                if row.size and (row.min() < 0 or row.max() >= spec.action_sizes[k]):
                    raise ValidationError(f"strategy row ({t}, {k}) has out-of-range actions")
                per_k.append(row)
            actions.append(per_k)
        return cls(spec, actions)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, spec: ProblemSpec, path) -> "StrategyProfile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(spec, json.load(fh))

    def equals(self, other: "StrategyProfile") -> bool:
        return all(
            np.array_equal(a, b)
            for pa, pb in zip(self.actions, other.actions)
            for a, b in zip(pa, pb)
        )
