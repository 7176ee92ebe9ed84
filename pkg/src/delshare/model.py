"""Finite decentralized stochastic network instances.

A problem instance describes ``K`` controllers acting on a common finite-state
Markov chain over epochs ``t = 1..n``.  Each controller has its own finite
observation and action space; observations and actions older than the delay
``T`` are common knowledge, the rest is private.  Kernels are stored as dense
stochastic tensors indexed by a flat joint-action code (see
:func:`ProblemSpec.joint_action_index`).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError

#: absolute tolerance for kernel row sums
ROW_SUM_ATOL = 1e-12

#: probability mass below this is treated as exactly zero
ZERO_MASS = 1e-14


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ProblemSpec:
    """A validated-or-not finite decentralized control instance.

    Epochs are 1-based (``t = 1..n``); controllers, states, observations and
    actions are 0-based indices.  Kernel storage:

    - ``initial_obs_kernel[k][x, y]``: law of controller k's first observation.
    - ``obs_kernels[k][t-2, x, a, y]``: law of ``Y_t^k`` given ``X_t`` and the
      previous joint action, for ``t = 2..n``.
    - ``transition_kernels[t-1, x, a, x']``: law of ``X_{t+1}`` given ``X_t``
      and the joint action at ``t``, for ``t = 1..n-1``.
    - ``stage_cost[t-1, x, a]``: per-epoch cost for ``t = 1..n``.
    """

    horizon: int
    num_controllers: int
    delay: int
    state_size: int
    obs_sizes: tuple[int, ...]
    action_sizes: tuple[int, ...]
    initial_dist: np.ndarray
    initial_obs_kernel: tuple[np.ndarray, ...]
    obs_kernels: tuple[np.ndarray, ...]
    transition_kernels: np.ndarray
    stage_cost: np.ndarray

    @property
    def joint_action_count(self) -> int:
        return int(np.prod(self.action_sizes))

    def joint_action_index(self, actions) -> int:
        """Flat code of a joint action tuple; controller 0 is most significant."""
        idx = 0
        for a, size in zip(actions, self.action_sizes):
            idx = idx * size + a
        return idx

    def joint_action_tuple(self, index: int) -> tuple[int, ...]:
        out = []
        for size in reversed(self.action_sizes):
            out.append(index % size)
            index //= size
        return tuple(reversed(out))

    def obs_matrix(self, k: int, t: int, joint_action: int | None = None) -> np.ndarray:
        """Observation kernel of controller ``k`` at epoch ``t`` as an |X| x |Y^k| matrix."""
        if t == 1:
            return self.initial_obs_kernel[k]
        return self.obs_kernels[k][t - 2, :, joint_action, :]

    def transition_matrix(self, t: int, joint_action: int) -> np.ndarray:
        """Transition kernel from epoch ``t`` to ``t+1`` as an |X| x |X| matrix."""
        return self.transition_kernels[t - 1, :, joint_action, :]

    def cost_matrix(self, t: int) -> np.ndarray:
        """Stage cost at epoch ``t`` as an |X| x A matrix."""
        return self.stage_cost[t - 1]


def _check_stochastic(name: str, arr: np.ndarray, axis: int = -1) -> None:
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValidationError(f"{name}: probability outside [0, 1]")
    sums = arr.sum(axis=axis)
    if not np.all(np.abs(sums - 1.0) <= ROW_SUM_ATOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise ValidationError(f"{name}: kernel row sum off by {worst:.3e}")


def validate_problem(spec: ProblemSpec) -> ProblemSpec:
    """Check all structural invariants of ``spec``; returns the spec unchanged.

    Raises :class:`ValidationError` naming the first violated invariant.
    """
    n, big_k = spec.horizon, spec.num_controllers
    if n < 1:
        raise ValidationError("horizon must be >= 1")
    if big_k < 1:
        raise ValidationError("num_controllers must be >= 1")
    if not (1 <= spec.delay <= n):
        raise ValidationError(f"delay {spec.delay} outside [1, {n}]")
    if spec.state_size < 1:
        raise ValidationError("state_size must be >= 1")
    if len(spec.obs_sizes) != big_k or any(s < 1 for s in spec.obs_sizes):
        raise ValidationError("obs_sizes must list one positive size per controller")
    if len(spec.action_sizes) != big_k or any(s < 1 for s in spec.action_sizes):
        raise ValidationError("action_sizes must list one positive size per controller")

    x, a = spec.state_size, spec.joint_action_count
    if spec.initial_dist.shape != (x,):
        raise ValidationError("initial_dist shape mismatch")
    _check_stochastic("initial_dist", spec.initial_dist[None, :])
    for k in range(big_k):
        yk = spec.obs_sizes[k]
        if spec.initial_obs_kernel[k].shape != (x, yk):
            raise ValidationError(f"initial_obs_kernel[{k}] shape mismatch")
        _check_stochastic(f"initial_obs_kernel[{k}]", spec.initial_obs_kernel[k])
        if spec.obs_kernels[k].shape != (max(n - 1, 0), x, a, yk):
            raise ValidationError(f"obs_kernels[{k}] shape mismatch")
        if n > 1:
            _check_stochastic(f"obs_kernels[{k}]", spec.obs_kernels[k])
    if spec.transition_kernels.shape != (max(n - 1, 0), x, a, x):
        raise ValidationError("transition_kernels shape mismatch")
    if n > 1:
        _check_stochastic("transition_kernels", spec.transition_kernels)
    if spec.stage_cost.shape != (n, x, a):
        raise ValidationError("stage_cost shape mismatch")
    if not np.all(np.isfinite(spec.stage_cost)):
        raise ValidationError("stage_cost contains non-finite values")
    return spec


def make_problem(**kwargs) -> ProblemSpec:
    """Build and validate a :class:`ProblemSpec` from raw arrays."""
    kwargs["obs_sizes"] = tuple(int(s) for s in kwargs["obs_sizes"])
    kwargs["action_sizes"] = tuple(int(s) for s in kwargs["action_sizes"])
    kwargs["initial_dist"] = _freeze(np.asarray(kwargs["initial_dist"]))
    kwargs["initial_obs_kernel"] = tuple(
        _freeze(np.asarray(m)) for m in kwargs["initial_obs_kernel"]
    )
    x = int(kwargs["state_size"])
    a = int(np.prod(kwargs["action_sizes"]))
    obs_kernels = [np.asarray(m) for m in kwargs["obs_kernels"]]
    transitions = np.asarray(kwargs["transition_kernels"])
    # horizon-1 instances carry empty kernels; restore their canonical shape,
    # which round-trips through JSON as a bare []
    kwargs["obs_kernels"] = tuple(
        _freeze(m if m.size else np.zeros((0, x, a, y)))
        for m, y in zip(obs_kernels, kwargs["obs_sizes"])
    )
    kwargs["transition_kernels"] = _freeze(
        transitions if transitions.size else np.zeros((0, x, a, x))
    )
    kwargs["stage_cost"] = _freeze(np.asarray(kwargs["stage_cost"]))
    return validate_problem(ProblemSpec(**kwargs))


def random_problem(
    seed: int,
    *,
    horizon: int,
    num_controllers: int,
    delay: int,
    state_size: int,
    obs_sizes,
    action_sizes,
) -> ProblemSpec:
    """Deterministic random instance: normalized uniform kernel rows, costs in [0, 1]."""
    if not (1 <= delay <= horizon):
        raise ValidationError(f"delay {delay} outside [1, {horizon}]")
    if min([state_size, num_controllers, horizon, *obs_sizes, *action_sizes]) < 1:
        raise ValidationError("all sizes must be >= 1")
    if len(obs_sizes) != num_controllers or len(action_sizes) != num_controllers:
        raise ValidationError("need one obs/action size per controller")

    rng = np.random.default_rng(seed)
    x = state_size
    a = int(np.prod(action_sizes))
    n = horizon

    def rows(shape):
        raw = rng.random(shape) + 1e-3  # keep rows bounded away from zero
        return raw / raw.sum(axis=-1, keepdims=True)

    return make_problem(
        horizon=n,
        num_controllers=num_controllers,
        delay=delay,
        state_size=x,
        obs_sizes=obs_sizes,
        action_sizes=action_sizes,
        initial_dist=rows((x,)),
        initial_obs_kernel=[rows((x, y)) for y in obs_sizes],
        obs_kernels=[rows((max(n - 1, 0), x, a, y)) for y in obs_sizes],
        transition_kernels=rows((max(n - 1, 0), x, a, x)),
        stage_cost=rng.random((n, x, a)),
    )


# ---------------------------------------------------------------------------
# JSON problem files


def problem_to_dict(spec: ProblemSpec) -> dict:
    return {
        "horizon": spec.horizon,
        "num_controllers": spec.num_controllers,
        "delay": spec.delay,
        "state_size": spec.state_size,
        "obs_sizes": list(spec.obs_sizes),
        "action_sizes": list(spec.action_sizes),
        "initial_dist": spec.initial_dist.tolist(),
        "initial_obs_kernel": [m.tolist() for m in spec.initial_obs_kernel],
        "obs_kernels": [m.tolist() for m in spec.obs_kernels],
        "transition_kernels": spec.transition_kernels.tolist(),
        "stage_cost": spec.stage_cost.tolist(),
    }


def problem_from_dict(data: dict) -> ProblemSpec:
    required = [
        "horizon", "num_controllers", "delay", "state_size", "obs_sizes",
        "action_sizes", "initial_dist", "initial_obs_kernel", "obs_kernels",
        "transition_kernels", "stage_cost",
    ]
    for key in required:
        if key not in data:
            raise ValidationError(f"problem file missing key {key!r}")
    try:
        return make_problem(**{k: data[k] for k in required})
    except (TypeError, IndexError) as exc:  # malformed nesting
        raise ValidationError(f"malformed problem file: {exc}") from exc


def load_problem(path) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def save_problem(spec: ProblemSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(spec), fh, sort_keys=True)
        fh.write("\n")


def problem_hash(spec: ProblemSpec) -> str:
    """SHA-256 of the canonical JSON encoding; used for report provenance."""
    blob = json.dumps(problem_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
