"""Instance construction, validation, serialization, and hashing."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delshare import (
    ValidationError,
    load_problem,
    make_problem,
    problem_from_dict,
    problem_hash,
    problem_to_dict,
    random_problem,
    save_problem,
    validate_problem,
)


def base_kwargs():
    return dict(
        horizon=2,
        num_controllers=2,
        delay=1,
        state_size=2,
        obs_sizes=(2, 2),
        action_sizes=(2, 2),
        initial_dist=[0.5, 0.5],
        initial_obs_kernel=[[[0.5, 0.5], [0.5, 0.5]]] * 2,
        obs_kernels=[np.full((1, 2, 4, 2), 0.5)] * 2,
        transition_kernels=np.full((1, 2, 4, 2), 0.5),
        stage_cost=np.zeros((2, 2, 4)),
    )


def test_valid_instance_passes():
    spec = make_problem(**base_kwargs())
    assert validate_problem(spec) is spec


@pytest.mark.parametrize(
    "mutation,message",
    [
        ({"delay": 3}, "delay"),
        ({"initial_dist": [0.6, 0.6]}, "initial_dist"),
        ({"stage_cost": np.full((2, 2, 4), np.nan)}, "stage_cost"),
        ({"obs_sizes": (2,)}, "obs_sizes"),
    ],
)
def test_validation_names_violation(mutation, message):
    kwargs = {**base_kwargs(), **mutation}
    with pytest.raises(ValidationError, match=message):
        make_problem(**kwargs)


def test_bad_row_sum_rejected():
    kwargs = base_kwargs()
    kernels = np.full((1, 2, 4, 2), 0.5)
    kernels[0, 0, 0, 0] = 0.6
    kwargs["transition_kernels"] = kernels
    with pytest.raises(ValidationError, match="row sum"):
        make_problem(**kwargs)


def test_joint_action_roundtrip():
    spec = random_problem(
        0, horizon=2, num_controllers=3, delay=1, state_size=2,
        obs_sizes=(2, 2, 2), action_sizes=(2, 3, 2),
    )
    for idx in range(spec.joint_action_count):
        assert spec.joint_action_index(spec.joint_action_tuple(idx)) == idx
    # controller 0 most significant
    assert spec.joint_action_index((1, 0, 0)) == 6


def test_random_problem_deterministic():
    a = random_problem(5, horizon=3, num_controllers=2, delay=2, state_size=2,
                       obs_sizes=(2, 2), action_sizes=(2, 2))
    b = random_problem(5, horizon=3, num_controllers=2, delay=2, state_size=2,
                       obs_sizes=(2, 2), action_sizes=(2, 2))
    assert problem_hash(a) == problem_hash(b)
    c = random_problem(6, horizon=3, num_controllers=2, delay=2, state_size=2,
                       obs_sizes=(2, 2), action_sizes=(2, 2))
    assert problem_hash(a) != problem_hash(c)


def test_json_roundtrip(tmp_path):
    spec = random_problem(3, horizon=3, num_controllers=2, delay=1, state_size=2,
                          obs_sizes=(2, 2), action_sizes=(2, 2))
    path = tmp_path / "p.json"
    save_problem(spec, path)
    again = load_problem(path)
    assert problem_hash(spec) == problem_hash(again)


def test_horizon_one_roundtrip(tmp_path):
    spec = random_problem(1, horizon=1, num_controllers=1, delay=1, state_size=2,
                          obs_sizes=(2,), action_sizes=(2,))
    path = tmp_path / "p.json"
    save_problem(spec, path)
    assert problem_hash(load_problem(path)) == problem_hash(spec)


def test_missing_key_rejected():
    data = problem_to_dict(make_problem(**base_kwargs()))
    del data["stage_cost"]
    with pytest.raises(ValidationError, match="stage_cost"):
        problem_from_dict(data)


def test_hash_is_canonical():
    spec = make_problem(**base_kwargs())
    blob = json.dumps(problem_to_dict(spec), sort_keys=True, separators=(",", ":"))
    import hashlib

    assert problem_hash(spec) == hashlib.sha256(blob.encode()).hexdigest()


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    horizon=st.integers(1, 4),
    controllers=st.integers(1, 2),
    state_size=st.integers(1, 3),
)
def test_random_problems_always_validate(seed, horizon, controllers, state_size):
    delay = 1 + seed % horizon
    spec = random_problem(
        seed,
        horizon=horizon,
        num_controllers=controllers,
        delay=delay,
        state_size=state_size,
        obs_sizes=(2,) * controllers,
        action_sizes=(2,) * controllers,
    )
    assert validate_problem(spec) is spec
