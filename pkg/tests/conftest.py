"""Shared fixtures: the desk-scale instance grid and cached solve results."""

import pytest

from delshare import StrategyProfile, pbp_solve, random_problem

GRID_SEEDS = tuple(range(1, 11))
GRID_DELAYS = (1, 2)


def make_grid_instance(seed: int, delay: int):
    return random_problem(
        seed,
        horizon=3,
        num_controllers=2,
        delay=delay,
        state_size=2,
        obs_sizes=(2, 2),
        action_sizes=(2, 2),
    )


@pytest.fixture(scope="session")
def grid():
    """20 instances: seeds 1..10 crossed with delay in {1, 2}."""
    return [
        (seed, delay, make_grid_instance(seed, delay))
        for seed in GRID_SEEDS
        for delay in GRID_DELAYS
    ]


@pytest.fixture(scope="session")
def grid_profiles(grid):
    """One fixed random strategy tuple per grid instance."""
    return {(seed, delay): StrategyProfile.random(spec, seed + 100) for seed, delay, spec in grid}


@pytest.fixture(scope="session")
def pbp_results(grid):
    """Person-by-person solves of every grid instance, computed once."""
    return {(seed, delay): pbp_solve(spec) for seed, delay, spec in grid}
