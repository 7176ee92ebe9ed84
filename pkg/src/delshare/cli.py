"""Command-line front end.

Subcommands: ``validate``, ``solve``, ``best-response``, ``verify``,
``filters``, ``oracle-compare``, ``random-gen``.  Every report embeds the
instance hash, tool version, tolerances, quantization grid, and tie-break
rule, and identical inputs produce byte-identical output files.

Exit codes: 0 success/pass, 1 validation failure, 2 verification or
comparison failure, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .exceptions import BudgetExceeded, ValidationError
from .filters import common_conditionals, joint_distribution, private_conditionals
from .info import StrategyProfile
from .model import (
    ROW_SUM_ATOL,
    ZERO_MASS,
    ProblemSpec,
    load_problem,
    problem_hash,
    random_problem,
    save_problem,
)
from .solver import (
    DEFAULT_BUDGET,
    GAP_TOL,
    GROUP_ATOL,
    QUANT,
    ValueTable,
    _forward_belief_pass,
    best_response_bruteforce,
    best_response_dp,
    dp_expected_value,
    pbp_solve,
    pi_chain,
    theta_chain,
    verify_pbp,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_VERIFICATION = 2
EXIT_BUDGET = 3


@dataclass
class RunConfig:
    """Parsed invocation; one field per CLI flag."""

    command: str
    problem_path: str | None = None
    seed: int = 0
    epsilon: float = 1e-9
    max_iters: int = 100
    budget: int = DEFAULT_BUDGET
    output_path: str | None = None
    format: str = "json"
    controller: int = 0
    strategies_path: str | None = None
    seeds: tuple[int, ...] = ()
    horizon: int = 3
    num_controllers: int = 2
    delay: int = 1
    state_size: int = 2
    obs_sizes: tuple[int, ...] = ()
    action_sizes: tuple[int, ...] = ()


def _provenance(spec: ProblemSpec | None) -> dict:
    return {
        "tool": "delshare",
        "version": __version__,
        "instance_hash": problem_hash(spec) if spec is not None else None,
        "quantization_grid": QUANT,
        "tolerances": {
            "row_sum": ROW_SUM_ATOL,
            "zero_mass": ZERO_MASS,
            "group_value": GROUP_ATOL,
            "verification_gap": GAP_TOL,
        },
        "tie_break": "lowest action index",
    }


def _dump_json(payload: dict, path: str | None) -> None:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(blob)
            fh.write("\n")
    else:
        sys.stdout.write(blob + "\n")


def _key_str(key) -> str:
    if isinstance(key, int):
        return str(key)
    parts = []
    for part in key:
        parts.append(part.hex() if isinstance(part, bytes) else str(part))
    return "|".join(parts)


def table_to_jsonable(table: ValueTable) -> dict:
    return {
        "owner": table.owner,
        "backend": table.backend,
        "epochs": [
            {
                _key_str(key): [value, action, bool(reachable)]
                for key, (value, action, reachable) in sorted(
                    entries.items(), key=lambda kv: _key_str(kv[0])
                )
            }
            for entries in table.entries
        ],
    }


def table_to_csv(table: ValueTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "key", "value", "argmin_action", "reachable"])
    for t, entries in enumerate(table.entries, start=1):
        for key, (value, action, reachable) in sorted(
            entries.items(), key=lambda kv: _key_str(kv[0])
        ):
            writer.writerow([t, _key_str(key), repr(float(value)), action, int(bool(reachable))])
    return buf.getvalue()


def _write_table(table: ValueTable, config: RunConfig, extra: dict) -> None:
    if config.format == "csv":
        text = table_to_csv(table)
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _dump_json({**extra, "value_table": table_to_jsonable(table)}, config.output_path)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(config: RunConfig) -> int:
    spec = load_problem(config.problem_path)
    _dump_json(
        {
            **_provenance(spec),
            "summary": {
                "horizon": spec.horizon,
                "num_controllers": spec.num_controllers,
                "delay": spec.delay,
                "state_size": spec.state_size,
                "obs_sizes": list(spec.obs_sizes),
                "action_sizes": list(spec.action_sizes),
            },
        },
        config.output_path,
    )
    return EXIT_OK


def _cmd_solve(config: RunConfig) -> int:
    spec = load_problem(config.problem_path)
    result = pbp_solve(spec, max_iters=config.max_iters, epsilon=config.epsilon)
    _dump_json(
        {
            **_provenance(spec),
            "payoff": result.payoff,
            "iterations": result.iterations,
            "converged": result.converged,
            "trace": result.trace,
            "strategies": result.strategies.to_dict(),
            "config": {"epsilon": config.epsilon, "max_iters": config.max_iters},
        },
        config.output_path,
    )
    return EXIT_OK


def _cmd_best_response(config: RunConfig) -> int:
    spec = load_problem(config.problem_path)
    others = StrategyProfile.load(spec, config.strategies_path)
    table, rows = best_response_dp(spec, config.controller, others)
    responded = others.with_controller(config.controller, rows)
    _write_table(
        table,
        config,
        {
            **_provenance(spec),
            "controller": config.controller,
            "value_at_start": dp_expected_value(spec, table),
            "strategy": responded.to_dict(),
        },
    )
    return EXIT_OK


def _cmd_verify(config: RunConfig) -> int:
    spec = load_problem(config.problem_path)
    profile = StrategyProfile.load(spec, config.strategies_path)
    result = verify_pbp(spec, profile, budget=config.budget)
    payload = {
        **_provenance(spec),
        "holds": result.holds,
        "worst_gap": result.worst_gap,
        "witness_controller": None if result.witness is None else result.witness[0],
        "witness_strategy": None
        if result.witness is None
        else [row.tolist() for row in result.witness[1]],
    }
    _dump_json(payload, config.output_path)
    return EXIT_OK if result.holds else EXIT_VERIFICATION


def _cmd_filters(config: RunConfig) -> int:
    spec = load_problem(config.problem_path)
    if config.strategies_path:
        profile = StrategyProfile.load(spec, config.strategies_path)
    else:
        profile = StrategyProfile.zeros(spec)
    dump: dict = {"private": {}, "pi": {}, "theta": {}}
    for k in range(spec.num_controllers):
        beliefs, _tr, _is = _forward_belief_pass(spec, k, profile, free_own=False)
        dump["private"][str(k)] = {
            str(t): {str(code): b.probs.tolist() for code, (b, _m) in sorted(per_t.items())}
            for t, per_t in enumerate(beliefs, start=1)
        }
    dump["pi"] = {
        str(t): {str(c): v.tolist() for c, v in sorted(per_t.items())}
        for t, per_t in pi_chain(spec).items()
    }
    dump["theta"] = {
        str(t): {str(c): th.probs.tolist() for c, th in sorted(per_t.items())}
        for t, per_t in theta_chain(spec, profile).items()
    }
    _dump_json({**_provenance(spec), "beliefs": dump}, config.output_path)
    return EXIT_OK


def _grid_specs(config: RunConfig):
    seeds = config.seeds or tuple(range(1, 11))
    for seed in seeds:
        for delay in (1, 2):
            yield seed, delay, random_problem(
                seed,
                horizon=3,
                num_controllers=2,
                delay=delay,
                state_size=2,
                obs_sizes=(2, 2),
                action_sizes=(2, 2),
            )


def _compare_instance(spec: ProblemSpec, seed: int, budget: int) -> dict:
    """Filter-vs-oracle and DP-vs-enumeration checks on one instance."""
    profile = StrategyProfile.random(spec, seed + 1000)
    cell = {"instance_hash": problem_hash(spec)}
    worst_filter = 0.0
    for t in range(1, spec.horizon + 1):
        joint = joint_distribution(spec, profile, t)
        for k in range(spec.num_controllers):
            oracle = private_conditionals(spec, joint, k)
            chained, _tr, _is = _forward_belief_pass(spec, k, profile, free_own=False)
            for code, (belief, _mass) in chained[t - 1].items():
                ob = oracle.get(code)
                if ob is None:
                    worst_filter = max(worst_filter, 1.0)
                    continue
                worst_filter = max(worst_filter, float(np.abs(belief.probs - ob[0].probs).max()))
        _masses, pis, thetas = common_conditionals(spec, joint)
        chain_pi = pi_chain(spec).get(t, {})
        for cidx, vec in pis.items():
            if cidx in chain_pi:
                worst_filter = max(worst_filter, float(np.abs(chain_pi[cidx] - vec).max()))
        chain_theta = theta_chain(spec, profile).get(t, {})
        for cidx, vec in thetas.items():
            if cidx in chain_theta:
                worst_filter = max(
                    worst_filter, float(np.abs(chain_theta[cidx].probs - vec).max())
                )
    cell["filter_max_abs_diff"] = worst_filter
    cell["filters_pass"] = worst_filter <= 1e-9

    worst_dp = 0.0
    for k in range(spec.num_controllers):
        table, _rows = best_response_dp(spec, k, profile)
        dp_value = dp_expected_value(spec, table)
        bf_value, _bf_rows = best_response_bruteforce(spec, k, profile, budget=budget)
        worst_dp = max(worst_dp, abs(dp_value - bf_value))
    cell["dp_vs_enum_max_abs_diff"] = worst_dp
    cell["dp_pass"] = worst_dp <= 1e-9
    cell["pass"] = bool(cell["filters_pass"] and cell["dp_pass"])
    return cell


def _cmd_oracle_compare(config: RunConfig) -> int:
    if config.problem_path:
        spec = load_problem(config.problem_path)
        cells = [_compare_instance(spec, config.seed, config.budget)]
        prov = _provenance(spec)
    else:
        cells = []
        for seed, delay, spec in _grid_specs(config):
            cell = _compare_instance(spec, seed, config.budget)
            cell["seed"] = seed
            cell["delay"] = delay
            cells.append(cell)
        prov = _provenance(None)
    all_pass = all(c["pass"] for c in cells)
    _dump_json({**prov, "cells": cells, "all_pass": all_pass}, config.output_path)
    return EXIT_OK if all_pass else EXIT_VERIFICATION


def _cmd_random_gen(config: RunConfig) -> int:
    obs = config.obs_sizes or tuple([2] * config.num_controllers)
    acts = config.action_sizes or tuple([2] * config.num_controllers)
    spec = random_problem(
        config.seed,
        horizon=config.horizon,
        num_controllers=config.num_controllers,
        delay=config.delay,
        state_size=config.state_size,
        obs_sizes=obs,
        action_sizes=acts,
    )
    if not config.output_path:
        raise ValidationError("random-gen requires --out")
    save_problem(spec, config.output_path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delshare")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, *, problem=True, strategies=False, controller=False, gen=False):
        p = sub.add_parser(name)
        if problem:
            p.add_argument("--problem", dest="problem_path", required=(name != "oracle-compare"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--epsilon", type=float, default=1e-9)
        p.add_argument("--max-iters", type=int, default=100)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--out", dest="output_path")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        if controller:
            p.add_argument("--controller", type=int, default=0)
        if strategies:
            p.add_argument("--strategies", dest="strategies_path")
        if name == "oracle-compare":
            p.add_argument("--seeds", type=int, nargs="*", default=[])
        if gen:
            p.add_argument("--horizon", type=int, default=3)
            p.add_argument("--controllers", dest="num_controllers", type=int, default=2)
            p.add_argument("--delay", type=int, default=1)
            p.add_argument("--states", dest="state_size", type=int, default=2)
            p.add_argument("--obs", dest="obs_sizes", type=int, nargs="*", default=[])
            p.add_argument("--acts", dest="action_sizes", type=int, nargs="*", default=[])
        return p

    add("validate")
    add("solve")
    add("best-response", strategies=True, controller=True)
    add("verify", strategies=True)
    add("filters", strategies=True)
    add("oracle-compare")
    add("random-gen", problem=False, gen=True)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    data = {name: getattr(args, name) for name in fields if hasattr(args, name)}
    for name in ("seeds", "obs_sizes", "action_sizes"):
        if name in data and data[name] is not None:
            data[name] = tuple(data[name])
    config = RunConfig(**data)
    if config.epsilon <= 0:
        raise ValidationError("epsilon must be > 0")
    if config.budget < 1:
        raise ValidationError("budget must be >= 1")
    return config


_HANDLERS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "best-response": _cmd_best_response,
    "verify": _cmd_verify,
    "filters": _cmd_filters,
    "oracle-compare": _cmd_oracle_compare,
    "random-gen": _cmd_random_gen,
}


def run(config: RunConfig) -> int:
    try:
        return _HANDLERS[config.command](config)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        _dump_json({"error": "validation", "detail": str(exc)}, config.output_path)
        return EXIT_VALIDATION
    except BudgetExceeded as exc:
        _dump_json(
            {"error": "budget_exceeded", "count": exc.count, "budget": exc.budget},
            config.output_path,
        )
        return EXIT_BUDGET


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        _dump_json({"error": "validation", "detail": str(exc)}, None)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
