"""Best responses, person-by-person iteration, verification, grouped values.

The best-response dynamic program runs backward over raw information sets of
one controller, holding the others fixed.  Its value tables can be re-keyed
by information states of increasing coarseness:

- (private belief, common history, private history): always valid;
- (private belief, lagged-state belief, private history): valid when the
  other controllers' maps depend on the common history only through the
  lagged-state belief;
- (private belief, central joint belief): valid at a fixed strategy tuple.

Re-keying asserts that all raw sets mapping to one key share value and
argmin; a violation is an implementation bug, not an instance property.
Brute-force strategy enumeration (trajectory based, independent of the
filter recursions) provides the verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .exceptions import BudgetExceeded, NotSeparated, SeparationViolation
from .filters import (
    UNREACHABLE,
    CentralBeliefPi,
    PrivateBelief,
    _private_update_raw,
    block_decode,
    block_size,
    forward_trajectories,
    lambda_sizes,
    others_of,
    pi_init,
    pi_update,
    private_belief_init,
    theta_init,
    theta_update,
    trajectory_infoset,
)
from .info import (
    CommonInfo,
    InfoSet,
    PrivateInfo,
    StrategyProfile,
    common_from_index,
    common_index,
    enumerate_common,
    infoset_count,
    infoset_index,
    predecessor_infoset,
    private_count,
    successor_infoset,
)
from .model import ZERO_MASS, ProblemSpec

#: quantization grid for belief keys (decides "same information state")
QUANT = 1e-9

#: tolerance for value agreement inside one grouping key
GROUP_ATOL = 1e-9

#: verification slack: a deviation must beat the payoff by more than this
GAP_TOL = 1e-9

#: default cap on enumerated strategies for the brute-force oracle
DEFAULT_BUDGET = 10**7


def belief_key(probs) -> bytes:
    """Hashable key of a probability vector on the quantization grid."""
    return np.round(np.asarray(probs) / QUANT).astype(np.int64).tobytes()


@dataclass
class ValueTable:
    """Per-epoch value maps of one controller.

    ``entries[t-1]`` maps a conditioning key to ``(value, argmin_action,
    reachable)``.  Keys are raw info set codes for the ``raw`` and
    ``cost_to_go`` backends and quantized-belief tuples otherwise; the
    ``backend`` tag records which.
    """

    owner: int
    backend: str
    entries: list


@dataclass
class PbpResult:
    strategies: StrategyProfile
    payoff: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)


@dataclass
class VerifyResult:
    holds: bool
    worst_gap: float
    witness: tuple | None


# ---------------------------------------------------------------------------
# payoffs


def expected_total_cost(spec: ProblemSpec, profile: StrategyProfile) -> float:
    """Exact expected sum of stage costs under the strategy tuple."""
    total = 0.0
    for (xs, ys, us), p in forward_trajectories(spec, profile, spec.horizon).items():
        for t in range(1, spec.horizon + 1):
            total += p * spec.stage_cost[t - 1, xs[t - 1], spec.joint_action_index(us[t - 1])]
    return total


def expected_cost_via_beliefs(spec: ProblemSpec, profile: StrategyProfile, k: int) -> float:
    """Payoff recomputed by re-conditioning on controller k's info sets:
    sum over epochs and reachable info sets of the set's probability times
    the private-belief-weighted stage cost.  Equals
    :func:`expected_total_cost` by the tower property."""
    beliefs, _, isets = _forward_belief_pass(spec, k, profile, free_own=False)
    total = 0.0
    for t in range(1, spec.horizon + 1):
        for code, (belief, mass) in beliefs[t - 1].items():
            acts = profile.slice_at(t, isets[t - 1][code].common)
            u_own = profile.action(t, k, code)
            cvec = _stage_cost_by_action(spec, k, t, belief, acts)
            total += mass * cvec[u_own]
    return total


def _stage_cost_by_action(spec, k, t, belief, acts) -> np.ndarray:
    """Belief-weighted stage cost as a vector over controller k's actions,
    the other controllers acting through their decision slice."""
    others = others_of(spec, k)
    sizes = lambda_sizes(spec, t, others)
    cur = belief.probs.reshape(spec.state_size, block_size(sizes))
    cmat = spec.cost_matrix(t)
    out = np.zeros(spec.action_sizes[k])
    for col in range(cur.shape[1]):
        xi_col = cur[:, col]
        if not xi_col.any():
            continue
        lam = block_decode(col, sizes)
        u_other = [acts(j, lj) for j, lj in zip(others, lam)]
        joint = [0] * spec.num_controllers
        for j, u in zip(others, u_other):
            joint[j] = u
        for u in range(spec.action_sizes[k]):
            joint[k] = u
            out[u] += xi_col @ cmat[:, spec.joint_action_index(joint)]
    return out


# ---------------------------------------------------------------------------
# reachable belief graph of one controller


def _revealed_combos(spec, k, iset, u_own, acts):
    """All candidate newly shared (joint obs, joint action) pairs consistent
    with what controller k's info set already records; yields (None, None)
    while the common component does not grow."""
    t, big_t = iset.t, spec.delay
    if t < big_t:
        yield None, None
        return
    others = others_of(spec, k)
    y_own = iset.private.own_obs[0]
    u_own_s = u_own if big_t == 1 else iset.private.own_actions[0]
    for y_combo in product(*[range(spec.obs_sizes[j]) for j in others]):
        shared_obs = [0] * spec.num_controllers
        shared_obs[k] = y_own
        for j, yj in zip(others, y_combo):
            shared_obs[j] = yj
        if big_t == 1:
            # at delay 1 the revealed action is the current one, fixed by the
            # other controllers' decision slice (lambda index = observation)
            shared_actions = [0] * spec.num_controllers
            shared_actions[k] = u_own_s
            for j, yj in zip(others, y_combo):
                shared_actions[j] = acts(j, yj)
            yield tuple(shared_obs), tuple(shared_actions)
        else:
            for u_combo in product(*[range(spec.action_sizes[j]) for j in others]):
                shared_actions = [0] * spec.num_controllers
                shared_actions[k] = u_own_s
                for j, uj in zip(others, u_combo):
                    shared_actions[j] = uj
                yield tuple(shared_obs), tuple(shared_actions)


def _forward_belief_pass(spec, k, profile, free_own=True):
    """Reachable info sets of controller k with beliefs, masses, transitions.

    With ``free_own`` the own action branches over the whole action space and
    reachability means "some own action sequence gives positive probability";
    otherwise own actions follow ``profile``.  Since an info set encodes the
    controller's full own action path, its mass under either convention is
    well defined.  Returns ``(beliefs, transitions, isets)``:

    - ``beliefs[t-1]``: code -> (PrivateBelief, probability of the info set);
    - ``transitions[t-1]``: code -> per own action, list of (successor code,
      conditional probability); epochs ``1..n-1`` only;
    - ``isets[t-1]``: code -> InfoSet.
    """
    first_b, first_i = {}, {}
    for y1 in range(spec.obs_sizes[k]):
        b = private_belief_init(spec, k, y1)
        if b is UNREACHABLE:
            continue
        mass = float(spec.initial_dist @ spec.initial_obs_kernel[k][:, y1])
        iset = InfoSet(
            common=CommonInfo(t=1, joint_obs=(), joint_actions=()),
            private=PrivateInfo(t=1, k=k, own_obs=(y1,), own_actions=()),
        )
        code = infoset_index(spec, iset)
        first_b[code] = (b, mass)
        first_i[code] = iset
    beliefs, isets, transitions = [first_b], [first_i], []

    for t in range(1, spec.horizon):
        cur_tr, nxt_b, nxt_i = {}, {}, {}
        for code, (belief, mass) in beliefs[t - 1].items():
            iset = isets[t - 1][code]
            acts = profile.slice_at(t, iset.common)
            if free_own:
                own_choices = range(spec.action_sizes[k])
            else:
                own_choices = [profile.action(t, k, code)]
            per_u = {u: [] for u in range(spec.action_sizes[k])}
            for u in own_choices:
                for y_next in range(spec.obs_sizes[k]):
                    for shared_obs, shared_actions in _revealed_combos(spec, k, iset, u, acts):
                        vec, mc = _private_update_raw(
                            spec, belief, y_next, u, acts, shared_obs, shared_actions
                        )
                        if mc < ZERO_MASS:
                            continue
                        succ = successor_infoset(spec, iset, y_next, u, shared_obs, shared_actions)
                        scode = infoset_index(spec, succ)
                        per_u[u].append((scode, mc))
                        nxt_b[scode] = (PrivateBelief(t=t + 1, k=k, probs=vec / mc), mass * mc)
                        nxt_i[scode] = succ
            cur_tr[code] = per_u
        transitions.append(cur_tr)
        beliefs.append(nxt_b)
        isets.append(nxt_i)
    return beliefs, transitions, isets


# ---------------------------------------------------------------------------
# best response by dynamic programming


def best_response_dp(spec: ProblemSpec, k: int, other_strategies: StrategyProfile):
    """Backward recursion over controller k's raw info sets.

    At the last epoch the belief-weighted stage cost is minimized over the
    own action; earlier epochs add the expectation of the successor value
    under the one-step conditional law of (own observation, newly shared
    components).  Ties break to the lowest action index.  Unreachable info
    sets get value 0, action 0, reachable=False.

    Returns ``(ValueTable, rows)`` where ``rows`` is the greedy strategy of
    controller k as per-epoch action arrays.
    """
    table, rows, _, _ = _best_response_dp_full(spec, k, other_strategies)
    return table, rows


def _best_response_dp_full(spec, k, other_strategies):
    beliefs, transitions, isets = _forward_belief_pass(spec, k, other_strategies, free_own=True)
    n = spec.horizon
    entries = [dict() for _ in range(n)]
    rows = [np.zeros(infoset_count(spec, t, k), dtype=np.int64) for t in range(1, n + 1)]
    values_next: dict[int, float] = {}
    for t in range(n, 0, -1):
        vt = {}
        for code, (belief, _mass) in beliefs[t - 1].items():
            acts = other_strategies.slice_at(t, isets[t - 1][code].common)
            q = _stage_cost_by_action(spec, k, t, belief, acts)
            if t < n:
                q = q.copy()
                for u in range(spec.action_sizes[k]):
                    for scode, p in transitions[t - 1][code][u]:
                        q[u] += p * values_next[scode]
            best_u = int(np.argmin(q))  # first occurrence: lowest action wins
            vt[code] = float(q[best_u])
            entries[t - 1][code] = (float(q[best_u]), best_u, True)
            rows[t - 1][code] = best_u
        for code in range(infoset_count(spec, t, k)):
            if code not in vt:
                entries[t - 1][code] = (0.0, 0, False)
        values_next = vt
    table = ValueTable(owner=k, backend="raw", entries=entries)
    return table, rows, beliefs, isets


def dp_expected_value(spec: ProblemSpec, table: ValueTable) -> float:
    """First-epoch DP value averaged under the law of the initial info set."""
    k = table.owner
    total = 0.0
    for code, (v, _a, reachable) in table.entries[0].items():
        if reachable:
            # at t=1 the code is the first observation itself
            mass = float(spec.initial_dist @ spec.initial_obs_kernel[k][:, code])
            total += mass * v
    return total


# ---------------------------------------------------------------------------
# brute-force enumeration oracle


def _forced_node_costs(spec, k, other_strategies):
    """Per-epoch reachable nodes of controller k under the forced-own-action
    measure, with unnormalized expected stage costs per own action.  Built
    from trajectory enumeration only; independent of the filter recursions."""
    n = spec.horizon
    cost, nodes = [], []
    for t in range(1, n + 1):
        ct: dict[int, np.ndarray] = {}
        nt: dict[int, InfoSet] = {}
        for (xs, ys, us), p in forward_trajectories(spec, other_strategies, t, free=k).items():
            iset = trajectory_infoset(spec, ys, us, t, k)
            code = infoset_index(spec, iset)
            arr = ct.get(code)
            if arr is None:
                arr = np.zeros(spec.action_sizes[k])
                ct[code] = arr
                nt[code] = iset
            arr[us[t - 1][k]] += p * spec.stage_cost[
                t - 1, xs[t - 1], spec.joint_action_index(us[t - 1])
            ]
        cost.append(ct)
        nodes.append(nt)
    return cost, nodes


def _forced_tree(spec, k, cost, nodes):
    """Child lists grouped by (parent, recorded own action), children in
    canonical code order."""
    children = []
    for t in range(1, spec.horizon):
        ch = {code: {u: [] for u in range(spec.action_sizes[k])} for code in nodes[t - 1]}
        for scode in sorted(nodes[t]):
            parent, u_prev = predecessor_infoset(spec, nodes[t][scode])
            pcode = infoset_index(spec, parent)
            if pcode in ch:
                ch[pcode][u_prev].append(scode)
        children.append(ch)
    return children


def best_response_bruteforce(
    spec: ProblemSpec,
    k: int,
    other_strategies: StrategyProfile,
    budget: int = DEFAULT_BUDGET,
):
    """Exhaustive minimization over controller k's deterministic strategies.

    The forced-own-action measure factors over the initial info sets, so the
    enumeration runs per initial set over its tree of reachable nodes; a
    strategy only matters through the nodes its own choices realize, and
    info sets never realized (or unreachable) are pinned to action 0.  The
    number of effectively distinct strategies is counted exactly first and
    compared against ``budget``.  Interior nodes are assigned by depth-first
    search in (epoch, code) order with actions ascending; last-epoch action
    combinations are evaluated in one vectorized sweep.  Strict improvement
    updates keep the first minimizer found, so ties break lexicographically
    in that order.

    Returns ``(payoff, rows)`` with the minimal expected total cost and a
    minimizing strategy for controller k.
    """
    n = spec.horizon
    uk = spec.action_sizes[k]
    cost, nodes = _forced_node_costs(spec, k, other_strategies)
    children = _forced_tree(spec, k, cost, nodes)

    memo: dict[tuple[int, int], int] = {}

    def strategy_count(t, code):
        if t == n:
            return uk
        got = memo.get((t, code))
        if got is None:
            got = 0
            for u in range(uk):
                prod = 1
                for c in children[t - 1][code][u]:
                    prod *= strategy_count(t + 1, c)
                got += prod
            memo[(t, code)] = got
        return got

    roots = sorted(nodes[0])
    total_count = sum(strategy_count(1, r) for r in roots)
    if total_count > budget:
        raise BudgetExceeded(total_count, budget)

    rows = [np.zeros(infoset_count(spec, t, k), dtype=np.int64) for t in range(1, n + 1)]
    payoff = 0.0

    for root in roots:
        best = [np.inf, None, None]  # cost, interior assignment, leaf actions
        assign: dict[tuple[int, int], int] = {}

        def finish(leaves, acc):
            combos = uk ** len(leaves)
            vec = np.full(combos, acc)
            idx = np.arange(combos)
            stride = combos
            for code in leaves:
                stride //= uk
                vec += cost[n - 1][code][(idx // stride) % uk]
            j = int(np.argmin(vec))  # first occurrence: leaf 0 most significant
            if vec[j] < best[0]:
                digits = []
                for _ in leaves:
                    digits.append(0)
                rem = j
                for pos in range(len(leaves) - 1, -1, -1):
                    digits[pos] = rem % uk
                    rem //= uk
                best[0] = float(vec[j])
                best[1] = dict(assign)
                best[2] = list(zip(leaves, digits))

        def rec(pending, leaves, acc):
            if not pending:
                finish(sorted(leaves), acc)
                return
            t, code = pending[0]
            rest = pending[1:]
            for u in range(uk):
                kids = children[t - 1][code][u]
                if t + 1 == n:
                    new_pending, new_leaves = rest, leaves + kids
                else:
                    new_pending = sorted(rest + [(t + 1, c) for c in kids])
                    new_leaves = leaves
                assign[(t, code)] = u
                rec(new_pending, new_leaves, acc + cost[t - 1][code][u])
            del assign[(t, code)]

        if n == 1:
            rec([], [root], 0.0)
        else:
            rec([(1, root)], [], 0.0)

        payoff += best[0]
        for (t, code), u in best[1].items():
            rows[t - 1][code] = u
        for code, u in best[2]:
            rows[n - 1][code] = u
    return payoff, rows


# ---------------------------------------------------------------------------
# person-by-person iteration and verification


def pbp_solve(
    spec: ProblemSpec,
    initial_strategies: StrategyProfile | None = None,
    max_iters: int = 100,
    epsilon: float = 1e-9,
) -> PbpResult:
    """Round-robin best responses until a full round brings no improvement.

    A controller's strategy is replaced only when the best response improves
    the payoff by more than ``epsilon``, so the payoff trace is monotone
    non-increasing.  ``converged=False`` after ``max_iters`` rounds is a
    result, not an error.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be > 0")
    profile = initial_strategies if initial_strategies is not None else StrategyProfile.zeros(spec)
    payoff = expected_total_cost(spec, profile)
    trace = [payoff]
    converged = False
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        improved = False
        for k in range(spec.num_controllers):
            _table, rows = best_response_dp(spec, k, profile)
            candidate = profile.with_controller(k, rows)
            new_payoff = expected_total_cost(spec, candidate)
            if payoff - new_payoff > epsilon:
                profile, payoff, improved = candidate, new_payoff, True
            trace.append(payoff)
        if not improved:
            converged = True
            break
    return PbpResult(
        strategies=profile, payoff=payoff, iterations=iterations, converged=converged, trace=trace
    )


def verify_pbp(
    spec: ProblemSpec, profile: StrategyProfile, budget: int = DEFAULT_BUDGET
) -> VerifyResult:
    """Check that no controller has an enumerable unilateral deviation that
    improves the payoff by more than :data:`GAP_TOL`."""
    payoff = expected_total_cost(spec, profile)
    worst_gap = -np.inf
    worst: tuple | None = None
    for k in range(spec.num_controllers):
        bf_payoff, rows = best_response_bruteforce(spec, k, profile, budget)
        gap = payoff - bf_payoff
        if gap > worst_gap:
            worst_gap = gap
            worst = (k, rows)
    holds = bool(worst_gap <= GAP_TOL)
    return VerifyResult(holds=holds, worst_gap=float(worst_gap), witness=None if holds else worst)


def cost_to_go_table(spec: ProblemSpec, k: int, profile: StrategyProfile) -> ValueTable:
    """Conditional cost-to-go of the fixed tuple at every info set of
    controller k that the tuple reaches, computed from trajectory
    enumeration.  Keys are raw codes; the action stored is the tuple's."""
    n = spec.horizon
    mass: list[dict[int, float]] = []
    ccur: list[dict[int, float]] = []
    nodes: list[dict[int, InfoSet]] = []
    for t in range(1, n + 1):
        mt: dict[int, float] = {}
        ct: dict[int, float] = {}
        nt: dict[int, InfoSet] = {}
        for (xs, ys, us), p in forward_trajectories(spec, profile, t).items():
            iset = trajectory_infoset(spec, ys, us, t, k)
            code = infoset_index(spec, iset)
            mt[code] = mt.get(code, 0.0) + p
            ct[code] = ct.get(code, 0.0) + p * spec.stage_cost[
                t - 1, xs[t - 1], spec.joint_action_index(us[t - 1])
            ]
            nt.setdefault(code, iset)
        mass.append(mt)
        ccur.append(ct)
        nodes.append(nt)

    acc = dict(ccur[n - 1])
    entries = [dict() for _ in range(n)]
    for t in range(n, 0, -1):
        if t < n:
            for scode, iset in nodes[t].items():
                parent, _u = predecessor_infoset(spec, iset)
                pcode = infoset_index(spec, parent)
                ccur[t - 1][pcode] += acc[scode]
            acc = ccur[t - 1]
        for code, total in acc.items():
            m = mass[t - 1][code]
            if m < ZERO_MASS:
                continue
            entries[t - 1][code] = (total / m, profile.action(t, k, code), True)
    return ValueTable(owner=k, backend="cost_to_go", entries=entries)


# ---------------------------------------------------------------------------
# centralized belief chains along common histories


def pi_chain(spec: ProblemSpec) -> dict[int, dict[int, np.ndarray]]:
    """Lagged-state belief along every positive-probability common history;
    maps epoch t (for t >= T+1) to {common code: belief vector}.  The chain
    is strategy independent: actions in the common history enter as data."""
    big_t, n = spec.delay, spec.horizon
    out: dict[int, dict[int, np.ndarray]] = {}
    t0 = big_t + 1
    if t0 > n:
        return out
    d: dict[int, np.ndarray] = {}
    for common in enumerate_common(spec, t0):
        pi = pi_init(spec, common.joint_obs[0])
        if pi is not UNREACHABLE:
            d[common_index(spec, common)] = pi.probs
    out[t0] = d
    for t in range(t0, n):
        nd: dict[int, np.ndarray] = {}
        for cidx, probs in out[t].items():
            common = common_from_index(spec, t, cidx)
            u_lag = common.joint_actions[-1]  # u_{t-T}, already shared
            for y_new in product(*[range(s) for s in spec.obs_sizes]):
                nxt = pi_update(spec, CentralBeliefPi(t=t, probs=probs), y_new, u_lag)
                if nxt is UNREACHABLE:
                    continue
                for u_new in product(*[range(s) for s in spec.action_sizes]):
                    c2 = CommonInfo(
                        t=t + 1,
                        joint_obs=common.joint_obs + (y_new,),
                        joint_actions=common.joint_actions + (u_new,),
                    )
                    nd[common_index(spec, c2)] = nxt.probs
        out[t + 1] = nd
    return out


def theta_chain(spec: ProblemSpec, profile: StrategyProfile):
    """Central joint belief along every common history consistent with (and
    reachable under) the strategy tuple; maps epoch t to
    {common code: CentralBeliefTheta}."""
    big_t, n = spec.delay, spec.horizon
    out = {1: {0: theta_init(spec)}}
    for t in range(1, n):
        nd = {}
        for cidx, theta in out[t].items():
            common = common_from_index(spec, t, cidx)
            acts = profile.slice_at(t, common)
            if t < big_t:
                nxt = theta_update(spec, theta, acts)
                if nxt is not UNREACHABLE:
                    c2 = CommonInfo(t=t + 1, joint_obs=common.joint_obs, joint_actions=common.joint_actions)
                    nd[common_index(spec, c2)] = nxt
                continue
            for y_s in product(*[range(s) for s in spec.obs_sizes]):
                if big_t == 1:
                    # revealed action is the current decision (lambda index = obs)
                    combos = [tuple(acts(k, y_s[k]) for k in range(spec.num_controllers))]
                else:
                    combos = product(*[range(s) for s in spec.action_sizes])
                for u_s in combos:
                    nxt = theta_update(spec, theta, acts, y_s, tuple(u_s))
                    if nxt is UNREACHABLE:
                        continue
                    c2 = CommonInfo(
                        t=t + 1,
                        joint_obs=common.joint_obs + (y_s,),
                        joint_actions=common.joint_actions + (tuple(u_s),),
                    )
                    nd[common_index(spec, c2)] = nxt
        out[t + 1] = nd
    return out


# ---------------------------------------------------------------------------
# grouped value tables


def _regroup(raw_entries, key_of, backend, owner):
    """Re-key reachable raw entries, asserting value and argmin agreement
    inside every group."""
    entries = []
    for t_entries in raw_entries:
        grouped: dict = {}
        for code, (v, a, reachable) in sorted(t_entries.items()):
            if not reachable:
                continue
            key = key_of(len(entries) + 1, code)
            if key is None:
                continue
            got = grouped.get(key)
            if got is None:
                grouped[key] = (v, a, True)
            else:
                v0, a0, _ = got
                if abs(v - v0) > GROUP_ATOL or a != a0:
                    raise SeparationViolation(
                        f"backend {backend}: codes grouped under one key disagree "
                        f"(value {v0} vs {v}, action {a0} vs {a})"
                    )
        entries.append(grouped)
    return ValueTable(owner=owner, backend=backend, entries=entries)


def semi_separated_table(spec: ProblemSpec, k: int, other_strategies: StrategyProfile) -> ValueTable:
    """Best-response values re-keyed by (quantized private belief, common
    history code, private history code).  Since the raw info set is exactly
    the (common, private) pair, groups are singletons by construction; the
    re-keying still certifies that the key determines the value."""
    table, _rows, beliefs, _isets = _best_response_dp_full(spec, k, other_strategies)
    pc = [private_count(spec, t, k) for t in range(1, spec.horizon + 1)]

    def key_of(t, code):
        belief, _mass = beliefs[t - 1][code]
        return (belief_key(belief.probs), code // pc[t - 1], code % pc[t - 1])

    return _regroup(table.entries, key_of, "semi_separated", k)


def separated_pi_table(spec: ProblemSpec, k: int, other_strategies: StrategyProfile) -> ValueTable:
    """Best-response values re-keyed by (quantized private belief, quantized
    lagged-state belief, private history code).

    Requires the other controllers' maps to depend on the common history
    only through the lagged-state belief; checked by grouping their supplied
    action tables.  While the common component is empty the middle key is a
    sentinel.
    """
    pis = pi_chain(spec)
    big_t = spec.delay
    for j in others_of(spec, k):
        for t in range(big_t + 1, spec.horizon + 1):
            pc = private_count(spec, t, j)
            seen: dict = {}
            for cidx, probs in pis.get(t, {}).items():
                pkey = belief_key(probs)
                for lam in range(pc):
                    a = int(other_strategies.actions[j][t - 1][cidx * pc + lam])
                    prev = seen.get((pkey, lam))
                    if prev is None:
                        seen[(pkey, lam)] = a
                    elif prev != a:
                        raise NotSeparated(
                            f"controller {j} acts differently at epoch {t} on two common "
                            "histories with the same lagged-state belief"
                        )

    table, _rows, beliefs, _isets = _best_response_dp_full(spec, k, other_strategies)
    pc_k = [private_count(spec, t, k) for t in range(1, spec.horizon + 1)]

    def key_of(t, code):
        belief, _mass = beliefs[t - 1][code]
        cidx = code // pc_k[t - 1]
        mid = belief_key(pis[t][cidx]) if t >= big_t + 1 else b""
        return (belief_key(belief.probs), mid, code % pc_k[t - 1])

    return _regroup(table.entries, key_of, "separated_pi", k)


def info_state_theta_table(spec: ProblemSpec, k: int, profile: StrategyProfile) -> ValueTable:
    """Best-response values re-keyed by (quantized private belief, quantized
    central joint belief) at a fixed strategy tuple.

    The central joint belief is only defined along common histories the
    tuple itself can produce, so the table restricts to those; the private
    history key is absorbed because it enters only through the private
    belief.  Requires every controller's map to factor through that pair,
    checked on the tuple-reachable info sets.
    """
    thetas = theta_chain(spec, profile)
    for j in range(spec.num_controllers):
        beliefs_j, _tr, _is = _forward_belief_pass(spec, j, profile, free_own=False)
        for t in range(1, spec.horizon + 1):
            pc = private_count(spec, t, j)
            seen: dict = {}
            for code, (belief, _mass) in beliefs_j[t - 1].items():
                theta = thetas[t].get(code // pc)
                if theta is None:
                    continue
                key = (belief_key(belief.probs), belief_key(theta.probs))
                a = profile.action(t, j, code)
                prev = seen.get(key)
                if prev is None:
                    seen[key] = a
                elif prev != a:
                    raise NotSeparated(
                        f"controller {j} acts differently at epoch {t} on two info sets "
                        "with the same (private belief, central belief) pair"
                    )

    table, _rows, beliefs, _isets = _best_response_dp_full(spec, k, profile)
    pc_k = [private_count(spec, t, k) for t in range(1, spec.horizon + 1)]

    def key_of(t, code):
        theta = thetas[t].get(code // pc_k[t - 1])
        if theta is None:
            return None  # common history inconsistent with the tuple
        belief, _mass = beliefs[t - 1][code]
        return (belief_key(belief.probs), belief_key(theta.probs))

    return _regroup(table.entries, key_of, "info_state_theta", k)
