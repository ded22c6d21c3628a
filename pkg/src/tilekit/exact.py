"""Exact optimal solvers for weighted factors, covers, and the budget dual.

min_factor / min_cover run depth-first branch and bound: branch on the
lowest-index undecided vertex, children are the compatible copies through it
cheapest first, with the skip branch last. The admissible lower bound
charges each still-uncovered vertex 1/v_H of the cheapest surviving copy
through it. brute_force_oracle is an independent exhaustive check: a
memoized scan over the full subset state space, feasible only at toy sizes.
"""

from __future__ import annotations

import math

from .copies import CopyIndex, enumerate_copies
from .graphs import GraphH
from .solutions import (
    COVER,
    FACTOR,
    BudgetSolution,
    Infeasible,
    TilingSolution,
    solution_weight,
)

__all__ = [
    "min_factor",
    "min_cover",
    "max_coverage_under_budget",
    "brute_force_oracle",
    "OracleLimitError",
    "NodeBudgetExceeded",
    "DEFAULT_NODE_BUDGET",
    "ORACLE_MAX_N",
    "ORACLE_MAX_COPIES",
]

DEFAULT_NODE_BUDGET = 30_000_000
ORACLE_MAX_N = 12
ORACLE_MAX_COPIES = 100_000


class OracleLimitError(ValueError):
    """The instance exceeds the oracle's hard size limits."""


class NodeBudgetExceeded(RuntimeError):
    """Node budget exhausted before any feasible incumbent was found."""


class _StopSearch(Exception):
    pass


def _active(inst, within) -> list[int]:
    if within is None:
        return list(range(inst.n))
    act = sorted(set(within))
    if act and not (0 <= act[0] and act[-1] < inst.n):
        raise ValueError("within contains vertices outside the host")
    return act


def _empty_solution(mode: str, cap: float, k: int, uncovered: int) -> TilingSolution:
    return TilingSolution(
        mode=mode,
        copies=(),
        total_weight=0.0,
        uncovered=uncovered,
        cap=cap,
        optimal=True,
        allowed_uncovered=k,
    )


def _finish(index: CopyIndex, sel, mode, cap, k, active_count, optimal) -> TilingSolution:
    copies = tuple(index.copy(cid) for cid in sel)
    covered = set()
    for c in copies:
        covered.update(c.vertex_image)
    return TilingSolution(
        mode=mode,
        copies=copies,
        total_weight=solution_weight(copies),
        uncovered=active_count - len(covered),
        cap=cap,
        optimal=optimal,
        allowed_uncovered=k,
    )


def _canon_key(index: CopyIndex, cid: int):
    return (index.edge_list(cid), tuple(sorted(index._embeddings[cid])))


def _canon_total(index: CopyIndex, sel, w) -> float:
    total = 0.0
    for cid in sorted(sel, key=lambda c: _canon_key(index, c)):
        total += w[cid]
    return total


def min_factor(
    inst,
    h: GraphH,
    allowed_uncovered: int = 0,
    cap: float = float("inf"),
    *,
    within=None,
    index: CopyIndex | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Globally optimal partial factor leaving at most allowed_uncovered
    active vertices uncovered, using no edge heavier than cap.

    Returns a TilingSolution (optimal=True), or the best incumbent flagged
    optimal=False when the node budget runs out, or Infeasible when no
    factor satisfies the constraints.
    """
    return _solve(inst, h, FACTOR, allowed_uncovered, cap, within, index, node_budget)


def min_cover(
    inst,
    h: GraphH,
    allowed_uncovered: int = 0,
    cap: float = float("inf"),
    *,
    within=None,
    index: CopyIndex | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
):
    """Globally optimal partial cover; copies may share vertices and shared
    edges are paid once per copy containing them."""
    return _solve(inst, h, COVER, allowed_uncovered, cap, within, index, node_budget)


def _solve(inst, h, mode, k, cap, within, index, node_budget):
    if k < 0:
        raise ValueError("allowed_uncovered must be >= 0")
    active = _active(inst, within)
    a_count = len(active)
    if k > inst.n:
        raise ValueError("allowed_uncovered exceeds the vertex count")
    if k >= a_count:
        return _empty_solution(mode, cap, k, a_count)
    if index is None:
        index = enumerate_copies(h, inst, cap, within=within)
    if mode == FACTOR:
        best_sel, optimal = _search_factor(index, active, k, node_budget)
    else:
        best_sel, optimal = _search_cover(index, active, k, node_budget)
    if best_sel is None:
        if not optimal:
            raise NodeBudgetExceeded(
                f"node budget {node_budget} exhausted with no incumbent"
            )
        return Infeasible(mode=mode, allowed_uncovered=k, cap=cap)
    return _finish(index, best_sel, mode, cap, k, a_count, optimal)


def _search_factor(index: CopyIndex, active: list[int], k: int, node_budget: int):
    w = index.weights.tolist()
    vmasks = index.vmasks
    postings = index.postings
    v_h = index.pattern.vertex_count
    val_arr = [0.0] * index.n

    best_canon = math.inf
    best_sel = None
    sel: list[int] = []
    nodes = 0

    def visit(used: int, skips: int, acc: float):
        nonlocal best_canon, best_sel, nodes
        nodes += 1
        if nodes > node_budget:
            raise _StopSearch

        branch_v = -1
        forced_v = -1
        forced = 0
        vals_sum = 0.0
        vals_max = -1.0
        skips_left = k - skips
        vals = []
        for u in active:
            if used >> u & 1:
                continue
            mv = -1.0
            for cid in postings[u]:
                if not (vmasks[cid] & used):
                    mv = w[cid]
                    break
            if mv < 0.0:
                forced += 1
                if forced_v < 0:
                    forced_v = u
            else:
                val_arr[u] = mv
                vals_sum += mv
                if mv > vals_max:
                    vals_max = mv
                    branch_v = u
                vals.append(mv)

        if forced == 0 and not vals:
            canon = _canon_total(index, sel, w)
            if canon < best_canon:
                best_canon = canon
                best_sel = sel.copy()
            return
        if forced > skips_left:
            return
        # admissible bounds over the vertices that must still be covered:
        # lb1 charges each one 1/v_H of its cheapest surviving copy; lb3
        # charges each solution copy the max such value among its vertices,
        # minimized over groupings (every v_H-th order statistic).
        opt_skips = skips_left - forced
        vals.sort(reverse=True)
        lb1 = (vals_sum - sum(vals[:opt_skips])) / v_h if opt_skips > 0 else vals_sum / v_h
        lb3 = sum(vals[opt_skips :: v_h])
        bound = lb3 if lb3 > lb1 else lb1
        if acc + bound >= best_canon:
            return
        if forced > 0:
            # a vertex with no surviving copy must spend a skip now
            visit(used | 1 << forced_v, skips + 1, acc)
            return

        # covering v_H vertices lowers either bound by at most vals_max
        w_break = best_canon - acc - bound + vals_max
        for cid in postings[branch_v]:
            vm = vmasks[cid]
            if vm & used:
                continue
            wc = w[cid]
            if wc >= w_break:
                break
            sub = 0.0
            m = vm
            while m:
                u = (m & -m).bit_length() - 1
                m &= m - 1
                sub += val_arr[u]
            if acc + wc + lb1 - sub / v_h >= best_canon:
                continue
            sel.append(cid)
            visit(used | vm, skips, acc + wc)
            sel.pop()
            w_break = best_canon - acc - bound + vals_max
        if skips_left > 0:
            visit(used | 1 << branch_v, skips + 1, acc)

    try:
        visit(0, 0, 0.0)
        return best_sel, True
    except _StopSearch:
        return best_sel, False


def _search_cover(index: CopyIndex, active: list[int], k: int, node_budget: int):
    w = index.weights.tolist()
    vmasks = index.vmasks
    postings = index.postings
    v_h = index.pattern.vertex_count

    # static per-vertex charge: the cheapest copy through u never changes in
    # cover mode, since overlaps with covered vertices are allowed
    static_val = [0.0] * index.n
    has_copy = [False] * index.n
    for u in active:
        if postings[u]:
            static_val[u] = w[postings[u][0]]
            has_copy[u] = True

    best_canon = math.inf
    best_sel = None
    sel: list[int] = []
    chosen: set[int] = set()
    nodes = 0

    def visit(covered: int, skipped: int, skips: int, acc: float):
        nonlocal best_canon, best_sel, nodes
        nodes += 1
        if nodes > node_budget:
            raise _StopSearch

        decided = covered | skipped
        branch_v = -1
        forced_v = -1
        forced = 0
        vals_sum = 0.0
        vals_max = -1.0
        skips_left = k - skips
        vals = []
        for u in active:
            if decided >> u & 1:
                continue
            if not has_copy[u]:
                forced += 1
                if forced_v < 0:
                    forced_v = u
                continue
            mv = static_val[u]
            vals_sum += mv
            if mv > vals_max:
                vals_max = mv
                branch_v = u
            vals.append(mv)

        if forced == 0 and not vals:
            canon = _canon_total(index, sel, w)
            if canon < best_canon:
                best_canon = canon
                best_sel = sel.copy()
            return
        if forced > skips_left:
            return
        opt_skips = skips_left - forced
        vals.sort(reverse=True)
        lb1 = (vals_sum - sum(vals[:opt_skips])) / v_h if opt_skips > 0 else vals_sum / v_h
        lb3 = sum(vals[opt_skips :: v_h])
        bound = lb3 if lb3 > lb1 else lb1
        if acc + bound >= best_canon:
            return
        if forced > 0:
            visit(covered, skipped | 1 << forced_v, skips + 1, acc)
            return

        w_break = best_canon - acc - bound + vals_max
        for cid in postings[branch_v]:
            vm = vmasks[cid]
            if vm & skipped or cid in chosen:
                continue
            wc = w[cid]
            if wc >= w_break:
                break
            sub = 0.0
            m = vm & ~decided
            while m:
                u = (m & -m).bit_length() - 1
                m &= m - 1
                sub += static_val[u]
            if acc + wc + lb1 - sub / v_h >= best_canon:
                continue
            sel.append(cid)
            chosen.add(cid)
            visit(covered | vm, skipped, skips, acc + wc)
            chosen.discard(cid)
            sel.pop()
            w_break = best_canon - acc - bound + vals_max
        if skips_left > 0:
            visit(covered, skipped | 1 << branch_v, skips + 1, acc)

    try:
        visit(0, 0, 0, 0.0)
        return best_sel, True
    except _StopSearch:
        return best_sel, False


def max_coverage_under_budget(
    inst,
    h: GraphH,
    budget: float,
    *,
    cap: float = float("inf"),
    within=None,
    index: CopyIndex | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> BudgetSolution:
    """Largest number of vertices coverable by vertex-disjoint copies of
    total weight <= budget; among maximizers, one of minimum weight.

    Solved exactly through the factor dual: coverage n-u is attainable iff
    the optimal factor leaving u uncovered costs at most the budget, and
    that optimum is non-increasing in u, so a binary search over the v_H
    grid of uncovered counts finds the threshold.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    active = _active(inst, within)
    a_count = len(active)
    v_h = h.vertex_count
    if index is None:
        index = enumerate_copies(h, inst, cap, within=within)

    # grid of candidate uncovered counts, ascending
    grid = list(range(a_count % v_h, a_count + 1, v_h))
    solutions: dict[int, TilingSolution | Infeasible] = {}

    def weight_at(u: int) -> float:
        if u not in solutions:
            solutions[u] = _solve(inst, h, FACTOR, u, cap, within, index, node_budget)
        sol = solutions[u]
        return math.inf if isinstance(sol, Infeasible) else sol.total_weight

    lo, hi = 0, len(grid) - 1  # find smallest index with weight <= budget
    while lo < hi:
        mid = (lo + hi) // 2
        if weight_at(grid[mid]) <= budget:
            hi = mid
        else:
            lo = mid + 1
    u_star = grid[lo]
    sol = solutions.get(u_star)
    if sol is None or isinstance(sol, Infeasible) or sol.total_weight > budget:
        # only the empty factor fits the budget
        sol = _empty_solution(FACTOR, cap, a_count, a_count)
        u_star = a_count
    return BudgetSolution(budget=budget, covered=a_count - u_star, solution=sol)


def brute_force_oracle(
    inst,
    h: GraphH,
    mode: str,
    allowed_uncovered: int = 0,
    *,
    cap: float = float("inf"),
    within=None,
):
    """Exhaustive reference solver over the full subset state space.

    Deliberately independent of the branch-and-bound path: no incumbents, no
    pruning; every reachable (undecided-set, skip-budget) state is expanded
    and memoized. Hard limits keep it honest: at most 12 active vertices and
    at most 100000 copies.
    """
    if mode not in (FACTOR, COVER):
        raise ValueError(f"unknown mode {mode!r}")
    if allowed_uncovered < 0:
        raise ValueError("allowed_uncovered must be >= 0")
    active = _active(inst, within)
    a_count = len(active)
    if a_count > ORACLE_MAX_N:
        raise OracleLimitError(
            f"oracle limit exceeded: {a_count} active vertices (max {ORACLE_MAX_N})"
        )
    index = enumerate_copies(h, inst, cap, within=within)
    if len(index) > ORACLE_MAX_COPIES:
        raise OracleLimitError(
            f"oracle limit exceeded: {len(index)} copies (max {ORACLE_MAX_COPIES})"
        )
    if allowed_uncovered >= a_count:
        return _empty_solution(mode, cap, allowed_uncovered, a_count)

    w = index.weights.tolist()
    vmasks = index.vmasks
    postings = index.postings
    edge_keys = [_canon_key(index, cid) for cid in range(len(index))]
    factor = mode == FACTOR

    memo: dict[tuple[int, int], tuple | None] = {}

    def solve(mask: int, skips_left: int):
        if mask == 0:
            return (0.0, (), ())
        key = (mask, skips_left)
        if key in memo:
            return memo[key]
        v = (mask & -mask).bit_length() - 1
        best = None
        for cid in postings[v]:
            vm = vmasks[cid]
            if factor and vm & ~mask:
                continue
            sub = solve(mask & ~vm, skips_left)
            if sub is None:
                continue
            cand_w = w[cid] + sub[0]
            cand_key = tuple(sorted(sub[1] + (edge_keys[cid],)))
            cand = (cand_w, cand_key, sub[2] + (cid,))
            if best is None or (cand_w, cand_key) < (best[0], best[1]):
                best = cand
        if skips_left > 0:
            sub = solve(mask & (mask - 1), skips_left - 1)
            if sub is not None and (best is None or (sub[0], sub[1]) < (best[0], best[1])):
                best = sub
        memo[key] = best
        return best

    active_mask = 0
    for v in active:
        active_mask |= 1 << v
    result = solve(active_mask, allowed_uncovered)
    if result is None:
        return Infeasible(mode=mode, allowed_uncovered=allowed_uncovered, cap=cap)
    return _finish(index, result[2], mode, cap, allowed_uncovered, a_count, True)
