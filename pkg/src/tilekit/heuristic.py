"""Constructive solvers: greedy packing and divide-and-conquer completion.

greedy_partial_factor packs globally-cheapest disjoint copies until a target
number of vertices is left uncovered. divide_conquer_factor drives it level
by level, shrinking the uncovered set geometrically, and lets the exact
solver finish once the leftover fits under base_size. Heuristic output is
re-checked by the independent solution validator after every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .copies import enumerate_copies
from .exact import min_factor
from .graphs import GraphH, analyze
from .solutions import FACTOR, Infeasible, TilingSolution, solution_weight, validate_solution

__all__ = [
    "RecursionParams",
    "default_alpha",
    "greedy_partial_factor",
    "divide_conquer_factor",
]


def default_alpha(d_star: float) -> float:
    """Per-level leftover fraction solving alpha^(1-1/d*) = 1/4."""
    if not d_star > 1:
        raise ValueError("divide and conquer needs d* > 1")
    return 0.25 ** (d_star / (d_star - 1.0))


@dataclass(frozen=True)
class RecursionParams:
    """Tuning knobs for the divide-and-conquer recursion.

    alpha=None picks the fraction with alpha^(1-1/d*) = 1/4. cap_schedule is
    the base edge cap A, doubled per level (level i uses 2^i * A); None
    disables capping. greedy_pool bounds the candidate copies kept per
    vertex in each greedy pass.
    """

    alpha: float | None = None
    base_size: int = 12
    cap_schedule: float | None = None
    greedy_pool: int | None = None

    def __post_init__(self):
        if self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0,1)")
        if self.base_size < 1:
            raise ValueError("base_size must be positive")
        if self.cap_schedule is not None and not self.cap_schedule > 0:
            raise ValueError("cap_schedule must be positive")
        if self.greedy_pool is not None and self.greedy_pool < 1:
            raise ValueError("greedy_pool must be >= 1")


def greedy_partial_factor(
    inst,
    h: GraphH,
    active,
    target_uncovered: int,
    cap: float = float("inf"),
    *,
    pool: int | None = None,
) -> TilingSolution:
    """Pack cheapest-first disjoint copies inside the active set.

    Stops once at most target_uncovered active vertices remain uncovered or
    no copy fits. The result is flagged optimal=False; its recorded
    allowance is whatever was actually achieved, since the greedy may stall
    above the target (a valid outcome).
    """
    if target_uncovered < 0:
        raise ValueError("target_uncovered must be >= 0")
    active = sorted(set(active))
    remaining = len(active)
    chosen = []
    if remaining > target_uncovered:
        index = enumerate_copies(h, inst, cap, within=active)
        if pool is not None:
            keep = set()
            for posting in index.postings:
                keep.update(posting[:pool])
            candidates = sorted(keep)
        else:
            candidates = range(len(index))
        used = 0
        for cid in candidates:
            if index.vmasks[cid] & used:
                continue
            used |= index.vmasks[cid]
            chosen.append(index.copy(cid))
            remaining -= h.vertex_count
            if remaining <= target_uncovered:
                break
    sol = TilingSolution(
        mode=FACTOR,
        copies=tuple(chosen),
        total_weight=solution_weight(chosen),
        uncovered=remaining,
        cap=cap,
        optimal=False,
        allowed_uncovered=max(target_uncovered, remaining),
    )
    problems = validate_solution(sol, h, inst, within=active)
    if problems:
        raise AssertionError(f"greedy produced an invalid solution: {problems}")
    return sol


def divide_conquer_factor(
    inst,
    h: GraphH,
    params: RecursionParams | None = None,
    *,
    diagnostics: list | None = None,
) -> TilingSolution:
    """Complete factor via recursive greedy levels plus an exact finish.

    Level i greedily covers the currently uncovered set down to the largest
    multiple of v_H at most alpha times its size; when the leftover fits
    under base_size the exact solver completes the factor. Appends one
    diagnostic record per level to the diagnostics list when given.
    """
    params = params or RecursionParams()
    report = analyze(h)
    d_star = float(report.d_star)
    if not d_star > 1.0:
        raise ValueError("divide and conquer requires a pattern with d* > 1")
    v_h = h.vertex_count
    if inst.n % v_h != 0:
        raise ValueError("n must be a multiple of the pattern size for a complete factor")
    base_size = max(params.base_size, v_h)
    alpha = params.alpha if params.alpha is not None else default_alpha(d_star)

    active = list(range(inst.n))
    placed = []
    max_cap = 0.0
    level = 0
    while len(active) > base_size:
        n_cur = len(active)
        n_next = (int(alpha * n_cur) // v_h) * v_h
        cap_i = params.cap_schedule * 2.0**level if params.cap_schedule is not None else math.inf
        max_cap = max(max_cap, cap_i)
        sol = greedy_partial_factor(
            inst, h, active, n_next, cap_i, pool=params.greedy_pool
        )
        covered = set()
        for c in sol.copies:
            covered.update(c.vertex_image)
        if diagnostics is not None:
            diagnostics.append(
                {
                    "level": level,
                    "active": n_cur,
                    "target_uncovered": n_next,
                    "copies_placed": len(sol.copies),
                    "level_weight": sol.total_weight,
                    "cap": cap_i,
                }
            )
        placed.extend(sol.copies)
        if not covered:
            break  # greedy stuck; fall through to the exact finish
        active = [v for v in active if v not in covered]
        level += 1

    uncovered = len(active)
    complete = uncovered == 0
    if active:
        if len(active) <= base_size:
            cap_fin = (
                params.cap_schedule * 2.0**level if params.cap_schedule is not None else math.inf
            )
            max_cap = max(max_cap, cap_fin)
            fin = min_factor(inst, h, 0, cap_fin, within=active)
            if not isinstance(fin, Infeasible):
                if diagnostics is not None:
                    diagnostics.append(
                        {
                            "level": "finish",
                            "active": len(active),
                            "target_uncovered": 0,
                            "copies_placed": len(fin.copies),
                            "level_weight": fin.total_weight,
                            "cap": cap_fin,
                        }
                    )
                placed.extend(fin.copies)
                uncovered = 0
                complete = True

    result = TilingSolution(
        mode=FACTOR,
        copies=tuple(placed),
        total_weight=solution_weight(placed),
        uncovered=uncovered,
        cap=max_cap if params.cap_schedule is not None else math.inf,
        optimal=False,
        allowed_uncovered=0 if complete else uncovered,
    )
    problems = validate_solution(result, h, inst)
    if problems:
        raise AssertionError(f"divide and conquer produced an invalid solution: {problems}")
    return result
