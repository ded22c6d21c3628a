"""Tiling solutions: containers, validation, and text records.

A solution is a collection of placed copies in factor mode (vertex-disjoint)
or cover mode (overlaps allowed, shared edges paid once per copy). Weights
follow a mandated summation order so that equal solutions produce
bit-identical totals: within a copy, edges sorted by endpoints; across
copies, copies sorted by their edge lists.
"""

from __future__ import annotations

from dataclasses import dataclass

from .copies import PlacedCopy
from .graphs import GraphH

__all__ = [
    "TilingSolution",
    "BudgetSolution",
    "Infeasible",
    "canonical_copy_order",
    "solution_weight",
    "validate_solution",
    "render_solution_record",
    "parse_solution_record",
    "format_float",
]

FACTOR = "factor"
COVER = "cover"


def format_float(x: float) -> str:
    """17 significant digits; round-trip safe for 64-bit reals."""
    if x == float("inf"):
        return "inf"
    return format(x, ".17g")


@dataclass(frozen=True)
class Infeasible:
    """No tiling satisfies the constraints; the optimum is +infinity."""

    mode: str
    allowed_uncovered: int
    cap: float

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class TilingSolution:
    """A factor or cover together with its accounting.

    optimal=False marks incumbents from exhausted node budgets or heuristic
    construction; uncovered counts active host vertices in no copy.
    """

    mode: str
    copies: tuple[PlacedCopy, ...]
    total_weight: float
    uncovered: int
    cap: float
    optimal: bool
    allowed_uncovered: int

    @property
    def covered(self) -> int:
        seen = set()
        for c in self.copies:
            seen.update(c.vertex_image)
        return len(seen)


@dataclass(frozen=True)
class BudgetSolution:
    """Budget dual: the largest coverage attainable at total weight <= budget."""

    budget: float
    covered: int
    solution: TilingSolution


def canonical_copy_order(copies) -> list[PlacedCopy]:
    return sorted(copies, key=lambda c: (c.edge_list, c.vertex_image))


def solution_weight(copies) -> float:
    """Total weight in the mandated summation order."""
    total = 0.0
    for c in canonical_copy_order(copies):
        total += c.weight
    return total


def _copy_weight_from(inst, edge_list) -> float:
    total = 0.0
    for a, b in edge_list:
        total += inst.weight(a, b)
    return total


def validate_solution(
    sol: TilingSolution,
    h: GraphH,
    inst,
    *,
    within=None,
) -> list[str]:
    """Independently check every structural invariant; returns violations.

    An empty list means the solution is valid: copies are genuine embeddings
    of the pattern, disjoint in factor mode, cap-compliant, the coverage
    accounting matches, and all weights recompute bit-for-bit.
    """
    problems: list[str] = []
    active = set(range(inst.n)) if within is None else set(within)
    pattern_edges = h.edge_list()

    union: set[int] = set()
    masks = []
    for k, c in enumerate(sol.copies):
        tag = f"copy {k}"
        if len(c.embedding) != h.vertex_count:
            problems.append(f"{tag}: embedding has wrong arity")
            continue
        if len(set(c.embedding)) != h.vertex_count:
            problems.append(f"{tag}: embedding not injective")
        if tuple(sorted(c.embedding)) != c.vertex_image:
            problems.append(f"{tag}: vertex_image inconsistent with embedding")
        if not set(c.vertex_image) <= active:
            problems.append(f"{tag}: uses host vertices outside the active set")
        expect_edges = tuple(
            sorted(
                (min(c.embedding[u], c.embedding[v]), max(c.embedding[u], c.embedding[v]))
                for u, v in pattern_edges
            )
        )
        if expect_edges != c.edge_list:
            problems.append(f"{tag}: edge list is not the image of the pattern edges")
        if len(c.edge_list) != h.e_h:
            problems.append(f"{tag}: wrong edge count")
        for a, b in c.edge_list:
            if inst.weight(a, b) > sol.cap:
                problems.append(f"{tag}: edge ({a},{b}) exceeds cap {sol.cap}")
        w = _copy_weight_from(inst, c.edge_list)
        if w != c.weight:
            problems.append(f"{tag}: stored weight {c.weight!r} != recomputed {w!r}")
        union.update(c.vertex_image)
        masks.append(set(c.vertex_image))

    if sol.mode == FACTOR:
        for a in range(len(masks)):
            for b in range(a + 1, len(masks)):
                if masks[a] & masks[b]:
                    problems.append(f"copies {a} and {b} share vertices in factor mode")
                    break
    elif sol.mode != COVER:
        problems.append(f"unknown mode {sol.mode!r}")

    uncovered = len(active - union)
    if uncovered != sol.uncovered:
        problems.append(f"uncovered is {uncovered}, recorded {sol.uncovered}")
    if sol.uncovered > sol.allowed_uncovered:
        problems.append(
            f"uncovered {sol.uncovered} exceeds allowance {sol.allowed_uncovered}"
        )
    total = solution_weight(sol.copies)
    if total != sol.total_weight:
        problems.append(
            f"total weight {sol.total_weight!r} != recomputed {total!r}"
        )
    return problems


def render_solution_record(sol: TilingSolution) -> str:
    """Serialize as a structured text record; copies as host-vertex tuples."""
    lines = [
        "solution"
        f" mode={sol.mode}"
        f" k={sol.allowed_uncovered}"
        f" cap={format_float(sol.cap)}"
        f" total_weight={format_float(sol.total_weight)}"
        f" uncovered={sol.uncovered}"
        f" optimal={'true' if sol.optimal else 'false'}"
    ]
    for c in sol.copies:
        lines.append("copy " + " ".join(str(v) for v in c.embedding))
    lines.append("end")
    return "\n".join(lines) + "\n"


def parse_solution_record(text: str, h: GraphH, inst) -> TilingSolution:
    """Rebuild a solution from its text record, recomputing weights."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("solution"):
        raise ValueError("record must start with a 'solution' line")
    fields = {}
    for tok in lines[0].split()[1:]:
        key, _, value = tok.partition("=")
        fields[key] = value
    mode = fields.get("mode", "")
    allowed = int(fields.get("k", "0"))
    cap = float(fields.get("cap", "inf"))
    optimal = fields.get("optimal", "true") == "true"
    copies = []
    body = lines[1:]
    if body and body[-1] == "end":
        body = body[:-1]
    for ln in body:
        if not ln.startswith("copy"):
            raise ValueError(f"unexpected record line {ln!r}")
        emb = tuple(int(t) for t in ln.split()[1:])
        if len(emb) != h.vertex_count:
            raise ValueError("copy line has wrong number of host vertices")
        edge_list = tuple(
            sorted((min(emb[u], emb[v]), max(emb[u], emb[v])) for u, v in h.edge_list())
        )
        copies.append(
            PlacedCopy(
                vertex_image=tuple(sorted(emb)),
                embedding=emb,
                edge_list=edge_list,
                weight=_copy_weight_from(inst, edge_list),
            )
        )
    covered = set()
    for c in copies:
        covered.update(c.vertex_image)
    return TilingSolution(
        mode=mode,
        copies=tuple(copies),
        total_weight=solution_weight(copies),
        uncovered=inst.n - len(covered),
        cap=cap,
        optimal=optimal,
        allowed_uncovered=allowed,
    )
