"""Enumeration of embedded pattern copies in the weighted host.

Copies are subgraphs (not induced), deduplicated by pattern automorphism:
each distinct host edge set (plus, for patterns with isolated vertices, the
unordered set of extra host vertices) appears exactly once. An optional
per-edge weight cap prunes the host before enumeration, realizing the
"forbidden edges" semantics of capped factors and covers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graphs import GraphH

__all__ = [
    "PlacedCopy",
    "CopyIndex",
    "CopyOverflowError",
    "enumerate_copies",
    "cheapest_copy",
    "DEFAULT_COPY_LIMIT",
]

DEFAULT_COPY_LIMIT = 10**8


class CopyOverflowError(RuntimeError):
    """Raised when enumeration would exceed the configured copy limit."""


@dataclass(frozen=True)
class PlacedCopy:
    """One embedded copy of the pattern in the host.

    vertex_image is sorted; embedding[p] gives the host vertex carrying
    pattern vertex p; edge_list is sorted by endpoints and the weight is the
    sum of those edge weights in exactly that order.
    """

    vertex_image: tuple[int, ...]
    embedding: tuple[int, ...]
    edge_list: tuple[tuple[int, int], ...]
    weight: float

    def vertex_mask(self) -> int:
        m = 0
        for v in self.vertex_image:
            m |= 1 << v
        return m


class CopyIndex:
    """All copies of a pattern in one host, sorted by ascending weight.

    Ties are broken by lexicographic host edge list, so the order is stable.
    Internally the index keeps parallel arrays (weights, vertex bitmasks,
    postings) that the solvers consume; PlacedCopy objects are materialized
    on demand.
    """

    __slots__ = (
        "n",
        "cap",
        "pattern",
        "weights",
        "vmasks",
        "_embeddings",
        "_edge_lists",
        "postings",
        "__dict__",
    )

    def __init__(self, pattern: GraphH, n: int, cap: float, records):
        # records: list of (weight, edge_list, embedding, vmask), pre-sorted
        self.pattern = pattern
        self.n = n
        self.cap = cap
        self.weights = np.array([r[0] for r in records], dtype=np.float64)
        self._edge_lists = [r[1] for r in records]
        self._embeddings = [r[2] for r in records]
        self.vmasks = [r[3] for r in records]
        postings: list[list[int]] = [[] for _ in range(n)]
        for idx, mask in enumerate(self.vmasks):
            m = mask
            while m:
                v = (m & -m).bit_length() - 1
                m &= m - 1
                postings[v].append(idx)
        self.postings = postings

    def __len__(self) -> int:
        return len(self.vmasks)

    def copy(self, i: int) -> PlacedCopy:
        emb = self._embeddings[i]
        return PlacedCopy(
            vertex_image=tuple(sorted(emb)),
            embedding=emb,
            edge_list=self._edge_lists[i],
            weight=float(self.weights[i]),
        )

    @cached_property
    def copies(self) -> list[PlacedCopy]:
        return [self.copy(i) for i in range(len(self))]

    def edge_list(self, i: int) -> tuple[tuple[int, int], ...]:
        return self._edge_lists[i]


def _components(h: GraphH) -> tuple[list[list[int]], list[int]]:
    """Connected components with >= 1 edge, plus the isolated vertices."""
    adj = h.adjacency_masks()
    seen = 0
    comps = []
    isolated = []
    for s in range(h.vertex_count):
        if seen >> s & 1:
            continue
        if adj[s] == 0:
            isolated.append(s)
            seen |= 1 << s
            continue
        stack = [s]
        comp = []
        seen |= 1 << s
        while stack:
            u = stack.pop()
            comp.append(u)
            m = adj[u] & ~seen
            while m:
                w = (m & -m).bit_length() - 1
                m &= m - 1
                seen |= 1 << w
                stack.append(w)
        comps.append(sorted(comp))
    return comps, isolated


def _local_graph(h: GraphH, comp: list[int]) -> tuple[list[int], list[tuple[int, int]]]:
    """Adjacency masks and edges of a component relabeled to 0..c-1."""
    pos = {v: i for i, v in enumerate(comp)}
    c = len(comp)
    adj = [0] * c
    edges = []
    for u, v in h.edges:
        if u in pos and v in pos:
            a, b = pos[u], pos[v]
            adj[a] |= 1 << b
            adj[b] |= 1 << a
            edges.append((min(a, b), max(a, b)))
    return adj, sorted(edges)


def _find_isomorphism(adj_a: list[int], adj_b: list[int]) -> list[int] | None:
    """One isomorphism a -> b between two small graphs, or None."""
    c = len(adj_a)
    if len(adj_b) != c:
        return None
    deg_a = [adj_a[i].bit_count() for i in range(c)]
    deg_b = [adj_b[i].bit_count() for i in range(c)]
    if sorted(deg_a) != sorted(deg_b):
        return None
    mapping = [-1] * c
    used = [False] * c

    def backtrack(v: int) -> bool:
        if v == c:
            return True
        for w in range(c):
            if used[w] or deg_a[v] != deg_b[w]:
                continue
            ok = True
            for u in range(v):
                if (adj_a[u] >> v & 1) != (adj_b[mapping[u]] >> w & 1):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used[w] = True
                if backtrack(v + 1):
                    return True
                used[w] = False
        return False

    return mapping[:] if backtrack(0) else None


def _automorphisms(adj: list[int]) -> list[tuple[int, ...]]:
    """All automorphisms of a small graph, as permutation tuples."""
    c = len(adj)
    deg = [adj[i].bit_count() for i in range(c)]
    out = []
    mapping = [-1] * c
    used = [False] * c

    def backtrack(v: int):
        if v == c:
            out.append(tuple(mapping))
            return
        for w in range(c):
            if used[w] or deg[v] != deg[w]:
                continue
            ok = True
            for u in range(v):
                if (adj[u] >> v & 1) != (adj[mapping[u]] >> w & 1):
                    ok = False
                    break
            if ok:
                mapping[v] = w
                used[w] = True
                backtrack(v + 1)
                used[w] = False
        return

    backtrack(0)
    return out


def _is_complete(adj: list[int]) -> bool:
    c = len(adj)
    full = (1 << c) - 1
    return all(adj[i] == full ^ (1 << i) for i in range(c))


def _search_order(adj: list[int]) -> list[int]:
    """Connected-first vertex order: max degree seed, then max placed-degree."""
    c = len(adj)
    deg = [adj[i].bit_count() for i in range(c)]
    start = max(range(c), key=lambda i: (deg[i], -i))
    order = [start]
    placed = 1 << start
    while len(order) < c:
        best, best_key = None, None
        for v in range(c):
            if placed >> v & 1:
                continue
            key = ((adj[v] & placed).bit_count(), deg[v], -v)
            if best_key is None or key > best_key:
                best, best_key = v, key
        order.append(best)
        placed |= 1 << best
    return order


def _component_copies(adj: list[int], host_adj: list[int], host_vertices: list[int]):
    """Distinct copies of one connected component in the filtered host.

    Yields host-vertex tuples indexed by local pattern vertex. Dedup takes
    the embedding that is lexicographically minimal within its automorphism
    orbit.
    """
    c = len(adj)
    if _is_complete(adj):
        # combinations are already canonical representatives
        for combo in itertools.combinations(host_vertices, c):
            ok = True
            for a in range(c):
                ha = combo[a]
                for b in range(a + 1, c):
                    if not host_adj[ha] >> combo[b] & 1:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield combo
        return

    order = _search_order(adj)
    auts = [a for a in _automorphisms(adj) if any(a[i] != i for i in range(c))]
    phi = [-1] * c

    def minimal(emb: tuple[int, ...]) -> bool:
        for sigma in auts:
            for p in range(c):
                other = emb[sigma[p]]
                if other < emb[p]:
                    return False
                if other > emb[p]:
                    break
        return True

    def backtrack(level: int, used: int):
        if level == c:
            emb = tuple(phi)
            if minimal(emb):
                yield emb
            return
        v = order[level]
        nbr_placed = adj[v]
        cand = None
        for prior in order[:level]:
            if nbr_placed >> prior & 1:
                m = host_adj[phi[prior]]
                cand = m if cand is None else cand & m
        if cand is None:
            iterable = host_vertices
        else:
            cand &= ~used
            iterable = []
            m = cand
            while m:
                w = (m & -m).bit_length() - 1
                m &= m - 1
                iterable.append(w)
        for w in iterable:
            if used >> w & 1:
                continue
            phi[v] = w
            yield from backtrack(level + 1, used | 1 << w)
            phi[v] = -1

    yield from backtrack(0, 0)


def enumerate_copies(
    h: GraphH,
    inst,
    cap: float = float("inf"),
    *,
    within=None,
    limit: int = DEFAULT_COPY_LIMIT,
) -> CopyIndex:
    """Index every copy of h in the cap-filtered host, sorted by weight.

    within restricts the host to a vertex subset (default: all n vertices).
    Raises CopyOverflowError when the copy count would exceed limit.
    """
    n = inst.n
    if h.vertex_count > n:
        raise ValueError(f"pattern ({h.vertex_count} vertices) larger than host (n={n})")
    if within is None:
        host_vertices = list(range(n))
    else:
        host_vertices = sorted(set(within))
        if host_vertices and not (0 <= host_vertices[0] and host_vertices[-1] < n):
            raise ValueError("within contains vertices outside the host")
        if h.vertex_count > len(host_vertices):
            return CopyIndex(h, n, cap, [])
    active_mask = 0
    for v in host_vertices:
        active_mask |= 1 << v

    w_list = inst.weights.tolist()

    # host adjacency under the cap, restricted to the active set
    host_adj = [0] * n
    capped = cap != float("inf")
    for j in host_vertices:
        base = j * (j - 1) // 2
        for i in host_vertices:
            if i >= j:
                break
            if not capped or w_list[base + i] <= cap:
                host_adj[i] |= 1 << j
                host_adj[j] |= 1 << i

    comps, isolated = _components(h)
    z = len(isolated)

    # group components into isomorphism classes; remember, per component, an
    # isomorphism onto its class representative
    class_adjs: list[list[int]] = []
    class_members: list[list[tuple[list[int], list[int]]]] = []  # (orig labels, iso map)
    for comp in comps:
        adj, _ = _local_graph(h, comp)
        placedq = False
        for cid, rep_adj in enumerate(class_adjs):
            iso = _find_isomorphism(adj, rep_adj)
            if iso is not None:
                class_members[cid].append((comp, iso))
                placedq = True
                break
        if not placedq:
            class_adjs.append(adj)
            class_members.append([(comp, list(range(len(comp))))])

    # enumerate each class's component copies
    per_class: list[list[tuple[tuple[int, ...], int]]] = []
    for cid, rep_adj in enumerate(class_adjs):
        found = []
        for emb in _component_copies(rep_adj, host_adj, host_vertices):
            mask = 0
            for w in emb:
                mask |= 1 << w
            found.append((emb, mask))
            if len(found) > limit:
                raise CopyOverflowError(
                    f"more than {limit} component copies; use a smaller cap"
                )
        per_class.append(found)

    # combine one copy per component, disjointly; within a class the chosen
    # copy indices increase, so unordered selections appear exactly once
    records = []
    flat_members = [m for members in class_members for m in members]
    class_of = []
    for cid, members in enumerate(class_members):
        class_of.extend([cid] * len(members))
    k_parts = len(flat_members)

    def emit(choice: list[tuple[tuple[int, ...], int]], used: int):
        embedding = [-1] * h.vertex_count
        for (comp, iso), (emb, _mask) in zip(flat_members, choice):
            for li, orig in enumerate(comp):
                embedding[orig] = emb[iso[li]]
        free = active_mask & ~used
        free_vertices = []
        m = free
        while m:
            w = (m & -m).bit_length() - 1
            m &= m - 1
            free_vertices.append(w)
        slots = [list(extra) for extra in itertools.combinations(free_vertices, z)] if z else [[]]
        for extra in slots:
            emb_full = embedding[:]
            for p, w in zip(isolated, extra):
                emb_full[p] = w
            edge_list = tuple(
                sorted((min(emb_full[u], emb_full[v]), max(emb_full[u], emb_full[v])) for u, v in h.edges)
            )
            weight = 0.0
            for a, b in edge_list:
                weight += w_list[b * (b - 1) // 2 + a]
            vmask = used
            for w in extra:
                vmask |= 1 << w
            records.append((weight, edge_list, tuple(emb_full), vmask))
            if len(records) > limit:
                raise CopyOverflowError(f"more than {limit} copies; use a smaller cap")

    def combine(part: int, used: int, choice: list, last_index_in_class: int):
        if part == k_parts:
            emit(choice, used)
            return
        cid = class_of[part]
        start = last_index_in_class + 1 if part > 0 and class_of[part - 1] == cid else 0
        options = per_class[cid]
        for idx in range(start, len(options)):
            emb, mask = options[idx]
            if mask & used:
                continue
            choice.append((emb, mask))
            combine(part + 1, used | mask, choice, idx)
            choice.pop()

    combine(0, 0, [], -1)

    records.sort(key=lambda r: (r[0], r[1]))
    return CopyIndex(h, n, cap, records)


def cheapest_copy(h_sub: GraphH, inst, *, within=None) -> PlacedCopy:
    """Minimum-weight copy of a pattern; ties broken by lexicographic edges."""
    index = enumerate_copies(h_sub, inst, float("inf"), within=within)
    if len(index) == 0:
        raise ValueError("host contains no copy of the pattern")
    return index.copy(0)
