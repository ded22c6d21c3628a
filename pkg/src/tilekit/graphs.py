"""Pattern graphs and their density invariants.

The pattern graph H is the small fixed graph whose copies tile the weighted
host. Everything downstream (copy enumeration, solvers, scaling predictions)
keys off the invariants computed here: the 1-density e/(v-1), its maximum d*
over subgraphs, the maximum 0-density e/v, balancedness flags and the
automorphism count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "GraphH",
    "DensityReport",
    "GraphParseError",
    "PatternTooLargeError",
    "parse_graph",
    "named_graph",
    "disjoint_union",
    "graph_from_spec",
    "analyze",
    "automorphism_count",
]


class GraphParseError(ValueError):
    """Raised when an edge-list source or graph spec string is malformed."""


class PatternTooLargeError(ValueError):
    """Raised when a pattern exceeds the exhaustive-scan size limit."""


@dataclass(frozen=True)
class GraphH:
    """A fixed small pattern graph on vertices {0..vertex_count-1}.

    Edges are unordered pairs stored as (u, v) with u < v. Isolated vertices
    are allowed (they count toward vertex_count), but at least one edge is
    required.
    """

    vertex_count: int
    edges: frozenset[tuple[int, int]]
    label: str = "H"

    def __post_init__(self):
        if self.vertex_count < 2:
            raise ValueError("pattern needs at least 2 vertices")
        if not isinstance(self.edges, frozenset):
            object.__setattr__(self, "edges", frozenset(self.edges))
        if len(self.edges) < 1:
            raise ValueError("pattern needs at least 1 edge")
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.vertex_count):
                raise ValueError(f"edge {e} out of range or not normalized")

    @property
    def v_h(self) -> int:
        return self.vertex_count

    @property
    def e_h(self) -> int:
        return len(self.edges)

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges sorted by endpoints; the canonical iteration order."""
        return sorted(self.edges)

    def adjacency_masks(self) -> list[int]:
        """Per-vertex neighbor sets as bitmasks."""
        adj = [0] * self.vertex_count
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def __str__(self) -> str:
        return f"{self.label}(v={self.vertex_count}, e={len(self.edges)})"


@dataclass(frozen=True)
class DensityReport:
    """Structural invariants of a pattern graph.

    Densities are exact rationals so that ties (balanced vs strictly
    balanced) are decided without floating-point noise.
    """

    d_h: Fraction
    d_star: Fraction
    delta: Fraction
    h_star_vertices: tuple[int, ...]
    delta_witness_vertices: tuple[int, ...]
    strictly_balanced: bool
    balanced: bool
    aut_count: int
    v_h: int
    e_h: int
    label: str


def parse_graph(text: str, label: str = "H") -> GraphH:
    """Parse an edge-list source into a validated pattern graph.

    Lines hold "u v" integer pairs. An optional header line "n <count>"
    declares the vertex count (to include trailing isolated vertices);
    otherwise the vertex count is max endpoint + 1. Blank lines and lines
    starting with '#' are ignored.
    """
    declared_n = None
    edges: set[tuple[int, int]] = set()
    max_endpoint = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n":
            if declared_n is not None:
                raise GraphParseError(f"line {lineno}: duplicate header")
            if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                raise GraphParseError(f"line {lineno}: malformed header {line!r}")
            declared_n = int(parts[1])
            if declared_n < 2:
                raise GraphParseError(f"line {lineno}: header vertex count must be >= 2")
            continue
        if len(parts) != 2:
            raise GraphParseError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: non-integer endpoint in {line!r}") from None
        if u < 0 or v < 0:
            raise GraphParseError(f"line {lineno}: negative endpoint in {line!r}")
        if u == v:
            raise GraphParseError(f"line {lineno}: self-loop at vertex {u}")
        e = (min(u, v), max(u, v))
        if e in edges:
            raise GraphParseError(f"line {lineno}: duplicate edge {e}")
        edges.add(e)
        max_endpoint = max(max_endpoint, e[1])
    if not edges:
        raise GraphParseError("no edges found")
    n = max_endpoint + 1
    if declared_n is not None:
        if declared_n < n:
            raise GraphParseError(
                f"header declares {declared_n} vertices but an endpoint is {max_endpoint}"
            )
        n = declared_n
    return GraphH(vertex_count=n, edges=frozenset(edges), label=label)


def _complete(k: int) -> GraphH:
    if k < 2:
        raise ValueError("complete graph needs k >= 2")
    edges = frozenset((i, j) for i in range(k) for j in range(i + 1, k))
    return GraphH(k, edges, label=f"K{k}")


def _cycle(k: int) -> GraphH:
    if k < 3:
        raise ValueError("cycle needs k >= 3")
    edges = frozenset(tuple(sorted((i, (i + 1) % k))) for i in range(k))
    return GraphH(k, edges, label=f"C{k}")


def _path(k: int) -> GraphH:
    if k < 2:
        raise ValueError("path needs k >= 2 vertices")
    edges = frozenset((i, i + 1) for i in range(k - 1))
    return GraphH(k, edges, label=f"P{k}")


def _lollipop(a: int, b: int) -> GraphH:
    # K_a on {0..a-1} with a path of b extra vertices hanging off vertex 0.
    if a < 2:
        raise ValueError("lollipop clique needs a >= 2")
    if b < 1:
        raise ValueError("lollipop tail needs b >= 1")
    edges = set((i, j) for i in range(a) for j in range(i + 1, a))
    prev = 0
    for t in range(b):
        nxt = a + t
        edges.add((min(prev, nxt), max(prev, nxt)))
        prev = nxt
    return GraphH(a + b, frozenset(edges), label=f"lollipop({a},{b})")


def disjoint_union(g: GraphH, h: GraphH, label: str | None = None) -> GraphH:
    """Disjoint union of two patterns; h's vertices are shifted past g's."""
    off = g.vertex_count
    edges = set(g.edges)
    edges.update((u + off, v + off) for u, v in h.edges)
    if label is None:
        label = f"{g.label}+{h.label}"
    return GraphH(g.vertex_count + h.vertex_count, frozenset(edges), label=label)


_FAMILIES = {
    "complete": (_complete, 1),
    "cycle": (_cycle, 1),
    "path": (_path, 1),
    "lollipop": (_lollipop, 2),
}


def named_graph(name: str, params: list[int]) -> GraphH:
    """Build a standard pattern: complete, cycle, path or lollipop.

    Disjoint unions are composed with :func:`disjoint_union` or the '+'
    syntax of :func:`graph_from_spec` (e.g. "complete:4+complete:2").
    """
    if name == "disjoint_union":
        raise ValueError(
            "disjoint_union takes graphs, not integers; use disjoint_union(g, h) "
            "or a '+' spec such as 'complete:4+complete:2'"
        )
    if name not in _FAMILIES:
        raise ValueError(f"unknown graph family {name!r}; known: {sorted(_FAMILIES)}")
    builder, arity = _FAMILIES[name]
    if len(params) != arity:
        raise ValueError(f"{name} takes {arity} parameter(s), got {len(params)}")
    return builder(*params)


def graph_from_spec(spec: str) -> GraphH:
    """Parse a named-graph spec string: "family:p1,p2", '+' for unions.

    Examples: "complete:3", "lollipop:5,2", "complete:4+complete:2".
    """
    parts = [p.strip() for p in spec.split("+")]
    graphs = []
    for part in parts:
        if not part:
            raise GraphParseError(f"empty term in graph spec {spec!r}")
        if ":" in part:
            name, _, paramstr = part.partition(":")
            try:
                params = [int(p) for p in paramstr.split(",") if p.strip() != ""]
            except ValueError:
                raise GraphParseError(f"non-integer parameter in {part!r}") from None
        else:
            name, params = part, []
        try:
            graphs.append(named_graph(name.strip(), params))
        except ValueError as exc:
            raise GraphParseError(str(exc)) from None
    out = graphs[0]
    for g in graphs[1:]:
        out = disjoint_union(out, g)
    return out


def _subset_vertices(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def automorphism_count(h: GraphH) -> int:
    """Number of adjacency-preserving permutations of the pattern's vertices.

    Counted exactly through a stabilizer chain: at level v, count the images
    w reachable for v by automorphisms fixing 0..v-1 pointwise (each
    witnessed by one completion search), and multiply the orbit sizes.
    """
    n = h.vertex_count
    adj = h.adjacency_masks()
    deg = h.degrees()

    def consistent(mapping: list[int], v: int, w: int) -> bool:
        if deg[v] != deg[w]:
            return False
        for u in range(len(mapping)):
            mu = mapping[u]
            if (adj[u] >> v & 1) != (adj[mu] >> w & 1):
                return False
        return True

    def completes(mapping: list[int], used: int) -> bool:
        v = len(mapping)
        if v == n:
            return True
        for w in range(n):
            if used >> w & 1:
                continue
            if consistent(mapping, v, w):
                mapping.append(w)
                if completes(mapping, used | 1 << w):
                    mapping.pop()
                    return True
                mapping.pop()
        return False

    count = 1
    prefix: list[int] = []
    used_prefix = 0
    for v in range(n):
        orbit = 0
        for w in range(n):
            if used_prefix >> w & 1:
                continue
            if not consistent(prefix, v, w):
                continue
            prefix.append(w)
            if completes(prefix, used_prefix | 1 << w):
                orbit += 1
            prefix.pop()
        count *= orbit
        # extend the chain along the identity, which always completes
        prefix.append(v)
        used_prefix |= 1 << v
    return count


def analyze(h: GraphH, scan_limit: int = 16) -> DensityReport:
    """Compute all density invariants by exhaustive induced-subgraph scan.

    The scan runs over vertex subsets only: for density maximization,
    dropping edges never helps, so induced subgraphs suffice. Ties for the
    densest subgraph are broken by smallest cardinality, then
    lexicographically smallest vertex set.
    """
    n = h.vertex_count
    if n > scan_limit:
        raise PatternTooLargeError(
            f"pattern too large: {n} vertices exceeds the exhaustive-scan limit {scan_limit}"
        )
    adj = h.adjacency_masks()
    d_h = Fraction(h.e_h, n - 1)

    best_star: Fraction | None = None
    best_star_key = None
    best_delta: Fraction | None = None
    best_delta_key = None
    strictly = True

    for mask in range(1, 1 << n):
        size = mask.bit_count()
        e = 0
        m = mask
        while m:
            v = (m & -m).bit_length() - 1
            m &= m - 1
            e += (adj[v] & mask).bit_count()
        e //= 2
        verts = None
        ratio0 = Fraction(e, size)
        if best_delta is None or ratio0 > best_delta:
            verts = _subset_vertices(mask, n)
            best_delta = ratio0
            best_delta_key = (size, verts)
        elif ratio0 == best_delta:
            verts = _subset_vertices(mask, n)
            key = (size, verts)
            if key < best_delta_key:
                best_delta_key = key
        if size >= 2:
            ratio1 = Fraction(e, size - 1)
            if best_star is None or ratio1 > best_star:
                verts = verts or _subset_vertices(mask, n)
                best_star = ratio1
                best_star_key = (size, verts)
            elif ratio1 == best_star:
                verts = verts or _subset_vertices(mask, n)
                key = (size, verts)
                if key < best_star_key:
                    best_star_key = key
            if size < n and ratio1 >= d_h:
                strictly = False

    assert best_star is not None and best_delta is not None
    return DensityReport(
        d_h=d_h,
        d_star=best_star,
        delta=best_delta,
        h_star_vertices=best_star_key[1],
        delta_witness_vertices=best_delta_key[1],
        strictly_balanced=strictly,
        balanced=(best_star == d_h),
        aut_count=automorphism_count(h),
        v_h=h.vertex_count,
        e_h=h.e_h,
        label=h.label,
    )
