"""Simple undirected graphs, the layered k-partite family, and Laplacians."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .matrix import IntMatrix


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class LayeredSpec:
    """Part sizes (n_1, ..., n_k) of G_{n_1..n_k}; part i is joined to parts i-1 and i+1."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(n) for n in self.parts)
        if len(parts) < 2:
            raise SpecError("need at least two parts, got %r" % (parts,))
        if any(n < 1 for n in parts):
            raise SpecError("part sizes must be positive, got %r" % (parts,))
        object.__setattr__(self, "parts", parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def vertex_count(self) -> int:
        return sum(self.parts)

    def offsets(self) -> list[int]:
        out = [0]
        for n in self.parts:
            out.append(out[-1] + n)
        return out

    def __str__(self):
        return ",".join(str(n) for n in self.parts)

    @classmethod
    def parse(cls, text: str) -> "LayeredSpec":
        """Parse ``"n1,n2,...,nk"``: comma-separated positive decimals, no whitespace."""
        if not text or any(ch.isspace() for ch in text):
            raise SpecError("spec must be comma-separated integers without whitespace: %r" % text)
        fields = text.split(",")
        if not all(f.isdigit() for f in fields):
            raise SpecError("spec must be comma-separated positive integers: %r" % text)
        return cls(tuple(int(f) for f in fields))


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: frozenset = field(default_factory=frozenset)
    part_of: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            u, v = e
            if u == v:
                raise ValueError("self-loop at vertex %d" % u)
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError("edge %r out of range" % (e,))
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.part_of is not None:
            part_of = tuple(self.part_of)
            if len(part_of) != self.vertex_count:
                raise ValueError("part_of must label every vertex")
            for u, v in norm:
                if part_of[u] == part_of[v]:
                    raise ValueError("edge (%d, %d) lies inside part %d" % (u, v, part_of[u]))
            object.__setattr__(self, "part_of", part_of)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], part_of=None) -> "Graph":
        seen = set()
        for u, v in edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError("duplicate edge %r" % (key,))
            seen.add(key)
        return cls(n, frozenset(seen), part_of)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.vertex_count)]
        for u, v in self.sorted_edges():
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        adj = self.neighbors()
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == self.vertex_count


def _coerce(spec) -> LayeredSpec:
    if isinstance(spec, LayeredSpec):
        return spec
    if isinstance(spec, str):
        return LayeredSpec.parse(spec)
    return LayeredSpec(tuple(spec))


def layered_kpartite(spec) -> Graph:
    """G_{n1..nk} with vertices numbered part by part."""
    spec = _coerce(spec)
    off = spec.offsets()
    part_of = tuple(i for i, n in enumerate(spec.parts) for _ in range(n))
    edges = [
        (u, v)
        for i in range(spec.k - 1)
        for u in range(off[i], off[i + 1])
        for v in range(off[i + 1], off[i + 2])
    ]
    return Graph(spec.vertex_count, frozenset(edges), part_of)


def laplacian(g: Graph) -> IntMatrix:
    """Degree matrix minus adjacency matrix."""
    n = g.vertex_count
    L = [[0] * n for _ in range(n)]
    for u, v in g.edges:
        L[u][v] = L[v][u] = -1
        L[u][u] += 1
        L[v][v] += 1
    return IntMatrix(L)


def n_coefficient(spec, i: int) -> int:
    """Common degree N_i of the vertices in part ``i`` (1-based)."""
    spec = _coerce(spec)
    p, k = spec.parts, spec.k
    if not 1 <= i <= k:
        raise IndexError("part index %d out of range 1..%d" % (i, k))
    if i == 1:
        return p[1]
    if i == k:
        return p[k - 2]
    return p[i - 2] + p[i]


def layered_laplacian_direct(spec) -> IntMatrix:
    """Block-tridiagonal Laplacian: N_i I on the diagonal, -J between consecutive parts."""
    spec = _coerce(spec)
    off = spec.offsets()
    n = spec.vertex_count
    L = [[0] * n for _ in range(n)]
    for i in range(spec.k):
        Ni = n_coefficient(spec, i + 1)
        for r in range(off[i], off[i + 1]):
            L[r][r] = Ni
        for j in (i - 1, i + 1):
            if 0 <= j < spec.k:
                for r in range(off[i], off[i + 1]):
                    for c in range(off[j], off[j + 1]):
                        L[r][c] = -1
    return IntMatrix(L)


def _random_tree(n: int, seed: int) -> Graph:
    """Uniform labelled tree from a random Pruefer sequence."""
    if n < 2:
        return Graph(max(n, 1), frozenset())
    rng = random.Random(seed)
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(v for v in range(n) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [w for w in range(n) if degree[w] == 1]
    edges.append((u, v))
    return Graph.from_edges(n, edges)


def standard_family(name: str, *params: int, seed: int = 0) -> Graph:
    if name == "cycle":
        (n,) = params
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])
    if name == "complete":
        (n,) = params
        return Graph.from_edges(n, combinations(range(n), 2))
    if name == "complete_bipartite":
        a, b = params
        return layered_kpartite(LayeredSpec((a, b)))
    if name == "path":
        (n,) = params
        return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    if name == "tree_random":
        (n,) = params
        return _random_tree(n, seed)
    raise ValueError("unknown graph family %r" % name)


def to_dot(g: Graph, name: str = "G") -> str:
    """Undirected DOT text; parts become ``cluster_i`` subgraphs, vertices ``p{i}_v{j}``."""
    if g.part_of is None:
        labels = ["v%d" % v for v in range(g.vertex_count)]
        groups = {}
    else:
        labels = []
        groups = {}
        counter = {}
        for v, part in enumerate(g.part_of):
            counter[part] = counter.get(part, 0) + 1
            labels.append("p%d_v%d" % (part + 1, counter[part]))
            groups.setdefault(part, []).append(labels[-1])
    lines = ["graph %s {" % name]
    if groups:
        for part in sorted(groups):
            lines.append("  subgraph cluster_%d {" % (part + 1))
            lines.append('    label="part %d";' % (part + 1))
            for lbl in groups[part]:
                lines.append("    %s;" % lbl)
            lines.append("  }")
    else:
        for lbl in labels:
            lines.append("  %s;" % lbl)
    for u, v in g.sorted_edges():
        lines.append("  %s -- %s;" % (labels[u], labels[v]))
    lines.append("}")
    return "\n".join(lines) + "\n"
