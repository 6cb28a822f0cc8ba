"""Independent ground truth: spanning-tree counts and sandpile dynamics."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

import numpy as np

from .graphs import Graph, laplacian
from .matrix import delete_row_col, det

MAX_BRUTEFORCE_EDGES = 24
MAX_SPECTRAL_VERTICES = 50
MAX_SANDPILE_STATES = 5000


class DisconnectedGraph(ValueError):
    pass


class OracleLimitExceeded(ValueError):
    pass


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _is_spanning_tree(n, edges) -> bool:
    parent = list(range(n))
    for u, v in edges:
        ru, rv = _find(parent, u), _find(parent, v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True  # n-1 acyclic edges on n vertices always connect


def spanning_trees_bruteforce(g: Graph) -> int:
    """Count spanning trees by testing every (n-1)-edge subset."""
    if len(g.edges) > MAX_BRUTEFORCE_EDGES:
        raise OracleLimitExceeded("%d edges exceeds the brute-force limit of %d" % (len(g.edges), MAX_BRUTEFORCE_EDGES))
    if not g.is_connected():
        raise DisconnectedGraph("graph is disconnected")
    n = g.vertex_count
    if n == 1:
        return 1
    edges = g.sorted_edges()
    return sum(1 for sub in combinations(edges, n - 1) if _is_spanning_tree(n, sub))


def spanning_trees_matrixtree(g: Graph, cofactors=((0, 0), (0, 1))) -> int:
    """Signed cofactor of the Laplacian, checked to agree on several (i, j)."""
    if g.vertex_count == 1:
        return 1
    L = laplacian(g)
    values = {(-1) ** (i + j) * det(delete_row_col(L, i, j)) for i, j in cofactors}
    if len(values) != 1:
        raise AssertionError("cofactors disagree: %r" % (values,))
    (count,) = values
    if count == 0:
        raise DisconnectedGraph("graph is disconnected")
    return count


def spanning_trees_spectral(g: Graph) -> float:
    """Product of the nonzero Laplacian eigenvalues over n, in floating point."""
    n = g.vertex_count
    if n > MAX_SPECTRAL_VERTICES:
        raise OracleLimitExceeded("spectral oracle limited to %d vertices" % MAX_SPECTRAL_VERTICES)
    if n == 1:
        return 1.0
    eig = np.linalg.eigvalsh(np.array(laplacian(g).tolist(), dtype=float))
    eig = np.sort(eig)[1:]
    # sum of logs keeps large products in range
    return float(math.exp(np.sum(np.log(eig)) - math.log(n)))


@dataclass(frozen=True)
class ChipConfig:
    """Chip counts on every non-sink vertex."""

    chips: Mapping[int, int]
    sink: int

    def __post_init__(self):
        chips = dict(self.chips)
        if self.sink in chips:
            raise ValueError("the sink carries no chip count")
        if any(c < 0 for c in chips.values()):
            raise ValueError("chip counts must be nonnegative")
        object.__setattr__(self, "chips", chips)

    @classmethod
    def from_list(cls, counts, sink: int) -> "ChipConfig":
        """Counts for vertices in ascending order, skipping the sink."""
        verts = [v for v in range(len(counts) + 1) if v != sink]
        return cls(dict(zip(verts, counts)), sink)

    def key(self) -> tuple[int, ...]:
        return tuple(self.chips[v] for v in sorted(self.chips))

    def __eq__(self, other):
        return isinstance(other, ChipConfig) and self.sink == other.sink and self.chips == other.chips

    def __hash__(self):
        return hash((self.sink, self.key()))


def _check_config(cfg: ChipConfig, g: Graph) -> None:
    expected = set(range(g.vertex_count)) - {cfg.sink}
    if set(cfg.chips) != expected:
        raise ValueError("configuration must cover exactly the non-sink vertices")


def _stabilize(chips: dict, sink: int, adj, deg, descending=False):
    """Fire unstable vertices one at a time; returns the firing count per vertex."""
    fired = dict.fromkeys(chips, 0)
    order = sorted(chips, reverse=descending)
    while True:
        for v in order:
            if chips[v] >= deg[v]:
                break
        else:
            return fired
        chips[v] -= deg[v]
        fired[v] += 1
        for w in adj[v]:
            if w != sink:
                chips[w] += 1


def stabilize(cfg: ChipConfig, g: Graph, order: str = "ascending") -> ChipConfig:
    """Topple until every non-sink vertex holds fewer chips than its degree.

    ``order`` picks which unstable vertex fires first (lowest or highest
    index); the abelian property makes the result independent of it.
    """
    _check_config(cfg, g)
    if order not in ("ascending", "descending"):
        raise ValueError("order must be 'ascending' or 'descending'")
    chips = dict(cfg.chips)
    _stabilize(chips, cfg.sink, g.neighbors(), g.degrees(), descending=order == "descending")
    return ChipConfig(chips, cfg.sink)


def is_recurrent(cfg: ChipConfig, g: Graph) -> bool:
    """Burning test: add one chip per sink edge; recurrent iff every vertex fires once and cfg returns."""
    _check_config(cfg, g)
    adj, deg = g.neighbors(), g.degrees()
    if any(cfg.chips[v] >= deg[v] for v in cfg.chips):
        return False
    chips = dict(cfg.chips)
    for w in adj[cfg.sink]:
        chips[w] += 1
    fired = _stabilize(chips, cfg.sink, adj, deg)
    return chips == cfg.chips and all(c == 1 for c in fired.values())


def sandpile_group_order(g: Graph, sink: int = 0, limit: int = MAX_SANDPILE_STATES) -> int:
    """Number of recurrent configurations for the given sink.

    Starts from the maximal stable configuration (always recurrent) and
    explores by "add one chip at v, then stabilize".  The recurrent states
    form a group under this action, so the search visits exactly them; each
    visited state is confirmed by the burning test.
    """
    if not g.is_connected():
        raise DisconnectedGraph("graph is disconnected")
    n = g.vertex_count
    if not 0 <= sink < n:
        raise IndexError("sink %d out of range" % sink)
    if n == 1:
        return 1
    adj, deg = g.neighbors(), g.degrees()
    verts = [v for v in range(n) if v != sink]
    start = ChipConfig({v: deg[v] - 1 for v in verts}, sink)
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if not is_recurrent(cur, g):
            raise AssertionError("reached a non-recurrent state %r" % (cur.key(),))
        for v in verts:
            chips = dict(cur.chips)
            chips[v] += 1
            _stabilize(chips, sink, adj, deg)
            nxt = ChipConfig(chips, sink)
            if nxt not in seen:
                seen.add(nxt)
                if len(seen) > limit:
                    raise OracleLimitExceeded("more than %d recurrent states" % limit)
                queue.append(nxt)
    return len(seen)
