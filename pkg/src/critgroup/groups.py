"""Finitely generated abelian groups and closed-form critical groups.

The closed forms cover the layered k-partite graphs for k = 2..6.  Cyclic
summands are produced in whatever order the decomposition lists them and
canonicalized into invariant-factor form before anything is compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .graphs import LayeredSpec, n_coefficient


class InfiniteGroupError(ValueError):
    pass


class ClosedFormUnavailable(ValueError):
    """The requested spec lies outside the proven closed forms."""


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^free_rank`` plus torsion in invariant-factor form."""

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(int(x) for x in self.torsion)
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        if any(x < 2 for x in t):
            raise ValueError("torsion entries must be >= 2, got %r" % (t,))
        if any(b % a for a, b in zip(t, t[1:])):
            raise ValueError("torsion %r is not a divisibility chain" % (t,))
        object.__setattr__(self, "torsion", t)

    @property
    def order(self) -> int:
        return group_order(self)

    def without_free_part(self) -> "AbelianGroup":
        return AbelianGroup(0, self.torsion)

    def direct_sum(self, other: "AbelianGroup") -> "AbelianGroup":
        merged = canonicalize_cyclic(self.torsion + other.torsion)
        return AbelianGroup(self.free_rank + other.free_rank, merged.torsion)

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "invariant_factors": list(self.torsion)}

    @classmethod
    def from_json(cls, data: dict) -> "AbelianGroup":
        return cls(int(data["free_rank"]), tuple(data["invariant_factors"]))

    def __str__(self):
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append("Z^%d" % self.free_rank)
        parts.extend("Z/%d" % d for d in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"


def canonicalize_cyclic(orders: Iterable[int]) -> AbelianGroup:
    """Invariant-factor form of a direct sum of cyclic groups ``Z/orders[i]``."""
    vals = [int(x) for x in orders]
    if any(x < 1 for x in vals):
        raise ValueError("cyclic orders must be positive, got %r" % (vals,))
    vals = sorted(x for x in vals if x > 1)
    changed = True
    while changed:
        changed = False
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                a, b = vals[i], vals[j]
                if b % a:
                    g = math.gcd(a, b)
                    vals[i], vals[j] = g, a // g * b
                    changed = True
        vals = sorted(x for x in vals if x > 1)
    return AbelianGroup(0, tuple(vals))


def group_order(g: AbelianGroup) -> int:
    if g.free_rank:
        raise InfiniteGroupError("group has free rank %d" % g.free_rank)
    return math.prod(g.torsion)


def _gcd(*xs: int) -> int:
    return reduce(math.gcd, xs)


def _as_parts(spec) -> tuple[int, ...]:
    return spec.parts if isinstance(spec, LayeredSpec) else tuple(spec)


def middle_factors(spec: LayeredSpec) -> list[int]:
    """Multiset {N_i with multiplicity n_i - 2}, flattened in part order."""
    out = []
    for i, n in enumerate(spec.parts, start=1):
        out.extend([n_coefficient(spec, i)] * (n - 2))
    return out


def sigma_pair_k5(spec: LayeredSpec) -> tuple[int, int]:
    p = _as_parts(spec)
    if len(p) != 5:
        raise ValueError("sigma_pair_k5 needs k = 5, got k = %d" % len(p))
    _, n2, n3, n4, _ = p
    s1 = _gcd(n2, n4, n2 + n4, n2 * n3)
    s2 = _gcd(n2 * n2, n2 * n4, n2 * n3 * n4, n2 * (n2 + n4), n4 * (n2 + n4), n2 * n3 * (n2 + n4))
    return s1, s2


def sigma_pair_k6(spec: LayeredSpec) -> tuple[int, int]:
    p = _as_parts(spec)
    if len(p) != 6:
        raise ValueError("sigma_pair_k6 needs k = 6, got k = %d" % len(p))
    _, n2, n3, n4, n5, _ = p
    s24 = n2 + n4
    s35 = n3 + n5
    s1 = _gcd(n2 * n3, n2 * n5, n3 * s24, n5 * s24, n2 * s35, n4 * s35)
    s2 = _gcd(
        n2 * n3 * n3 * s24,
        n2 * n3 * n5 * s24,
        n2 * n3 * s24 * s35,
        n2 * n2 * n5 * s35,
        n5 * s24 * s24 * s35,
    )
    return s1, s2


def closed_form_cyclic_list(spec: LayeredSpec) -> list[int]:
    """Cyclic orders of K(G) as the decomposition lists them (uncanonicalized)."""
    p = spec.parts
    k = len(p)
    if not 2 <= k <= 6:
        raise ClosedFormUnavailable("closed forms exist only for 2 <= k <= 6, got k = %d" % k)
    if min(p) < 2:
        raise ClosedFormUnavailable("closed forms need every part size >= 2, got %s" % spec)
    if k == 3:
        return closed_form_cyclic_list(LayeredSpec((p[0] + p[2], p[1])))
    mids = middle_factors(spec)
    n = (None,) + p  # 1-based access
    if k == 2:
        return mids + [n[1] * n[2]]
    head = n[2] * (n[1] + n[3])
    tail = n[k - 1] * (n[k - 2] + n[k])
    if k == 4:
        return mids + [n[2] * n[3], head, tail]
    if k == 5:
        s1, s2 = sigma_pair_k5(spec)
        last = n[2] * n[3] * n[4] * (n[2] + n[4])
    else:
        s1, s2 = sigma_pair_k6(spec)
        last = n[2] * n[3] * n[4] * n[5] * (n[2] + n[4]) * (n[3] + n[5])
    return mids + [head, tail, s1, s2 // s1, last // s2]


def closed_form(spec: LayeredSpec) -> AbelianGroup:
    """K(G_{n1..nk}) from the closed-form decompositions (free summand excluded)."""
    return canonicalize_cyclic(closed_form_cyclic_list(spec))


def spanning_trees_formula(spec: LayeredSpec) -> int:
    """prod_i N_i^(n_i - 1) * prod_{1<i<k} n_i."""
    p = spec.parts
    k = len(p)
    out = 1
    for i in range(1, k + 1):
        out *= n_coefficient(spec, i) ** (p[i - 1] - 1)
    for i in range(2, k):
        out *= p[i - 1]
    return out
