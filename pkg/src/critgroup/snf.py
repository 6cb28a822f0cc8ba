"""Smith normal form over the integers with unimodular certificates.

The reduction uses only the three elementary moves: add an integer multiple
of one row/column to another, swap, and negate.  Each move is mirrored on an
identity-seeded accumulator so that ``P @ A @ Q == D`` can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .groups import AbelianGroup
from .matrix import IntMatrix, is_unimodular


@dataclass(frozen=True)
class SnfResult:
    D: IntMatrix
    P: IntMatrix
    Q: IntMatrix
    factors: tuple[int, ...]

    def verify(self, A: IntMatrix) -> bool:
        """Replay the certificate against the input matrix."""
        return (
            self.P @ A @ self.Q == self.D
            and is_unimodular(self.P)
            and is_unimodular(self.Q)
            and self.D.is_diagonal()
            and all(b % a == 0 for a, b in zip(self.factors, self.factors[1:]))
        )


class _Reducer:
    """Mutable working state for one SNF computation."""

    def __init__(self, A: IntMatrix, track: bool):
        self.a = A.tolist()
        self.m, self.n = A.shape
        self.track = track
        if track:
            self.p = IntMatrix.identity(self.m).tolist()
            # Q is kept transposed so column ops become row ops on qt
            self.qt = IntMatrix.identity(self.n).tolist()

    # row moves act on a and p; column moves act on a and qt
    def add_row(self, target, source, c):
        a = self.a
        a[target] = [x + c * y for x, y in zip(a[target], a[source])]
        if self.track:
            p = self.p
            p[target] = [x + c * y for x, y in zip(p[target], p[source])]

    def add_col(self, target, source, c):
        for r in self.a:
            r[target] += c * r[source]
        if self.track:
            qt = self.qt
            qt[target] = [x + c * y for x, y in zip(qt[target], qt[source])]

    def swap_rows(self, i, j):
        if i != j:
            self.a[i], self.a[j] = self.a[j], self.a[i]
            if self.track:
                self.p[i], self.p[j] = self.p[j], self.p[i]

    def swap_cols(self, i, j):
        if i != j:
            for r in self.a:
                r[i], r[j] = r[j], r[i]
            if self.track:
                self.qt[i], self.qt[j] = self.qt[j], self.qt[i]

    def negate_row(self, i):
        self.a[i] = [-x for x in self.a[i]]
        if self.track:
            self.p[i] = [-x for x in self.p[i]]

    def _min_entry(self, t):
        best = None
        for i in range(t, self.m):
            row = self.a[i]
            for j in range(t, self.n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        return best
        return best

    def _clear_cross(self, t):
        """Division-with-remainder sweep of row t and column t.

        Returns the position of the smallest leftover remainder, or None
        once the cross is clean.
        """
        a = self.a
        piv = a[t][t]
        for i in range(t + 1, self.m):
            if a[i][t]:
                q = a[i][t] // piv
                if q:
                    self.add_row(i, t, -q)
        for j in range(t + 1, self.n):
            if a[t][j]:
                q = a[t][j] // piv
                if q:
                    self.add_col(j, t, -q)
        best = None
        for i in range(t + 1, self.m):
            v = a[i][t]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, t)
        for j in range(t + 1, self.n):
            v = a[t][j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), t, j)
        return best

    def _non_divisible(self, t):
        piv = self.a[t][t]
        for i in range(t + 1, self.m):
            row = self.a[i]
            for j in range(t + 1, self.n):
                if row[j] % piv:
                    return i
        return None

    def run(self):
        a = self.a
        for t in range(min(self.m, self.n)):
            found = self._min_entry(t)
            if found is None:
                break
            _, i, j = found
            self.swap_rows(t, i)
            self.swap_cols(t, j)
            while True:
                left = self._clear_cross(t)
                if left is not None:
                    _, i, j = left
                    self.swap_rows(t, i)
                    self.swap_cols(t, j)
                    continue
                bad = self._non_divisible(t)
                if bad is None:
                    break
                # pull the offending row into the pivot row and sweep again
                self.add_row(t, bad, 1)
            if a[t][t] < 0:
                self.negate_row(t)
        return a


def _factors_from_diagonal(diag) -> tuple[int, ...]:
    return tuple(d for d in diag if d != 0)


def smith_normal_form(A: IntMatrix) -> SnfResult:
    red = _Reducer(A, track=True)
    d = IntMatrix(red.run())
    Q = IntMatrix(red.qt).T
    return SnfResult(D=d, P=IntMatrix(red.p), Q=Q, factors=_factors_from_diagonal(d.diagonal()))


def invariant_factors(A: IntMatrix) -> tuple[int, ...]:
    """Nonzero SNF diagonal (unit factors included), in divisibility order."""
    red = _Reducer(A, track=False)
    a = red.run()
    return _factors_from_diagonal(a[i][i] for i in range(min(red.m, red.n)))


def cokernel(A: IntMatrix) -> AbelianGroup:
    """``Z^rows / im(A)`` for ``A`` acting on column vectors."""
    factors = invariant_factors(A)
    return AbelianGroup(free_rank=A.rows - len(factors), torsion=tuple(f for f in factors if f > 1))


ORACLE_MAX_DIM = 8


def _minor_table(rows, cols, a, prev):
    """All size-k minors from the size-(k-1) table by expansion along the last row."""
    out = {}
    for rset in combinations(range(rows), len(next(iter(prev))[0]) + 1):
        last = rset[-1]
        head = rset[:-1]
        arow = a[last]
        for cset in combinations(range(cols), len(rset)):
            total = 0
            k = len(cset)
            for pos, c in enumerate(cset):
                entry = arow[c]
                if entry:
                    sub = prev[(head, cset[:pos] + cset[pos + 1:])]
                    if sub:
                        sign = 1 if (k - 1 + pos) % 2 == 0 else -1
                        total += sign * entry * sub
            out[(rset, cset)] = total
    return out


def snf_naive_oracle(A: IntMatrix) -> tuple[int, ...]:
    """Invariant factors from determinantal divisors.

    ``g_i`` is the gcd of all i x i minors and ``d_i = g_i / g_{i-1}``.  Minors
    are built by cofactor expansion from the previous size, so this path
    shares no code with the elimination engine.
    """
    m, n = A.shape
    if m > ORACLE_MAX_DIM or n > ORACLE_MAX_DIM:
        raise ValueError("determinantal-divisor oracle limited to %dx%d" % (ORACLE_MAX_DIM, ORACLE_MAX_DIM))
    a = A.tolist()
    table = {((), ()): 1}
    factors = []
    g_prev = 1
    for _ in range(min(m, n)):
        table = _minor_table(m, n, a, table)
        g = 0
        for v in table.values():
            g = math.gcd(g, v)
        if g == 0:
            break
        factors.append(g // g_prev)
        g_prev = g
    return tuple(factors)
