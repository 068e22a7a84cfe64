"""Exact sparse linear algebra over the rationals.

Ranks are computed either by fraction-free integer elimination with
Markowitz-style pivoting, or by elimination modulo at least two independent
31-bit primes with a fallback to exact elimination on disagreement.  No
floating point anywhere.
"""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd


class SparseMatrix:
    """Immutable-ish sparse matrix; entries: {(row, col): nonzero Fraction}."""

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        ent = {}
        for (r, c), v in (entries or {}).items():
            if not 0 <= r < rows or not 0 <= c < cols:
                raise ValueError("entry out of range")
            v = Fraction(v)
            if v:
                ent[(r, c)] = v
        self.entries = ent

    @classmethod
    def from_columns(cls, rows, columns):
        """columns: list of {row: value} dicts."""
        ent = {}
        for c, col in enumerate(columns):
            for r, v in col.items():
                ent[(r, c)] = v
        return cls(rows, len(columns), ent)

    def triplets(self):
        """Sorted (row, col, numerator, denominator) tuples."""
        return [(r, c, v.numerator, v.denominator)
                for (r, c), v in sorted(self.entries.items())]

    def transpose(self):
        return SparseMatrix(self.cols, self.rows,
                            {(c, r): v for (r, c), v in self.entries.items()})

    def column(self, c):
        return {r: v for (r, cc), v in self.entries.items() if cc == c}

    def matmul(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        a_cols = {}
        for (r, c), v in self.entries.items():
            a_cols.setdefault(c, []).append((r, v))
        b_cols = {}
        for (r, c), v in other.entries.items():
            b_cols.setdefault(c, []).append((r, v))
        out = {}
        for c, col in b_cols.items():
            acc = {}
            for k, v in col:
                for r, w in a_cols.get(k, ()):
                    acc[r] = acc.get(r, 0) + w * v
            for r, v in acc.items():
                if v:
                    out[(r, c)] = v
        return SparseMatrix(self.rows, other.cols, out)

    def is_zero(self):
        return not self.entries

    def nnz(self):
        return len(self.entries)

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self):
        return "SparseMatrix(%dx%d, nnz=%d)" % (self.rows, self.cols, self.nnz())


def _integer_rows(m):
    """Rows as {col: int}, each row scaled to integers and gcd-reduced."""
    rows = {}
    for (r, c), v in m.entries.items():
        rows.setdefault(r, {})[c] = v
    out = []
    for r, row in rows.items():
        denom = 1
        for v in row.values():
            denom = denom * v.denominator // gcd(denom, v.denominator)
        ints = {c: int(v * denom) for c, v in row.items()}
        g = 0
        for v in ints.values():
            g = gcd(g, abs(v))
        if g > 1:
            ints = {c: v // g for c, v in ints.items()}
        out.append(ints)
    return out


def _eliminate(rows, mul):
    """Sparse elimination with pivoting by shortest row and least-filled
    column (Markowitz-style).  Returns the rank.

    rows: list of {col: value}; `mul(row, pivot_row, pivot_val, factor)`
    combines rows, returning the reduced result with zeros dropped.
    """
    rows = {i: dict(r) for i, r in enumerate(rows) if r}
    col_rows = {}
    for i, row in rows.items():
        for c in row:
            col_rows.setdefault(c, set()).add(i)
    rank = 0
    while rows:
        pi = min(rows, key=lambda i: (len(rows[i]), i))
        pivot = rows.pop(pi)
        pc = min(pivot, key=lambda c: (len(col_rows[c]), c))
        pv = pivot[pc]
        for c in pivot:
            col_rows[c].discard(pi)
        rank += 1
        for i in list(col_rows.get(pc, ())):
            row = rows[i]
            factor = row[pc]
            for c in row:
                col_rows[c].discard(i)
            newrow = mul(row, pivot, pv, factor)
            if newrow:
                rows[i] = newrow
                for c in newrow:
                    col_rows.setdefault(c, set()).add(i)
            else:
                del rows[i]
    return rank


def rank_exact(m: SparseMatrix) -> int:
    """Fraction-free integer elimination."""
    def mul(row, pivot, pv, factor):
        out = {c: v * pv for c, v in row.items()}
        for c, v in pivot.items():
            nv = out.get(c, 0) - v * factor
            if nv:
                out[c] = nv
            else:
                out.pop(c, None)
        g = 0
        for v in out.values():
            g = gcd(g, v)
        if g > 1:
            return {c: v // g for c, v in out.items()}
        return out

    return _eliminate(_integer_rows(m), mul)


class BadPrime(Exception):
    pass


def rank_mod(m: SparseMatrix, p: int) -> int:
    rows = {}
    for (r, c), v in m.entries.items():
        if v.denominator % p == 0:
            raise BadPrime(p)
        val = v.numerator * pow(v.denominator, -1, p) % p
        if val:
            rows.setdefault(r, {})[c] = val

    def mul(row, pivot, pv, factor):
        t = factor * pow(pv, -1, p) % p
        out = dict(row)
        for c, v in pivot.items():
            nv = (out.get(c, 0) - v * t) % p
            if nv:
                out[c] = nv
            else:
                out.pop(c, None)
        return out

    return _eliminate(list(rows.values()), mul)


def random_primes(count=2, seed=None, bits=31):
    """Distinct primes above 2**30, drawn from a seeded generator so runs are
    reproducible when the seed is recorded."""
    rng = random.Random(seed)
    found = []
    while len(found) < count:
        cand = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if cand not in found and _is_prime(cand):
            found.append(cand)
    return tuple(found)


def _is_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def rank(m: SparseMatrix, mode="exact", primes=None) -> int:
    """Exact rank.  mode="modular" computes mod >= 2 independent primes and
    falls back to exact elimination when they disagree; agreement at the
    maximal possible rank is a proof, since modular ranks never overcount."""
    if mode == "exact":
        return rank_exact(m)
    if mode != "modular":
        raise ValueError("unknown mode %r" % (mode,))
    if not m.entries:
        return 0
    if primes is None:
        primes = random_primes(2)
    if len(primes) < 2:
        raise ValueError("need at least two primes")
    ranks = []
    for p in primes:
        try:
            ranks.append(rank_mod(m, p))
        except BadPrime:
            return rank_exact(m)
    if len(set(ranks)) != 1:
        return rank_exact(m)
    return ranks[0]


class Membership:
    """Result of expressing a vector in the column span of a matrix."""

    def __init__(self, coefficients=None, certificate=None):
        self.coefficients = coefficients
        self.certificate = certificate

    @property
    def in_image(self):
        return self.coefficients is not None


def solve_membership(m: SparseMatrix, v) -> Membership:
    """Solve m*x = v exactly.  Returns coefficients {col: Fraction}, or a
    certificate y (a functional with y*m = 0 and y*v != 0) when v is not in
    the image.

    v: {row: value} mapping or sequence of length m.rows.
    """
    if not isinstance(v, dict):
        v = {i: Fraction(val) for i, val in enumerate(v) if val}
    else:
        v = {i: Fraction(val) for i, val in v.items() if val}
    rows = {}
    for (r, c), val in m.entries.items():
        rows.setdefault(r, {})[c] = val
    # row-reduce [m | v] tracking the combination over original rows
    work = []
    for r in range(m.rows):
        row = dict(rows.get(r, {}))
        val = v.get(r, Fraction(0))
        if row or val:
            work.append((row, val, {r: Fraction(1)}))
    pivots = []  # (col, row dict, val, trace)
    for row, val, trace in work:
        for pc, prow, pval, ptr in pivots:
            f = row.get(pc)
            if f is None:
                continue
            for c, pv in prow.items():
                nv = row.get(c, Fraction(0)) - f * pv
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
            val -= f * pval
            for r0, t in ptr.items():
                nt = trace.get(r0, Fraction(0)) - f * t
                if nt:
                    trace[r0] = nt
                else:
                    trace.pop(r0, None)
        if row:
            pc = min(row)
            pv = row[pc]
            row = {c: x / pv for c, x in row.items()}
            val = val / pv
            trace = {r0: t / pv for r0, t in trace.items()}
            pivots.append((pc, row, val, trace))
        elif val:
            return Membership(certificate=trace)
    # back substitution: x supported on pivot columns
    x = {}
    for pc, prow, pval, _ in reversed(pivots):
        acc = pval
        for c, pv in prow.items():
            if c != pc and c in x:
                acc -= pv * x[c]
        if acc:
            x[pc] = acc
    return Membership(coefficients=x)
