"""Exact integer and rational linear algebra.

Everything here works over Python ints and ``fractions.Fraction``. Matrices
are small (a few hundred rows at most), so dense list-of-lists storage is
used throughout; the only sparse routine is the unit-pivot elimination used
to shrink large relation presentations before a Smith decomposition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence


class IllDefinedMap(ValueError):
    """A map between presented modules does not respect the relations."""


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match shape")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        data = [[0] * len(columns) for _ in range(rows)]
        for j, c in enumerate(columns):
            if len(c) != rows:
                raise ValueError("column length mismatch")
            for i, x in enumerate(c):
                data[i][j] = x
        return cls.from_rows(data, len(columns))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], n)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list[int]:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def column(self, j: int) -> list[int]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self) -> list[list[int]]:
        return [self.row(i) for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_columns(self.to_rows(), self.cols)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        oc = other.columns()
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(r, c) if a) for c in oc] for r in self.to_rows()],
            other.cols,
        )

    def apply(self, v: Sequence[int]) -> list[int]:
        return [sum(a * b for a, b in zip(self.row(i), v) if a) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_json(self) -> str:
        return json.dumps([[str(x) for x in r] for r in self.to_rows()])

    @classmethod
    def from_json(cls, text: str) -> "IntMatrix":
        data = json.loads(text)
        return cls.from_rows([[int(x) for x in r] for r in data], len(data[0]) if data else 0)


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.S[i, i] for i in range(min(self.S.rows, self.S.cols))]

    @property
    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d]


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Return unimodular U, V with U*A*V = S diagonal and d_i | d_{i+1}."""
    m, n = A.rows, A.cols
    S = A.to_rows()
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, k):
        S[i], S[k] = S[k], S[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for r in S:
            r[j], r[k] = r[k], r[j]
        for r in V:
            r[j], r[k] = r[k], r[j]

    def add_row(dst, src, q):  # row dst += q * row src
        S[dst] = [a + q * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for r in S:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = S[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        p = S[t][t]
        clean = True
        for i in range(t + 1, m):
            if S[i][t]:
                add_row(i, t, -(S[i][t] // p))
                clean = clean and not S[i][t]
        for j in range(t + 1, n):
            if S[t][j]:
                add_col(j, t, -(S[t][j] // p))
                clean = clean and not S[t][j]
        if not clean:
            continue
        bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if S[i][j] % p), None)
        if bad is not None:
            add_row(t, bad, 1)
            continue
        if p < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SmithDecomposition(IntMatrix.from_rows(U, m), IntMatrix.from_rows(S, n),
                              IntMatrix.from_rows(V, n))


def _echelon(rows: list[list[int]], width: int) -> int:
    """In-place gcd row echelon on the first ``width`` columns; returns the rank."""
    r = 0
    for c in range(width):
        if r == len(rows):
            break
        while True:
            live = [i for i in range(r, len(rows)) if rows[i][c]]
            if not live:
                break
            k = min(live, key=lambda i: abs(rows[i][c]))
            rows[r], rows[k] = rows[k], rows[r]
            p = rows[r][c]
            others = [i for i in range(r + 1, len(rows)) if rows[i][c]]
            if not others:
                break
            for i in others:
                q = rows[i][c] // p
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
        if rows[r][c]:
            if rows[r][c] < 0:
                rows[r] = [-a for a in rows[r]]
            r += 1
    return r


def integer_kernel(A: IntMatrix) -> IntMatrix:
    """Columns form a Z-basis of {x : A x = 0}."""
    m, n = A.rows, A.cols
    aug = [A.column(j) + [int(i == j) for i in range(n)] for j in range(n)]
    r = _echelon(aug, m)
    kernel = [row[m:] for row in aug[r:]]
    return IntMatrix.from_columns(kernel, n)


def hermite_basis(vectors: Iterable[Sequence[int]], dim: int) -> list[list[int]]:
    """Reduced row echelon Z-basis of the lattice spanned by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    if not rows:
        return []
    r = _echelon(rows, dim)
    basis = rows[:r]
    pivots = [next(c for c, x in enumerate(b) if x) for b in basis]
    for k, (b, p) in enumerate(zip(basis, pivots)):
        for i in range(k):
            q = basis[i][p] // b[p]
            if q:
                basis[i] = [a - q * x for a, x in zip(basis[i], b)]
    return basis


def lattice_coordinates(basis: Sequence[Sequence[int]], v: Sequence[int]) -> list[int] | None:
    """Integer coordinates of v in an echelon basis, or None if v is outside."""
    v = list(v)
    coords = []
    for b in basis:
        p = next(c for c, x in enumerate(b) if x)
        q, rem = divmod(v[p], b[p])
        if rem:
            return None
        coords.append(q)
        if q:
            v = [a - q * x for a, x in zip(v, b)]
    return coords if not any(v) else None


def quotient_invariants(big: Sequence[Sequence[int]], small: Sequence[Sequence[int]]) -> tuple[int, list[int]]:
    """(free rank, torsion factors) of L_big / L_small; ``big`` must be echelon."""
    coords = []
    for v in small:
        c = lattice_coordinates(big, v)
        if c is None:
            raise ValueError("sublattice is not contained in the lattice")
        coords.append(c)
    if not big:
        return 0, []
    if not coords:
        return len(big), []
    d = smith_normal_form(IntMatrix.from_rows(coords, len(big))).invariant_factors
    return len(big) - len(d), [x for x in d if x > 1]


def rref(rows: Sequence[Sequence], width: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q (pivoting restricted to the first ``width`` columns)."""
    R = [[Fraction(x) for x in r] for r in rows]
    if not R:
        return [], []
    width = len(R[0]) if width is None else width
    pivots = []
    r = 0
    for c in range(width):
        k = next((i for i in range(r, len(R)) if R[i][c]), None)
        if k is None:
            continue
        R[r], R[k] = R[k], R[r]
        p = R[r][c]
        R[r] = [x / p for x in R[r]]
        for i in range(len(R)):
            if i != r and R[i][c]:
                q = R[i][c]
                R[i] = [a - q * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rational_rank(A: IntMatrix) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    M = A.to_rows()
    m, n = A.rows, A.cols
    r, prev = 0, 1
    for c in range(n):
        k = next((i for i in range(r, m) if M[i][c]), None)
        if k is None:
            continue
        M[r], M[k] = M[k], M[r]
        for i in range(r + 1, m):
            M[i] = [(M[r][c] * M[i][j] - M[i][c] * M[r][j]) // prev for j in range(n)]
        prev = M[r][c]
        r += 1
        if r == m:
            break
    return r


def rational_nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : M x = 0} over Q."""
    R, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in zip(R, pivots):
            v[p] = -r[f]
        basis.append(v)
    return basis


def rational_solve(A: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Some solution of A x = b over Q, or None."""
    ncols = len(A[0]) if A else 0
    R, pivots = rref([list(r) + [y] for r, y in zip(A, b)], ncols)
    if any(not any(r[:ncols]) and r[ncols] for r in R):
        return None
    x = [Fraction(0)] * ncols
    for r, p in zip(R, pivots):
        x[p] = r[ncols]
    return x


class PresentedModule:
    """The cokernel of an integer relation matrix (generators x relations)."""

    def __init__(self, ngens: int, relations: IntMatrix | None = None, embedding: IntMatrix | None = None):
        self.ngens = ngens
        self.relations = relations if relations is not None else IntMatrix.zeros(ngens, 0)
        if self.relations.rows != ngens:
            raise ValueError("relation matrix must have one row per generator")
        self.embedding = embedding

    @cached_property
    def smith(self) -> SmithDecomposition:
        return smith_normal_form(self.relations)

    @property
    def free_rank(self) -> int:
        return self.ngens - len(self.smith.invariant_factors)

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.smith.invariant_factors if d > 1]

    def __repr__(self):
        parts = [f"Z^{self.free_rank}"] + [f"Z/{d}" for d in self.torsion]
        return "PresentedModule(" + " + ".join(parts) + ")"


def presented_map_kernel(f: IntMatrix, source: PresentedModule, target: PresentedModule) -> PresentedModule:
    """Presentation of ker(f: coker R_s -> coker R_t).

    The preimage lattice P = {x : f x in im R_t} contains im R_s, and the kernel is P / im R_s.
    The returned module carries ``embedding``, whose columns are a basis of P.
    """
    if f.rows != target.ngens or f.cols != source.ngens:
        raise ValueError("map shape does not match the modules")
    ns, nt = source.ngens, target.ngens
    tbasis = hermite_basis(target.relations.columns(), nt)
    for rel in source.relations.columns():
        if lattice_coordinates(tbasis, f.apply(rel)) is None:
            raise IllDefinedMap("image of a source relation is not a target relation")
    big = IntMatrix.from_rows(
        [f.row(i) + [-x for x in target.relations.row(i)] for i in range(nt)],
        ns + target.relations.cols,
    )
    K = integer_kernel(big)
    P = hermite_basis([c[:ns] for c in K.columns()], ns)
    coords = [lattice_coordinates(P, rel) for rel in source.relations.columns()]
    rel = IntMatrix.from_columns(coords, len(P)) if coords else IntMatrix.zeros(len(P), 0)
    return PresentedModule(len(P), rel, IntMatrix.from_columns(P, ns) if P else IntMatrix.zeros(ns, 0))


@dataclass
class Reduction:
    """Result of unit-pivot elimination on a sparse presentation.

    ``kept`` lists surviving original generators; ``relations`` are the leftover
    relations in kept-index coordinates; ``projection[g]`` expresses original
    generator g in kept-index coordinates.
    """

    ngens: int
    kept: list[int]
    relations: list[dict[int, int]]
    projection: list[dict[int, int]] = field(repr=False)

    def project(self, vec: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for g, c in vec.items():
            for h, d in self.projection[g].items():
                out[h] = out.get(h, 0) + c * d
        return {h: c for h, c in out.items() if c}

    def module(self) -> PresentedModule:
        n = len(self.kept)
        cols = [[r.get(i, 0) for i in range(n)] for r in self.relations]
        return PresentedModule(n, IntMatrix.from_columns(cols, n) if cols else IntMatrix.zeros(n, 0))


def eliminate_unit_relations(ngens: int, relations: Iterable[dict[int, int]]) -> Reduction:
    """Use every relation with a +-1 coefficient to eliminate a generator.

    Pivots are chosen to touch the fewest other relations (Markowitz-style), which keeps
    the substitutions sparse.
    """
    rels: dict[int, dict[int, int]] = {}
    occurs: dict[int, set[int]] = {g: set() for g in range(ngens)}
    for rid, r in enumerate(relations):
        r = {g: c for g, c in r.items() if c}
        if r:
            rels[rid] = r
            for g in r:
                occurs[g].add(rid)
    subst: list[tuple[int, dict[int, int]]] = []
    progress = True
    while progress:
        progress = False
        for rid in list(rels):
            r = rels.get(rid)
            if r is None:
                continue
            units = [g for g, c in r.items() if c in (1, -1)]
            if not units:
                continue
            g = min(units, key=lambda x: (len(occurs[x]), x))
            c = r[g]
            expr = {h: -d * c for h, d in r.items() if h != g}  # g = expr since c = +-1
            del rels[rid]
            for h in r:
                occurs[h].discard(rid)
            for other in list(occurs[g]):
                o = rels[other]
                k = o.pop(g)
                for h, d in expr.items():
                    v = o.get(h, 0) + k * d
                    if v:
                        o[h] = v
                        occurs[h].add(other)
                    else:
                        o.pop(h, None)
                        occurs[h].discard(other)
                if not o:
                    del rels[other]
            occurs[g] = set()
            subst.append((g, expr))
            progress = True
    eliminated = {g for g, _ in subst}
    kept = [g for g in range(ngens) if g not in eliminated]
    index = {g: i for i, g in enumerate(kept)}
    projection: list[dict[int, int] | None] = [None] * ngens
    for g in kept:
        projection[g] = {index[g]: 1}
    for g, expr in reversed(subst):
        acc: dict[int, int] = {}
        for h, d in expr.items():
            for i, e in projection[h].items():
                acc[i] = acc.get(i, 0) + d * e
        projection[g] = {i: v for i, v in acc.items() if v}
    leftover = [{index[g]: c for g, c in r.items()} for r in rels.values()]
    return Reduction(ngens, kept, leftover, projection)
