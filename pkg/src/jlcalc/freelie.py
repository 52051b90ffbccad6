"""Free Lie algebras over Z in the Lyndon basis, quasi-Lie algebras, and the
derivation kernels D_k and D^q_k.

Letters are 0-based ints. A LieTree is either a letter or a pair (left, right)
meaning the bracket [left, right]. Everything that is graded by letter content
(bracket maps, relation presentations) is computed one content block at a time.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Sequence, Union

from .exactla import (
    IntMatrix,
    PresentedModule,
    eliminate_unit_relations,
    hermite_basis,
    integer_kernel,
    lattice_coordinates,
    presented_map_kernel,
    quotient_invariants,
    rational_rank,
)

LieTree = Union[int, tuple]


class NotALieElement(ValueError):
    pass


# ---------------------------------------------------------------------------
# Lyndon words

def _mobius(n: int) -> int:
    res, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    return -res if n > 1 else res


def witt_number(n: int, k: int) -> int:
    return sum(_mobius(d) * n ** (k // d) for d in range(1, k + 1) if k % d == 0) // k


def is_lyndon(w: Sequence[int]) -> bool:
    w = tuple(w)
    return bool(w) and all(w < w[i:] for i in range(1, len(w)))


@lru_cache(maxsize=None)
def lyndon_words(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """Lyndon words of length exactly k over letters 0..n-1, in lexicographic order (Duval)."""
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        if len(w) == k:
            out.append(tuple(w))
        m = len(w)
        while len(w) < k:
            w.append(w[len(w) - m])
        while w and w[-1] == n - 1:
            w.pop()
    return tuple(out)


@lru_cache(maxsize=None)
def standard_factorization(w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(u, v) with v the longest proper Lyndon suffix of the Lyndon word w."""
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise ValueError("a single letter has no standard factorization")


@lru_cache(maxsize=None)
def lyndon_tree(w: tuple[int, ...]) -> LieTree:
    if len(w) == 1:
        return w[0]
    u, v = standard_factorization(w)
    return (lyndon_tree(u), lyndon_tree(v))


@dataclass(frozen=True)
class LyndonBasis:
    n: int
    k: int
    words: tuple[tuple[int, ...], ...]

    @property
    def trees(self) -> list[LieTree]:
        return [lyndon_tree(w) for w in self.words]

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return _word_index(self.n, self.k)

    def __len__(self):
        return len(self.words)


@lru_cache(maxsize=None)
def _word_index(n: int, k: int) -> dict:
    return {w: i for i, w in enumerate(lyndon_words(n, k))}


@lru_cache(maxsize=None)
def lyndon_basis(n: int, k: int) -> LyndonBasis:
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    return LyndonBasis(n, k, lyndon_words(n, k))


def word_name(w: Sequence[int], names: Sequence[str] | None = None) -> str:
    if names is None:
        return "".join(f"x{i + 1}" for i in w)
    return " ".join(names[i] for i in w)


def parse_word_name(text: str) -> tuple[int, ...]:
    import re
    return tuple(int(t) - 1 for t in re.findall(r"x(\d+)", text))


# ---------------------------------------------------------------------------
# trees

def tree_leaves(t: LieTree) -> list[int]:
    if isinstance(t, int):
        return [t]
    return tree_leaves(t[0]) + tree_leaves(t[1])


def tree_degree(t: LieTree) -> int:
    return 1 if isinstance(t, int) else tree_degree(t[0]) + tree_degree(t[1])


def tree_str(t: LieTree, names: Sequence[str] | None = None) -> str:
    if isinstance(t, int):
        return names[t] if names else f"x{t + 1}"
    return f"[{tree_str(t[0], names)},{tree_str(t[1], names)}]"


def parse_tree(text: str, names: Sequence[str] | None = None) -> LieTree:
    """Parse '[x1,[x1,x2]]' (or the given letter names) into a LieTree."""
    import re
    toks = re.findall(r"\[|\]|,|[A-Za-z]+\d+", text)
    pos = 0

    def leaf(tok):
        if names and tok in names:
            return names.index(tok)
        m = re.fullmatch(r"x(\d+)", tok)
        if not m:
            raise ValueError(f"unknown letter {tok!r}")
        return int(m.group(1)) - 1

    def parse():
        nonlocal pos
        tok = toks[pos]
        pos += 1
        if tok != "[":
            return leaf(tok)
        a = parse()
        if toks[pos] != ",":
            raise ValueError("expected ','")
        pos += 1
        b = parse()
        if toks[pos] != "]":
            raise ValueError("expected ']'")
        pos += 1
        return (a, b)

    t = parse()
    if pos != len(toks):
        raise ValueError("trailing input")
    return t


def content(letters: Iterable[int], n: int) -> tuple[int, ...]:
    c = [0] * n
    for x in letters:
        c[x] += 1
    return tuple(c)


# ---------------------------------------------------------------------------
# Lie elements

@dataclass(frozen=True)
class LieElement:
    """Element of the degree-``degree`` part of the free Lie algebra on n letters."""

    n: int
    degree: int
    coeffs: Mapping[tuple[int, ...], object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {w: c for w, c in self.coeffs.items() if c})

    @classmethod
    def zero(cls, n: int, degree: int) -> "LieElement":
        return cls(n, degree, {})

    def vector(self) -> list:
        return [self.coeffs.get(w, 0) for w in lyndon_words(self.n, self.degree)]

    @classmethod
    def from_vector(cls, n: int, degree: int, vec: Sequence) -> "LieElement":
        return cls(n, degree, dict(zip(lyndon_words(n, degree), vec)))

    def _check(self, other):
        if (self.n, self.degree) != (other.n, other.degree):
            raise ValueError("Lie elements live in different spaces")

    def __add__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0) + c
        return LieElement(self.n, self.degree, out)

    def __neg__(self) -> "LieElement":
        return LieElement(self.n, self.degree, {w: -c for w, c in self.coeffs.items()})

    def __sub__(self, other: "LieElement") -> "LieElement":
        return self + (-other)

    def scale(self, c) -> "LieElement":
        return LieElement(self.n, self.degree, {w: c * x for w, x in self.coeffs.items()})

    def __eq__(self, other):
        return (isinstance(other, LieElement) and (self.n, self.degree) == (other.n, other.degree)
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def tensor(self) -> dict:
        out: dict = {}
        for w, c in self.coeffs.items():
            for m, d in tensor_of_word(w).items():
                out[m] = out.get(m, 0) + c * d
        return {m: c for m, c in out.items() if c}

    def to_json(self) -> dict:
        return {"n": self.n, "degree": self.degree, "basis": "lyndon",
                "terms": [{"word": word_name(w), "coeff": str(c)} for w, c in sorted(self.coeffs.items())]}

    @classmethod
    def from_json(cls, data: Mapping) -> "LieElement":
        coeffs = {parse_word_name(t["word"]): Fraction(t["coeff"]) for t in data["terms"]}
        coeffs = {w: int(c) if c.denominator == 1 else c for w, c in coeffs.items()}
        return cls(int(data["n"]), int(data["degree"]), coeffs)

    def pretty(self, names: Sequence[str] | None = None) -> str:
        if not self.coeffs:
            return "0"
        parts = [f"{c}*{tree_str(lyndon_tree(w), names)}" for w, c in sorted(self.coeffs.items())]
        return " + ".join(parts)


def _poly_mul(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = m1 + m2
            out[m] = out.get(m, 0) + c1 * c2
    return out


def _poly_commutator(a: Mapping, b: Mapping) -> dict:
    out = _poly_mul(a, b)
    for m, c in _poly_mul(b, a).items():
        out[m] = out.get(m, 0) - c
    return {m: c for m, c in out.items() if c}


@lru_cache(maxsize=None)
def _tensor_of_word(w: tuple[int, ...]) -> tuple:
    if len(w) == 1:
        return ((w, 1),)
    u, v = standard_factorization(w)
    return tuple(_poly_commutator(dict(_tensor_of_word(u)), dict(_tensor_of_word(v))).items())


def tensor_of_word(w: tuple[int, ...]) -> dict:
    """Image of the bracketed Lyndon polynomial P_w in the tensor algebra."""
    return dict(_tensor_of_word(tuple(w)))


def tensor_of_tree(t: LieTree) -> dict:
    if isinstance(t, int):
        return {(t,): 1}
    return _poly_commutator(tensor_of_tree(t[0]), tensor_of_tree(t[1]))


def lie_from_tensor(poly: Mapping[tuple[int, ...], object], n: int, k: int) -> LieElement:
    """Recover Lyndon coordinates from a homogeneous Lie polynomial.

    P_w equals w plus lexicographically larger words, so the smallest word in the
    support of a Lie polynomial is Lyndon and its coefficient is the coordinate.
    """
    poly = {m: c for m, c in poly.items() if c}
    out = {}
    while poly:
        m = min(poly)
        if len(m) != k or not is_lyndon(m) or max(m) >= n:
            raise NotALieElement(f"leading word {m} is not a Lyndon word of length {k}")
        c = poly[m]
        out[m] = c
        for w, d in _tensor_of_word(m):
            v = poly.get(w, 0) - c * d
            if v:
                poly[w] = v
            else:
                poly.pop(w, None)
    return LieElement(n, k, out)


@lru_cache(maxsize=None)
def _lyndon_bracket(u: tuple[int, ...], v: tuple[int, ...]) -> tuple:
    """[P_u, P_v] in Lyndon coordinates, for Lyndon words u < v."""
    if len(u) == 1:
        return ((u + v, 1),)
    u1, u2 = standard_factorization(u)
    if u2 >= v:
        return ((u + v, 1),)
    # [[P_u1, P_u2], P_v] = [P_u1, [P_u2, P_v]] - [P_u2, [P_u1, P_v]]
    out: dict = {}
    for first, second, sign in ((u1, u2, 1), (u2, u1, -1)):
        inner = _bracket_words({second: 1}, {v: 1})
        for w, c in _bracket_words({first: 1}, inner).items():
            out[w] = out.get(w, 0) + sign * c
    return tuple((w, c) for w, c in out.items() if c)


def _bracket_words(x: Mapping, y: Mapping) -> dict:
    out: dict = {}
    for u, c in x.items():
        for v, d in y.items():
            if u == v:
                continue
            if u < v:
                terms, sign = _lyndon_bracket(u, v), 1
            else:
                terms, sign = _lyndon_bracket(v, u), -1
            for w, e in terms:
                out[w] = out.get(w, 0) + sign * c * d * e
    return {w: c for w, c in out.items() if c}


def bracket(x: LieElement, y: LieElement) -> LieElement:
    if x.n != y.n:
        raise ValueError("letter counts differ")
    return LieElement(x.n, x.degree + y.degree, _bracket_words(x.coeffs, y.coeffs))


@lru_cache(maxsize=None)
def _normalize(t: LieTree) -> tuple:
    if isinstance(t, int):
        return (((t,), 1),)
    return tuple(_bracket_words(dict(_normalize(t[0])), dict(_normalize(t[1]))).items())


def normalize_bracket(t: LieTree, n: int | None = None) -> LieElement:
    """Expand a bracket tree in the Lyndon basis."""
    leaves = tree_leaves(t)
    n = max(leaves) + 1 if n is None else n
    if max(leaves) >= n:
        raise ValueError("tree uses a letter outside the alphabet")
    return LieElement(n, len(leaves), dict(_normalize(t)))


def expand_leaves(t: LieTree, images: Sequence[Mapping[int, object]]) -> list[tuple[LieTree, object]]:
    """Multilinear expansion after replacing each leaf x by the combination images[x]."""
    if isinstance(t, int):
        return list(images[t].items())
    out = []
    for (a, c), (b, d) in product(expand_leaves(t[0], images), expand_leaves(t[1], images)):
        out.append(((a, b), c * d))
    return out


def substitute(x: LieElement, images: Sequence[Mapping[int, object]], n_target: int) -> LieElement:
    """Apply the Lie algebra map induced by the linear letter map x_i -> images[i]."""
    out: dict = {}
    for w, c in x.coeffs.items():
        for t, d in expand_leaves(lyndon_tree(w), images):
            for v, e in _normalize(t):
                out[v] = out.get(v, 0) + c * d * e
    return LieElement(n_target, x.degree, out)


# ---------------------------------------------------------------------------
# H (x) L_{k+1} and D_k

class DkElement:
    """Element of H (x) L_{k+1}(H) for a free module H of rank n.

    ``coeffs`` maps (i, lyndon word of length k+1) to a coefficient. ``certified``
    records whether the bracket was checked to vanish (None when unchecked).
    """

    __slots__ = ("n", "k", "coeffs", "certified", "names")

    def __init__(self, n: int, k: int, coeffs: Mapping | None = None, certified: bool | None = None,
                 names: Sequence[str] | None = None):
        self.n, self.k = n, k
        self.coeffs = {key: c for key, c in (coeffs or {}).items() if c}
        self.certified = certified
        self.names = list(names) if names else None

    @classmethod
    def from_vector(cls, n: int, k: int, vec: Sequence, **kw) -> "DkElement":
        return cls(n, k, dict(zip(tensor_index(n, k), vec)), **kw)

    @classmethod
    def from_pairs(cls, n: int, k: int, pairs: Iterable[tuple[int, LieElement]], **kw) -> "DkElement":
        out: dict = {}
        for i, elem in pairs:
            for w, c in elem.coeffs.items():
                out[(i, w)] = out.get((i, w), 0) + c
        return cls(n, k, out, **kw)

    def vector(self) -> list:
        return [self.coeffs.get(key, 0) for key in tensor_index(self.n, self.k)]

    def bracket(self) -> LieElement:
        out: dict = {}
        for (i, w), c in self.coeffs.items():
            for v, d in _bracket_words({(i,): 1}, {w: 1}).items():
                out[v] = out.get(v, 0) + c * d
        return LieElement(self.n, self.k + 2, out)

    def in_dk(self) -> bool:
        return self.bracket().is_zero()

    def certify(self) -> "DkElement":
        return DkElement(self.n, self.k, self.coeffs, self.in_dk(), self.names)

    def _check(self, other):
        if (self.n, self.k) != (other.n, other.k):
            raise ValueError("tensor elements live in different spaces")

    def __add__(self, other: "DkElement") -> "DkElement":
        self._check(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out.get(key, 0) + c
        return DkElement(self.n, self.k, out, names=self.names)

    def __neg__(self):
        return DkElement(self.n, self.k, {key: -c for key, c in self.coeffs.items()}, self.certified, self.names)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DkElement":
        return DkElement(self.n, self.k, {key: c * x for key, x in self.coeffs.items()}, names=self.names)

    def __eq__(self, other):
        return isinstance(other, DkElement) and (self.n, self.k) == (other.n, other.k) and self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_json(self) -> dict:
        out = {"n": self.n, "degree": self.k, "basis": "lyndon",
               "terms": [{"factor": f"x{i + 1}", "word": word_name(w), "coeff": str(c)}
                         for (i, w), c in sorted(self.coeffs.items())]}
        if self.certified is not None:
            out["bracketCertified"] = self.certified
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "DkElement":
        coeffs = {}
        for t in data["terms"]:
            c = Fraction(t["coeff"])
            coeffs[(int(t["factor"][1:]) - 1, parse_word_name(t["word"]))] = int(c) if c.denominator == 1 else c
        return cls(int(data["n"]), int(data["degree"]), coeffs)

    def pretty(self) -> str:
        if not self.coeffs:
            return "0"
        names = self.names or [f"x{i + 1}" for i in range(self.n)]
        return " + ".join(f"{c}*{names[i]}(x){tree_str(lyndon_tree(w), names)}"
                          for (i, w), c in sorted(self.coeffs.items()))

    def __repr__(self):
        return f"DkElement(n={self.n}, k={self.k}, {self.pretty()})"


@lru_cache(maxsize=None)
def tensor_index(n: int, k: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Basis of H (x) L_{k+1}: pairs (i, Lyndon word), i-major."""
    return tuple((i, w) for i in range(n) for w in lyndon_words(n, k + 1))


@lru_cache(maxsize=None)
def _tensor_position(n: int, k: int) -> dict:
    return {key: j for j, key in enumerate(tensor_index(n, k))}


@lru_cache(maxsize=None)
def bracket_map(n: int, k: int) -> IntMatrix:
    """Matrix of H (x) L_{k+1} -> L_{k+2}, x_i (x) P_w -> [x_i, P_w]."""
    rows = _word_index(n, k + 2)
    cols = tensor_index(n, k)
    data = [[0] * len(cols) for _ in rows]
    for j, (i, w) in enumerate(cols):
        for v, c in _bracket_words({(i,): 1}, {w: 1}).items():
            data[rows[v]][j] = c
    return IntMatrix.from_rows(data, len(cols))


def _tensor_blocks(n: int, k: int) -> dict[tuple[int, ...], list[int]]:
    blocks: dict = defaultdict(list)
    for j, (i, w) in enumerate(tensor_index(n, k)):
        blocks[content((i,) + w, n)].append(j)
    return dict(sorted(blocks.items()))


@dataclass(frozen=True)
class DkModule:
    n: int
    k: int
    basis: IntMatrix  # columns in tensor_index(n, k) coordinates
    flavor: str = "lie"

    @property
    def rank(self) -> int:
        return self.basis.cols

    def elements(self) -> list[DkElement]:
        return [DkElement.from_vector(self.n, self.k, c, certified=True) for c in self.basis.columns()]


@lru_cache(maxsize=None)
def _dk_block_bases(n: int, k: int) -> tuple:
    """Per content block: (block content, global column indices, kernel basis vectors in block coords)."""
    B = bracket_map(n, k)
    out = []
    for c, cols in _tensor_blocks(n, k).items():
        rows = [r for r in range(B.rows) if any(B[r, j] for j in cols)]
        sub = IntMatrix.from_rows([[B[r, j] for j in cols] for r in rows], len(cols))
        K = integer_kernel(sub) if rows else IntMatrix.identity(len(cols))
        out.append((c, tuple(cols), tuple(tuple(v) for v in K.columns())))
    return tuple(out)


@lru_cache(maxsize=None)
def dk_basis(n: int, k: int) -> DkModule:
    """Integer basis of D_k = ker(H (x) L_{k+1} -> L_{k+2})."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    size = len(tensor_index(n, k))
    columns = []
    for _, cols, vecs in _dk_block_bases(n, k):
        for v in vecs:
            full = [0] * size
            for j, x in zip(cols, v):
                full[j] = x
            columns.append(full)
    return DkModule(n, k, IntMatrix.from_columns(columns, size) if columns else IntMatrix.zeros(size, 0))


def dk_rank(n: int, k: int) -> int:
    return sum(len(vecs) for _, _, vecs in _dk_block_bases(n, k))


def bracket_rank(n: int, k: int) -> int:
    return rational_rank(bracket_map(n, k))


# ---------------------------------------------------------------------------
# quasi-Lie algebras

def _tkey(t: LieTree):
    return (0, t) if isinstance(t, int) else (1, _tkey(t[0]), _tkey(t[1]))


@lru_cache(maxsize=None)
def canonical_qtree(t: LieTree) -> tuple[LieTree, int, bool]:
    """(canonical tree, sign, degenerate) under antisymmetry alone.

    Children are sorted at every node; each swap flips the sign. A tree is
    degenerate when some node has identical children, so that T = -T.
    """
    if isinstance(t, int):
        return t, 1, False
    a, sa, da = canonical_qtree(t[0])
    b, sb, db = canonical_qtree(t[1])
    sign = sa * sb
    if _tkey(b) < _tkey(a):
        a, b, sign = b, a, -sign
    return (a, b), sign, da or db or a == b


@lru_cache(maxsize=None)
def canonical_qtrees(n: int, k: int) -> tuple[LieTree, ...]:
    if k == 1:
        return tuple(range(n))
    found = set()
    for d in range(1, k // 2 + 1):
        for a in canonical_qtrees(n, d):
            for b in canonical_qtrees(n, k - d):
                found.add(canonical_qtree((a, b))[0])
    return tuple(sorted(found, key=_tkey))


@dataclass
class QuasiLieData:
    """Presentation of L^q_k together with its unit-pivot reduction."""

    n: int
    k: int
    trees: tuple
    index: dict
    relations: list
    reduction: object

    def coords(self, t: LieTree) -> dict[int, int]:
        """Reduced coordinates of an arbitrary degree-k tree."""
        c, s, _ = canonical_qtree(t)
        return {i: s * v for i, v in self.reduction.projection[self.index[c]].items()}

    @property
    def kept_trees(self) -> list:
        return [self.trees[g] for g in self.reduction.kept]


def _jacobi_terms(x: LieTree, y: LieTree, z: LieTree):
    return [(x, (y, z)), (y, (z, x)), (z, (x, y))]


def _contexts(t: LieTree):
    """Yield (subtree, rebuild) for every internal node of t."""
    if isinstance(t, int):
        return
    yield t, lambda s: s
    for side in (0, 1):
        for sub, rebuild in _contexts(t[side]):
            if side == 0:
                yield sub, (lambda r, rb=rebuild: (rb(r), t[1]))
            else:
                yield sub, (lambda r, rb=rebuild: (t[0], rb(r)))


@lru_cache(maxsize=None)
def quasi_lie_data(n: int, k: int) -> QuasiLieData:
    trees = canonical_qtrees(n, k)
    index = {t: i for i, t in enumerate(trees)}
    rels = []
    seen = set()
    for t in trees:
        if canonical_qtree(t)[2]:
            rels.append({index[t]: 2})
        for node, rebuild in _contexts(t):
            a, b = node
            cands = []
            if not isinstance(b, int):
                cands.append((a, b[0], b[1]))
            if not isinstance(a, int):
                cands.append((b, a[0], a[1]))
            for x, y, z in cands:
                rel: dict = {}
                for term in _jacobi_terms(x, y, z):
                    c, s, _ = canonical_qtree(rebuild(term))
                    rel[index[c]] = rel.get(index[c], 0) + s
                rel = {g: c for g, c in rel.items() if c}
                key = frozenset(rel.items())
                neg = frozenset((g, -c) for g, c in rel.items())
                if rel and key not in seen and neg not in seen:
                    seen.add(key)
                    rels.append(rel)
    red = eliminate_unit_relations(len(trees), rels)
    return QuasiLieData(n, k, trees, index, rels, red)


def quasi_lie(n: int, k: int) -> PresentedModule:
    """L^q_k on n letters as a presented module (reduced by unit-pivot elimination)."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    return quasi_lie_data(n, k).reduction.module()


def quasi_lie_full(n: int, k: int) -> PresentedModule:
    """The unreduced presentation: one generator per canonical tree."""
    data = quasi_lie_data(n, k)
    m = len(data.trees)
    cols = [[r.get(i, 0) for i in range(m)] for r in data.relations]
    return PresentedModule(m, IntMatrix.from_columns(cols, m) if cols else IntMatrix.zeros(m, 0))


@dataclass
class DqBlock:
    """One letter-content block of D^q_k.

    Source coordinates are pairs (i, j): letter i tensored with the j-th kept tree of L^q_{k+1}.
    """

    content: tuple
    gens: list
    relations: list  # vectors in block coordinates
    kernel: PresentedModule  # with ``embedding`` = basis of the preimage lattice P


@lru_cache(maxsize=None)
def dq_blocks(n: int, k: int) -> tuple[DqBlock, ...]:
    src = quasi_lie_data(n, k + 1)
    tgt = quasi_lie_data(n, k + 2)
    kept = src.kept_trees
    tkept = tgt.kept_trees
    gens_by: dict = defaultdict(list)
    for i in range(n):
        for j, t in enumerate(kept):
            gens_by[content([i] + tree_leaves(t), n)].append((i, j))
    tgt_by: dict = defaultdict(list)
    for j, t in enumerate(tkept):
        tgt_by[content(tree_leaves(t), n)].append(j)
    src_rels = src.reduction.relations
    blocks = []
    for c in sorted(gens_by):
        gens = gens_by[c]
        pos = {g: p for p, g in enumerate(gens)}
        rows = tgt_by.get(c, [])
        rpos = {r: p for p, r in enumerate(rows)}
        fcols = []
        for i, j in gens:
            col = [0] * len(rows)
            for r, v in tgt.coords((i, kept[j])).items():
                col[rpos[r]] += v
            fcols.append(col)
        f = IntMatrix.from_columns(fcols, len(rows))
        srel = []
        for i in range(n):
            for r in src_rels:
                if (i, next(iter(r))) in pos:
                    v = [0] * len(gens)
                    for j, x in r.items():
                        v[pos[(i, j)]] = x
                    srel.append(v)
        trel = []
        for r in tgt.reduction.relations:
            if next(iter(r)) in rpos:
                v = [0] * len(rows)
                for j, x in r.items():
                    v[rpos[j]] = x
                trel.append(v)
        source = PresentedModule(len(gens), IntMatrix.from_columns(srel, len(gens)) if srel
                                 else IntMatrix.zeros(len(gens), 0))
        target = PresentedModule(len(rows), IntMatrix.from_columns(trel, len(rows)) if trel
                                 else IntMatrix.zeros(len(rows), 0))
        ker = presented_map_kernel(f, source, target)
        blocks.append(DqBlock(c, gens, srel, ker))
    return tuple(blocks)


def dq_module(n: int, k: int) -> tuple[int, list[int]]:
    """(free rank, torsion factors) of D^q_k."""
    free, tors = 0, []
    for b in dq_blocks(n, k):
        free += b.kernel.free_rank
        tors += b.kernel.torsion
    return free, sorted(tors)


# ---------------------------------------------------------------------------
# rerooting, tr(u) (.) tr(u), and the s / p maps

def reroot(t: LieTree, path: Sequence[int], hanging: LieTree) -> LieTree:
    """Commutator read from the leaf at ``path`` when ``hanging`` sits at the old root.

    Each node has cyclic order (parent, left, right); entering from the left child
    reads [right, parent], entering from the right child reads [parent, left].
    """
    if not path:
        return hanging
    a, b = t
    if path[0] == 0:
        return reroot(a, path[1:], (b, hanging))
    return reroot(b, path[1:], (hanging, a))


def leaf_paths(t: LieTree, prefix: tuple = ()) -> list[tuple[int, tuple]]:
    if isinstance(t, int):
        return [(t, prefix)]
    return leaf_paths(t[0], prefix + (0,)) + leaf_paths(t[1], prefix + (1,))


def eta_rooted(root: int, t: LieTree, n: int, k: int) -> DkElement:
    """eta of the tree diagram given by a root leg colored ``root`` carrying the commutator t."""
    pairs = [(root, normalize_bracket(t, n))]
    for x, path in leaf_paths(t):
        pairs.append((x, normalize_bracket(reroot(t, path, root), n)))
    return DkElement.from_pairs(n, k, pairs)


def half_odot_eta(u: LieTree, n: int) -> DkElement:
    """eta(1/2 tr(u) (.) tr(u)): each leg of one copy reads the other copy as u at the root."""
    k = 2 * (tree_degree(u) - 1)
    return DkElement.from_pairs(n, k, [(x, normalize_bracket(reroot(u, path, u), n))
                                       for x, path in leaf_paths(u)])


def _s_vectors(n: int, j: int) -> list[tuple[tuple, dict]]:
    """s(h (x) u (x) 1) = h (x) [u,u] in reduced D^q source coordinates, keyed by (h, u)."""
    data = quasi_lie_data(n, 2 * j)
    out = []
    for h in range(n):
        for u in lyndon_words(n, j):
            t = lyndon_tree(u)
            out.append(((h, u), {(h, r): c for r, c in data.coords((t, t)).items()}))
    return out


def s_map(n: int, j: int) -> IntMatrix:
    """Matrix of s: H (x) L_j (x) Z/2 -> H (x) L^q_{2j}, columns indexed by (h, Lyndon u).

    Rows are the reduced generators (h, kept tree) of H (x) L^q_{2j}, h-major.
    """
    kept = len(quasi_lie_data(n, 2 * j).reduction.kept)
    cols = []
    for _, vec in _s_vectors(n, j):
        col = [0] * (n * kept)
        for (h, r), c in vec.items():
            col[h * kept + r] = c
        cols.append(col)
    return IntMatrix.from_columns(cols, n * kept)


def _canonical_map_column(n: int, k: int, gen: tuple[int, int]) -> dict:
    """Image of a reduced D^q generator (i, kept tree) in H (x) L_{k+1} coordinates."""
    i, j = gen
    t = quasi_lie_data(n, k + 1).kept_trees[j]
    pos = _tensor_position(n, k)
    return {pos[(i, w)]: c for w, c in _normalize(t)}


@dataclass
class SequenceReport:
    name: str
    exact: bool
    details: dict
    failures: list = field(default_factory=list)


def _lattice_equal(a: list, b: list, dim: int) -> bool:
    return hermite_basis(a, dim) == hermite_basis(b, dim)


def verify_s_sequence(n: int, j: int) -> SequenceReport:
    """0 -> H (x) L_j (x) Z/2 -s-> D^q_{2j-1} -> D_{2j-1} -> 0, one content block at a time."""
    k = 2 * j - 1
    svecs = _s_vectors(n, j)
    dblocks = {c: (cols, vecs) for c, cols, vecs in _dk_block_bases(n, k)}
    failures = []
    s_count = 0
    dq_free, dq_tors = 0, []
    for blk in dq_blocks(n, k):
        dim = len(blk.gens)
        pos = {g: p for p, g in enumerate(blk.gens)}
        P = [list(c) for c in blk.kernel.embedding.columns()]
        Pb = hermite_basis(P, dim)
        R = [list(r) for r in blk.relations]
        S = []
        for _, vec in svecs:
            if vec and next(iter(vec)) in pos:
                v = [0] * dim
                for g, c in vec.items():
                    v[pos[g]] = c
                S.append(v)
        s_count += len(S)
        dq_free += blk.kernel.free_rank
        dq_tors += blk.kernel.torsion
        if any(lattice_coordinates(Pb, v) is None for v in S):
            failures.append((blk.content, "s image outside D^q"))
            continue
        RS = hermite_basis(R + S, dim)
        free, tors = quotient_invariants(RS, R)
        if free or tors != [2] * len(S):
            failures.append((blk.content, f"s not injective onto (Z/2)^{len(S)}: {free}, {tors}"))
        cols, dvecs = dblocks.get(blk.content, ((), ()))
        cpos = {gcol: p for p, gcol in enumerate(cols)}
        cmat = [[0] * dim for _ in cols]
        for g, p in pos.items():
            for gcol, c in _canonical_map_column(n, k, g).items():
                cmat[cpos[gcol]][p] = c
        CP = [[sum(row[p] * x for p, x in enumerate(v)) for row in cmat] for v in P]
        if not _lattice_equal(CP, [list(v) for v in dvecs], len(cols)) and (CP or dvecs):
            failures.append((blk.content, "canonical map D^q -> D not onto"))
        coeff = integer_kernel(IntMatrix.from_columns(CP, len(cols))) if P and cols else IntMatrix.identity(len(P))
        K = [[sum(c * v[i] for c, v in zip(col, P)) for i in range(dim)] for col in coeff.columns()]
        if hermite_basis(K, dim) != RS:
            failures.append((blk.content, "ker(D^q -> D) differs from im(s)"))
    seen = {b.content for b in dq_blocks(n, k)}
    for c, (_, vecs) in dblocks.items():
        if vecs and c not in seen:
            failures.append((c, "D block with no D^q preimage"))
    details = {"n": n, "j": j, "s_domain_rank_F2": s_count, "Dq_free": dq_free,
               "Dq_torsion": sorted(dq_tors), "D_rank": dk_rank(n, k)}
    return SequenceReport(f"s-sequence n={n} j={j}", not failures, details, failures)


def _e_vectors(n: int, j: int) -> list[tuple[tuple, list]]:
    return [(u, half_odot_eta(lyndon_tree(u), n).vector()) for u in lyndon_words(n, j + 1)]


def verify_p_sequence(n: int, j: int) -> SequenceReport:
    """0 -> D^q_{2j} -> D_{2j} -p-> L_{j+1} (x) Z/2 -> 0."""
    k = 2 * j
    dblocks = {c: (cols, vecs) for c, cols, vecs in _dk_block_bases(n, k)}
    evecs = _e_vectors(n, j)
    failures = []
    for blk in dq_blocks(n, k):
        dim = len(blk.gens)
        pos = {g: p for p, g in enumerate(blk.gens)}
        P = [list(c) for c in blk.kernel.embedding.columns()]
        R = [list(r) for r in blk.relations]
        cols, dvecs = dblocks.get(blk.content, ((), ()))
        cpos = {gcol: p for p, gcol in enumerate(cols)}
        cmat = [[0] * dim for _ in cols]
        for g, p in pos.items():
            for gcol, c in _canonical_map_column(n, k, g).items():
                cmat[cpos[gcol]][p] = c
        CP = [[sum(row[p] * x for p, x in enumerate(v)) for row in cmat] for v in P]
        coeff = integer_kernel(IntMatrix.from_columns(CP, len(cols))) if P and cols else IntMatrix.identity(len(P))
        K = [[sum(c * v[i] for c, v in zip(col, P)) for i in range(dim)] for col in coeff.columns()]
        if hermite_basis(K, dim) != hermite_basis(R, dim):
            failures.append((blk.content, "D^q -> D not injective"))
        Db = hermite_basis([list(v) for v in dvecs], len(cols))
        E = []
        for u, vec in evecs:
            if content(u + u, n) == blk.content:
                E.append([vec[g] for g in cols])
        if any(lattice_coordinates(Db, v) is None for v in CP + E):
            failures.append((blk.content, "image outside D"))
            continue
        CPb = hermite_basis(CP, len(cols))
        free, tors = quotient_invariants(Db, CPb)
        if free or tors != [2] * len(E):
            failures.append((blk.content, f"D / D^q is not (Z/2)^{len(E)}: {free}, {tors}"))
        if not _lattice_equal(CP + E, [list(v) for v in dvecs], len(cols)):
            failures.append((blk.content, "tr(u).tr(u) classes do not generate D / D^q"))
    covered = {content(u + u, n) for u, _ in evecs}
    if not covered <= {b.content for b in dq_blocks(n, k)}:
        failures.append(("?", "some tr(u).tr(u) class lies in a block without D^q generators"))
    details = {"n": n, "j": j, "target_dim_F2": witt_number(n, j + 1), "D_rank": dk_rank(n, k),
               "Dq": dq_module(n, k)}
    return SequenceReport(f"p-sequence n={n} j={j}", not failures, details, failures)


def p_map(n: int, j: int) -> list[list[int]]:
    """Matrix over F_2 of p: D_{2j} -> L_{j+1} (x) Z/2 in the dk_basis / Lyndon bases.

    p kills the image of D^q_{2j} and sends eta(1/2 tr(u) (.) tr(u)) to u (x) 1; a D basis
    vector is written as an integer combination of those generators and read mod 2.
    """
    k = 2 * j
    words = lyndon_words(n, j + 1)
    wpos = {u: i for i, u in enumerate(words)}
    evecs = dict(_e_vectors(n, j))
    columns = []
    blocks = {b.content: b for b in dq_blocks(n, k)}
    for c, cols, dvecs in _dk_block_bases(n, k):
        blk = blocks.get(c)
        gens = []
        if blk is not None:
            cpos = {gcol: p for p, gcol in enumerate(cols)}
            for v in blk.kernel.embedding.columns():
                img = [0] * len(cols)
                for p, g in enumerate(blk.gens):
                    if v[p]:
                        for gcol, x in _canonical_map_column(n, k, g).items():
                            img[cpos[gcol]] += v[p] * x
                gens.append((None, img))
        for u, vec in evecs.items():
            if content(u + u, n) == c:
                gens.append((u, [vec[g] for g in cols]))
        for d in dvecs:
            sol = _integer_solve([g for _, g in gens], list(d))
            if sol is None:
                raise ArithmeticError("D basis vector outside the generated lattice")
            col = [0] * len(words)
            for (u, _), y in zip(gens, sol):
                if u is not None:
                    col[wpos[u]] = y % 2
            columns.append(col)
    return [[columns[c][r] for c in range(len(columns))] for r in range(len(words))]


def _integer_solve(gens: list[list[int]], v: list[int]) -> list[int] | None:
    """Integer y with sum y_i gens_i = v, or None."""
    from .exactla import _echelon
    m = len(gens)
    if not m:
        return [] if not any(v) else None
    dim = len(v)
    rows = [list(g) + [int(i == r) for i in range(m)] for r, g in enumerate(gens)]
    rk = _echelon(rows, dim)
    y = [0] * m
    v = list(v)
    for row in rows[:rk]:
        p = next(c for c in range(dim) if row[c])
        q, rem = divmod(v[p], row[p])
        if rem:
            return None
        if q:
            v = [a - q * b for a, b in zip(v, row[:dim])]
            y = [a + q * b for a, b in zip(y, row[dim:])]
    return y if not any(v) else None
