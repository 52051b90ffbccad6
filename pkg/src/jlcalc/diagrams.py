"""Jacobi diagrams: canonical forms, tree spaces T_k(C), eta and its inverse.

A diagram is stored as a graph of univalent legs and trivalent vertices. Each
vertex owns a list of darts (half-edges); a trivalent vertex lists its three
darts in counterclockwise order. Isomorphism classes are found by exhaustive
breadth-first labeling, which is cheap for the handful of vertices involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Mapping, Sequence

from .exactla import (
    IntMatrix,
    PresentedModule,
    presented_map_kernel,
    rational_nullspace,
    rational_rank,
    rational_solve,
    rref,
)
from .freelie import (
    DkElement,
    LieTree,
    _contexts,
    canonical_qtree,
    content,
    dk_basis,
    half_odot_eta,
    lyndon_tree,
    lyndon_words,
    normalize_bracket,
    quasi_lie_data,
    tree_degree,
    tree_leaves,
)


class DegreeMismatch(ValueError):
    pass


class NotInImage(ValueError):
    pass


class Graph:
    __slots__ = ("colors", "darts", "partner", "dvert", "circles")

    def __init__(self):
        self.circles = 0  # closed components without vertices
        self.colors: list = []
        self.darts: list[list[int]] = []
        self.partner: list[int] = []
        self.dvert: list[int] = []

    def add_vertex(self, color=None) -> int:
        v = len(self.colors)
        self.colors.append(color)
        count = 3 if color is None else 1
        self.darts.append(list(range(len(self.partner), len(self.partner) + count)))
        self.partner.extend([-1] * count)
        self.dvert.extend([v] * count)
        return v

    def connect(self, d1: int, d2: int):
        self.partner[d1], self.partner[d2] = d2, d1

    def copy(self) -> "Graph":
        g = Graph()
        g.colors = list(self.colors)
        g.darts = [list(d) for d in self.darts]
        g.partner = list(self.partner)
        g.dvert = list(self.dvert)
        g.circles = self.circles
        return g

    def legs(self) -> list[int]:
        return [v for v, c in enumerate(self.colors) if c is not None]

    def ideg(self) -> int:
        return sum(c is None for c in self.colors)

    def components(self) -> list[list[int]]:
        seen, comps = set(), []
        for s in range(len(self.colors)):
            if s in seen:
                continue
            comp, stack = [], [s]
            seen.add(s)
            while stack:
                v = stack.pop()
                comp.append(v)
                for d in self.darts[v]:
                    w = self.dvert[self.partner[d]]
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def has_loop(self) -> bool:
        if self.circles:
            return True
        for comp in self.components():
            nd = sum(len(self.darts[v]) for v in comp)
            if nd // 2 >= len(comp):
                return True
        return False

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def leg_dart(self, v: int) -> int:
        return self.darts[v][0]

    def join(self, u: int, v: int, dead: set) -> None:
        """Fuse legs u and v into one edge; the leg vertices are marked dead."""
        a, b = self.partner[self.leg_dart(u)], self.partner[self.leg_dart(v)]
        if a == self.leg_dart(v):
            self.circles += 1
        else:
            self.connect(a, b)
        dead.update((u, v))

    def without(self, dead: set) -> "Graph":
        keep = [v for v in range(len(self.colors)) if v not in dead]
        g = Graph()
        g.circles = self.circles
        dmap = {}
        for v in keep:
            nv = g.add_vertex(self.colors[v])
            for old, new in zip(self.darts[v], g.darts[nv]):
                dmap[old] = new
        for old, new in dmap.items():
            g.partner[new] = dmap[self.partner[old]]
        return g


def disjoint_union(graphs: Iterable[Graph]) -> Graph:
    out = Graph()
    for g in graphs:
        out.circles += g.circles
        off = len(out.partner)
        for v, c in enumerate(g.colors):
            out.add_vertex(c)
        for d, p in enumerate(g.partner):
            out.partner[off + d] = off + p
    return out


# ---------------------------------------------------------------------------
# canonical labeling

def _cyclic_sign(labels: Sequence[int]) -> int:
    x, y, z = labels
    return 1 if (x < y < z) or (y < z < x) or (z < x < y) else -1


def _labelings(g: Graph, start: int):
    out = []

    def rec(order, entry, seen, dlab, qi):
        if qi == len(order):
            out.append((order, dlab))
            return
        v = order[qi]
        ds = g.darts[v]
        if entry[qi] is None:
            perms = permutations(ds)
        else:
            rest = [d for d in ds if d != entry[qi]]
            perms = ((entry[qi],) + p for p in permutations(rest))
        for perm in perms:
            dl = dict(dlab)
            nd = len(dl)
            for d in perm:
                dl[d] = nd
                nd += 1
            o, en, sn = list(order), list(entry), set(seen)
            for d in perm:
                w = g.dvert[g.partner[d]]
                if w not in sn:
                    sn.add(w)
                    o.append(w)
                    en.append(g.partner[d])
            rec(o, en, sn, dl, qi + 1)

    rec([start], [None], {start}, {}, 0)
    return out


def _vertex_tag(c):
    return ("T",) if c is None else ("L", c)


def canonical_component(g: Graph, comp: Sequence[int]) -> tuple[tuple, int]:
    """(encoding, sign) of a connected component; sign 0 if it equals its own negative."""
    legs = [v for v in comp if g.colors[v] is not None]
    if legs:
        low = min(g.colors[v] for v in legs)
        starts = [v for v in legs if g.colors[v] == low]
    else:
        starts = list(comp)
    best, signs = None, set()
    for s in starts:
        for order, dlab in _labelings(g, s):
            inv = sorted(dlab, key=dlab.get)
            enc = (tuple(_vertex_tag(g.colors[v]) for v in order), tuple(dlab[g.partner[d]] for d in inv))
            if best is not None and enc > best:
                continue
            sign = 1
            for v in order:
                if g.colors[v] is None:
                    sign *= _cyclic_sign([dlab[d] for d in g.darts[v]])
            if best is None or enc < best:
                best, signs = enc, {sign}
            else:
                signs.add(sign)
    return best, (signs.pop() if len(signs) == 1 else 0)


def canonical(g: Graph) -> tuple[tuple, int]:
    """Canonical key of a whole diagram and the sign relating g to it (0 when g = -g)."""
    encs, sign = [], 1
    for comp in g.components():
        enc, s = canonical_component(g, comp)
        encs.append(enc)
        sign *= s
    encs += [((), ())] * g.circles
    return tuple(sorted(encs)), sign


def decode(key: tuple) -> Graph:
    """Graph of a canonical key, oriented by increasing dart labels."""
    g = Graph()
    for tags, partners in key:
        if not tags:
            g.circles += 1
            continue
        off = len(g.partner)
        for tag in tags:
            g.add_vertex(None if tag[0] == "T" else tag[1])
        for d, p in enumerate(partners):
            g.partner[off + d] = off + p
    return g


@lru_cache(maxsize=200000)
def key_info(key: tuple) -> tuple[int, bool, tuple]:
    """(i-degree, has loop, sorted leg colors)."""
    g = decode(key)
    return g.ideg(), g.has_loop(), tuple(sorted(c for c in g.colors if c is not None))


def add_term(acc: dict, g: Graph, coeff) -> None:
    key, sign = canonical(g)
    if sign:
        acc[key] = acc.get(key, 0) + sign * coeff
        if not acc[key]:
            del acc[key]


# ---------------------------------------------------------------------------
# trees

def _build(g: Graph, t: LieTree) -> int:
    """Add the rooted tree t; return its dangling root dart."""
    if isinstance(t, int):
        return g.darts[g.add_vertex(t)][0]
    v = g.add_vertex(None)
    p, left, right = g.darts[v]
    g.connect(left, _build(g, t[0]))
    g.connect(right, _build(g, t[1]))
    return p


def tree_graph(root_color, t: LieTree) -> Graph:
    """Tree diagram whose root leg has ``root_color`` and carries the commutator t."""
    g = Graph()
    r = g.add_vertex(root_color)
    g.connect(g.darts[r][0], _build(g, t))
    return g


def read_from(g: Graph, d: int) -> LieTree:
    """Commutator seen when entering the vertex of dart d through d."""
    v = g.dvert[d]
    if g.colors[v] is not None:
        return g.colors[v]
    ds = g.darts[v]
    i = ds.index(d)
    return (read_from(g, g.partner[ds[(i + 1) % 3]]), read_from(g, g.partner[ds[(i + 2) % 3]]))


def rooted_at(g: Graph, leg: int) -> LieTree:
    return read_from(g, g.partner[g.leg_dart(leg)])


@dataclass(frozen=True)
class RootedTree:
    """tr(u): a rooted planar tree whose leaves carry the letters of the commutator u."""

    tree: LieTree

    @property
    def ideg(self) -> int:
        return tree_degree(self.tree) - 1


def tr(u: LieTree) -> RootedTree:
    return RootedTree(u)


def odot(s: RootedTree, t: RootedTree) -> Graph:
    """Join the roots of two rooted trees by an edge."""
    g = Graph()
    a = _build(g, s.tree)
    b = _build(g, t.tree)
    g.connect(a, b)
    return g


# ---------------------------------------------------------------------------
# JSON form

@dataclass
class JacobiDiagram:
    """A diagram with legs colored by formal combinations of base colors."""

    graph: Graph
    leg_colors: dict  # leg vertex -> {color: coeff}

    @classmethod
    def from_graph(cls, g: Graph) -> "JacobiDiagram":
        return cls(g, {v: {g.colors[v]: 1} for v in g.legs()})

    def expand(self) -> dict:
        """Multilinear expansion into canonical basis-colored diagrams."""
        acc: dict = {}
        legs = sorted(self.leg_colors)
        for choice in product(*[list(self.leg_colors[v].items()) for v in legs]):
            g = self.graph.copy()
            coeff = Fraction(1)
            for v, (c, x) in zip(legs, choice):
                g.colors[v] = c
                coeff *= Fraction(x)
            add_term(acc, g, coeff)
        return acc

    def to_json(self, namer=str) -> dict:
        g = self.graph
        pairs = [(d, p) for d, p in enumerate(g.partner) if d < p]
        edge_of = {}
        for e, (d, p) in enumerate(pairs):
            edge_of[d] = edge_of[p] = e
        edges = [[g.dvert[d], g.dvert[p]] for d, p in pairs]
        return {
            "idegree": g.ideg(),
            "circles": g.circles,
            "vertices": [{"id": v, "kind": "trivalent" if c is None else "univalent"} for v, c in enumerate(g.colors)],
            "edges": edges,
            "cyclic": {str(v): [edge_of[d] for d in g.darts[v]] for v, c in enumerate(g.colors) if c is None},
            "legColors": {str(v): [{"color": namer(c), "coeff": str(x)} for c, x in cols.items()]
                          for v, cols in self.leg_colors.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping, color_parser=lambda s: s) -> "JacobiDiagram":
        ids = [v["id"] for v in data["vertices"]]
        kinds = {v["id"]: v["kind"] for v in data["vertices"]}
        pos = {i: p for p, i in enumerate(ids)}
        g = Graph()
        g.circles = int(data.get("circles", 0))
        for i in ids:
            g.add_vertex(None if kinds[i].startswith("tri") else "?")
        free = {pos[i]: list(g.darts[pos[i]]) for i in ids}
        cyclic = {int(k): v for k, v in data.get("cyclic", {}).items()}
        for e, (u, w) in enumerate(data["edges"]):
            pair = []
            for x in (u, w):
                v = pos[x]
                if g.colors[v] is None:
                    slot = [j for j, ee in enumerate(cyclic[x]) if ee == e]
                    j = slot[len(pair)] if u == w else slot[0]
                    d = g.darts[v][j]
                else:
                    d = free[v].pop()
                pair.append(d)
            g.connect(*pair)
        leg_colors = {}
        for k, combo in data.get("legColors", {}).items():
            v = pos[int(k)]
            leg_colors[v] = {color_parser(t["color"]): Fraction(t["coeff"]) for t in combo}
            g.colors[v] = next(iter(leg_colors[v]))
        return cls(g, leg_colors)


# ---------------------------------------------------------------------------
# tree spaces

def _shapes(m: int) -> list[LieTree]:
    """All planar binary trees with m leaves (leaves are 0 placeholders)."""
    if m == 1:
        return [0]
    return [(a, b) for i in range(1, m) for a in _shapes(i) for b in _shapes(m - i)]


def _fill(shape: LieTree, colors: Iterable[int]) -> LieTree:
    it = iter(colors)

    def rec(s):
        return next(it) if isinstance(s, int) else (rec(s[0]), rec(s[1]))

    return rec(shape)


def _ihx_terms(t: LieTree):
    """Three-term Jacobi relations at every internal edge of a rooted tree."""
    for node, rebuild in _contexts(t):
        a, b = node
        if not isinstance(b, int):
            y, z = b
            yield [(rebuild((a, (y, z))), 1), (rebuild(((a, y), z)), -1), (rebuild((y, (a, z))), -1)]
        if not isinstance(a, int):
            y, z = a
            yield [(rebuild(((y, z), b)), 1), (rebuild((y, (z, b))), -1), (rebuild((z, (y, b))), 1)]


class TreeSpace:
    """T_k(C) for colors 0..ncolors-1: spanning keys, relations, rational reduction."""

    def __init__(self, ncolors: int, k: int):
        if ncolors < 1 or k < 1:
            raise ValueError("need at least one color and k >= 1")
        self.ncolors, self.k = ncolors, k
        keys = {}
        for shape in _shapes(k + 1):
            for cols in product(range(ncolors), repeat=k + 2):
                key, sign = canonical(tree_graph(cols[0], _fill(shape, cols[1:])))
                keys.setdefault(key, sign != 0)
        self.keys = sorted(keys)
        self.index = {key: i for i, key in enumerate(self.keys)}
        self.self_negating = [not keys[key] for key in self.keys]
        rels = []
        seen = set()
        for key in self.keys:
            g = decode(key)
            root = g.legs()[0]
            t = rooted_at(g, root)
            for terms in _ihx_terms(t):
                row: dict = {}
                for tt, c in terms:
                    kk, s = canonical(tree_graph(g.colors[root], tt))
                    # a self-negating tree is only defined up to sign; 2T = 0 absorbs the choice
                    row[self.index[kk]] = row.get(self.index[kk], 0) + c * (s if s else 1)
                row = {i: c for i, c in row.items() if c}
                fz = frozenset(row.items())
                if row and fz not in seen:
                    seen.add(fz)
                    rels.append(row)
        self.ihx = rels
        m = len(self.keys)
        qrows = [[r.get(i, 0) for i in range(m)] for r in rels]
        qrows += [[int(i == j) for i in range(m)] for j in range(m) if self.self_negating[j]]
        self._rref, self._pivots = rref(qrows, m) if qrows else ([], [])
        self.free = [i for i in range(m) if i not in set(self._pivots)]

    @property
    def dim(self) -> int:
        return len(self.free)

    def integer_presentation(self, keys: Sequence[int] | None = None) -> PresentedModule:
        """Z-presentation (2T = 0 for self-negating trees, IHX) restricted to ``keys`` (a union of blocks)."""
        keys = list(range(len(self.keys))) if keys is None else list(keys)
        pos = {k: p for p, k in enumerate(keys)}
        cols = []
        for j in keys:
            if self.self_negating[j]:
                col = [0] * len(keys)
                col[pos[j]] = 2
                cols.append(col)
        for r in self.ihx:
            if next(iter(r)) in pos:
                col = [0] * len(keys)
                for i, c in r.items():
                    col[pos[i]] = c
                cols.append(col)
        return PresentedModule(len(keys), IntMatrix.from_columns(cols, len(keys)) if cols
                               else IntMatrix.zeros(len(keys), 0))

    def reduce(self, vec: Sequence) -> tuple:
        v = [Fraction(x) for x in vec]
        for row, p in zip(self._rref, self._pivots):
            if v[p]:
                c = v[p]
                v = [a - c * b for a, b in zip(v, row)]
        return tuple(v)

    def vector_of(self, combo: Mapping[tuple, object]) -> list:
        v = [Fraction(0)] * len(self.keys)
        for key, c in combo.items():
            if key not in self.index:
                ideg, _, legs = key_info(key)
                raise DegreeMismatch(f"diagram of i-degree {ideg} with legs {legs} is not in T_{self.k}")
            v[self.index[key]] += Fraction(c)
        return v

    def normal_form(self, combo: Mapping[tuple, object]) -> "DiagramVector":
        return DiagramVector(self, self.reduce(self.vector_of(combo)))

    def eta_key(self, key: tuple) -> DkElement:
        g = decode(key)
        return DkElement.from_pairs(self.ncolors, self.k,
                                    [(g.colors[v], normalize_bracket(rooted_at(g, v), self.ncolors)) for v in g.legs()])

    def eta_q_key(self, key: tuple) -> dict:
        """eta^q in coordinates (letter, canonical quasi tree) of H (x) L^q_{k+1}."""
        g = decode(key)
        out: dict = {}
        for v in g.legs():
            c, s, _ = canonical_qtree(rooted_at(g, v))
            out[(g.colors[v], c)] = out.get((g.colors[v], c), 0) + s
        return {x: c for x, c in out.items() if c}

    @property
    def eta_matrix(self) -> list[list[int]]:
        """Columns: eta of each free (non-pivot) key, in tensor coordinates."""
        return [self.eta_key(self.keys[j]).vector() for j in self.free]


@lru_cache(maxsize=None)
def tree_space(ncolors: int, k: int) -> TreeSpace:
    return TreeSpace(ncolors, k)


def enumerate_trees(ncolors: int, k: int) -> TreeSpace:
    return tree_space(ncolors, k)


@dataclass(frozen=True)
class DiagramVector:
    space: TreeSpace
    vec: tuple

    def is_zero(self) -> bool:
        return not any(self.vec)

    def terms(self) -> dict:
        return {self.space.keys[i]: c for i, c in enumerate(self.vec) if c}

    def __add__(self, other: "DiagramVector") -> "DiagramVector":
        return DiagramVector(self.space, self.space.reduce([a + b for a, b in zip(self.vec, other.vec)]))

    def __neg__(self):
        return DiagramVector(self.space, tuple(-a for a in self.vec))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "DiagramVector":
        return DiagramVector(self.space, tuple(c * a for a in self.vec))

    def __eq__(self, other):
        return isinstance(other, DiagramVector) and self.space is other.space and self.vec == other.vec

    def to_json(self, color_names: Sequence[str] | None = None) -> dict:
        names = color_names or [str(i + 1) for i in range(self.space.ncolors)]
        out = []
        for key, c in self.terms().items():
            g = decode(key)
            d = JacobiDiagram(g, {v: {names[g.colors[v]]: 1} for v in g.legs()})
            out.append({"coeff": str(c), "diagram": d.to_json()})
        return {"idegree": self.space.k, "colors": list(names), "terms": out}

    def pretty(self, color_names: Sequence[str] | None = None) -> str:
        names = color_names or [str(i + 1) for i in range(self.space.ncolors)]
        parts = []
        for key, c in self.terms().items():
            g = decode(key)
            root = g.legs()[0]
            parts.append(f"{c}*T({names[g.colors[root]]}; {_tree_text(rooted_at(g, root), names)})")
        return " + ".join(parts) if parts else "0"


def _tree_text(t, names):
    if isinstance(t, int):
        return names[t]
    return f"[{_tree_text(t[0], names)},{_tree_text(t[1], names)}]"


def tree_vector(ncolors: int, k: int, root_color: int, t: LieTree, coeff=1) -> DiagramVector:
    space = tree_space(ncolors, k)
    acc: dict = {}
    add_term(acc, tree_graph(root_color, t), coeff)
    return space.normal_form(acc)


def Y(a: int, b: int, c: int, ncolors: int) -> DiagramVector:
    """The tripod whose legs a, b, c sit in counterclockwise order."""
    return tree_vector(ncolors, 1, a, (b, c))


def normal_form(combo: Mapping[tuple, object], ncolors: int, k: int) -> DiagramVector:
    return tree_space(ncolors, k).normal_form(combo)


def eta(v: DiagramVector) -> DkElement:
    space = v.space
    out = DkElement(space.ncolors, space.k)
    for key, c in v.terms().items():
        out = out + space.eta_key(key).scale(c)
    return out.certify()


def eta_q(v: DiagramVector) -> dict:
    out: dict = {}
    for key, c in v.terms().items():
        for x, d in v.space.eta_q_key(key).items():
            out[x] = out.get(x, 0) + c * d
    return {x: c for x, c in out.items() if c}


def eta_inverse(x: DkElement) -> DiagramVector:
    if not x.in_dk():
        raise NotInImage("element is not in D_k: its bracket does not vanish")
    space = tree_space(x.n, x.k)
    cols = space.eta_matrix
    target = x.vector()
    rows = [[col[i] for col in cols] for i in range(len(target))]
    sol = rational_solve(rows, target) if cols else ([] if not any(target) else None)
    if sol is None:
        raise NotInImage("element is not in the rational image of eta")
    vec = [Fraction(0)] * len(space.keys)
    for j, y in zip(space.free, sol):
        vec[j] = y
    return DiagramVector(space, tuple(vec))


def eta_isomorphism_report(n: int, k: int) -> dict:
    """Ranks and round trips for eta: T_k(H) (x) Q -> D_k(H) (x) Q."""
    space = tree_space(n, k)
    cols = space.eta_matrix
    rank = rational_rank(IntMatrix.from_columns(cols, len(cols[0]))) if cols else 0
    D = dk_basis(n, k)
    forward = all(eta(eta_inverse(x)) == x for x in D.elements())
    backward = True
    for j in space.free:
        v = DiagramVector(space, tuple(Fraction(int(i == j)) for i in range(len(space.keys))))
        backward = backward and eta_inverse(eta(v)) == v
    return {"dim_T": space.dim, "rank_D": D.rank, "eta_rank": rank, "eta_inverse_eta": backward,
            "eta_eta_inverse": forward,
            "iso": space.dim == D.rank == rank and forward and backward}


def eta_q_kernel(n: int, k: int) -> tuple[int, list[int]]:
    """(free rank, torsion) of ker(eta^q: T_k(H) -> H (x) L^q_{k+1}) over Z."""
    space = tree_space(n, k)
    data = quasi_lie_data(n, k + 1)
    kept = data.kept_trees
    by_block: dict = {}
    for j, key in enumerate(space.keys):
        by_block.setdefault(key_info(key)[2], []).append(j)
    free, tors = 0, []
    for legs, keys in sorted(by_block.items()):
        c = content(legs, n)
        gens = [(i, r) for i in range(n) for r, t in enumerate(kept) if content([i] + tree_leaves(t), n) == c]
        gpos = {g: p for p, g in enumerate(gens)}
        fcols = []
        for j in keys:
            col = [0] * len(gens)
            for (i, t), s in space.eta_q_key(space.keys[j]).items():
                for r, x in data.reduction.projection[data.index[t]].items():
                    col[gpos[(i, r)]] += s * x
            fcols.append(col)
        f = IntMatrix.from_columns(fcols, len(gens))
        trel = []
        for i in range(n):
            for r in data.reduction.relations:
                if (i, next(iter(r))) in gpos:
                    col = [0] * len(gens)
                    for rr, x in r.items():
                        col[gpos[(i, rr)]] = x
                    trel.append(col)
        target = PresentedModule(len(gens), IntMatrix.from_columns(trel, len(gens)) if trel
                                 else IntMatrix.zeros(len(gens), 0))
        ker = presented_map_kernel(f, space.integer_presentation(keys), target)
        free += ker.free_rank
        tors += ker.torsion
    return free, sorted(tors)


def ker_iota_generators(g: int, k: int) -> dict:
    """Compare the span of the candidate generators with ker(iota_*) on D_k(H) (x) Q.

    Colors 0..g-1 are a_1..a_g and g..2g-1 are b_1..b_g.
    """
    from .johnson import iota_star_dk

    n = 2 * g
    space = tree_space(n, k)
    cands = []
    for key in space.keys:
        if any(c < g for c in key_info(key)[2]):
            cands.append(space.eta_key(key))
    if k % 2 == 0:
        for u in lyndon_words(n, k // 2 + 1):
            if any(x < g for x in u):
                cands.append(half_odot_eta(lyndon_tree(u), n))
    ok_members = all(x.in_dk() and iota_star_dk(x).is_zero() for x in cands)
    D = dk_basis(n, k).elements()
    images = [iota_star_dk(x).vector() for x in D]
    m = len(images[0]) if images else 0
    null = rational_nullspace([[img[i] for img in images] for i in range(m)], len(D)) if D else []
    kernel = []
    for y in null:
        v = [Fraction(0)] * (len(D[0].vector()) if D else 0)
        for c, x in zip(y, D):
            if c:
                v = [a + c * b for a, b in zip(v, x.vector())]
        kernel.append(v)
    cvecs = [x.vector() for x in cands]

    def rank(vs):
        return len(rref(vs)[1]) if vs else 0

    rc, rk, rboth = rank(cvecs), rank(kernel), rank(cvecs + kernel)
    return {"g": g, "k": k, "candidates": len(cands), "span_rank": rc, "kernel_rank": rk,
            "members_ok": ok_members, "equal": ok_members and rc == rk == rboth}
