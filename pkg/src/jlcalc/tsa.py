"""Top-substantial Jacobi diagrams: morphisms, composition, pairing, upper trees.

Colors are pairs (i, s) with i >= 1 and s in "+", "-", "*". A morphism g -> f
has legs in {1..g}x{+} and {1..f}x{-}. It is stored as a strut record L
(a symmetric rational matrix, read as exp(1/2 sum over ordered pairs
L[r][c] strut(r, c))) together with a finite series of non-exponentiated
diagrams, the Y-part, which is disjoint-union multiplied with the struts.

Gluing struts against struts is done in closed form, since chains of struts
can only be of length three. Everything touching a Y-part diagram goes
through one enumeration engine: each glued leg is matched to a leg of the
other factor, linked to another leg of its own factor through a strut of the
other side, or capped by the linear part of the other side's struts.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

from .diagrams import (
    Graph,
    JacobiDiagram,
    NotInImage,
    add_term,
    canonical,
    decode,
    disjoint_union,
    eta_inverse,
    key_info,
    tree_graph,
    tree_space,
)
from .freegroup import Endo
from .johnson import tau_k_levine


class ObjectMismatch(ValueError):
    pass


class NotSymmetric(ValueError):
    pass


class NotTopSubstantial(ValueError):
    pass


class BadStrutRecord(ValueError):
    pass


Color = tuple  # (index, sign)


def plus(i: int) -> Color:
    return (i, "+")


def minus(i: int) -> Color:
    return (i, "-")


def star(i: int) -> Color:
    return (i, "*")


def color_name(c: Color) -> str:
    return f"{c[0]}{c[1]}"


def parse_color(text: str) -> Color:
    text = text.strip()
    if len(text) < 2 or text[-1] not in "+-*" or not text[:-1].isdigit():
        raise ValueError(f"bad color {text!r}; expected forms like 1+, 2-, 3*")
    return (int(text[:-1]), text[-1])


Series = dict  # canonical key -> Fraction


def _add_into(acc: dict, key, c) -> None:
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def series_ideg(key) -> int:
    return key_info(key)[0]


def series_legs(key) -> tuple:
    return key_info(key)[2]


def truncate(s: Series, cap: int) -> Series:
    return {k: c for k, c in s.items() if series_ideg(k) <= cap}


EMPTY = canonical(Graph())[0]


def strut_graph(r: Color, c: Color) -> Graph:
    g = Graph()
    a, b = g.add_vertex(r), g.add_vertex(c)
    g.connect(g.darts[a][0], g.darts[b][0])
    return g


def strut_key(r: Color, c: Color):
    return canonical(strut_graph(r, c))[0]


def is_strut_component(tags) -> bool:
    return len(tags) == 2 and tags[0][0] == "L" and tags[1][0] == "L"


# ---------------------------------------------------------------------------
# linking matrices

def _index(g: int, f: int | None = None) -> list[Color]:
    return [plus(i) for i in range(1, g + 1)] + [minus(j) for j in range(1, (g if f is None else f) + 1)]


@dataclass(frozen=True)
class LinkingMatrix:
    genus: int
    entries: tuple  # rows in the order 1+..g+, 1-..g-

    def __post_init__(self):
        n = 2 * self.genus
        if len(self.entries) != n or any(len(r) != n for r in self.entries):
            raise ValueError(f"linking matrix must be {n}x{n}")
        for i in range(n):
            for j in range(i):
                if self.entries[i][j] != self.entries[j][i]:
                    raise NotSymmetric(f"entry ({i + 1},{j + 1}) differs from its transpose")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "LinkingMatrix":
        n = len(rows)
        if n % 2:
            raise ValueError("linking matrix needs even size")
        return cls(n // 2, tuple(tuple(Fraction(x) for x in r) for r in rows))

    @classmethod
    def from_blocks(cls, X, Lam, Delta) -> "LinkingMatrix":
        """(X Lam^T; Lam Delta) with X on the + colors."""
        g = len(Delta)
        rows = [list(X[i]) + [Lam[j][i] for j in range(g)] for i in range(g)]
        rows += [list(Lam[i]) + list(Delta[i]) for i in range(g)]
        return cls.from_rows(rows)

    def block(self, which: str) -> list[list]:
        g = self.genus
        r0, c0 = {"++": (0, 0), "-+": (g, 0), "+-": (0, g), "--": (g, g)}[which]
        return [[self.entries[r0 + i][c0 + j] for j in range(g)] for i in range(g)]

    def as_dict(self) -> dict:
        idx = _index(self.genus)
        return {(idx[i], idx[j]): self.entries[i][j] for i in range(len(idx)) for j in range(len(idx))}

    def to_json(self) -> dict:
        idx = _index(self.genus)
        return {color_name(r): {color_name(c): str(self.entries[i][j]) for j, c in enumerate(idx)}
                for i, r in enumerate(idx)}

    @classmethod
    def from_json(cls, data: Mapping) -> "LinkingMatrix":
        if "rows" in data:
            return cls.from_rows(data["rows"])
        names = list(data)
        g = len(names) // 2
        idx = _index(g)
        try:
            rows = [[Fraction(data[color_name(r)][color_name(c)]) for c in idx] for r in idx]
        except KeyError as e:
            raise ValueError(f"linking matrix JSON is missing key {e}") from None
        return cls.from_rows(rows)


@dataclass(frozen=True)
class CobordismClass:
    verdict: str  # "not-Lagrangian", "LC", "ILC" or "IC"
    Lambda: list | None = None
    Delta: list | None = None

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict}
        if self.Lambda is not None:
            out["Lambda"] = [[str(x) for x in r] for r in self.Lambda]
            out["Delta"] = [[str(x) for x in r] for r in self.Delta]
        return out


def classify_cobordism(L: LinkingMatrix) -> CobordismClass:
    g = L.genus
    if any(x for r in L.block("++") for x in r):
        return CobordismClass("not-Lagrangian")
    Lam, Delta = L.block("-+"), L.block("--")
    if Lam != [[int(i == j) for j in range(g)] for i in range(g)]:
        return CobordismClass("LC", Lam, Delta)
    if any(x for r in Delta for x in r):
        return CobordismClass("ILC", Lam, Delta)
    return CobordismClass("IC", Lam, Delta)


# ---------------------------------------------------------------------------
# morphisms

@dataclass
class TsMorphism:
    source: int
    target: int
    cap: int
    struts: dict = field(default_factory=dict)  # (color, color) -> Fraction, symmetric
    y: Series = field(default_factory=lambda: {EMPTY: Fraction(1)})

    def __post_init__(self):
        struts = {}
        for (r, c), x in self.struts.items():
            x = Fraction(x)
            if x:
                if struts.get((c, r), x) != x:
                    raise NotSymmetric(f"strut record differs at ({color_name(r)},{color_name(c)})")
                struts[(r, c)] = struts[(c, r)] = x
        self.struts = struts
        self.y = {k: Fraction(c) for k, c in self.y.items() if c and series_ideg(k) <= self.cap}

    def lam(self, r: Color, c: Color) -> Fraction:
        return self.struts.get((r, c), Fraction(0))

    def check_top_substantial(self):
        for (r, c), x in self.struts.items():
            if r[1] == "+" and c[1] == "+":
                raise NotTopSubstantial(f"strut ({color_name(r)},{color_name(c)}) joins two source colors")
        for key in self.y:
            for tags, _ in key:
                if is_strut_component(tags) and tags[0][1][1] == "+" and tags[1][1][1] == "+":
                    raise NotTopSubstantial("Y-part contains a strut between two source colors")

    def colors(self) -> list[Color]:
        return _index(self.source, self.target)

    def __eq__(self, other):
        return (isinstance(other, TsMorphism) and (self.source, self.target) == (other.source, other.target)
                and self.struts == other.struts and truncate(self.y, min(self.cap, other.cap))
                == truncate(other.y, min(self.cap, other.cap)))

    def expand(self, max_struts: int) -> Series:
        """Explicit series: the strut exponential up to ``max_struts`` struts, times the Y-part."""
        pairs = sorted({tuple(sorted(rc)) for rc in self.struts})
        weights = [self.lam(r, c) / (2 if r == c else 1) for r, c in pairs]
        out: dict = {}
        for mult in _multiplicities(len(pairs), max_struts):
            coeff = Fraction(1)
            parts = []
            for (r, c), w, m in zip(pairs, weights, mult):
                coeff *= w ** m / _factorial(m)
                parts += [strut_graph(r, c)] * m
            for key, yc in self.y.items():
                g = disjoint_union(parts + [decode(key)])
                add_term(out, g, coeff * yc)
        return out

    def to_json(self) -> dict:
        pairs = sorted({tuple(sorted(rc)) for rc in self.struts})
        return {
            "source": self.source, "target": self.target, "cap": self.cap,
            "struts": [{"colors": [color_name(r), color_name(c)], "value": str(self.lam(r, c))} for r, c in pairs],
            "terms": [{"coeff": str(c), "diagram": JacobiDiagram.from_graph(decode(k)).to_json(color_name)}
                      for k, c in sorted(self.y.items(), key=lambda kc: (series_ideg(kc[0]), repr(kc[0])))],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TsMorphism":
        struts = {}
        for s in data.get("struts", []):
            r, c = (parse_color(x) for x in s["colors"])
            struts[(r, c)] = struts[(c, r)] = Fraction(s["value"])
        y: dict = {}
        terms = data.get("terms")
        if terms is None:
            y = {EMPTY: Fraction(1)}
        for t in terms or []:
            d = JacobiDiagram.from_json(t["diagram"], parse_color)
            for k, c in d.expand().items():
                _add_into(y, k, c * Fraction(t["coeff"]))
        return cls(int(data["source"]), int(data["target"]), int(data.get("cap", 4)), struts, y)


def _factorial(m: int) -> int:
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def _multiplicities(n: int, total: int):
    if n == 0:
        yield ()
        return
    for m in range(total + 1):
        for rest in _multiplicities(n - 1, total - m):
            yield (m,) + rest


def identity(g: int, cap: int = 4) -> TsMorphism:
    struts = {}
    for i in range(1, g + 1):
        struts[(plus(i), minus(i))] = struts[(minus(i), plus(i))] = Fraction(1)
    return TsMorphism(g, g, cap, struts)


def strut_exp(M: LinkingMatrix | Mapping, g: int | None = None, cap: int = 4) -> TsMorphism:
    """exp of sum over ordered pairs (r, c) of M[r][c] strut(r, c); the record is 2M."""
    entries = M.as_dict() if isinstance(M, LinkingMatrix) else dict(M)
    genus = M.genus if isinstance(M, LinkingMatrix) else g
    for (r, c), x in entries.items():
        if entries.get((c, r), 0) != x:
            raise NotSymmetric(f"matrix differs from its transpose at ({color_name(r)},{color_name(c)})")
    return TsMorphism(genus, genus, cap, {rc: 2 * Fraction(x) for rc, x in entries.items()})


def strut_part(L: LinkingMatrix, cap: int = 4) -> TsMorphism:
    """[Lk/2] as a morphism."""
    return strut_exp({rc: Fraction(x) / 2 for rc, x in L.as_dict().items()}, L.genus, cap)


# ---------------------------------------------------------------------------
# the gluing engine

Combo = Mapping  # color -> coefficient


def glue(dg: Graph, eg: Graph, d_in: Sequence[int], e_in: Sequence[int],
         matchable: Callable[[Color, Color], bool],
         pair_coeff: Callable[[Color, Color], Fraction],
         d_cap: Callable[[Color], Combo],
         e_cap: Callable[[Color], Combo],
         coeff=Fraction(1), out: dict | None = None) -> dict:
    """All gluings of the legs d_in of dg and e_in of eg.

    Every leg of d_in is matched with a leg of e_in, paired with a later leg of
    d_in (weight pair_coeff), or recolored by d_cap; unmatched legs of e_in are
    recolored by e_cap. An empty cap means the leg cannot stay unglued.
    """
    out = {} if out is None else out
    off = len(dg.colors)
    base = disjoint_union([dg, eg])
    e_in = [y + off for y in e_in]
    col = base.colors

    def emit(joins, caps, c):
        legs = list(caps)
        for choice in product(*[list(caps[v].items()) for v in legs]):
            g = base.copy()
            w = c
            for v, (cc, x) in zip(legs, choice):
                g.colors[v] = cc
                w = w * x
            if not w:
                continue
            dead: set = set()
            for u, v in joins:
                g.join(u, v, dead)
            add_term(out, g.without(dead), w)

    def rec(i, used, done, joins, caps, c):
        if i == len(d_in):
            caps = dict(caps)
            for y in e_in:
                if y not in used:
                    combo = {k: x for k, x in e_cap(col[y]).items() if x}
                    if not combo:
                        return
                    caps[y] = combo
            emit(joins, caps, c)
            return
        x = d_in[i]
        if x in done:
            rec(i + 1, used, done, joins, caps, c)
            return
        for y in e_in:
            if y not in used and matchable(col[x], col[y]):
                rec(i + 1, used | {y}, done | {x}, joins + [(x, y)], caps, c)
        for x2 in d_in[i + 1:]:
            if x2 not in done:
                w = pair_coeff(col[x], col[x2])
                if w:
                    rec(i + 1, used, done | {x, x2}, joins + [(x, x2)], caps, c * w)
        combo = {k: v for k, v in d_cap(col[x]).items() if v}
        if combo:
            rec(i + 1, used, done | {x}, joins, {**caps, x: combo}, c)

    rec(0, frozenset(), frozenset(), [], {}, coeff)
    return out


def _legs_with(g: Graph, sign: str) -> list[int]:
    return [v for v in g.legs() if g.colors[v][1] == sign]


def compose(D: TsMorphism, E: TsMorphism, cap: int | None = None) -> TsMorphism:
    """D o E for D: g -> f and E: h -> g: glue the g+ legs of D to the g- legs of E."""
    if D.source != E.target:
        raise ObjectMismatch(f"cannot compose {D.source}->{D.target} after {E.source}->{E.target}")
    D.check_top_substantial()
    E.check_top_substantial()
    g, f, h = D.source, D.target, E.source
    N = min(D.cap, E.cap) if cap is None else cap
    inner = range(1, g + 1)

    struts = {}
    for k in range(1, h + 1):
        for j in range(1, f + 1):
            x = sum((E.lam(plus(k), minus(i)) * D.lam(plus(i), minus(j)) for i in inner), Fraction(0))
            struts[(plus(k), minus(j))] = struts[(minus(j), plus(k))] = x
    for j in range(1, f + 1):
        for j2 in range(1, f + 1):
            x = D.lam(minus(j), minus(j2)) + sum(
                (D.lam(minus(j), plus(i)) * E.lam(minus(i), minus(i2)) * D.lam(plus(i2), minus(j2))
                 for i in inner for i2 in inner), Fraction(0))
            struts[(minus(j), minus(j2))] = x

    def d_cap(c):
        i = c[0]
        combo = {plus(k): E.lam(plus(k), minus(i)) for k in range(1, h + 1)}
        for j in range(1, f + 1):
            combo[minus(j)] = sum((E.lam(minus(i), minus(i2)) * D.lam(plus(i2), minus(j)) for i2 in inner),
                                  Fraction(0))
        return combo

    def e_cap(c):
        return {minus(j): D.lam(plus(c[0]), minus(j)) for j in range(1, f + 1)}

    y: dict = {}
    for dk, dc in D.y.items():
        dg = decode(dk)
        for ek, ec in E.y.items():
            if series_ideg(dk) + series_ideg(ek) > N:
                continue
            eg = decode(ek)
            glue(dg, eg, _legs_with(dg, "+"), _legs_with(eg, "-"),
                 lambda a, b: a[0] == b[0],
                 lambda a, b: E.lam(minus(a[0]), minus(b[0])),
                 d_cap, e_cap, dc * ec, y)
    return TsMorphism(h, f, N, struts, y)


def pairing(E: Series, F: Series, star_colors: Sequence[Color] | None = None,
            propagator: Mapping | None = None, cap: int | None = None) -> Series:
    """<E, F>: glue all star-colored legs of E with those of F.

    ``propagator`` is a symmetric matrix on star colors; it stands for an extra
    factor exp(1/2 sum propagator[r][c] strut(r, c)) on the F side, so two legs
    of an E term can also be joined through it.
    """
    stars = set(star_colors) if star_colors is not None else None

    def is_star(c):
        return c[1] == "*" if stars is None else c in stars

    prop = dict(propagator or {})
    out: dict = {}
    for ek, ec in E.items():
        eg = decode(ek)
        e_in = [v for v in eg.legs() if is_star(eg.colors[v])]
        for fk, fc in F.items():
            if cap is not None and series_ideg(ek) + series_ideg(fk) > cap:
                continue
            fg = decode(fk)
            f_in = [v for v in fg.legs() if is_star(fg.colors[v])]
            if not prop and len(e_in) != len(f_in):
                continue
            glue(eg, fg, e_in, f_in,
                 lambda a, b: a == b,
                 lambda a, b: Fraction(prop.get((a, b), 0)),
                 lambda c: {}, lambda c: {}, ec * fc, out)
    return out


def relabel(s: Series, images: Callable[[Color], Combo]) -> Series:
    """Replace every leg color c by the combination images(c), multilinearly."""
    out: dict = {}
    for key, c in s.items():
        g = decode(key)
        legs = g.legs()
        combos = [list(images(g.colors[v]).items()) for v in legs]
        for choice in product(*combos):
            h = g.copy()
            w = c
            for v, (cc, x) in zip(legs, choice):
                h.colors[v] = cc
                w = w * x
            if w:
                add_term(out, h, w)
    return out


def upper_tree_reduction(D: TsMorphism | Series) -> Series:
    """Drop every term with a loop or a leg of sign '-'."""
    y = D.y if isinstance(D, TsMorphism) else D
    return {k: c for k, c in y.items()
            if not key_info(k)[1] and all(col[1] == "+" for col in series_legs(k))}


def degree_part(s: Series, d: int) -> Series:
    return {k: c for k, c in s.items() if series_ideg(k) == d}


# ---------------------------------------------------------------------------
# leading-term additivity

def _ilc_delta(M: TsMorphism) -> list[list[Fraction]]:
    g = M.source
    if M.target != g:
        raise BadStrutRecord("expected an endomorphism g -> g")
    for i in range(1, g + 1):
        for j in range(1, g + 1):
            if M.lam(plus(i), plus(j)):
                raise BadStrutRecord("strut record has a nonzero ++ block")
            if M.lam(plus(i), minus(j)) != (1 if i == j else 0):
                raise BadStrutRecord("strut record is not the identity on +- colors")
    return [[M.lam(minus(p), minus(q)) for q in range(1, g + 1)] for p in range(1, g + 1)]


def _tree_difference_vanishes(diff: Series, g: int) -> bool:
    """Whether a combination of connected trees on + colors is zero modulo AS and IHX."""
    by_degree: dict = {}
    for k, c in diff.items():
        ideg, loop, legs = key_info(k)
        if loop or len(k) != 1 or ideg == 0:
            return False
        by_degree.setdefault(ideg, {})[k] = c
    for d, part in by_degree.items():
        space = tree_space(g, d)
        combo: dict = {}
        for k, c in part.items():
            graph = decode(k)
            for v in graph.legs():
                graph.colors[v] = graph.colors[v][0] - 1
            add_term(combo, graph, c)
        if not space.normal_form(combo).is_zero():
            return False
    return True


def aarhus_composite(M: TsMorphism, N: TsMorphism, cap: int) -> Series:
    """Y-part of M o N through the star-color pairing, for ILC-shaped strut records."""
    _ilc_delta(M)
    delta = _ilc_delta(N)
    g = M.source

    def left(c):
        if c[1] != "+":
            return {c: 1}
        j = c[0]
        combo = {star(j): 1, plus(j): 1}
        for p in range(1, g + 1):
            if delta[p - 1][j - 1]:
                combo[minus(p)] = delta[p - 1][j - 1]
        return combo

    def right(c):
        return {star(c[0]): 1, minus(c[0]): 1} if c[1] == "-" else {c: 1}

    prop = {(star(p), star(q)): delta[p - 1][q - 1] for p in range(1, g + 1) for q in range(1, g + 1)}
    E = relabel(truncate(M.y, cap), left)
    F = relabel(truncate(N.y, cap), right)
    return truncate(pairing(E, F, propagator=prop, cap=cap), cap)


def leading_additivity_check(M: TsMorphism, N: TsMorphism, k: int) -> bool:
    """Upper-tree part of M o N is empty + (D_k + D'_k) + (i-deg > k)."""
    g = M.source
    for X in (M, N):
        low = upper_tree_reduction(X)
        if any(0 < series_ideg(key) < k for key in low) or low.get(EMPTY) != 1:
            raise ValueError("upper-tree part must be the empty diagram plus terms of i-deg >= k")
    comp = upper_tree_reduction(aarhus_composite(M, N, k))
    expected: dict = {EMPTY: Fraction(1)}
    for X in (M, N):
        for key, c in degree_part(upper_tree_reduction(X), k).items():
            _add_into(expected, key, c)
    diff = dict(comp)
    for key, c in expected.items():
        _add_into(diff, key, -c)
    if not diff:
        return True
    return EMPTY not in diff and _tree_difference_vanishes(diff, g)


# ---------------------------------------------------------------------------
# diagrammatic Johnson-Levine homomorphism

def diagrammatic_tau_levine(h: Endo, k: int) -> Series:
    """eta^-1(tau_k^L(h)) with t_j recolored j+; returned as a series over the + colors."""
    t = tau_k_levine(h, k)
    if not t.in_dk():
        raise NotInImage("tau^L(h) is not in D_k(H'), so it has no diagrammatic version")
    v = eta_inverse(t)
    out: dict = {}
    for key, c in v.terms().items():
        graph = decode(key)
        for u in graph.legs():
            graph.colors[u] = plus(graph.colors[u] + 1)
        add_term(out, graph, c)
    return out


def colored_tree(root: Color, t) -> Graph:
    """Tree diagram with tuple colors: ``t`` is a nested pair of colors."""
    palette: list = []

    def index(u):
        if isinstance(u[0], int) and isinstance(u[1], str):
            palette.append(u)
            return len(palette) - 1
        return (index(u[0]), index(u[1]))

    shape = index(t)
    palette.append(root)
    g = tree_graph(len(palette) - 1, shape)
    for v in g.legs():
        g.colors[v] = palette[g.colors[v]]
    return g


def y_series(a: Color, b: Color, c: Color, coeff=1) -> Series:
    """The tripod with legs a, b, c counterclockwise."""
    out: dict = {}
    add_term(out, colored_tree(a, (b, c)), Fraction(coeff))
    return out


def series_pretty(s: Series) -> str:
    if not s:
        return "0"
    parts = []
    for key, c in sorted(s.items(), key=lambda kc: (series_ideg(kc[0]), repr(kc[0]))):
        if key == EMPTY:
            parts.append(f"{c}*empty")
            continue
        comps = []
        graph = decode(key)
        for comp in graph.components():
            legs = [color_name(graph.colors[v]) for v in comp if graph.colors[v] is not None]
            ideg = sum(graph.colors[v] is None for v in comp)
            comps.append(f"D{ideg}({','.join(legs)})")
        comps += ["O"] * graph.circles
        parts.append(f"{c}*" + "|".join(comps))
    return " + ".join(parts)


def series_to_json(s: Series) -> list:
    return [{"coeff": str(c), "diagram": JacobiDiagram.from_graph(decode(k)).to_json(color_name)}
            for k, c in sorted(s.items(), key=lambda kc: (series_ideg(kc[0]), repr(kc[0])))]


def series_from_json(items: Sequence[Mapping]) -> Series:
    out: dict = {}
    for t in items:
        d = JacobiDiagram.from_json(t["diagram"], parse_color)
        for k, c in d.expand().items():
            _add_into(out, k, c * Fraction(t["coeff"]))
    return out


# ---------------------------------------------------------------------------
# synthetic samples

def _random_tree(rng: random.Random, colors: Sequence[Color], ideg: int) -> Graph:
    def build(m):
        if m == 1:
            return rng.choice(colors)
        s = rng.randint(1, m - 1)
        return (build(s), build(m - s))
    return colored_tree(rng.choice(colors), build(ideg + 1))


def _random_looped(rng: random.Random, colors: Sequence[Color]) -> Graph:
    """A tripod with two legs glued: a looped diagram of i-deg 2 with two legs."""
    g = _random_tree(rng, colors, 2)
    legs = g.legs()
    u, v = rng.sample(legs, 2)
    dead: set = set()
    g.join(u, v, dead)
    return g.without(dead)


def _rand_coeff(rng: random.Random) -> Fraction:
    return Fraction(rng.choice((1, -1, 2, -2, 3)), rng.choice((1, 1, 2, 3)))


def random_morphism(rng: random.Random, g: int, f: int, cap: int = 4, terms: int = 2,
                    max_ideg: int = 2) -> TsMorphism:
    """Random top-substantial morphism with small struts and up to ``terms`` extra summands."""
    struts = {}
    for i in range(1, g + 1):
        for j in range(1, f + 1):
            x = rng.choice((0, 0, 1, -1, 2))
            struts[(plus(i), minus(j))] = struts[(minus(j), plus(i))] = x
    for j in range(1, f + 1):
        for j2 in range(j, f + 1):
            x = rng.choice((0, 0, 1, -1))
            struts[(minus(j), minus(j2))] = struts[(minus(j2), minus(j))] = x
    colors = [plus(i) for i in range(1, g + 1)] + [minus(j) for j in range(1, f + 1)]
    y: dict = {EMPTY: Fraction(1)}
    for _ in range(rng.randint(1, terms)):
        d = rng.randint(1, max_ideg)
        graph = _random_tree(rng, colors, d) if rng.random() < 0.8 or d < 2 else _random_looped(rng, colors)
        add_term(y, graph, _rand_coeff(rng))
    return TsMorphism(g, f, cap, struts, y)


def random_ilc_morphism(rng: random.Random, g: int, k: int, cap: int | None = None) -> TsMorphism:
    """Synthetic ILC-shaped value: identity on +-, random symmetric Delta, Y-part in F_k shape.

    The Y-part holds the empty diagram, a random leading part of connected +-colored trees of
    i-deg k, lower terms that all carry a '-' leg or a loop, and some higher terms.
    """
    cap = k + 1 if cap is None else cap
    M = identity(g, cap)
    struts = dict(M.struts)
    for p in range(1, g + 1):
        for q in range(p, g + 1):
            x = rng.choice((0, 1, -1, 2))
            struts[(minus(p), minus(q))] = struts[(minus(q), minus(p))] = x
    pluses = [plus(i) for i in range(1, g + 1)]
    everything = pluses + [minus(i) for i in range(1, g + 1)]
    y: dict = {EMPTY: Fraction(1)}
    for _ in range(rng.randint(1, 2)):
        add_term(y, _random_tree(rng, pluses, k), _rand_coeff(rng))
    for _ in range(rng.randint(0, 2)):
        d = rng.randint(1, k)
        graph = _random_tree(rng, everything, d)
        if d < k or rng.random() < 0.5:
            v = rng.choice(graph.legs())
            graph.colors[v] = minus(rng.randint(1, g))
        add_term(y, graph, _rand_coeff(rng))
    if k >= 2 and rng.random() < 0.5:
        add_term(y, _random_looped(rng, everything), _rand_coeff(rng))
    for _ in range(rng.randint(0, 1)):
        add_term(y, _random_tree(rng, everything, k + 1), _rand_coeff(rng))
    return TsMorphism(g, g, cap, struts, y)
