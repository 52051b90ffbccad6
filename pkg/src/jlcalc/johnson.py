"""Symplectic classification, Johnson and Johnson-Levine homomorphisms, Milnor maps.

Homology coordinates follow the surface alphabet: a_1..a_g then b_1..b_g, so
letter index j-1 is a_j and g+j-1 is b_j. On the handlebody side t_1..t_g are
indices 0..g-1, and iota_* sends a_j to 0 and b_j to t_j.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product

from .exactla import IntMatrix
from .freegroup import (
    Alphabet,
    Endo,
    NotInGammaK,
    Word,
    check_boundary_fixed,
    commutator,
    in_gamma,
    iota_project,
    lcs_class,
    leading_lie_class,
    reduce,
)
from .freelie import DkElement, LieElement, _normalize, expand_leaves, lyndon_tree


class SizeMismatch(ValueError):
    pass


class NotInJk(ValueError):
    pass


class NotInJkL(ValueError):
    pass


class LongitudeDegreeTooLow(ValueError):
    pass


# ---------------------------------------------------------------------------
# symplectic data

@dataclass(frozen=True)
class SymplecticData:
    genus: int

    @property
    def J(self) -> IntMatrix:
        g = self.genus
        rows = [[0] * (2 * g) for _ in range(2 * g)]
        for i in range(g):
            rows[i][g + i] = 1
            rows[g + i][i] = -1
        return IntMatrix.from_rows(rows, 2 * g)

    def omega(self, x, y) -> int:
        g = self.genus
        return sum(x[i] * y[g + i] - x[g + i] * y[i] for i in range(g))

    @property
    def basis_names(self) -> list[str]:
        return Alphabet.surface(self.genus).names


@dataclass(frozen=True)
class SpClassification:
    is_sp: bool
    is_lagrangian: bool
    is_strongly_lagrangian: bool
    P: IntMatrix | None = None
    Q: IntMatrix | None = None
    R: IntMatrix | None = None

    def to_json(self) -> dict:
        out = {"isSp": self.is_sp, "isLagrangian": self.is_lagrangian,
               "isStronglyLagrangian": self.is_strongly_lagrangian}
        if self.P is not None:
            out["blocks"] = {"P": self.P.to_rows(), "Q": self.Q.to_rows(), "R": self.R.to_rows()}
        return out


def _block(M: IntMatrix, r0: int, c0: int, g: int) -> IntMatrix:
    return IntMatrix.from_rows([[M[r0 + i, c0 + j] for j in range(g)] for i in range(g)], g)


def sp_classify(M: IntMatrix) -> SpClassification:
    if M.rows != M.cols or M.rows % 2:
        raise SizeMismatch(f"expected a square matrix of even size, got {M.rows}x{M.cols}")
    g = M.rows // 2
    J = SymplecticData(g).J
    is_sp = M.transpose() @ J @ M == J
    lower_left_zero = all(M[g + i, j] == 0 for i in range(g) for j in range(g))
    lag = is_sp and lower_left_zero
    P = Q = R = None
    strong = False
    if lower_left_zero:
        P, Q, R = _block(M, 0, 0, g), _block(M, 0, g, g), _block(M, g, g, g)
        strong = lag and P == IntMatrix.identity(g)
    return SpClassification(is_sp, lag, strong, P, Q, R)


def homology_matrix(h: Endo) -> IntMatrix:
    """Integer matrix of h_* on H_1; column j is the abelianized image of generator j."""
    n = h.source.rank
    cols = []
    for w in h.images:
        col = [0] * n
        for x in w.letters:
            col[abs(x) - 1] += 1 if x > 0 else -1
        cols.append(col)
    return IntMatrix.from_columns(cols, n)


# ---------------------------------------------------------------------------
# filtrations

def _surface(h: Endo) -> int:
    if h.source.kind != "surface":
        raise ValueError("expected an endomorphism of the surface group")
    return h.source.size


def jk_member(h: Endo, k: int) -> bool:
    _surface(h)
    A = h.source
    return all(in_gamma(h.images[i] * Word.gen(A, i + 1).inverse(), k + 1) for i in range(A.rank))


def jkl_member(h: Endo, k: int) -> bool:
    g = _surface(h)
    M = homology_matrix(h)
    for i in range(g):
        if M.column(i) != [int(r == i) for r in range(2 * g)]:
            return False
    return all(in_gamma(iota_project(h.images[i]), k + 1) for i in range(g))


def _lie_class(w: Word, degree: int) -> LieElement:
    try:
        return leading_lie_class(w, degree)
    except NotInGammaK as e:  # pragma: no cover - guarded by the membership tests
        raise NotInJk(str(e)) from None


def tau_k(h: Endo, k: int) -> DkElement:
    g = _surface(h)
    if not jk_member(h, k):
        raise NotInJk(f"map is not in J_{k}")
    A = h.source
    pairs = []
    for j in range(g):
        alpha, beta = Word.gen(A, j + 1), Word.gen(A, g + j + 1)
        pairs.append((j, _lie_class(h.images[g + j] * beta.inverse(), k + 1)))
        pairs.append((g + j, -_lie_class(h.images[j] * alpha.inverse(), k + 1)))
    out = DkElement.from_pairs(2 * g, k, pairs, names=A.names)
    if check_boundary_fixed(h):
        out.certified = out.in_dk()
    return out


def tau_k_levine(h: Endo, k: int) -> DkElement:
    g = _surface(h)
    if not jkl_member(h, k):
        raise NotInJkL(f"map is not in J_{k}^L")
    pairs = [(j, -leading_lie_class(iota_project(h.images[j]), k + 1)) for j in range(g)]
    out = DkElement.from_pairs(g, k, pairs, names=[f"t{j + 1}" for j in range(g)])
    if check_boundary_fixed(h):
        out.certified = out.in_dk()
    return out


def iota_star_dk(x: DkElement) -> DkElement:
    """a_i -> 0, b_i -> t_i on both tensor factors."""
    if x.n % 2:
        raise SizeMismatch("iota_* needs an even-rank surface homology")
    g = x.n // 2
    out = {}
    for (i, w), c in x.coeffs.items():
        if i >= g and min(w) >= g:
            key = (i - g, tuple(l - g for l in w))
            out[key] = out.get(key, 0) + c
    return DkElement(g, x.k, out, names=[f"t{j + 1}" for j in range(g)]).certify()


def _substitute_dk(x: DkElement, images: list[dict], n_target: int) -> DkElement:
    out: dict = {}
    for (i, w), c in x.coeffs.items():
        for f, cf in images[i].items():
            for t, d in expand_leaves(lyndon_tree(w), images):
                for v, e in _normalize(t):
                    out[(f, v)] = out.get((f, v), 0) + c * cf * d * e
    return DkElement(n_target, x.k, out)


def mj_identify(x: DkElement) -> DkElement:
    """a_i -> -u_{2i-1}, b_i -> u_{2i} on both tensor factors."""
    if x.n % 2:
        raise SizeMismatch("expected surface homology of even rank")
    g = x.n // 2
    images = [{2 * i: -1} for i in range(g)] + [{2 * i + 1: 1} for i in range(g)]
    out = _substitute_dk(x, images, 2 * g)
    out.names = [f"u{i + 1}" for i in range(2 * g)]
    return out


@dataclass(frozen=True)
class MilnorData:
    strands: int
    longitudes: tuple[Word, ...]
    degree: int

    def __post_init__(self):
        if len(self.longitudes) != self.strands:
            raise SizeMismatch("one longitude per strand required")
        for w in self.longitudes:
            if w.alphabet != Alphabet.disk(self.strands):
                raise SizeMismatch("longitudes must be words in u_1..u_l")


def milnor_mu(d: MilnorData) -> DkElement:
    """sum u_i (x) [lambda_i]_k, of Lie degree k in H (x) L_k; the D_{k-1} flag is reported, not enforced."""
    l, k = d.strands, d.degree
    if k < 2:
        raise ValueError("Milnor degree must be at least 2")
    pairs = []
    for i, lam in enumerate(d.longitudes):
        c = lcs_class(lam, k)
        if isinstance(c, int) and c < k:
            raise LongitudeDegreeTooLow(f"longitude of strand {i + 1} lies in Gamma_{c} but not Gamma_{k}")
        pairs.append((i, leading_lie_class(lam, k)))
    return DkElement.from_pairs(l, k - 1, pairs, names=Alphabet.disk(l).names).certify()


# ---------------------------------------------------------------------------
# Dehn twists on a disk with 2g bands
#
# The surface is a disk with bands attached along the circle. The circle is
# measured in integer units; the feet of the bands sit at 10*slot+5 and a curve
# running parallel to a band uses the offset +-2. The basepoint is at 0. A
# curve is a cyclic list of (generator, direction) band traversals; its
# pieces inside the disk are chords, and a chord crossing is decided by
# interleaving of endpoints.

def band_order(g: int) -> list[tuple[int, int]]:
    out = []
    for j in range(1, g + 1):
        out += [(g + j, -1), (j, -1), (g + j, 1), (j, 1)]
    return out


def ribbon_boundary(g: int) -> Word:
    """Boundary word read off the band order, starting at the basepoint."""
    order = band_order(g)
    pos = {h: i for i, h in enumerate(order)}
    letters, i = [], 0
    while True:
        x, e = order[i]
        letters.append(x * e)
        i = (pos[(x, -e)] + 1) % len(order)
        if i == 0:
            break
    return reduce(Alphabet.surface(g), letters)


class _Ribbon:
    def __init__(self, g: int):
        self.g = g
        self.order = band_order(g)
        self.pos = {h: i for i, h in enumerate(self.order)}
        self.L = 10 * len(self.order)

    def foot(self, half_edge, off: int) -> int:
        return 10 * self.pos[half_edge] + 5 + 2 * off * half_edge[1]

    def inside(self, x: int, a: int, b: int) -> bool:
        return 0 < (x - a) % self.L < (b - a) % self.L

    def crosses(self, p, q) -> bool:
        return self.inside(q[0], *p) != self.inside(q[1], *p)

    def chords(self, curve, off):
        n = len(curve)
        return [(self.foot((curve[i][0], -curve[i][1]), off), self.foot(curve[(i + 1) % n], off))
                for i in range(n)]

    def is_simple(self, curve, off) -> bool:
        ch = self.chords(curve, off)
        return not any(self.crosses(ch[i], ch[j]) for i in range(len(ch)) for j in range(i + 1, len(ch)))


def twist(g: int, curve: list[tuple[int, int]], power: int = 1) -> Endo:
    """Dehn twist (power +-1) along a simple closed curve given by its band traversals."""
    rb = _Ribbon(g)
    offs = [o for o in (1, -1) if rb.is_simple(curve, o)]
    if not offs:
        raise ValueError("curve is not simple in the band model")
    off = offs[0]
    ch = rb.chords(curve, off)
    n = len(curve)
    A = Alphabet.surface(g)

    def loop(i):
        return [x * s for x, s in (curve[(i + 1 + m) % n] for m in range(n))]

    def along(a, b):
        hits = []
        for i, (q1, q2) in enumerate(ch):
            if rb.crosses((a, b), (q1, q2)):
                x, sign = (q2, -1) if rb.inside(q2, a, b) else (q1, 1)
                hits.append(((x - a) % rb.L, i, sign))
        out = []
        for _, i, sign in sorted(hits):
            lw = loop(i)
            out += lw if sign * power > 0 else [-x for x in reversed(lw)]
        return out

    images = []
    for x in range(1, 2 * g + 1):
        start, end = rb.foot((x, 1), 0), rb.foot((x, -1), 0)
        images.append(reduce(A, along(0, start) + [x] + along(end, 0)))
    return Endo(A, tuple(images))


def standard_curves(g: int) -> dict[str, list[tuple[int, int]]]:
    """A family of simple curves: alpha_j, beta_j and sums of neighbouring handles."""
    out = {}
    for j in range(1, g + 1):
        out[f"a{j}"] = [(j, 1)]
        out[f"b{j}"] = [(g + j, 1)]
    for j in range(1, g):
        out[f"a{j}a{j + 1}"] = [(j, 1), (j + 1, 1)]
        out[f"b{j}b{j + 1}"] = [(g + j, 1), (g + j + 1, 1)]
        out[f"a{j}b{j + 1}"] = [(j, 1), (g + j + 1, 1)]
        out[f"b{j}a{j + 1}"] = [(g + j, 1), (j + 1, 1)]
    return out


def curve_homology(g: int, curve) -> list[int]:
    v = [0] * (2 * g)
    for x, s in curve:
        v[x - 1] += s
    return v


def is_meridian(g: int, curve) -> bool:
    return all(x <= g for x, _ in curve)


def separating_twist(g: int, i: int, m: int, power: int = 1) -> Endo:
    """Conjugate handles i..m by (c_i...c_m)^power, c_j = [beta_j^-1, alpha_j]; fixes the boundary word."""
    A = Alphabet.surface(g)
    w = Word.identity(A)
    for j in range(i, m + 1):
        w = w * commutator(Word.gen(A, g + j).inverse(), Word.gen(A, j))
    w = w ** power
    images = list(Endo.identity(A).images)
    for j in range(i, m + 1):
        for x in (j, g + j):
            images[x - 1] = w * images[x - 1] * w.inverse()
    return Endo(A, tuple(images))


# ---------------------------------------------------------------------------
# random samples

def random_commutator(rng: random.Random, A: Alphabet, weight: int, letters: list[int] | None = None,
                      max_len: int | None = None) -> Word:
    """A random bracket arrangement of ``weight`` random signed letters, reduced."""
    pool = letters or list(range(1, A.rank + 1))
    for _ in range(1000):
        def build(m):
            if m == 1:
                return Word(A, (rng.choice(pool) * rng.choice((1, -1)),))
            s = rng.randint(1, m - 1)
            return commutator(build(s), build(m - s))
        w = build(weight)
        if max_len is None or len(w) <= max_len:
            return w
    raise RuntimeError("could not sample a short commutator")


def random_jk(rng: random.Random, g: int, k: int, factors: int = 2) -> Endo:
    """Product of Nielsen maps x -> x*c with c a weight-(k+1) commutator."""
    A = Alphabet.surface(g)
    h = Endo.identity(A)
    for _ in range(factors):
        x = rng.randint(1, 2 * g)
        c = random_commutator(rng, A, k + 1)
        images = list(Endo.identity(A).images)
        images[x - 1] = images[x - 1] * c
        h = Endo(A, tuple(images)).compose(h)
    return h


def _random_word(rng: random.Random, A: Alphabet, length: int, letters=None) -> Word:
    pool = letters or list(range(1, A.rank + 1))
    return reduce(A, [rng.choice(pool) * rng.choice((1, -1)) for _ in range(length)])


def _alpha_normal(rng: random.Random, A: Alphabet) -> Word:
    """A random element of the normal closure of the alpha letters."""
    g = A.size
    w = _random_word(rng, A, rng.randint(0, 3))
    return w * Word.gen(A, rng.randint(1, g)) ** rng.choice((1, -1)) * w.inverse()


def _levine_correction(rng: random.Random, A: Alphabet, k: int) -> Word:
    """A random word with iota-image in Gamma_{k+1} and trivial homology."""
    g = A.size
    betas = list(range(g + 1, 2 * g + 1))
    kind = rng.randrange(3)
    if kind == 0:
        return random_commutator(rng, A, k + 1, betas)
    if kind == 1:
        return commutator(_random_word(rng, A, rng.randint(1, 3)), _alpha_normal(rng, A))
    return random_commutator(rng, A, k + 1, betas) * commutator(_random_word(rng, A, 2), _alpha_normal(rng, A))


def random_jkl(rng: random.Random, g: int, k: int, lagrangian_fixed: bool = False) -> Endo:
    """h with h_* = Id on A and iota(h(alpha_i)) in Gamma_{k+1}.

    With ``lagrangian_fixed`` the images of beta_i are beta_i times an element
    of the alpha normal closure, so that additionally iota_* h_* = iota_*.
    """
    A = Alphabet.surface(g)
    images = []
    for i in range(1, g + 1):
        w = _random_word(rng, A, rng.randint(0, 2))
        images.append(w * Word.gen(A, i) * w.inverse() * _levine_correction(rng, A, k))
    for i in range(g + 1, 2 * g + 1):
        tail = _alpha_normal(rng, A) if lagrangian_fixed else _random_word(rng, A, rng.randint(0, 3))
        if lagrangian_fixed and rng.random() < 0.5:
            tail = tail * random_commutator(rng, A, 2)
        images.append(Word.gen(A, i) * tail)
    return Endo(A, tuple(images))


def random_additivity_pair(rng: random.Random, g: int, k: int) -> tuple[Endo, Endo]:
    return random_jkl(rng, g, k, lagrangian_fixed=True), random_jkl(rng, g, k)


@lru_cache(maxsize=None)
def _twist_cached(g: int, curve: tuple, power: int) -> Endo:
    return twist(g, list(curve), power)


@lru_cache(maxsize=None)
def simple_curves(g: int, max_bands: int = 4) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Simple curves crossing each band at most once, one per cyclic rotation."""
    rb = _Ribbon(g)
    out = []
    for m in range(1, min(max_bands, 2 * g) + 1):
        for bands in permutations(range(1, 2 * g + 1), m):
            if bands[0] != min(bands):
                continue
            for signs in product((1, -1), repeat=m):
                curve = list(zip(bands, signs))
                if rb.is_simple(curve, 1) or rb.is_simple(curve, -1):
                    out.append(tuple(curve))
    return tuple(out)


@lru_cache(maxsize=None)
def _homologous_pairs(g: int) -> tuple:
    """Pairs (c, d) of homologous simple curves whose map T_c T_d^-1 is not the identity."""
    groups: dict = {}
    for cv in simple_curves(g):
        v = curve_homology(g, cv)
        if not any(v):
            continue
        first = next(x for x in v if x)
        key = tuple(x if first > 0 else -x for x in v)
        groups.setdefault(key, []).append(cv)
    pairs = []
    for cs in groups.values():
        for i, c in enumerate(cs):
            for d in cs[i + 1:]:
                if _twist_cached(g, c, 1) != _twist_cached(g, d, 1):
                    pairs.append((c, d))
    return tuple(pairs)


def _conjugator(rng: random.Random, g: int, count: int) -> tuple[Endo, Endo]:
    """A random product of twists together with its inverse."""
    curves = simple_curves(g)
    A = Alphabet.surface(g)
    h, hinv = Endo.identity(A), Endo.identity(A)
    for _ in range(count):
        cv, p = rng.choice(curves), rng.choice((1, -1))
        h = _twist_cached(g, cv, p).compose(h)
        hinv = hinv.compose(_twist_cached(g, cv, -p))
    return h, hinv


def _torelli_pair(rng: random.Random, g: int, depth: int = 3) -> tuple[Endo, Endo]:
    """T_c T_d^-1 for homologous simple curves c, d, optionally conjugated, with its inverse."""
    pairs = _homologous_pairs(g)
    if not pairs:  # genus 1: the family has no distinct homologous curves
        ident = Endo.identity(Alphabet.surface(g))
        return ident, ident
    c, d = rng.choice(pairs)
    x = _twist_cached(g, c, 1).compose(_twist_cached(g, d, -1))
    xinv = _twist_cached(g, d, 1).compose(_twist_cached(g, c, -1))
    m, minv = _conjugator(rng, g, rng.randint(0, depth))
    return m.compose(x).compose(minv), m.compose(xinv).compose(minv)


def random_torelli(rng: random.Random, g: int) -> Endo:
    return _torelli_pair(rng, g)[0]


class _TooLong(Exception):
    pass


def _guarded(a: Endo, b: Endo, max_len: int) -> Endo:
    """a after b, abandoned when the images would get longer than max_len."""
    worst = max((len(w) for w in a.images), default=0) * max((len(w) for w in b.images), default=0)
    if worst > 20 * max_len:
        raise _TooLong
    out = a.compose(b)
    if max(len(w) for w in out.images) > max_len:
        raise _TooLong
    return out


def _torelli_commutator(rng: random.Random, g: int, max_len: int = 4000) -> Endo:
    x, xinv = _torelli_pair(rng, g, 1)
    y, yinv = _torelli_pair(rng, g, 1)
    return _guarded(_guarded(_guarded(x, y, max_len), xinv, max_len), yinv, max_len)


def random_boundary_jkl(rng: random.Random, g: int, k: int, tries: int = 200, max_len: int = 4000) -> Endo:
    """A boundary-fixing element of J_k^L (k <= 2) built from Dehn twists, filtered by membership."""
    meridians = [cv for cv in simple_curves(g) if is_meridian(g, cv)]
    for _ in range(tries):
        try:
            if k == 1:
                h = random_torelli(rng, g)
            elif rng.random() < 0.3 and g >= 2:
                i = rng.randint(1, g)
                h = separating_twist(g, i, rng.randint(i, g), rng.choice((1, -1)))
                m, minv = _conjugator(rng, g, 1)
                h = _guarded(_guarded(m, h, max_len), minv, max_len)
            else:
                h = _torelli_commutator(rng, g, max_len)
            for _ in range(rng.randint(0, 1)):
                h = _guarded(_twist_cached(g, rng.choice(meridians), rng.choice((1, -1))), h, max_len)
        except _TooLong:
            continue
        if jkl_member(h, k) and check_boundary_fixed(h):
            return h
    raise RuntimeError("no boundary-fixing J_k^L sample found")
