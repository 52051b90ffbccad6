"""Free groups: reduced words, Magnus expansions, lower central series, endomorphisms.

Letters are signed 1-based generator indices. On a surface alphabet of genus g
the generator a_i has index i and b_i has index g+i, which matches the homology
basis order a_1..a_g, b_1..b_g used everywhere else. Commutators are
[x, y] = x y x^-1 y^-1.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .freelie import LieElement, lie_from_tensor


class UnknownGenerator(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


class NotInGammaK(ValueError):
    pass


_PREFIX = {"surface": None, "disk": "u", "handlebody": "t"}
_VARIABLE = {"a": "X", "b": "Y", "u": "U", "t": "T"}


@dataclass(frozen=True)
class Alphabet:
    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in _PREFIX:
            raise ValueError(f"unknown alphabet kind {self.kind!r}")
        if self.size < 0:
            raise ValueError("alphabet size must be non-negative")

    @classmethod
    def surface(cls, g: int) -> "Alphabet":
        return cls("surface", g)

    @classmethod
    def disk(cls, l: int) -> "Alphabet":
        return cls("disk", l)

    @classmethod
    def handlebody(cls, g: int) -> "Alphabet":
        return cls("handlebody", g)

    @property
    def rank(self) -> int:
        return 2 * self.size if self.kind == "surface" else self.size

    @property
    def names(self) -> list[str]:
        if self.kind == "surface":
            g = self.size
            return [f"a{i}" for i in range(1, g + 1)] + [f"b{i}" for i in range(1, g + 1)]
        return [f"{_PREFIX[self.kind]}{i}" for i in range(1, self.size + 1)]

    def variable(self, index: int) -> str:
        """Magnus variable name of the 0-based generator ``index``."""
        name = self.names[index]
        return _VARIABLE[name[0]] + name[1:]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise UnknownGenerator(f"{name!r} is not a generator of {self}") from None

    def __str__(self):
        return f"{self.kind}({self.size})"


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    letters: tuple[int, ...]

    def __post_init__(self):
        n = self.alphabet.rank
        for x in self.letters:
            if x == 0 or abs(x) > n:
                raise UnknownGenerator(f"letter {x} out of range for {self.alphabet}")
        if _free_reduce(self.letters) != self.letters:
            raise ValueError("word is not freely reduced; use reduce()")

    @classmethod
    def parse(cls, alphabet: Alphabet, text: str) -> "Word":
        letters = []
        for tok in text.split():
            m = re.fullmatch(r"([a-z]\d+)(\^-1)?", tok)
            if not m:
                raise UnknownGenerator(f"cannot parse token {tok!r}")
            i = alphabet.index(m.group(1))
            letters.append(-i if m.group(2) else i)
        return reduce(alphabet, letters)

    @classmethod
    def gen(cls, alphabet: Alphabet, i: int) -> "Word":
        return cls(alphabet, (i,))

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls(alphabet, ())

    def _check(self, other: "Word"):
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch(f"{self.alphabet} vs {other.alphabet}")

    def __mul__(self, other: "Word") -> "Word":
        self._check(other)
        return Word(self.alphabet, _free_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(self.alphabet, tuple(-x for x in reversed(self.letters)))

    def __pow__(self, e: int) -> "Word":
        base = self if e >= 0 else self.inverse()
        out = Word.identity(self.alphabet)
        for _ in range(abs(e)):
            out = out * base
        return out

    def __len__(self):
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self):
        names = self.alphabet.names
        return " ".join(names[x - 1] if x > 0 else names[-x - 1] + "^-1" for x in self.letters)


def reduce(alphabet: Alphabet, letters: Sequence[int]) -> Word:
    return Word(alphabet, _free_reduce(letters))


def commutator(x: Word, y: Word) -> Word:
    return x * y * x.inverse() * y.inverse()


class TruncatedSeries:
    """Element of Z<<X_1..X_n>> modulo monomials of length > cap."""

    __slots__ = ("cap", "terms")

    def __init__(self, cap: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.cap = cap
        self.terms = {m: c for m, c in (terms or {}).items() if c and len(m) <= cap}

    @classmethod
    def one(cls, cap: int) -> "TruncatedSeries":
        return cls(cap, {(): 1})

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        cap = min(self.cap, other.cap)
        out: dict[tuple[int, ...], int] = {}
        for m1, c1 in self.terms.items():
            room = cap - len(m1)
            for m2, c2 in other.terms.items():
                if len(m2) <= room:
                    m = m1 + m2
                    out[m] = out.get(m, 0) + c1 * c2
        return TruncatedSeries(cap, out)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) - c
        return TruncatedSeries(min(self.cap, other.cap), out)

    def __eq__(self, other):
        return isinstance(other, TruncatedSeries) and self.cap == other.cap and self.terms == other.terms

    def homogeneous(self, d: int) -> dict[tuple[int, ...], int]:
        return {m: c for m, c in self.terms.items() if len(m) == d}

    def to_json(self, alphabet: Alphabet) -> dict:
        terms = sorted(self.terms.items(), key=lambda mc: (len(mc[0]), mc[0]))
        return {
            "capN": self.cap,
            "terms": [{"monomial": " ".join(alphabet.variable(i) for i in m), "coeff": str(c)}
                      for m, c in terms],
        }

    def __repr__(self):
        return f"TruncatedSeries(cap={self.cap}, terms={self.terms})"


def _times_letter(terms: dict, x: int, sign: int, cap: int) -> dict:
    """Right-multiply by 1+X (sign=1) or by (1+X)^-1 = sum (-X)^i (sign=-1)."""
    out = dict(terms)
    for m, c in terms.items():
        room = cap - len(m)
        if sign > 0:
            if room > 0:
                key = m + (x,)
                out[key] = out.get(key, 0) + c
        else:
            key, coeff = m, c
            for _ in range(room):
                key, coeff = key + (x,), -coeff
                out[key] = out.get(key, 0) + coeff
    return {m: c for m, c in out.items() if c}


def magnus(w: Word, N: int) -> TruncatedSeries:
    if N < 1:
        raise ValueError("degree cap must be at least 1")
    terms = {(): 1}
    for x in w.letters:
        terms = _times_letter(terms, abs(x) - 1, 1 if x > 0 else -1, N)
    return TruncatedSeries(N, terms)


@dataclass(frozen=True)
class AtLeast:
    """Marker for 'in Gamma_cap' when no finer information was computed."""

    cap: int

    def __str__(self):
        return f">={self.cap}"


def lcs_class(w: Word, cap: int) -> int | AtLeast:
    """Largest k <= cap with w in Gamma_k, or AtLeast(cap)."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    series = magnus(w, cap)
    degrees = [len(m) for m, c in series.terms.items() if m]
    if not degrees:
        return AtLeast(cap)
    return min(degrees)


def in_gamma(w: Word, k: int) -> bool:
    c = lcs_class(w, k)
    return isinstance(c, AtLeast) or c >= k


def leading_lie_class(w: Word, k: int) -> LieElement:
    """Class of w in Gamma_k / Gamma_{k+1}, as a degree-k Lie element."""
    if k < 1:
        raise ValueError("degree must be at least 1")
    series = magnus(w, k)
    low = [len(m) for m in series.terms if 0 < len(m) < k]
    if low:
        raise NotInGammaK(f"word has a nonzero Magnus term in degree {min(low)} < {k}")
    return lie_from_tensor(series.homogeneous(k), w.alphabet.rank, k)


@dataclass(frozen=True)
class Endo:
    """Endomorphism of a free group, given by the images of the generators."""

    source: Alphabet
    images: tuple[Word, ...]

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise ValueError("one image per generator required")
        for w in self.images:
            if w.alphabet != self.source:
                raise AlphabetMismatch("images must be words over the source alphabet")

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Endo":
        return cls(alphabet, tuple(Word.gen(alphabet, i) for i in range(1, alphabet.rank + 1)))

    @classmethod
    def from_images(cls, alphabet: Alphabet, images: Mapping[str, str | Word]) -> "Endo":
        """Generators missing from ``images`` are fixed."""
        out = list(cls.identity(alphabet).images)
        for name, img in images.items():
            out[alphabet.index(name) - 1] = img if isinstance(img, Word) else Word.parse(alphabet, img)
        return cls(alphabet, tuple(out))

    def __call__(self, w: Word) -> Word:
        return apply_endo(self, w)

    def compose(self, other: "Endo") -> "Endo":
        """self after other."""
        if other.source != self.source:
            raise AlphabetMismatch("cannot compose endomorphisms of different groups")
        return Endo(self.source, tuple(apply_endo(self, w) for w in other.images))

    def image(self, name: str) -> Word:
        return self.images[self.source.index(name) - 1]

    def to_json(self) -> dict:
        kind = {"surface": "genus", "disk": "strands", "handlebody": "genus"}[self.source.kind]
        return {"alphabet": self.source.kind, kind: self.source.size,
                "images": {n: str(w) for n, w in zip(self.source.names, self.images)}}

    @classmethod
    def from_json(cls, data: Mapping) -> "Endo":
        kind = data.get("alphabet", "surface")
        size = data.get("genus", data.get("strands"))
        return cls.from_images(Alphabet(kind, int(size)), data.get("images", {}))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def apply_endo(h: Endo, w: Word) -> Word:
    if w.alphabet != h.source:
        raise AlphabetMismatch(f"{w.alphabet} vs {h.source}")
    out: list[int] = []
    for x in w.letters:
        img = h.images[abs(x) - 1].letters
        if x < 0:
            img = tuple(-y for y in reversed(img))
        for y in img:
            if out and out[-1] == -y:
                out.pop()
            else:
                out.append(y)
    return Word(h.source, tuple(out))


def boundary_word(g: int) -> Word:
    """zeta = prod_j [beta_j^-1, alpha_j]."""
    A = Alphabet.surface(g)
    w = Word.identity(A)
    for j in range(1, g + 1):
        w = w * commutator(Word.gen(A, g + j).inverse(), Word.gen(A, j))
    return w


def check_boundary_fixed(h: Endo) -> bool:
    if h.source.kind != "surface":
        raise AlphabetMismatch("boundary word needs a surface alphabet")
    z = boundary_word(h.source.size)
    return apply_endo(h, z) == z


def iota_project(w: Word) -> Word:
    """alpha_i -> 1, beta_i -> t_i."""
    if w.alphabet.kind != "surface":
        raise AlphabetMismatch("iota_project needs a surface alphabet")
    g = w.alphabet.size
    sign = lambda x: 1 if x > 0 else -1
    return reduce(Alphabet.handlebody(g), [sign(x) * (abs(x) - g) for x in w.letters if abs(x) > g])
