"""Command-line front end and the ``verify`` suite."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

from .diagrams import (
    JacobiDiagram,
    NotInImage,
    eta,
    eta_inverse,
    eta_isomorphism_report,
    eta_q_kernel,
    ker_iota_generators,
    tree_space,
)
from .exactla import IntMatrix
from .freegroup import (
    Alphabet,
    AtLeast,
    Endo,
    UnknownGenerator,
    Word,
    check_boundary_fixed,
    lcs_class,
    leading_lie_class,
    magnus,
)
from .freelie import DkElement, dk_rank, verify_p_sequence, verify_s_sequence, witt_number, quasi_lie
from .johnson import (
    MilnorData,
    iota_star_dk,
    milnor_mu,
    random_additivity_pair,
    random_boundary_jkl,
    random_commutator,
    random_jk,
    sp_classify,
    tau_k,
    tau_k_levine,
)
from .tsa import (
    LinkingMatrix,
    TsMorphism,
    classify_cobordism,
    compose,
    diagrammatic_tau_levine,
    identity,
    leading_additivity_check,
    random_ilc_morphism,
    random_morphism,
    series_from_json,
    series_pretty,
    series_to_json,
    strut_part,
    upper_tree_reduction,
)

MAX_GENUS = 4
MAX_DEGREE = 5
MAX_CAP = 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# cache

def cache_dir() -> Path | None:
    d = os.environ.get("JLCALC_CACHE_DIR")
    return Path(d) if d else None


def cached(name: str, params: dict, compute: Callable[[], object]):
    """JSON-serializable results memoized under $JLCALC_CACHE_DIR when it is set."""
    d = cache_dir()
    if d is None:
        return compute()
    tag = hashlib.sha1(json.dumps(params, sort_keys=True).encode()).hexdigest()[:16]
    path = d / f"{name}-{tag}.json"
    if path.exists():
        try:
            return json.loads(path.read_text())["value"]
        except (OSError, ValueError, KeyError):
            pass
    value = compute()
    try:
        d.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"params": params, "value": value}))
    except OSError:
        pass
    return value


# ---------------------------------------------------------------------------
# input helpers

def _bounded(value: int, hi: int, flag: str, lo: int = 1) -> int:
    if not lo <= value <= hi:
        raise UsageError(f"{flag} must be between {lo} and {hi}")
    return value


def _load(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e.msg}") from None


def _endo(path: str, genus: int | None) -> Endo:
    data = _load(path)
    if genus is not None:
        data.setdefault("genus", genus)
        if int(data["genus"]) != genus:
            raise UsageError(f"--genus {genus} does not match the map file (genus {data['genus']})")
    if "genus" not in data:
        raise UsageError("map file has no genus; pass --genus")
    return Endo.from_json(data)


def _int_matrix(data) -> IntMatrix:
    rows = data["rows"] if isinstance(data, dict) else data
    return IntMatrix.from_rows([[int(x) for x in r] for r in rows])


def _alphabet(args) -> Alphabet:
    if args.genus is not None:
        return Alphabet.surface(_bounded(args.genus, MAX_GENUS, "--genus", 0))
    if args.strands is not None:
        return Alphabet.disk(args.strands)
    # infer the smallest alphabet containing every generator
    names = [tok.split("^")[0] for tok in args.word.split()]
    if any(len(n) < 2 or n[0] not in "abut" or not n[1:].isdigit() for n in names):
        raise UsageError(f"--word: cannot parse {args.word!r}")
    kinds = {n[0] for n in names}
    top = max((int(n[1:]) for n in names), default=0)
    if kinds <= {"a", "b"}:
        return Alphabet.surface(top)
    if len(kinds) > 1:
        raise UsageError("--word mixes generators of different alphabets")
    return Alphabet.disk(top) if kinds == {"u"} else Alphabet.handlebody(top)


def _word(args) -> Word:
    A = _alphabet(args)
    try:
        return Word.parse(A, args.word)
    except UnknownGenerator as e:
        raise UsageError(f"--word: {e}") from None


# ---------------------------------------------------------------------------
# commands; each returns (json payload, text)

def cmd_reduce(args):
    w = _word(args)
    return {"alphabet": str(w.alphabet), "word": str(w), "length": len(w)}, str(w) or "1"


def cmd_magnus(args):
    w = _word(args)
    s = magnus(w, _bounded(args.cap, 12, "--cap"))
    out = s.to_json(w.alphabet)
    text = " + ".join(f"{t['coeff']}*{t['monomial'] or '1'}" for t in out["terms"])
    return out, text


def cmd_lcs(args):
    c = lcs_class(_word(args), _bounded(args.cap, 12, "--cap"))
    value = str(c) if isinstance(c, AtLeast) else c
    return {"class": value}, str(value)


def cmd_tau(args):
    h = _endo(args.map, args.genus)
    x = tau_k(h, _bounded(args.degree, MAX_DEGREE, "--degree"))
    return x.to_json(), x.pretty()


def cmd_tau_levine(args):
    h = _endo(args.map, args.genus)
    x = tau_k_levine(h, _bounded(args.degree, MAX_DEGREE, "--degree"))
    return x.to_json(), x.pretty()


def cmd_sp_classify(args):
    r = sp_classify(_int_matrix(_load(args.matrix)))
    out = r.to_json()
    return out, ", ".join(f"{k}={v}" for k, v in out.items() if k != "blocks")


def cmd_milnor(args):
    data = _load(args.longitudes)
    words = data["longitudes"] if isinstance(data, dict) else data
    A = Alphabet.disk(args.strands)
    d = MilnorData(args.strands, tuple(Word.parse(A, w) for w in words), args.degree)
    x = milnor_mu(d)
    return x.to_json(), x.pretty()


def cmd_dk_rank(args):
    n, k = _bounded(args.n, 8, "--n"), _bounded(args.k, MAX_DEGREE, "--k")
    r = cached("dk-rank", {"n": n, "k": k}, lambda: dk_rank(n, k))
    return {"n": n, "k": k, "rank": r}, str(r)


def cmd_quasi_lie(args):
    n, k = _bounded(args.n, 6, "--n"), _bounded(args.k, 6, "--k")

    def compute():
        m = quasi_lie(n, k)
        return {"free": m.free_rank, "torsion": m.torsion}

    r = cached("quasi-lie", {"n": n, "k": k}, compute)
    r = {"n": n, "degree": k, **r, "witt": witt_number(n, k)}
    tors = " + ".join(f"Z/{t}" for t in r["torsion"])
    return r, f"Z^{r['free']}" + (f" + {tors}" if tors else "")


def _tree_from_json(data, n: int):
    space_k = int(data.get("idegree", 0)) or None
    acc: dict = {}
    terms = data["terms"] if "terms" in data else [{"coeff": "1", "diagram": data}]
    for t in terms:
        d = JacobiDiagram.from_json(t["diagram"], lambda s: int(s) - 1)
        for key, c in d.expand().items():
            acc[key] = acc.get(key, 0) + c * Fraction(t["coeff"])
        space_k = space_k or d.graph.ideg()
    return tree_space(n, space_k).normal_form(acc)


def cmd_eta(args):
    data = _load(args.input)
    n = args.n or len(data.get("colors", [])) or None
    if n is None:
        raise UsageError("pass --n (number of colors)")
    x = eta(_tree_from_json(data, n))
    return x.to_json(), x.pretty()


def cmd_eta_inverse(args):
    x = DkElement.from_json(_load(args.input))
    v = eta_inverse(x)
    return v.to_json(), v.pretty()


def cmd_classify_lk(args):
    c = classify_cobordism(LinkingMatrix.from_json(_load(args.matrix)))
    return c.to_json(), c.verdict


def cmd_strut_part(args):
    m = strut_part(LinkingMatrix.from_json(_load(args.matrix)), args.cap)
    return m.to_json(), series_pretty(m.expand(args.struts))


def cmd_compose(args):
    cap = _bounded(args.cap, MAX_CAP, "--cap", 0)
    left, right = (TsMorphism.from_json(_load(p)) for p in (args.left, args.right))
    m = compose(left, right, cap)
    return m.to_json(), series_pretty(m.y)


def cmd_upper_tree(args):
    data = _load(args.series)
    s = TsMorphism.from_json(data).y if "source" in data else series_from_json(data["terms"])
    r = upper_tree_reduction(s)
    return {"terms": series_to_json(r)}, series_pretty(r)


def cmd_tau_levine_diagram(args):
    h = _endo(args.map, args.genus)
    r = diagrammatic_tau_levine(h, _bounded(args.degree, MAX_DEGREE, "--degree"))
    return {"terms": series_to_json(r)}, series_pretty(r)


# ---------------------------------------------------------------------------
# verify suite

@dataclass
class CheckResult:
    name: str
    anchor: str
    passed: bool
    elapsed: float
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"name": self.name, "anchor": self.anchor, "status": "pass" if self.passed else "fail",
               "elapsed": round(self.elapsed, 3)}
        if not self.passed:
            out["counterexample"] = self.detail
        return out


def _check_dk_ranks(rng):
    bad = {}
    for g, want in ((1, 0), (2, 4), (3, 20)):
        n = 2 * g
        r = dk_rank(n, 1)
        alt = n * witt_number(n, 2) - witt_number(n, 3)
        if not r == alt == want:
            bad[g] = [r, alt, want]
    return not bad, bad


def _check_eta_iso(rng):
    bad = {}
    for g, k in ((1, 1), (1, 2), (2, 1), (2, 2)):
        rep = eta_isomorphism_report(2 * g, k)
        if not rep["iso"]:
            bad[f"{g},{k}"] = rep
    return not bad, bad


def _check_sequences(rng):
    bad = {}
    for n in (2, 4):
        for name, rep in [(f"s{j}", verify_s_sequence(n, j)) for j in (1, 2)] + [("p1", verify_p_sequence(n, 1))]:
            if not rep.exact:
                bad[f"{name} n={n}"] = rep.failures[:3]
    return not bad, bad


def _check_torsion(rng):
    bad = {}
    for g in (1, 2):
        for k in (1, 2):
            free, tors = eta_q_kernel(2 * g, k)
            if free or any((k + 2) % t for t in tors):
                bad[f"{g},{k}"] = {"free": free, "torsion": tors}
    return not bad, bad


def _check_square(rng, count=50):
    for i in range(count):
        k = 1 + i % 2
        h = random_jk(rng, 2, k)
        if iota_star_dk(tau_k(h, k)) != tau_k_levine(h, k):
            return False, {"sample": i, "k": k, "map": h.to_json()}
    return True, {}


def _check_levine_hom(rng, count=50):
    for i in range(count):
        k = 1 + i % 2
        h, h2 = random_additivity_pair(rng, 2, k)
        if tau_k_levine(h.compose(h2), k) != tau_k_levine(h, k) + tau_k_levine(h2, k):
            return False, {"sample": i, "k": k, "h": h.to_json(), "h2": h2.to_json()}
    return True, {}


def _check_dk_membership(rng, count=50):
    for i in range(count):
        g, k = ((3, 1), (2, 2), (3, 2))[i % 3]
        h = random_boundary_jkl(rng, g, k)
        if not check_boundary_fixed(h) or not tau_k_levine(h, k).in_dk():
            return False, {"sample": i, "map": h.to_json()}
    return True, {}


def _check_ker_iota(rng):
    bad = {}
    for g, k in ((1, 1), (2, 1), (2, 2)):
        rep = ker_iota_generators(g, k)
        if not rep["equal"]:
            bad[f"{g},{k}"] = {x: rep[x] for x in ("span_rank", "kernel_rank", "members_ok")}
    return not bad, bad


def _check_category(rng, count=30):
    for i in range(count):
        g, f, h = (rng.randint(1, 2) for _ in range(3))
        D, E = random_morphism(rng, g, f), random_morphism(rng, h, g)
        F = random_morphism(rng, rng.randint(1, 2), h)
        if compose(identity(f), D) != D or compose(D, identity(g)) != D:
            return False, {"sample": i, "law": "identity", "D": D.to_json()}
        if compose(compose(D, E), F) != compose(D, compose(E, F)):
            return False, {"sample": i, "law": "associativity"}
        try:
            compose(D, E).check_top_substantial()
        except ValueError:
            return False, {"sample": i, "law": "top-substantial"}
    for g in (1, 2, 3):
        L = LinkingMatrix.from_blocks([[0] * g] * g, [[int(i == j) for j in range(g)] for i in range(g)],
                                      [[0] * g] * g)
        if strut_part(L) != identity(g):
            return False, {"law": "strut part of the identity", "genus": g}
    return True, {}


def _check_linking(rng):
    Z = [[0, 0], [0, 0]]
    Id = [[1, 0], [0, 1]]
    cases = [
        (LinkingMatrix.from_blocks(Z, Id, Z), "IC"),
        (LinkingMatrix.from_blocks(Z, Id, [[1, 0], [0, 0]]), "ILC"),
        (LinkingMatrix.from_blocks(Z, [[1, 0], [0, 2]], [[1, 0], [0, 0]]), "LC"),
        (LinkingMatrix.from_blocks([[1, 0], [0, 0]], Id, Z), "not-Lagrangian"),
    ]
    bad = {i: [c.verdict, want] for i, (L, want) in enumerate(cases)
           if (c := classify_cobordism(L)).verdict != want}
    return not bad, bad


def _check_additivity(rng, count=30):
    for i in range(count):
        k = 1 + i % 2
        g = rng.randint(1, 2 if k == 2 else 3)
        M, N = random_ilc_morphism(rng, g, k), random_ilc_morphism(rng, g, k)
        if not leading_additivity_check(M, N, k):
            return False, {"sample": i, "k": k, "M": M.to_json(), "N": N.to_json()}
    return True, {}


def _check_magnus(rng, count=60):
    A = Alphabet.surface(2)
    for i in range(count):
        k = 1 + i % 4
        w = random_commutator(rng, A, k, max_len=16)
        c = lcs_class(w, k)
        if not (isinstance(c, AtLeast) or c >= k):
            return False, {"sample": i, "word": str(w), "class": c}
        v = random_commutator(rng, A, k, max_len=16)
        if leading_lie_class(w * v, k) != leading_lie_class(w, k) + leading_lie_class(v, k):
            return False, {"sample": i, "words": [str(w), str(v)]}
    return True, {}


CHECKS: list[tuple[str, str, Callable]] = [
    ("dk-ranks", "rank D_1 = C(2g,3) via the bracket kernel", _check_dk_ranks),
    ("eta-isomorphism", "eta is a rational isomorphism T_k -> D_k", _check_eta_iso),
    ("quasi-lie-sequences", "short exact sequences for D^q", _check_sequences),
    ("torsion-annihilation", "(k+2) ker eta^q = 0", _check_torsion),
    ("commuting-square", "iota_* tau_k = tau_k^L on J_k", _check_square),
    ("levine-homomorphism", "tau_k^L is additive on admissible pairs", _check_levine_hom),
    ("dk-membership", "tau_k^L lands in D_k(H') when the boundary is fixed", _check_dk_membership),
    ("ker-iota-generators", "generators span ker iota_*", _check_ker_iota),
    ("category-laws", "identity, associativity, top-substantiality, strut part", _check_category),
    ("linking-classification", "block patterns give IC, ILC, LC", _check_linking),
    ("leading-additivity", "upper-tree leading terms add under composition", _check_additivity),
    ("magnus-soundness", "weight-k commutators lie in Gamma_k; leading class is additive", _check_magnus),
]


def run_suite(seed: int, only: str = "all") -> list[CheckResult]:
    out = []
    for name, anchor, fn in CHECKS:
        if only not in ("all", name):
            continue
        rng = random.Random(f"{seed}:{name}")
        t = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as e:  # a crash is a failed check, reported with its payload
            ok, detail = False, {"error": f"{type(e).__name__}: {e}"}
        out.append(CheckResult(name, anchor, ok, time.perf_counter() - t, detail))
    return out


def cmd_verify(args):
    names = [n for n, _, _ in CHECKS]
    if args.suite != "all" and args.suite not in names:
        raise UsageError(f"--suite must be 'all' or one of {', '.join(names)}")
    results = run_suite(args.seed, args.suite)
    report = {"seed": args.seed, "passed": all(r.passed for r in results),
              "checks": [r.to_json() for r in results]}
    width = max(len(r.name) for r in results)
    text = "\n".join(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}" for r in results)
    return report, text


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jlcalc", description="Exact Johnson-Levine calculus.")
    p.add_argument("--format", choices=("json", "text"), default="json")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
        s.set_defaults(func=fn)
        return s

    for name, fn, help_ in (("reduce", cmd_reduce, "freely reduce a word"),
                            ("magnus", cmd_magnus, "truncated Magnus expansion"),
                            ("lcs", cmd_lcs, "lower central series class")):
        s = add(name, fn, help_)
        s.add_argument("--word", required=True)
        s.add_argument("--genus", type=int)
        s.add_argument("--strands", type=int)
        if name != "reduce":
            s.add_argument("--cap", type=int, default=4)

    for name, fn in (("tau", cmd_tau), ("tau-levine", cmd_tau_levine), ("tau-levine-diagram", cmd_tau_levine_diagram)):
        s = add(name, fn, f"{name} of a surface map")
        s.add_argument("--genus", type=int)
        s.add_argument("--degree", type=int, required=True)
        s.add_argument("--map", dest="map_opt")
        s.add_argument("map_pos", nargs="?")

    s = add("sp-classify", cmd_sp_classify, "symplectic and Lagrangian tests")
    s.add_argument("--matrix", required=True)

    s = add("milnor", cmd_milnor, "Milnor map of longitude data")
    s.add_argument("--strands", type=int, required=True)
    s.add_argument("--degree", type=int, required=True)
    s.add_argument("--longitudes", required=True)

    s = add("dk-rank", cmd_dk_rank, "rank of D_k on n letters")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)

    s = add("quasi-lie", cmd_quasi_lie, "structure of the quasi-Lie module")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)

    s = add("eta", cmd_eta, "eta of a tree series")
    s.add_argument("input")
    s.add_argument("--n", type=int)

    s = add("eta-inverse", cmd_eta_inverse, "eta inverse of a D_k element")
    s.add_argument("input")

    s = add("classify-lk", cmd_classify_lk, "classify a linking matrix")
    s.add_argument("matrix")

    s = add("strut-part", cmd_strut_part, "strut part [Lk/2] of a linking matrix")
    s.add_argument("matrix")
    s.add_argument("--cap", type=int, default=4)
    s.add_argument("--struts", type=int, default=2, help="struts shown in the text expansion")

    s = add("compose", cmd_compose, "compose two top-substantial morphisms")
    s.add_argument("--cap", type=int, default=4)
    s.add_argument("left")
    s.add_argument("right")

    s = add("upper-tree", cmd_upper_tree, "upper-tree reduction of a series")
    s.add_argument("series")

    s = add("verify", cmd_verify, "run the property suite")
    s.add_argument("--suite", default="all")
    s.add_argument("--seed", type=int, default=7)
    return p


DOMAIN_ERRORS = (ValueError, ArithmeticError, NotInImage, KeyError)


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if hasattr(args, "map_opt"):
            args.map = args.map_opt or args.map_pos
            if not args.map:
                raise UsageError("a map file is required (--map FILE)")
        payload, text = args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=stderr)
        return 2
    except UnknownGenerator as e:
        print(f"usage error: {e}", file=stderr)
        return 2
    except DOMAIN_ERRORS as e:
        print(f"error: {type(e).__name__}: {e}", file=stderr)
        return 1
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=False), file=stdout)
    else:
        print(text, file=stdout)
    if args.command == "verify":
        return 0 if payload["passed"] else 1
    return 0


def main() -> None:
    sys.exit(run())
