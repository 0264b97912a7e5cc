"""Port graphs, monomials, the semiring interpretation and GoI matrices."""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

from .netcore import (
    FREE, Address, Feedback, Kind, Net, NotCutFree, Pillar, Port, free,
    is_cut_free, is_principal,
)

# ---------------------------------------------------------------------------
# monomials

BASES = "cdfg"
DELTA_BASES = "cd"
ZETA_BASES = "fg"


@dataclass(frozen=True, order=True)
class Atom:
    base: str
    starred: bool = False

    @property
    def star(self) -> "Atom":
        return Atom(self.base, not self.starred)

    def __str__(self) -> str:
        return self.base + ("*" if self.starred else "")


Monomial = tuple[Atom, ...]
ONE: Monomial = ()


def mono(text: str) -> Monomial:
    """Parse a monomial like ``"c*f g"``; ``"1"`` or ``""`` is the empty word."""
    out: list[Atom] = []
    for ch in text.replace(" ", ""):
        if ch == "1":
            continue
        if ch == "*":
            out[-1] = out[-1].star
        elif ch in BASES:
            out.append(Atom(ch))
        else:
            raise ValueError(f"bad atom '{ch}' in monomial '{text}'")
    return tuple(out)


def mono_str(m: Monomial) -> str:
    return "".join(str(a) for a in m) or "1"


def mono_star(m: Monomial) -> Monomial:
    return tuple(a.star for a in reversed(m))


def is_positive(m: Monomial) -> bool:
    return not any(a.starred for a in m)


def _redex(x: Atom, y: Atom) -> Monomial | None:
    """Right member of the rule for the two-letter word ``x y``, or None."""
    if not x.starred or y.starred:
        return None
    if x.base == y.base:
        return ONE
    if (x.base in DELTA_BASES) != (y.base in DELTA_BASES):
        return (y, x)
    return None


def redexes(m: Monomial) -> list[int]:
    return [k for k in range(len(m) - 1) if _redex(m[k], m[k + 1]) is not None]


def mono_step(m: Monomial, k: int) -> Monomial:
    r = _redex(m[k], m[k + 1])
    if r is None:
        raise ValueError(f"no redex at position {k}")
    return m[:k] + r + m[k + 2:]


# Fast path: a monomial as a string, starred atoms in upper case.  Redexes are
# a starred atom followed by a positive one; two such windows never overlap.
_REDEX = re.compile(r"Cc|Dd|Ff|Gg|[CD][fg]|[FG][cd]")
_NORMAL = re.compile(r"[cdfg]*[CDFG]*")


def encode(m: Monomial) -> str:
    return "".join(a.base.upper() if a.starred else a.base for a in m)


def decode(s: str) -> Monomial:
    return tuple(Atom(ch.lower(), ch.isupper()) for ch in s)


def fire_str(s: str, k: int) -> str:
    x, y = s[k], s[k + 1]
    if x.lower() == y:
        return s[:k] + s[k + 2:]
    return s[:k] + y + x + s[k + 2:]


def rewrite_str(s: str, strategy: str = "leftmost", rng: random.Random | None = None) -> str:
    while True:
        if strategy == "leftmost":
            hit = _REDEX.search(s)
            if hit is None:
                return s
            k = hit.start()
        else:
            ks = [h.start() for h in _REDEX.finditer(s)]
            if not ks:
                return s
            k = ks[-1] if strategy == "rightmost" else (rng or random).choice(ks)
        s = fire_str(s, k)


def redexes_str(s: str) -> list[int]:
    return [h.start() for h in _REDEX.finditer(s)]


def value_str(s: str) -> int:
    total = 0
    positives_after = 0
    for ch in reversed(s):
        if ch.isupper():
            total += positives_after
        else:
            positives_after += 1
    return total


def is_normal_clash_free(s: str) -> bool:
    return _NORMAL.fullmatch(s) is not None


def mono_rewrite(m: Monomial, strategy: str = "leftmost",
                 rng: random.Random | None = None) -> Monomial:
    """Normal form; ``strategy`` is leftmost, rightmost or random."""
    return decode(rewrite_str(encode(m), strategy, rng))


def is_clash_free(m: Monomial) -> bool:
    """The normal form is positive followed by starred atoms."""
    return is_normal_clash_free(rewrite_str(encode(m)))


def mono_value(m: Monomial) -> int:
    return value_str(encode(m))


def all_monomials(max_len: int) -> Iterable[Monomial]:
    atoms = [Atom(b, s) for b in BASES for s in (False, True)]
    level: list[Monomial] = [ONE]
    yield ONE
    for _ in range(max_len):
        level = [m + (a,) for m in level for a in atoms]
        yield from level


def random_monomial(rng: random.Random, max_len: int) -> Monomial:
    n = rng.randint(0, max_len)
    return tuple(Atom(rng.choice(BASES), rng.random() < 0.5) for _ in range(n))


# ---------------------------------------------------------------------------
# the semiring

WordPair = tuple[str, str]
Term = tuple[WordPair, WordPair]  # (t, s) read as t s*


def _cancel(a: str, b: str) -> tuple[str, str] | None:
    """a* b as (positive, negative) remainder, or None when it is zero."""
    if b.startswith(a):
        return b[len(a):], ""
    if a.startswith(b):
        return "", a[len(b):]
    return None


def term_mul(x: Term, y: Term) -> Term | None:
    (t1, s1), (t2, s2) = x, y
    t, s = [], []
    for k in range(2):
        r = _cancel(s1[k], t2[k])
        if r is None:
            return None
        t.append(t1[k] + r[0])
        s.append(s2[k] + r[1])
    return (t[0], t[1]), (s[0], s[1])


@dataclass(frozen=True)
class SemiringElement:
    """Finite multiset of terms t s*; the empty multiset is zero."""
    items: tuple[tuple[Term, int], ...] = ()

    @staticmethod
    def of(terms: Iterable[Term]) -> "SemiringElement":
        return SemiringElement._make(Counter(terms))

    @staticmethod
    def _make(c: Counter) -> "SemiringElement":
        return SemiringElement(tuple(sorted((k, v) for k, v in c.items() if v)))

    @property
    def counter(self) -> Counter:
        return Counter(dict(self.items))

    @property
    def terms(self) -> list[Term]:
        return [t for t, _ in self.items]

    def is_zero(self) -> bool:
        return not self.items

    def __add__(self, other: "SemiringElement") -> "SemiringElement":
        return SemiringElement._make(self.counter + other.counter)

    def __mul__(self, other: "SemiringElement") -> "SemiringElement":
        c: Counter = Counter()
        for x, m in self.items:
            for y, n in other.items:
                z = term_mul(x, y)
                if z is not None:
                    c[z] += m * n
        return SemiringElement._make(c)

    def star(self) -> "SemiringElement":
        return SemiringElement._make(Counter({(s, t): m for (t, s), m in self.items}))

    def to_json(self) -> list[dict]:
        out = []
        for (t, s), m in self.items:
            out.extend({"t": list(t), "s": list(s)} for _ in range(m))
        return out

    def __str__(self) -> str:
        if not self.items:
            return "0"
        parts = []
        for (t, s), m in self.items:
            body = f"({t[0] or 'ε'},{t[1] or 'ε'})({s[0] or 'ε'},{s[1] or 'ε'})*"
            parts.append(body if m == 1 else f"{m}·{body}")
        return " + ".join(parts)


ZERO = SemiringElement()
UNIT = SemiringElement.of([(("", ""), ("", ""))])

_GEN = {
    "c": (("p", ""), ("", "")),
    "d": (("q", ""), ("", "")),
    "f": (("", "p"), ("", "")),
    "g": (("", "q"), ("", "")),
}


def atom_value(a: Atom) -> SemiringElement:
    t, s = _GEN[a.base]
    return SemiringElement.of([(s, t) if a.starred else (t, s)])


def interpret(m: Monomial) -> SemiringElement:
    term: Term = (("", ""), ("", ""))
    for a in m:
        t, u = _GEN[a.base]
        nxt = term_mul(term, (u, t) if a.starred else (t, u))
        if nxt is None:
            return ZERO
        term = nxt
    return SemiringElement(((term, 1),))


# ---------------------------------------------------------------------------
# port graphs and paths

WEIGHT = {(Kind.DELTA, 1): "c", (Kind.DELTA, 2): "d", (Kind.ZETA, 1): "f", (Kind.ZETA, 2): "g"}


@dataclass
class PortGraph:
    vertices: list[Port]
    external: list[tuple[Port, Port]]
    internal: list[tuple[Port, Port, str]]  # (principal, auxiliary, weight)


def build_port_graph(net: Net) -> PortGraph:
    verts = [free(k) for k in range(1, net.interface + 1)]
    internal = []
    for c in sorted(net.kinds):
        verts.extend(net.ports_of(c))
        k = net.kinds[c]
        for s in range(1, k.arity + 1):
            internal.append(((c, 0), (c, s), WEIGHT[(k, s)]))
    return PortGraph(verts, net.wires(), internal)


@dataclass(frozen=True)
class MaxPath:
    start: int
    end: int
    ports: tuple[Port, ...]  # visited vertices, free ports included
    weight: Monomial
    crossings: int

    @property
    def observable(self) -> bool:
        return self.crossings == 0


def _step_weight(net: Net, enter: Port, leave: Port) -> Atom:
    """Weight of the internal edge crossed from ``enter`` to ``leave``."""
    c = enter[0]
    k = net.kinds[c]
    if is_principal(enter):
        return Atom(WEIGHT[(k, leave[1])], True)
    return Atom(WEIGHT[(k, enter[1])], False)


def maximal_paths(net: Net, max_crossings: int = 0, prune_zero: bool = False,
                  max_len: int = 400) -> list[MaxPath]:
    """Straight free-to-free paths with at most ``max_crossings`` cut crossings.

    With ``prune_zero`` a partial path is dropped as soon as its weight
    interprets to zero (such paths are never execution paths).
    """
    out: list[MaxPath] = []
    for i in range(1, net.interface + 1):
        stack = [(free(i), (free(i),), ONE, UNIT, 0, frozenset())]
        while stack:
            here, trail, w, val, cr, seen = stack.pop()
            # cross the wire at ``here``
            there = net.link[here]
            cut = is_principal(here) and is_principal(there)
            ncr = cr + (1 if cut else 0)
            if ncr > max_crossings:
                continue
            trail2 = trail + (there,)
            if there[0] == FREE:
                out.append(MaxPath(i, there[1], trail2, w, ncr))
                continue
            key = (there, ncr)
            if key in seen or len(trail2) > max_len:
                continue
            seen2 = seen | {key}
            k = net.kinds[there[0]]
            if k is Kind.EPS:
                continue
            nexts = [(there[0], s) for s in (1, 2)] if is_principal(there) else [(there[0], 0)]
            for nxt in reversed(nexts):
                a = _step_weight(net, there, nxt)
                nval = atom_value(a) * val if prune_zero else val
                if prune_zero and nval.is_zero():
                    continue
                stack.append((nxt, trail2 + (nxt,), (a,) + w, nval, ncr, seen2))
    out.sort(key=lambda p: (p.start, p.end, p.crossings, p.ports))
    return out


# ---------------------------------------------------------------------------
# matrices

Matrix = list[list[SemiringElement]]


def zero_matrix(n: int) -> Matrix:
    return [[ZERO] * n for _ in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    out = zero_matrix(n)
    for i in range(n):
        for k in range(n):
            if a[i][k].is_zero():
                continue
            for j in range(n):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def is_hermitian(a: Matrix) -> bool:
    n = len(a)
    return all(a[j][i] == a[i][j].star() for i in range(n) for j in range(n))


def matrix_json(a: Matrix) -> list[list[list[dict]]]:
    return [[x.to_json() for x in row] for row in a]


def goi_matrix(net: Net) -> Matrix:
    """Entry [j-1][i-1] sums the interpretations of observable paths i -> j."""
    if not is_cut_free(net):
        raise NotCutFree("goi_matrix needs a cut-free net")
    n = net.interface
    m = zero_matrix(n)
    for path in maximal_paths(net, 0):
        j, i = path.end - 1, path.start - 1
        m[j][i] = m[j][i] + interpret(path.weight)
    return m


@dataclass(frozen=True)
class Yes:
    h: int


@dataclass(frozen=True)
class No:
    certificate: str


@dataclass(frozen=True)
class UnknownNil:
    budget: int


Nilpotency = Union[Yes, No, UnknownNil]


def _growing_term(t: Term) -> bool:
    """True when every power of the term t s* is nonzero."""
    (t1, t2), (s1, s2) = t
    return all(a.startswith(b) or b.startswith(a) for a, b in ((t1, s1), (t2, s2)))


def feedback_matrix(sigma: Feedback, n: int) -> Matrix:
    m = zero_matrix(n)
    for i, j in sigma.items():
        m[i - 1][j - 1] = UNIT
    return m


def execution_formula(cutfree: Net, sigma: Feedback, power_budget: int = 32
                      ) -> tuple[Nilpotency, Matrix]:
    """Sum of M (S M)^h projected on the ports outside dom(sigma)."""
    m = goi_matrix(cutfree)
    n = cutfree.interface
    sm = mat_mul(feedback_matrix(sigma, n), m)
    keep = [i for i in range(n) if (i + 1) not in sigma]
    total = m
    power = sm
    verdict: Nilpotency = UnknownNil(power_budget)
    for h in range(1, power_budget + 1):
        if is_zero_matrix(power):
            verdict = Yes(h)
            break
        for i in range(n):
            for term in power[i][i].terms:
                if _growing_term(term):
                    verdict = No(f"diagonal entry {i + 1} of power {h} is a non-vanishing cycle")
                    break
            if isinstance(verdict, No):
                break
        if isinstance(verdict, No):
            break
        total = mat_add(total, mat_mul(m, power))
        power = mat_mul(power, sm)
    proj = [[total[a][b] for b in keep] for a in keep]
    return verdict, proj


def path_address(path: MaxPath) -> Address | None:
    v = interpret(path.weight)
    if v.is_zero():
        return None
    (t, s), = v.terms
    return Address.of(Pillar(path.start, s[0], s[1]), Pillar(path.end, t[0], t[1]))


def addresses_via_goi(net: Net, crossing_budget: int = 8) -> set[Address]:
    out = set()
    for path in maximal_paths(net, crossing_budget, prune_zero=True):
        addr = path_address(path)
        if addr is not None:
            out.add(addr)
    return out
