"""Address sets as finite generators of edifices: canonical form, trace, truncation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .netcore import Address, Feedback, Net, Pillar, observable_axioms
from .rewrite import EpsEngine, eps_reduce, explore

AddressSet = frozenset  # of Address


def obs_axioms(net: Net) -> frozenset[Address]:
    return frozenset(observable_axioms(net))


def all_obs_paths(net: Net, budget: int = 16) -> tuple[frozenset[Address], bool]:
    """Addresses met along the full-parallel sequence; True when provably all."""
    ex = explore(net, budget)
    exhausted = ex.status == "cutfree" or (ex.status == "periodic" and not ex.growing)
    return frozenset(ex.addresses), exhausted


# ---------------------------------------------------------------------------
# canonical form

def _extend(p: Pillar, coord: int, letter: str) -> Pillar:
    if coord == 0:
        return Pillar(p.port, p.w1 + letter, p.w2)
    return Pillar(p.port, p.w1, p.w2 + letter)


def _parent(p: Pillar, coord: int) -> tuple[Pillar, str] | None:
    w = p.w1 if coord == 0 else p.w2
    if not w:
        return None
    q = Pillar(p.port, w[:-1], p.w2) if coord == 0 else Pillar(p.port, p.w1, w[:-1])
    return q, w[-1]


def _merge_once(addrs: set[Address]) -> bool:
    for x in sorted(addrs):
        for a, b in x.orientations():
            for coord in (0, 1):
                pa, pb = _parent(a, coord), _parent(b, coord)
                if pa is None or pb is None or pa[1] != "p" or pb[1] != "p":
                    continue
                sib = Address.of(_extend(pa[0], coord, "q"), _extend(pb[0], coord, "q"))
                if sib in addrs and sib != x:
                    addrs.discard(x)
                    addrs.discard(sib)
                    addrs.add(Address.of(pa[0], pb[0]))
                    return True
    return False


def canonicalize(addrs: Iterable[Address]) -> frozenset[Address]:
    """Merge sibling pairs (the two halves of an eta-expanded axiom) to a fixpoint."""
    work = set(addrs)
    while _merge_once(work):
        pass
    return frozenset(work)


def edifice_equal(a: Iterable[Address], b: Iterable[Address]) -> bool:
    return canonicalize(a) == canonicalize(b)


def is_prefix_free(addrs: Iterable[Address]) -> bool:
    """No pillar of one address extends a pillar of another (simplicity)."""
    pillars = []
    for x in addrs:
        if x.degenerate:
            continue
        pillars.extend([(x, x.a), (x, x.b)])
    for (x, p), (y, q) in itertools.combinations(pillars, 2):
        if x == y or p.port != q.port:
            continue
        if (p.w1.startswith(q.w1) or q.w1.startswith(p.w1)) and \
                (p.w2.startswith(q.w2) or q.w2.startswith(p.w2)):
            return False
    return True


def contains_vault(addrs: Iterable[Address], x: Address) -> bool:
    """Whether the vault of ``x`` lies inside the edifice generated by ``addrs``."""
    for y in addrs:
        for a, b in y.orientations():
            if a.port != x.a.port or b.port != x.b.port:
                continue
            ok = True
            for k in (0, 1):
                sa, sb = (a.w1, b.w1) if k == 0 else (a.w2, b.w2)
                xa, xb = (x.a.w1, x.b.w1) if k == 0 else (x.a.w2, x.b.w2)
                if not (xa.startswith(sa) and xb.startswith(sb) and xa[len(sa):] == xb[len(sb):]):
                    ok = False
                    break
            if ok:
                return True
    return False


def address_json(addrs: Iterable[Address]) -> list[dict]:
    def pj(p: Pillar) -> dict:
        return {"w1": p.w1, "w2": p.w2, "port": p.port}
    return [{"a": pj(x.a), "b": pj(x.b)} for x in sorted(addrs)]


def address_from_json(items: list[dict]) -> frozenset[Address]:
    return frozenset(Address.of(Pillar(d["a"]["port"], d["a"]["w1"], d["a"]["w2"]),
                                Pillar(d["b"]["port"], d["b"]["w1"], d["b"]["w2"]))
                     for d in items)


# ---------------------------------------------------------------------------
# trace

def _compose(left: tuple[Pillar, Pillar], right: tuple[Pillar, Pillar]
             ) -> tuple[Pillar, Pillar] | None:
    """Compose the vaults (S w, T w) and (s v, t v) along T w = s v."""
    (S, T), (s, t) = left, right
    newS, newT = ["", ""], ["", ""]
    for k in range(2):
        Sk, Tk = (S.w1, T.w1) if k == 0 else (S.w2, T.w2)
        sk, tk = (s.w1, t.w1) if k == 0 else (s.w2, t.w2)
        if sk.startswith(Tk):
            newS[k], newT[k] = Sk + sk[len(Tk):], tk
        elif Tk.startswith(sk):
            newS[k], newT[k] = Sk, tk + Tk[len(sk):]
        else:
            return None
    return Pillar(S.port, newS[0], newS[1]), Pillar(t.port, newT[0], newT[1])


def trace_addresses(addrs: Iterable[Address], sigma: Feedback, max_len: int = 12,
                    max_out: int = 4096) -> tuple[frozenset[Address], bool]:
    """Generators of the trace of the edifice along ``sigma``; True when complete."""
    addrs = sorted(set(addrs))
    by_port: dict[int, list[tuple[Pillar, Pillar]]] = {}
    for x in addrs:
        for a, b in x.orientations():
            by_port.setdefault(a.port, []).append((a, b))
    out: set[Address] = set()
    complete = True
    frontier = [o for x in addrs for o in x.orientations() if o[0].port not in sigma]
    seen = set(frontier)
    length = 1
    while frontier:
        nxt = []
        for cur in frontier:
            end = cur[1].port
            if end not in sigma:
                out.add(Address.of(*cur))
                if len(out) > max_out:
                    return frozenset(canonicalize(out)), False
                continue
            for arch in by_port.get(sigma[end], []):
                comp = _compose(cur, arch)
                if comp is not None and comp not in seen:
                    seen.add(comp)
                    nxt.append(comp)
        length += 1
        if nxt and length > max_len:
            complete = False
            break
        frontier = nxt
    return canonicalize(out), complete


def renumber_after_feedback(addrs: Iterable[Address], sigma: Feedback,
                            total: int) -> frozenset[Address]:
    """Rename ports outside dom(sigma) to 1.. in order, as plugging does."""
    keep = [i for i in range(1, total + 1) if i not in sigma]
    ren = {i: r for r, i in enumerate(keep, start=1)}
    return frozenset(Address.of(Pillar(ren[x.a.port], x.a.w1, x.a.w2),
                                Pillar(ren[x.b.port], x.b.w1, x.b.w2)) for x in addrs)


# ---------------------------------------------------------------------------
# truncation

@dataclass(frozen=True)
class TruncationSet:
    depth: int
    arches: frozenset[Address]


def _words(n: int) -> list[str]:
    return ["".join(w) for w in itertools.product("pq", repeat=n)]


def truncate(addrs: Iterable[Address], k: int) -> TruncationSet:
    out = set()
    for x in addrs:
        a, b = x.a, x.b
        ext = []
        for c in range(2):
            sa, sb = (a.w1, b.w1) if c == 0 else (a.w2, b.w2)
            need = max(0, k - min(len(sa), len(sb)))
            ext.append([((sa + w)[:k], (sb + w)[:k]) for w in _words(need)])
        for (a1, b1), (a2, b2) in itertools.product(ext[0], ext[1]):
            out.add(Address.of(Pillar(a.port, a1, a2), Pillar(b.port, b1, b2)))
    return TruncationSet(k, frozenset(out))


def closure_equal_up_to(a: Iterable[Address], b: Iterable[Address], k: int) -> bool:
    a, b = list(a), list(b)
    return all(truncate(a, j) == truncate(b, j) for j in range(k + 1))


def closure_profile(a: Iterable[Address], b: Iterable[Address], k: int) -> list[bool]:
    a, b = list(a), list(b)
    return [truncate(a, j) == truncate(b, j) for j in range(k + 1)]


# ---------------------------------------------------------------------------
# finiteness

class Finiteness(Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    UNKNOWN = "Unknown"


def finiteness_verdict(net: Net, budget: int = 16,
                       engine: EpsEngine | None = None) -> Finiteness:
    out = eps_reduce(net, budget, engine=engine)
    if out.status == "Normal":
        return Finiteness.FINITE
    ex = explore(net, budget, run_past_growth=False)
    if ex.status == "periodic" and ex.growing:
        return Finiteness.INFINITE
    return Finiteness.UNKNOWN
