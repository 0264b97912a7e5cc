"""Interaction rules, eta moves, reduction strategies and epsilon-reduction."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Union

from .netcore import (
    FREE, Address, Kind, Net, NetError, Port, canonical_key, closed_components,
    free_trees, is_cut_free, is_principal, observable_axioms, serialize_net,
)


class NotAnActivePair(NetError):
    pass


class PatternMismatch(NetError):
    pass


# ---------------------------------------------------------------------------
# splicing

def _splice(net: Net, slots: list[Port], match: dict[Port, Port]) -> None:
    """Reconnect the outside of a removed region.

    ``slots`` are the ports of removed cells that face the outside; ``match`` is a
    symmetric pairing of slots and ports of freshly added cells.  Chains through
    slots wired to each other are followed; closed chains become loops.
    """
    slotset = set(slots)
    ext = {s: net.link[s] for s in slots}
    inv = {e: s for s, e in ext.items() if e not in slotset}
    done: set[Port] = set()
    used: set[Port] = set()

    def run(start_slot: Port, came: str) -> Port:
        cur, side = start_slot, came
        while cur in slotset:
            used.add(cur)
            if side == "ext":
                cur, side = match[cur], "match"
            else:
                cur, side = ext[cur], "ext"
        return cur

    links = []
    for t in list(inv):
        if t in done:
            continue
        end = run(inv[t], "ext")
        done.add(t)
        done.add(end)
        links.append((t, end))
    for t in match:
        if t in slotset or t in done:
            continue
        end = match[t]
        if end in slotset:
            end = run(end, "match")
        done.add(t)
        done.add(end)
        links.append((t, end))
    for s in slots:
        if s in used:
            continue
        cur = s
        while cur not in used:
            used.add(cur)
            nxt = ext[cur]
            used.add(nxt)
            cur = match[nxt]
        net.loops += 1
    for s in slots:
        net.link.pop(s, None)
    for a, b in links:
        net.connect(a, b)


def fire(net: Net, a: int, b: int, tags: dict[int, str] | None = None) -> str:
    """Rewrite the active pair ``(a, b)`` in place; returns the rule name."""
    if net.link.get((a, 0)) != (b, 0):
        raise NotAnActivePair(f"cells {a} and {b} do not form an active pair")
    ka, kb = net.kinds[a], net.kinds[b]
    del net.link[(a, 0)]
    del net.link[(b, 0)]
    slots = [(c, s) for c in (a, b) for s in range(1, net.kinds[c].arity + 1)]
    match: dict[Port, Port] = {}
    new: list[tuple[int, int]] = []  # (new cell, origin cell)

    def pair(x: Port, y: Port) -> None:
        match[x] = y
        match[y] = x

    def make(kind: Kind, origin: int) -> int:
        c = net.add_cell(kind)
        new.append((c, origin))
        return c

    if ka is kb:
        rule = "anni"
        if ka is not Kind.EPS:
            pair((a, 1), (b, 1))
            pair((a, 2), (b, 2))
    elif ka is Kind.EPS or kb is Kind.EPS:
        rule = "comm"
        e, x = (a, b) if ka is Kind.EPS else (b, a)
        for s in (1, 2):
            pair((x, s), (make(Kind.EPS, e), 0))
    else:
        rule = "comm"
        b1, b2 = make(kb, b), make(kb, b)
        a1, a2 = make(ka, a), make(ka, a)
        pair((a, 1), (b1, 0))
        pair((a, 2), (b2, 0))
        pair((b, 1), (a1, 0))
        pair((b, 2), (a2, 0))
        pair((b1, 1), (a1, 1))
        pair((b1, 2), (a2, 1))
        pair((b2, 1), (a1, 2))
        pair((b2, 2), (a2, 2))
    _splice(net, slots, match)
    del net.kinds[a]
    del net.kinds[b]
    if tags is not None:
        for c, origin in new:
            tags[c] = tags[origin]
        tags.pop(a, None)
        tags.pop(b, None)
    return rule


def reduce_step(net: Net, pair: tuple[int, int]) -> Net:
    out = net.copy()
    fire(out, pair[0], pair[1])
    return out


def one_step_reducts(net: Net) -> list[Net]:
    return [reduce_step(net, p) for p in net.active_pairs()]


# ---------------------------------------------------------------------------
# strategies

@dataclass(frozen=True)
class Strategy:
    name: str
    seed: int | None = None

    def __str__(self) -> str:
        return self.name if self.seed is None else f"{self.name}({self.seed})"


FULL_PARALLEL = Strategy("full")
LEFTMOST = Strategy("leftmost")


def random_strategy(seed: int) -> Strategy:
    return Strategy("random", seed)


def parse_strategy(text: str) -> Strategy:
    if text in ("full", "fullparallel", "FullParallel"):
        return FULL_PARALLEL
    if text in ("leftmost", "Leftmost"):
        return LEFTMOST
    if text.startswith("random"):
        seed = text[len("random"):].strip("():=")
        return random_strategy(int(seed) if seed else 0)
    raise ValueError(f"unknown strategy '{text}'")


@dataclass
class ReductionOutcome:
    net: Net
    steps: int
    status: str  # "Normal" | "CutFree" | "BudgetExhausted"
    rounds: int = 0
    trace: list[tuple[int, str, tuple[int, ...]]] = field(default_factory=list)

    def trace_lines(self) -> list[str]:
        return [f"round {r}: rule={rule} at {','.join(f'c{c}' for c in cells)}"
                for r, rule, cells in self.trace]


def full_round(net: Net, tags: dict[int, str] | None = None,
               allowed: set[frozenset[str]] | None = None,
               log: list | None = None, round_no: int = 0) -> int:
    """Fire every (allowed) active pair present now; returns how many fired."""
    fired = 0
    for a, b in net.active_pairs():
        if allowed is not None and frozenset((tags[a], tags[b])) not in allowed:
            continue
        rule = fire(net, a, b, tags)
        fired += 1
        if log is not None:
            log.append((round_no, rule, (a, b)))
    return fired


def _status(net: Net) -> str | None:
    if is_cut_free(net):
        return "CutFree"
    if not net.active_pairs():
        return "Normal"
    return None


def reduce(net: Net, strategy: Strategy = FULL_PARALLEL, budget: int = 100,
           trace: bool = False) -> ReductionOutcome:
    cur = net.copy()
    log: list | None = [] if trace else None
    rng = random.Random(strategy.seed) if strategy.name == "random" else None
    steps = 0
    for r in range(budget):
        st = _status(cur)
        if st:
            return ReductionOutcome(cur, steps, st, r, log or [])
        if strategy.name == "full":
            steps += full_round(cur, log=log, round_no=r + 1)
            continue
        for _ in range(len(cur.active_pairs())):
            pairs = cur.active_pairs()
            if not pairs:
                break
            a, b = pairs[0] if rng is None else rng.choice(pairs)
            rule = fire(cur, a, b)
            steps += 1
            if log is not None:
                log.append((r + 1, rule, (a, b)))
    st = _status(cur) or "BudgetExhausted"
    return ReductionOutcome(cur, steps, st, budget, log or [])


def guided_reduce(net: Net, tags: dict[int, str], allowed: set[frozenset[str]],
                  budget: int = 200) -> tuple[Net, dict[int, str], int]:
    """Full-parallel reduction restricted to whitelisted pairs of cell tags."""
    cur = net.copy()
    tags = dict(tags)
    rounds = 0
    while rounds < budget:
        if not full_round(cur, tags, allowed):
            break
        rounds += 1
    return cur, tags, rounds


def allow(*pairs: tuple[str, str]) -> set[frozenset[str]]:
    return {frozenset(p) for p in pairs}


# ---------------------------------------------------------------------------
# cores: the cells not hanging from free ports

def extract(net: Net, cells: set[int]) -> tuple[Net, list[tuple[Port, Port]]]:
    """The subnet on ``cells`` with its boundary wires as free ports.

    Boundary wires are numbered in canonical traversal order of ``net``; each is
    returned as (inner port, outer port).
    """
    from .netcore import canonical_structure
    _, wires = canonical_structure(net)
    boundary = []
    for a, b in wires:
        ina = a[0] != FREE and a[0] in cells
        inb = b[0] != FREE and b[0] in cells
        if ina and not inb:
            boundary.append((a, b))
        elif inb and not ina:
            boundary.append((b, a))
    sub = Net(interface=len(boundary))
    ids = {c: sub.add_cell(net.kinds[c]) for c in sorted(cells)}
    inner = {x: k for k, (x, _) in enumerate(boundary, start=1)}
    for c in cells:
        for port in net.ports_of(c):
            q = net.link[port]
            mine = (ids[c], port[1])
            if port in inner:
                sub.link[mine] = (FREE, inner[port])
                sub.link[(FREE, inner[port])] = mine
            else:
                sub.link[mine] = (ids[q[0]], q[1])
    return sub, boundary


def replace_by_eps(net: Net, cells: set[int]) -> int:
    """Erase ``cells`` and put one eps cell on each boundary wire."""
    boundary = []
    for c in cells:
        for port in net.ports_of(c):
            q = net.link[port]
            if q[0] == FREE or q[0] not in cells:
                boundary.append(q)
    for c in cells:
        for port in net.ports_of(c):
            net.link.pop(port, None)
        del net.kinds[c]
    for q in boundary:
        e = net.add_cell(Kind.EPS)
        net.connect((e, 0), q)
    return len(boundary)


def core_cells(net: Net) -> set[int]:
    ft = free_trees(net)
    return {c for c in net.kinds if c not in ft.cells}


def core_components(net: Net) -> list[set[int]]:
    from .netcore import _components
    core = core_cells(net)
    closed = {c for comp in closed_components(net) for c in comp}
    return [set(comp) for comp in _components(net, core - closed)]


def core_key(net: Net) -> str:
    """Canonical key of the non-tree part of a net, closed components dropped."""
    comps = core_components(net)
    cells = set().union(*comps) if comps else set()
    sub, _ = extract(net, cells)
    return canonical_key(sub)


@dataclass
class Exploration:
    """Full-parallel orbit with periodicity detection on cores."""
    addresses: set[Address]
    status: str  # "cutfree" | "periodic" | "budget"
    rounds: int
    growing: bool  # periodic and each period adds observable axioms
    first_obs: Address | None
    final: Net
    period: tuple[int, int] | None = None


def explore(net: Net, budget: int, stop_on_obs: bool = False,
            run_past_growth: bool = True) -> Exploration:
    cur = net.copy()
    addrs: set[Address] = set()
    seen: dict[str, tuple[int, int]] = {}
    first = None
    growing = False
    period = None
    r = 0
    while True:
        obs = observable_axioms(cur)
        if obs and first is None:
            first = min(obs)
        addrs |= obs
        if stop_on_obs and obs:
            return Exploration(addrs, "budget", r, False, first, cur)
        if is_cut_free(cur):
            return Exploration(addrs, "cutfree", r, False, first, cur)
        if period is None:
            key = core_key(cur)
            if key in seen:
                r0, n0 = seen[key]
                period = (r0, r)
                growing = len(obs) > n0
                if not growing or not run_past_growth:
                    return Exploration(addrs, "periodic", r, growing, first, cur, period)
            else:
                seen[key] = (r, len(obs))
        if r >= budget:
            status = "periodic" if period else "budget"
            return Exploration(addrs, status, r, growing, first, cur, period)
        if not cur.active_pairs():
            # stuck: the next state would be identical
            return Exploration(addrs, "periodic", r, False, first, cur, (r, r))
        full_round(cur)
        r += 1


# ---------------------------------------------------------------------------
# blindness

@dataclass(frozen=True)
class Blind:
    reason: str


@dataclass(frozen=True)
class Observable:
    witness: Address


@dataclass(frozen=True)
class Unknown:
    budget: int


BlindVerdict = Union[Blind, Observable, Unknown]


def blindness_oracle(net: Net, budget: int = 32) -> BlindVerdict:
    if net.interface == 0:
        return Blind("T1: empty interface")
    ex = explore(net, budget, stop_on_obs=True)
    if ex.first_obs is not None:
        return Observable(ex.first_obs)
    if ex.status == "cutfree":
        return Blind("T3: cut-free without observable axioms")
    if ex.status == "periodic":
        return Blind(f"T3: core revisited (rounds {ex.period[0]} and {ex.period[1]})")
    return Unknown(budget)


# ---------------------------------------------------------------------------
# epsilon-reduction

def eps_trees(net: Net) -> list[set[int]]:
    """Cell sets of maximal non-trivial eps-trees hanging from free ports."""
    out = []

    def walk(port: Port) -> tuple[bool, set[int]]:
        o = net.link[port]
        if o[0] == FREE or o[1] != 0:
            return False, set()
        c = o[0]
        if net.kinds[c] is Kind.EPS:
            return True, {c}
        e1, s1 = walk((c, 1))
        e2, s2 = walk((c, 2))
        if e1 and e2:
            return True, s1 | s2 | {c}
        if e1 and len(s1) > 1:
            out.append(s1)
        if e2 and len(s2) > 1:
            out.append(s2)
        return False, set()

    for i in range(1, net.interface + 1):
        e, s = walk((FREE, i))
        if e and len(s) > 1:
            out.append(s)
    return out


def is_beta_eps_normal(net: Net) -> bool:
    return is_cut_free(net) and not eps_trees(net)


@dataclass
class EpsEngine:
    """Stateful helper caching blindness verdicts of core components."""
    budget: int = 24
    cache: dict[str, BlindVerdict] = field(default_factory=dict)

    def verdict(self, sub: Net) -> BlindVerdict:
        key = canonical_key(sub)
        if key not in self.cache:
            self.cache[key] = blindness_oracle(sub, self.budget)
        return self.cache[key]

    def eps_phase(self, net: Net, log: list | None = None, round_no: int = 0) -> int:
        """Apply eps-steps until none fires; returns how many fired."""
        fired = 0
        while True:
            step = False
            if net.loops:
                if log is not None:
                    log.append((round_no, "eps", ()))
                net.loops = 0
                fired += 1
            for comp in closed_components(net):
                replace_by_eps(net, set(comp))
                fired += 1
                step = True
                if log is not None:
                    log.append((round_no, "eps", tuple(sorted(comp))))
            for comp in core_components(net):
                sub, _ = extract(net, comp)
                if isinstance(self.verdict(sub), Blind):
                    replace_by_eps(net, comp)
                    fired += 1
                    step = True
                    if log is not None:
                        log.append((round_no, "eps", tuple(sorted(comp))))
            for tree in eps_trees(net):
                replace_by_eps(net, tree)
                fired += 1
                step = True
                if log is not None:
                    log.append((round_no, "eps", tuple(sorted(tree))))
            if not step:
                return fired


def eps_reduce(net: Net, budget: int = 50, trace: bool = False,
               engine: EpsEngine | None = None) -> ReductionOutcome:
    engine = engine or EpsEngine()
    cur = net.copy()
    log: list | None = [] if trace else None
    steps = 0
    for r in range(budget + 1):
        steps += engine.eps_phase(cur, log, r)
        if is_beta_eps_normal(cur):
            return ReductionOutcome(cur, steps, "Normal", r, log or [])
        if r == budget:
            break
        steps += full_round(cur, log=log, round_no=r + 1)
    return ReductionOutcome(cur, steps, "BudgetExhausted", budget, log or [])


def eps_step(net: Net, engine: EpsEngine | None = None) -> Net | None:
    """A single eps-step (one certified blind subnet erased), or None."""
    engine = engine or EpsEngine()
    cur = net.copy()
    if cur.loops:
        cur.loops = 0
        return cur
    for comp in closed_components(cur):
        replace_by_eps(cur, set(comp))
        return cur
    for comp in core_components(cur):
        sub, _ = extract(cur, comp)
        if isinstance(engine.verdict(sub), Blind):
            replace_by_eps(cur, comp)
            return cur
    for tree in eps_trees(cur):
        replace_by_eps(cur, tree)
        return cur
    return None


# ---------------------------------------------------------------------------
# eta moves

def eta0_expand(net: Net, wire: tuple[Port, Port], kind: Kind) -> Net:
    x, y = wire
    if net.link.get(x) != y:
        raise PatternMismatch(f"no wire between {x} and {y}")
    if kind is Kind.EPS:
        raise PatternMismatch("eta0 expands with a binary symbol")
    out = net.copy()
    out.disconnect(x)
    h1, h2 = out.add_cell(kind), out.add_cell(kind)
    out.connect((h1, 0), x)
    out.connect((h2, 0), y)
    out.connect((h1, 1), (h2, 1))
    out.connect((h1, 2), (h2, 2))
    return out


def eta0_contract(net: Net, cells: tuple[int, int]) -> Net:
    c1, c2 = cells
    k = net.kinds.get(c1)
    if k is None or k is Kind.EPS or net.kinds.get(c2) is not k or c1 == c2:
        raise PatternMismatch("eta0 needs two binary cells of one kind")
    if net.link[(c1, 1)] != (c2, 1) or net.link[(c1, 2)] != (c2, 2):
        raise PatternMismatch("auxiliary ports are not wired 1-1 and 2-2")
    out = net.copy()
    x, y = out.link[(c1, 0)], out.link[(c2, 0)]
    for c in (c1, c2):
        for p in out.ports_of(c):
            out.link.pop(p, None)
        del out.kinds[c]
    if x == (c2, 0):
        out.loops += 1
        produced_axiom = True
    else:
        out.connect(x, y)
        produced_axiom = not (is_principal(x) or is_principal(y))
        if not produced_axiom:
            from .netcore import classify_wires, WireClass
            rep = classify_wires(out)
            w = (x, y) if x < y else (y, x)
            produced_axiom = rep.classes[w] is WireClass.AXIOM_CUT
    if not produced_axiom:
        raise PatternMismatch("contraction would not produce an axiom")
    return out


def eta1_swap(net: Net, cell: int) -> Net:
    """Swap ``cell`` (alpha) with the two beta cells on its auxiliary ports."""
    ka = net.kinds.get(cell)
    if ka is None or ka is Kind.EPS:
        raise PatternMismatch("eta1 needs a binary top cell")
    kids = []
    for s in (1, 2):
        q = net.link[(cell, s)]
        if q[0] == FREE or q[1] != 0:
            raise PatternMismatch("auxiliary port does not carry a principal port")
        kids.append(q[0])
    b1, b2 = kids
    kb = net.kinds[b1]
    if b1 == b2 or net.kinds[b2] is not kb or kb is Kind.EPS or kb is ka:
        raise PatternMismatch("eta1 needs two distinct cells of the other binary kind")
    out = net.copy()
    del out.link[(cell, 1)], out.link[(cell, 2)], out.link[(b1, 0)], out.link[(b2, 0)]
    slots = [(cell, 0), (b1, 1), (b1, 2), (b2, 1), (b2, 2)]
    top = out.add_cell(kb)
    l1, l2 = out.add_cell(ka), out.add_cell(ka)
    match: dict[Port, Port] = {}
    for x, y in (((cell, 0), (top, 0)), ((b1, 1), (l1, 1)), ((b2, 1), (l1, 2)),
                 ((b1, 2), (l2, 1)), ((b2, 2), (l2, 2)), ((top, 1), (l1, 0)),
                 ((top, 2), (l2, 0))):
        match[x] = y
        match[y] = x
    _splice(out, slots, match)
    for c in (cell, b1, b2):
        del out.kinds[c]
    return out


def eta1_sites(net: Net) -> list[int]:
    sites = []
    for c, k in net.kinds.items():
        if k is Kind.EPS:
            continue
        try:
            kids = [net.link[(c, s)] for s in (1, 2)]
        except KeyError:
            continue
        if all(q[0] != FREE and q[1] == 0 for q in kids):
            b1, b2 = kids[0][0], kids[1][0]
            kb = net.kinds[b1]
            if b1 != b2 and net.kinds[b2] is kb and kb is not Kind.EPS and kb is not k:
                sites.append(c)
    return sorted(sites)


def eta0_sites(net: Net) -> list[tuple[int, int]]:
    sites = []
    for c, k in net.kinds.items():
        if k is Kind.EPS:
            continue
        o = net.link[(c, 1)]
        if o[0] != FREE and o[0] != c and o[1] == 1 and net.kinds[o[0]] is k \
                and net.link[(c, 2)] == (o[0], 2) and c < o[0]:
            sites.append((c, o[0]))
    return sorted(sites)


def format_outcome(out: ReductionOutcome) -> str:
    return serialize_net(out.net)
