"""Observability, solvability, equivalence checkers and tests with replayable witnesses."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum

from .edifice import (
    Finiteness, all_obs_paths, canonicalize, closure_profile, contains_vault,
    finiteness_verdict, truncate,
)
from .netcore import (
    FREE, Address, EpsLeaf, InterfaceMismatch, Kind, Leaf, Net, Node, NotCutFree, Pillar,
    Tree, build_tree, canonical_key, decompose, eps_net, free, free_trees, is_cut_free,
    leaf_addresses, observable_axioms, plug, serialize_net, vicious_circles,
)
from .rewrite import (
    Blind, EpsEngine, Observable, blindness_oracle, eps_reduce, eps_step, explore,
    full_round, one_step_reducts, reduce,
)


# ---------------------------------------------------------------------------
# tests

@dataclass(frozen=True)
class Test:
    """One tree per free port of the tested net; free leaves become the new ports."""
    trees: tuple[Tree, ...]
    __test__ = False  # not a pytest class

    @property
    def arity(self) -> int:
        return len(self.trees)

    def context(self) -> Net:
        n = len(self.trees)
        ctx = Net(interface=n, name="test")
        leaves = []
        for k, tree in enumerate(self.trees, start=1):
            _, ls = build_tree(ctx, tree, free(k))
            leaves.extend(ls)
        for r, port in enumerate(leaves, start=1):
            ctx.interface = n + r
            ctx.connect(port, free(n + r))
        return ctx

    def apply(self, net: Net) -> Net:
        if net.interface != self.arity:
            raise InterfaceMismatch(f"test has {self.arity} trees, net has {net.interface} ports")
        return plug(self.context(), net)

    def source(self) -> str:
        return serialize_net(self.context(), name="test")

    def __str__(self) -> str:
        return " ".join(f"{k}:{t}" for k, t in enumerate(self.trees, start=1))


def identity_test(n: int) -> Test:
    return Test(tuple(Leaf() for _ in range(n)))


def _path_tree(seqs: list[list[tuple[Kind, str]]]) -> Tree:
    """The smallest tree reaching every branch in ``seqs``, eps elsewhere."""
    if not seqs:
        return EpsLeaf()
    if any(not s for s in seqs):
        if len(seqs) == 1:
            return Leaf()
        raise ValueError("one branch is a prefix of another")
    kinds = {s[0][0] for s in seqs}
    if len(kinds) > 1:
        raise ValueError("branches disagree on the symbol of a shared cell")
    kind = kinds.pop()
    left = [s[1:] for s in seqs if s[0][1] == "p"]
    right = [s[1:] for s in seqs if s[0][1] == "q"]
    return Node(kind, _path_tree(left), _path_tree(right))


def _branch(p: Pillar, delta_first: bool) -> list[tuple[Kind, str]]:
    d = [(Kind.DELTA, c) for c in p.w1]
    z = [(Kind.ZETA, c) for c in p.w2]
    return d + z if delta_first else z + d


def discriminating_test(addr: Address, interface: int) -> Test:
    """Dual trees leaving free exactly the two leaves of ``addr``; eps elsewhere."""
    a, b = addr.a, addr.b
    if a == b:
        raise ValueError("a degenerate address has a single leaf")
    if max(a.port, b.port) > interface:
        raise ValueError("address port outside the interface")
    trees: list[Tree] = [EpsLeaf() for _ in range(interface)]
    if a.port != b.port:
        trees[a.port - 1] = _path_tree([_branch(a, True)])
        trees[b.port - 1] = _path_tree([_branch(b, True)])
        return Test(tuple(trees))
    for fa in (True, False):
        for fb in (True, False):
            try:
                trees[a.port - 1] = _path_tree([_branch(a, fa), _branch(b, fb)])
                return Test(tuple(trees))
            except ValueError:
                continue
    raise ValueError(f"no single tree carries both pillars of {addr}")


def _prune(tree: Tree, keep: set[tuple[str, str]], prefix=("", "")) -> Tree:
    if isinstance(tree, Leaf):
        return Leaf() if prefix in keep else EpsLeaf()
    if isinstance(tree, EpsLeaf):
        return tree
    if not any(a in keep for a in leaf_addresses(tree, prefix)):
        return EpsLeaf()
    subs = []
    for letter, sub in (("p", tree.left), ("q", tree.right)):
        nxt = (prefix[0] + letter, prefix[1]) if tree.kind is Kind.DELTA \
            else (prefix[0], prefix[1] + letter)
        subs.append(_prune(sub, keep, nxt))
    return Node(tree.kind, subs[0], subs[1])


# ---------------------------------------------------------------------------
# replay

class Outcome(Enum):
    QUASI_WIRE = "quasi-wire"
    NORMAL = "normal"
    INFINITE = "infinite"
    BLIND = "blind"
    OBSERVABLE = "observable"
    UNKNOWN = "unknown"


def reaches_quasi_wire(net: Net, budget: int) -> tuple[bool, int]:
    """Whether free ports 1 and 2 get wired to each other within ``budget`` rounds."""
    if net.interface != 2:
        return False, 0
    cur = net.copy()
    for r in range(budget + 1):
        if cur.link[free(1)] == free(2):
            return True, r
        if not cur.active_pairs():
            return False, r
        full_round(cur)
    return False, budget


def replay_finitary(test: Test, net: Net, budget: int = 24) -> tuple[Outcome, str]:
    plugged = test.apply(net)
    ok, r = reaches_quasi_wire(plugged, budget)
    if ok:
        return Outcome.QUASI_WIRE, f"quasi-wire after {r} rounds"
    out = eps_reduce(plugged, budget)
    if out.status == "Normal":
        return Outcome.NORMAL, f"beta-eps normal, not a wire, after {out.rounds} rounds"
    if finiteness_verdict(plugged, budget) is Finiteness.INFINITE:
        return Outcome.INFINITE, "infinitely many observable axioms"
    if isinstance(blindness_oracle(plugged, budget), Blind):
        return Outcome.BLIND, "blind"
    return Outcome.UNKNOWN, f"undecided within {budget} rounds"


def replay_observable(test: Test, net: Net, budget: int = 24) -> tuple[Outcome, str]:
    v = blindness_oracle(test.apply(net), budget)
    if isinstance(v, Observable):
        return Outcome.OBSERVABLE, f"observable axiom {v.witness}"
    if isinstance(v, Blind):
        return Outcome.BLIND, v.reason
    return Outcome.UNKNOWN, f"undecided within {budget} rounds"


# ---------------------------------------------------------------------------
# observability and solvability

class Observability(Enum):
    IMMEDIATELY_OBSERVABLE = "ImmediatelyObservable"
    FINITARILY_OBSERVABLE = "FinitarilyObservable"
    OBSERVABLE = "Observable"
    BLIND = "Blind"
    UNKNOWN = "Unknown"


def observability(net: Net, budget: int = 16) -> Observability:
    """Strongest predicate that holds, checked in this order: immediate, finitary, plain."""
    if observable_axioms(net):
        return Observability.IMMEDIATELY_OBSERVABLE
    addrs, _ = all_obs_paths(net, budget)
    if addrs:
        if finiteness_verdict(net, budget) is Finiteness.FINITE:
            return Observability.FINITARILY_OBSERVABLE
        return Observability.OBSERVABLE
    if isinstance(blindness_oracle(net, budget), Blind):
        return Observability.BLIND
    return Observability.UNKNOWN


def is_finitarily_observable(net: Net, budget: int = 16) -> bool | None:
    addrs, _ = all_obs_paths(net, budget)
    fin = finiteness_verdict(net, budget)
    if fin is Finiteness.UNKNOWN:
        return None
    return bool(addrs) and fin is Finiteness.FINITE


def solving_test(net: Net, budget: int = 16) -> Test | None:
    """A test reducing ``net`` to a quasi-wire, confirmed by replay; None otherwise."""
    ex = explore(net, budget, stop_on_obs=True)
    if ex.first_obs is None:
        return None
    x = ex.first_obs
    ft = free_trees(ex.final)
    trees: list[Tree] = []
    for k in range(1, net.interface + 1):
        keep = {(p.w1, p.w2) for p in (x.a, x.b) if p.port == k}
        trees.append(_prune(ft.roots[k], keep) if keep else EpsLeaf())
    test = Test(tuple(trees))
    ok, _ = reaches_quasi_wire(test.apply(net), budget + 4 * net.interface + 16)
    return test if ok else None


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class EqVerdict:
    verdict: str  # "Equal", "Equal-up-to-k", "Distinguished" or "Inconclusive"
    depth: int | None = None
    witness: Test | None = None
    evidence: dict = field(default_factory=dict)
    replay: list[str] = field(default_factory=list)
    profile: list[bool] | None = None

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict}
        if self.depth is not None:
            out["depth"] = self.depth
        if self.witness is not None:
            out["witness"] = self.witness.source()
        if self.profile is not None:
            out["profile"] = self.profile
        if self.evidence:
            out["evidence"] = self.evidence
        out["replay"] = self.replay
        return out


def _same_interface(mu: Net, nu: Net) -> None:
    if mu.interface != nu.interface:
        raise InterfaceMismatch(f"interfaces differ: {mu.interface} and {nu.interface}")


def separating_address(a: frozenset[Address], b: frozenset[Address]) -> Address | None:
    """An address of ``a`` whose vault is not inside the edifice of ``b``."""
    ca, cb = canonicalize(a), canonicalize(b)
    for x in sorted(ca):
        if x.degenerate or contains_vault(cb, x):
            continue
        # prefer an address the net actually shows, so the test meets no eta-expansion
        for y in sorted(a):
            if not y.degenerate and contains_vault([x], y) and not contains_vault(cb, y):
                return y
        return x
    return None


def fin_ax_eq(mu: Net, nu: Net, budget: int = 16) -> EqVerdict:
    _same_interface(mu, nu)
    a, ca = all_obs_paths(mu, budget)
    b, cb = all_obs_paths(nu, budget)
    fa, fb = finiteness_verdict(mu, budget), finiteness_verdict(nu, budget)
    ev = {"complete": [ca, cb], "finiteness": [fa.value, fb.value]}
    if ca and cb and canonicalize(a) == canonicalize(b):
        return EqVerdict("Equal", evidence=ev)
    # the identity context separates finitarily observable from not
    obs = [bool(a) and fa is Finiteness.FINITE, bool(b) and fb is Finiteness.FINITE]
    known = [fa is not Finiteness.UNKNOWN or not a, fb is not Finiteness.UNKNOWN or not b]
    if all(known) and obs[0] != obs[1]:
        test = identity_test(mu.interface)
        return EqVerdict("Distinguished", witness=test, evidence=ev, replay=[
            f"identity: first net finitarily observable={obs[0]}",
            f"identity: second net finitarily observable={obs[1]}"])
    if ca and cb:
        for first, second, tag in ((a, b, "first"), (b, a, "second")):
            x = separating_address(first, second)
            if x is None:
                continue
            test = discriminating_test(x, mu.interface)
            inside = mu if tag == "first" else nu
            outside = nu if tag == "first" else mu
            r1, why1 = replay_finitary(test, inside, budget)
            r2, why2 = replay_finitary(test, outside, budget)
            log = [f"address {x} from the {tag} net",
                   f"containing side: {r1.value} ({why1})",
                   f"other side: {r2.value} ({why2})"]
            if r1 is Outcome.QUASI_WIRE and r2 not in (Outcome.QUASI_WIRE, Outcome.UNKNOWN):
                return EqVerdict("Distinguished", witness=test, evidence=ev, replay=log)
            return EqVerdict("Inconclusive", evidence=ev, replay=log)
    return EqVerdict("Inconclusive", evidence={**ev, "budget": budget})


def ax_eq_up_to(mu: Net, nu: Net, k: int, budget: int = 16) -> EqVerdict:
    """Per-depth comparison of closed edifices through prefix truncations."""
    _same_interface(mu, nu)
    a, ca = all_obs_paths(mu, budget)
    b, cb = all_obs_paths(nu, budget)
    profile = closure_profile(a, b, k)
    ev = {"complete": [ca, cb]}
    if all(profile):
        return EqVerdict(f"Equal-up-to-{k}", depth=k, evidence=ev, profile=profile)
    d = profile.index(False)
    ta, tb = truncate(a, d).arches, truncate(b, d).arches
    for first, second, inside, outside in ((ta, tb, mu, nu), (tb, ta, nu, mu)):
        for x in sorted(first - second):
            if x.degenerate:
                continue
            combos = {Address.of(x.a, x.b), Address.of(x.a, x.a), Address.of(x.b, x.b)}
            if combos & second:
                continue
            try:
                test = discriminating_test(x, mu.interface)
            except ValueError:
                continue
            r1, why1 = replay_observable(test, inside, budget)
            r2, why2 = replay_observable(test, outside, budget)
            log = [f"depth {d} arch {x}", f"containing side: {r1.value} ({why1})",
                   f"other side: {r2.value} ({why2})"]
            if r1 is Outcome.OBSERVABLE and r2 is Outcome.BLIND:
                return EqVerdict("Distinguished", depth=d, witness=test, evidence=ev,
                                 replay=log, profile=profile)
    return EqVerdict("Inconclusive", depth=d, evidence={**ev, "budget": budget},
                     profile=profile)


def _reach(net: Net, budget: int, cap: int, engine: EpsEngine) -> dict[str, Net]:
    """Canonical keys of beta/eps reducts: the full-parallel orbit plus a bounded search."""
    seen: dict[str, Net] = {}
    cur = net.copy()
    for _ in range(budget + 1):
        seen.setdefault(canonical_key(cur), cur.copy())
        engine.eps_phase(cur)
        seen.setdefault(canonical_key(cur), cur.copy())
        if not cur.active_pairs():
            break
        full_round(cur)
    frontier = [net]
    for _ in range(budget):
        nxt = []
        for x in frontier:
            moves = one_step_reducts(x)
            e = eps_step(x, engine)
            if e is not None:
                moves.append(e)
            for y in moves:
                key = canonical_key(y)
                if key not in seen and len(seen) < cap:
                    seen[key] = y
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    return seen


def beta_eps_eq(mu: Net, nu: Net, budget: int = 12, cap: int = 2000) -> EqVerdict:
    """Semi-decision: Equal once a common reduct is found, else Inconclusive."""
    _same_interface(mu, nu)
    engine = EpsEngine()
    ra = _reach(mu, budget, cap, engine)
    rb = _reach(nu, budget, cap, engine)
    common = sorted(set(ra) & set(rb))
    if common:
        return EqVerdict("Equal", evidence={"common_reduct": serialize_net(ra[common[0]])},
                         replay=[f"{len(ra)} and {len(rb)} reducts explored"])
    return EqVerdict("Inconclusive", evidence={"budget": budget},
                     replay=[f"{len(ra)} and {len(rb)} reducts explored, none shared"])


# ---------------------------------------------------------------------------
# visibility

@dataclass(frozen=True)
class Visibility:
    verdict: str  # "Visible" | "NotVisibleWithinBudget" | "ProvablyNotVisible"
    shape: str = ""
    round: int = 0


def _visible_shape(net: Net, port: int) -> str:
    q = net.link[free(port)]
    if q[0] != FREE and q[1] == 0:
        return f"principal port of a {net.kinds[q[0]].value} cell"
    ft = free_trees(net)
    for leaf, (j, addr) in ft.leaf_of.items():
        if j != port and net.link[leaf] == free(port):
            tree = "a wire" if leaf == free(j) else f"the leaf ({addr[0] or 'ε'},{addr[1] or 'ε'})"
            return f"{tree} of the tree at port {j}"
    return ""


def visible(net: Net, port: int, budget: int = 16) -> Visibility:
    if not 1 <= port <= net.interface:
        raise ValueError(f"port {port} outside 1..{net.interface}")
    cur = net.copy()
    for r in range(budget + 1):
        shape = _visible_shape(cur, port)
        if shape:
            return Visibility("Visible", shape, r)
        q = cur.link[free(port)]
        if q[0] != FREE:
            for circle in vicious_circles(cur):
                if q[0] in circle:
                    return Visibility("ProvablyNotVisible",
                                      f"port hangs from a vicious circle of {len(circle)} cells", r)
        if not cur.active_pairs():
            return Visibility("ProvablyNotVisible", "no active pair left", r)
        full_round(cur)
    return Visibility("NotVisibleWithinBudget", "", budget)


def visible_eq(mu: Net, nu: Net, budget: int = 16) -> EqVerdict:
    """Compare visibility port by port under the identity and single-eraser tests."""
    _same_interface(mu, nu)
    n = mu.interface
    tests = [identity_test(n)]
    for k in range(n):
        trees = [Leaf()] * n
        trees[k] = EpsLeaf()
        tests.append(Test(tuple(trees)))
    log = []
    for test in tests:
        pa, pb = test.apply(mu), test.apply(nu)
        for port in range(1, pa.interface + 1):
            va, vb = visible(pa, port, budget), visible(pb, port, budget)
            log.append(f"test [{test}] port {port}: {va.verdict} / {vb.verdict}")
            definite = {"Visible", "ProvablyNotVisible"}
            if va.verdict in definite and vb.verdict in definite and va.verdict != vb.verdict:
                shape = va.shape or vb.shape
                return EqVerdict("Distinguished", witness=test, replay=log,
                                 evidence={"port": port, "shape": shape})
    return EqVerdict("Inconclusive", evidence={"budget": budget}, replay=log)


# ---------------------------------------------------------------------------
# approximations

class Tri(Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


def is_approximation(candidate: Net, net: Net, budget: int = 16) -> Tri:
    if not is_cut_free(candidate):
        raise NotCutFree("an approximation is a cut-free net")
    _same_interface(candidate, net)
    want = canonicalize(observable_axioms(candidate))
    have, complete = all_obs_paths(net, budget)
    have = canonicalize(have)
    if all(contains_vault(have, x) for x in want):
        return Tri.YES
    return Tri.NO if complete else Tri.UNKNOWN


def approximation_at(net: Net) -> Net:
    """The cut-free part of ``net`` visible now: free trees, observable axioms, eps elsewhere."""
    ft = free_trees(net)
    out = Net(interface=net.interface, name="approx")
    ids = {c: out.add_cell(net.kinds[c]) for c in sorted(ft.cells)}

    def mapped(p):
        return p if p[0] == FREE else (ids[p[0]], p[1])

    for c in sorted(ft.cells):
        for port in net.ports_of(c):
            q = net.link[port]
            if port in ft.leaf_of:
                continue
            out.link[mapped(port)] = mapped(q)
    for k in range(1, net.interface + 1):
        q = net.link[free(k)]
        if free(k) not in ft.leaf_of:
            out.link[free(k)] = mapped(q)
    for leaf in ft.leaf_of:
        q = net.link[leaf]
        if q in ft.leaf_of:
            out.link[mapped(leaf)] = mapped(q)
        else:
            e = out.add_cell(Kind.EPS)
            out.connect(mapped(leaf), (e, 0))
    return out


def approximations(net: Net, rounds: int = 6) -> list[Net]:
    """Approximations read off the first full-parallel reducts, starting from eps_n."""
    out = [eps_net(net.interface)]
    cur = net.copy()
    for _ in range(rounds + 1):
        out.append(approximation_at(cur))
        if not cur.active_pairs():
            break
        full_round(cur)
    return out


# ---------------------------------------------------------------------------
# collapse and genericity

@dataclass
class CollapseReplay:
    ok: bool
    feedback_pairs: int
    rounds: int
    result: Net


def collapse_replay(net: Net, budget: int = 64) -> CollapseReplay:
    """Replace every wire of the decomposition context by two eps cells and reduce.

    If wires and eps_2 were congruent, ``net`` would then equal eps_n.
    """
    nu, sigma = decompose(net)
    total = nu.interface
    erased = plug(eps_net(total), nu)  # eps on every port of the cut-free part
    n = net.interface
    for _ in range(n):
        e = erased.add_cell(Kind.EPS)
        erased.interface += 1
        erased.connect((e, 0), free(erased.interface))
    out = reduce(erased, budget=budget)
    ok = out.status == "CutFree" and canonical_key(out.net) == canonical_key(eps_net(n))
    return CollapseReplay(ok, len(sigma) // 2, out.rounds, out.net)


@dataclass
class GenericityCase:
    holds: bool
    checked: int
    failure: str = ""


def genericity_check(mu: Net, context: Net, xi: Net, budget: int = 16,
                     rounds: int = 6) -> GenericityCase:
    """Every approximation of context[mu] found is one of context[xi]."""
    if not isinstance(blindness_oracle(mu, budget), Blind):
        raise ValueError("genericity is stated for blind nets")
    _same_interface(mu, xi)
    cm, cx = plug(context, mu), plug(context, xi)
    checked = 0
    for apx in approximations(cm, rounds):
        v = is_approximation(apx, cx, budget)
        checked += 1
        if v is not Tri.YES:
            return GenericityCase(False, checked, f"{v.value}: {serialize_net(apx)}")
    return GenericityCase(True, checked)


def random_test(rng: random.Random, n: int, depth: int = 2) -> Test:
    from .netcore import random_tree
    return Test(tuple(random_tree(rng, depth, eps_rate=0.3) for _ in range(n)))
