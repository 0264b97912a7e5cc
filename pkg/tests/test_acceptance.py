"""Acceptance criteria 1-14, one check per criterion.

Run under pytest, or directly with ``python3 tests/test_acceptance.py`` to get
one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import itertools
import random
import sys

import pytest

from symcomb.edifice import (
    Finiteness, all_obs_paths, canonicalize, closure_equal_up_to, edifice_equal,
    finiteness_verdict, renumber_after_feedback, trace_addresses, truncate,
)
from symcomb.encodings import (
    RecursionSpec, corpus, cut_free_roundtrip, duplicate, full_code, full_roundtrip,
    lafont_roundtrip, prepend_template, verify_recursion,
)
from symcomb.equivalence import (
    Outcome, ax_eq_up_to, beta_eps_eq, collapse_replay, discriminating_test,
    fin_ax_eq, genericity_check, replay_finitary, separating_address,
    visible,
)
from symcomb.goi import (
    Yes, addresses_via_goi, atom_value, decode, encode, execution_formula, fire_str,
    goi_matrix, interpret, is_normal_clash_free, mono_rewrite, mono_value, random_monomial,
    redexes_str, rewrite_str, value_str,
)
from symcomb.netcore import (
    Address, Kind, Leaf, Net, Node, alpha_equal, build_tree, canonical_key,
    decompose, eps_net, feedback, feedback_context, free, is_cut_free, juxtapose,
    observable_axioms, plug, random_cut_free, random_net, random_tree,
    wire_net,
)
from symcomb.rewrite import (
    Blind, EpsEngine, LEFTMOST, blindness_oracle, eps_step, eta0_expand, eta0_sites,
    eta1_sites, eta1_swap, full_round, one_step_reducts, random_strategy, reduce,
)

RESULTS: dict[int, tuple[bool, str]] = {}


# ---------------------------------------------------------------------------
# generators

def total_net(rng: random.Random, max_cells: int, interface: int | None = None,
              rounds: int = 24, cap: int = 300) -> tuple[Net, Net] | None:
    """A random net together with its cut-free form, or None if not found quickly."""
    net = random_net(rng, rng.randint(1, max_cells), interface)
    cur = net.copy()
    for _ in range(rounds):
        if is_cut_free(cur):
            return net, cur
        if not cur.active_pairs() or len(cur.kinds) > cap:
            return None
        full_round(cur)
    return (net, cur) if is_cut_free(cur) else None


def total_nets(rng: random.Random, count: int, max_cells: int, **kw) -> list[tuple[Net, Net]]:
    out = []
    while len(out) < count:
        got = total_net(rng, max_cells, **kw)
        if got is not None:
            out.append(got)
    return out


def finite_net(rng: random.Random, max_cells: int, budget: int = 12,
               interface: int | None = None) -> tuple[Net, frozenset] | None:
    net = random_net(rng, rng.randint(1, max_cells), interface)
    cur = net.copy()
    for _ in range(budget):
        if not cur.active_pairs() or len(cur.kinds) > 200:
            break
        full_round(cur)
    if len(cur.kinds) > 200:
        return None
    if finiteness_verdict(net, budget) is not Finiteness.FINITE:
        return None
    addrs, complete = all_obs_paths(net, budget)
    if not complete:
        return None
    return net, addrs


def random_feedback(rng: random.Random, n: int) -> dict[int, int]:
    ports = list(range(1, n + 1))
    rng.shuffle(ports)
    k = rng.randint(0, n // 2)
    return feedback(*[(ports[2 * i], ports[2 * i + 1]) for i in range(k)])


def single_kind_tree(rng: random.Random, kind: Kind, depth: int) -> Node:
    while True:
        t = random_tree(rng, depth, kinds=(kind,), eps_rate=0.0)
        if isinstance(t, Node):
            return t


# ---------------------------------------------------------------------------
# criteria

def check_01_confluence(count: int = 500) -> tuple[bool, str]:
    rng = random.Random(101)
    fails = pairs = 0
    for _ in range(count):
        net = random_net(rng, rng.randint(1, 12))
        reducts = one_step_reducts(net)
        keys = [canonical_key(r) for r in reducts]
        for (a, ka), (b, kb) in itertools.combinations(zip(reducts, keys), 2):
            if ka == kb:
                continue
            pairs += 1
            ra = {ka} | {canonical_key(x) for x in one_step_reducts(a)}
            rb = {kb} | {canonical_key(x) for x in one_step_reducts(b)}
            if not ra & rb:
                fails += 1
    return fails == 0, f"{pairs} critical pairs over {count} nets, {fails} failures"


def check_02_determinism(count: int = 200) -> tuple[bool, str]:
    rng = random.Random(202)
    fails = 0
    for net, nf in total_nets(rng, count, 10):
        strategies = [LEFTMOST] + [random_strategy(s) for s in range(5)]
        for st in strategies:
            out = reduce(net, st, budget=200)
            if out.status != "CutFree" or not alpha_equal(out.net, nf):
                fails += 1
                break
    return fails == 0, f"{count} total nets, 7 strategies each, {fails} failures"


def _tree_pair(rng: random.Random, left: Node, right: Node) -> tuple[Net, list, list]:
    net = Net()
    r1, l1 = build_tree(net, left)
    r2, l2 = build_tree(net, right)
    net.connect(r1, r2)
    ports = l1 + l2
    net.interface = len(ports)
    for k, p in enumerate(ports, start=1):
        net.connect(p, free(k))
    return net, l1, l2


def check_03_lemmas(count: int = 100) -> tuple[bool, str]:
    rng = random.Random(303)
    fails = {"annihilation": 0, "commutation": 0, "duplication": 0, "erasing": 0}
    for _ in range(count):
        # annihilation: a tree against a copy of itself gives the identity wiring
        kinds = rng.choice([(Kind.DELTA,), (Kind.ZETA,), (Kind.DELTA, Kind.ZETA)])
        t = random_tree(rng, 4, kinds=kinds, eps_rate=0.2)
        if not isinstance(t, Node):
            t = Node(kinds[0], t, Leaf())
        net, l1, l2 = _tree_pair(rng, t, t)
        m = len(l1)
        want = Net(interface=2 * m)
        for i in range(1, m + 1):
            want.connect(free(i), free(m + i))
        if not alpha_equal(reduce(net).net, want):
            fails["annihilation"] += 1

        # commutation: every leaf of one tree receives a copy of the other
        a = single_kind_tree(rng, Kind.DELTA, 4)
        b = single_kind_tree(rng, Kind.ZETA, 4)
        net, la, lb = _tree_pair(rng, a, b)
        m, n = len(la), len(lb)
        want = Net(interface=m + n)
        copies_b = [build_tree(want, b, free(i))[1] for i in range(1, m + 1)]
        copies_a = [build_tree(want, a, free(m + j))[1] for j in range(1, n + 1)]
        for i in range(m):
            for j in range(n):
                want.connect(copies_b[i][j], copies_a[j][i])
        if not alpha_equal(reduce(net).net, want):
            fails["commutation"] += 1

        # duplication: delta cells on every port of a delta-free cut-free net
        k = rng.randint(1, 3)
        nu = random_cut_free(rng, k, depth=4, kinds=(Kind.ZETA,))
        dup = Net(interface=2 * k)
        for i in range(1, k + 1):
            d = dup.add_cell(Kind.DELTA)
            dup.connect((d, 0), free(i))
            dup.connect((d, 1), free(k + i))
            dup.connect((d, 2), free(2 * k + i))
        dup.interface = 3 * k
        if not alpha_equal(reduce(plug(dup, nu)).net, juxtapose(nu, nu)):
            fails["duplication"] += 1

        # erasing: eps cells on every port of a cut-free net leave nothing
        nu = random_cut_free(rng, rng.randint(1, 4), depth=4)
        out = reduce(plug(eps_net(nu.interface), nu))
        if out.status != "CutFree" or out.net.kinds or out.net.loops:
            fails["erasing"] += 1
    ok = not any(fails.values())
    return ok, f"{count} instances per lemma, failures {fails}"


_SWAPS = [str.maketrans("cdCD", "dcDC"), str.maketrans("fgFG", "gfGF"),
          str.maketrans("cdfgCDFG", "fgcdFGCD")]


def _symmetries_commute(max_len: int = 5) -> bool:
    """Renaming c/d, f/g or the two letter classes commutes with rewriting."""
    for n in range(max_len + 1):
        for w in map("".join, itertools.product("cdfgCDFG", repeat=n)):
            nf, zero = rewrite_str(w), interpret(decode(w)).is_zero()
            for t in _SWAPS:
                v = w.translate(t)
                if rewrite_str(v) != nf.translate(t) or interpret(decode(v)).is_zero() != zero:
                    return False
    return True


def _orbit_representatives(max_len: int):
    """Words whose first letter is c or c*, and whose first letter of f/g is f or f*.

    Every word of length <= max_len is the image of exactly one of these under
    the renamings in _SWAPS.  Yields (word, parent word, last atom).
    """
    def grow(w: str, seen_zeta: bool):
        if len(w) == max_len:
            return
        letters = "cdCD" + ("fgFG" if seen_zeta else "fF")
        for ch in letters:
            v = w + ch
            yield v, w, ch
            yield from grow(v, seen_zeta or ch in "fgFG")

    yield "", None, None
    for ch in "cC":
        yield ch, "", ch
        yield from grow(ch, False)


def check_04_monomials(max_len: int = 8, random_count: int = 1000) -> tuple[bool, str]:
    rng = random.Random(404)
    fails = checked = 0
    if not _symmetries_commute():
        return False, "renamings do not commute with rewriting"

    def check(w: str, left_nf: str, value) -> int:
        bad = 0
        if rewrite_str(w, "rightmost") != left_nf or rewrite_str(w, "random", rng) != left_nf:
            bad += 1
        v = value_str(w)
        if any(value_str(fire_str(w, k)) >= v for k in redexes_str(w)):
            bad += 1
        if is_normal_clash_free(left_nf) != (not value.is_zero()):
            bad += 1
        return bad

    # leftmost rewriting of w.a only touches a once w is normal, and the
    # interpretation is a product, so both are computed along the trie
    left: dict[str, str] = {}
    val: dict[str, object] = {}
    for w, parent, ch in _orbit_representatives(max_len):
        if parent is None:
            nf, value = "", interpret(())
        else:
            nf = rewrite_str(left[parent] + ch)
            value = val[parent] * atom_value(decode(ch)[0])
        if len(w) < max_len:
            left[w], val[w] = nf, value
        checked += 1
        fails += bool(check(w, nf, value))
    for _ in range(random_count):
        m = random_monomial(rng, 12)
        w = encode(m)
        checked += 1
        fails += bool(check(w, encode(mono_rewrite(m)), interpret(m)))
        if mono_rewrite(m, "rightmost") != mono_rewrite(m) or mono_value(m) != value_str(w):
            fails += 1
    return fails == 0, f"{checked} monomials (orbit representatives up to length {max_len} " \
                       f"plus {random_count} random), {fails} failures"


def check_05_goi(count: int = 100) -> tuple[bool, str]:
    rng = random.Random(505)
    fails = 0
    for net, nf in total_nets(rng, count, 8):
        nu, sigma = decompose(net)
        verdict, matrix = execution_formula(nu, sigma)
        if not isinstance(verdict, Yes) or matrix != goi_matrix(nf):
            fails += 1
    return fails == 0, f"{count} total nets, {fails} failures"


def check_06_duality(count: int = 100) -> tuple[bool, str]:
    rng = random.Random(606)
    fails = found = 0
    while found < count:
        got = finite_net(rng, 8)
        if got is None:
            continue
        net, addrs = got
        found += 1
        if canonicalize(addrs) != canonicalize(addresses_via_goi(net)):
            fails += 1
    return fails == 0, f"{count} finite nets, {fails} failures"


def check_07_trace(count: int = 100) -> tuple[bool, str]:
    rng = random.Random(707)
    fails = {"trace": 0, "assoc": 0, "stability": 0}
    done = 0
    while done < count:
        n = rng.randint(2, 6)
        nu = random_cut_free(rng, n, depth=3)
        sigma = random_feedback(rng, n)
        traced, complete = trace_addresses(observable_axioms(nu), sigma)
        mu = plug(feedback_context(sigma, n), nu)
        direct, exhausted = all_obs_paths(mu, 16)
        if not (complete and exhausted):
            continue
        done += 1
        if renumber_after_feedback(traced, sigma, n) != canonicalize(direct):
            fails["trace"] += 1
        # split the feedback in two and trace in sequence
        pairs = sorted((i, j) for i, j in sigma.items() if i < j)
        cut = rng.randint(0, len(pairs))
        s1, s2 = feedback(*pairs[:cut]), feedback(*pairs[cut:])
        first, c1 = trace_addresses(observable_axioms(nu), s1)
        second, c2 = trace_addresses(first, s2)
        if c1 and c2 and second != traced:
            fails["assoc"] += 1
        # one beta step leaves the truncated trace unchanged
        if mu.active_pairs():
            mu2 = one_step_reducts(mu)[0]
            nu2, sigma2 = decompose(mu2)
            t2, _ = trace_addresses(observable_axioms(nu2), sigma2)
            t2 = renumber_after_feedback(t2, sigma2, nu2.interface)
            t1 = renumber_after_feedback(traced, sigma, n)
            if truncate(t1, 8) != truncate(t2, 8):
                fails["stability"] += 1
    ok = not any(fails.values())
    return ok, f"{count} cut-free nets with feedbacks, failures {fails}"


def _random_move(rng: random.Random, net: Net, engine: EpsEngine) -> Net | None:
    moves = []
    if net.active_pairs():
        moves.append("beta")
    if eta0_sites(net) or net.wires():
        moves.append("eta0")
    if eta1_sites(net):
        moves.append("eta1")
    moves.append("eps")
    move = rng.choice(moves)
    if move == "beta":
        return rng.choice(one_step_reducts(net))
    if move == "eps":
        return eps_step(net, engine)
    if move == "eta1":
        return eta1_swap(net, rng.choice(eta1_sites(net)))
    # eta0 expansion on a proper axiom
    from symcomb.netcore import WireClass, classify_wires
    rep = classify_wires(net)
    axioms = [w for w, c in rep.classes.items() if c is WireClass.PROPER_AXIOM]
    if not axioms:
        return None
    return eta0_expand(net, rng.choice(axioms), rng.choice([Kind.DELTA, Kind.ZETA]))


def check_08_invariance(count: int = 200) -> tuple[bool, str]:
    rng = random.Random(808)
    engine = EpsEngine()
    fails = done = 0
    while done < count:
        got = finite_net(rng, 8)
        if got is None:
            continue
        net, addrs = got
        moved = _random_move(rng, net, engine)
        if moved is None:
            continue
        after, complete = all_obs_paths(moved, 16)
        if not complete:
            continue
        done += 1
        if not edifice_equal(addrs, after):
            fails += 1
    return fails == 0, f"{count} moves, {fails} failures"


def check_09_iota() -> tuple[bool, str]:
    c = corpus()
    iota, wire = c["iota"], c["wire"]
    addrs, _ = all_obs_paths(iota, 10)
    first = {Address.make(("q" * n + "p", ""), 1, ("q" * n + "p", ""), 2) for n in range(5)}
    shortest = set(sorted(addrs, key=lambda x: len(x.a.w1))[:5])
    parts = {
        "first five": shortest == first,
        "closure up to 6": all(closure_equal_up_to(addrs, [Address.make(("", ""), 1, ("", ""), 2)], k)
                               for k in range(7)),
        "edifices differ": not edifice_equal(addrs, all_obs_paths(wire, 10)[0]),
        "fin-ax distinguished": fin_ax_eq(wire, iota, 10).verdict == "Distinguished",
        "ax equal up to 6": ax_eq_up_to(wire, iota, 6, 10).verdict == "Equal-up-to-6",
    }
    return all(parts.values()), ", ".join(f"{k}={v}" for k, v in parts.items())


def _finite_pairs(rng: random.Random, count: int) -> list[tuple[Net, frozenset, Net, frozenset]]:
    pool = []
    for name, net in corpus().items():
        if net.interface == 0:
            continue
        got = all_obs_paths(net, 12)
        if got[1] and finiteness_verdict(net, 12) is Finiteness.FINITE:
            pool.append((net, got[0]))
    while len(pool) < 60:
        n = rng.randint(1, 3)
        nu = random_cut_free(rng, n, depth=3)
        pool.append((nu, frozenset(observable_axioms(nu))))
    pairs = []
    while len(pairs) < count:
        (a, ea), (b, eb) = rng.sample(pool, 2)
        if a.interface != b.interface or canonicalize(ea) == canonicalize(eb):
            continue
        pairs.append((a, ea, b, eb))
    return pairs


def check_10_full_abstraction(count: int = 50) -> tuple[bool, str]:
    rng = random.Random(1010)
    fails = 0
    for a, ea, b, eb in _finite_pairs(rng, count):
        x = separating_address(ea, eb)
        inside, outside = a, b
        if x is None:
            x = separating_address(eb, ea)
            inside, outside = b, a
        if x is None:
            fails += 1
            continue
        test = discriminating_test(x, a.interface)
        r1, _ = replay_finitary(test, inside)
        r2, _ = replay_finitary(test, outside)
        if r1 is not Outcome.QUASI_WIRE or r2 not in (Outcome.NORMAL, Outcome.INFINITE,
                                                       Outcome.BLIND):
            fails += 1
    return fails == 0, f"{count} pairs, {fails} replay failures"


def check_11_visible() -> tuple[bool, str]:
    c = corpus()
    mu, nu = c["fig12_mu"], c["fig12_nu"]
    parts = {
        "mu visible": visible(mu, 1).verdict == "Visible",
        "nu provably not visible": visible(nu, 1).verdict == "ProvablyNotVisible",
        "fin-ax equal": fin_ax_eq(mu, nu).verdict == "Equal",
    }
    return all(parts.values()), ", ".join(f"{k}={v}" for k, v in parts.items())


def check_12_codes(count: int = 50) -> tuple[bool, str]:
    rng = random.Random(1212)
    nets = [n for n in corpus().values() if len(n.kinds) <= 8]
    while len(nets) < count:
        nets.append(random_net(rng, rng.randint(0, 8)))
    fails = {"lafont": 0, "cut-free": 0, "full": 0, "shape": 0, "duplication": 0}
    for net in nets[:count]:
        one = net if net.interface == 1 else None
        if one is None:
            one = random_net(rng, rng.randint(0, 8), interface=1)
            while one.interface != 1:
                one = random_net(rng, rng.randint(0, 8), interface=1)
        if not lafont_roundtrip(one)[0]:
            fails["lafont"] += 1
        if not cut_free_roundtrip(net)[0]:
            fails["cut-free"] += 1
        if not full_roundtrip(net)[0]:
            fails["full"] += 1
        code = full_code(net)
        if not is_cut_free(code) or code.count(Kind.DELTA):
            fails["shape"] += 1
        if not alpha_equal(duplicate(code), juxtapose(code, code)):
            fails["duplication"] += 1
    ok = not any(fails.values())
    return ok, f"{count} nets, failures {fails}"


def check_13_recursion() -> tuple[bool, str]:
    c = corpus()
    specs = [prepend_template()]
    t = Net(interface=3)
    a = t.add_cell(Kind.ZETA)
    t.connect((a, 0), free(1))
    t.connect((a, 1), free(2))
    t.connect((a, 2), free(3))
    specs.append(RecursionSpec(1, t, 2))
    specs.append(RecursionSpec(2, wire_net(), 0))
    unfold_ok = all(all(verify_recursion(s, 2)) for s in specs)
    pa, pb = all_obs_paths(c["pingpong_a"], 10)[0], all_obs_paths(c["pingpong_b"], 10)[0]
    parts = {
        "two unfoldings": unfold_ok,
        "same streams": pa == pb and len(pa) >= 5,
        "beta-eps inconclusive": beta_eps_eq(c["pingpong_a"], c["pingpong_b"], 10).verdict
        == "Inconclusive",
    }
    return all(parts.values()), ", ".join(f"{k}={v}" for k, v in parts.items())


def check_14_collapse_genericity(collapse: int = 20, triples: int = 50) -> tuple[bool, str]:
    rng = random.Random(1414)
    cfail = 0
    for _ in range(collapse):
        if not collapse_replay(random_net(rng, rng.randint(1, 10))).ok:
            cfail += 1
    gfail = done = 0
    blind_pool = [n for n in corpus().values() if n.interface in (1, 2)
                  and isinstance(blindness_oracle(n), Blind)]
    while done < triples:
        mu = rng.choice(blind_pool) if rng.random() < 0.5 else random_net(rng, rng.randint(1, 6))
        if mu.interface == 0 or not isinstance(blindness_oracle(mu, 16), Blind):
            continue
        n = mu.interface
        ctx = random_net(rng, rng.randint(1, 6), interface=n + rng.randint(0, 2))
        if ctx.interface < n:
            continue
        xi = random_net(rng, rng.randint(0, 6), interface=n)
        if xi.interface != n:
            continue
        done += 1
        if not genericity_check(mu, ctx, xi).holds:
            gfail += 1
    ok = cfail == 0 and gfail == 0
    return ok, f"collapse {collapse} nets ({cfail} failures), genericity {triples} triples ({gfail} failures)"


CHECKS = {
    1: ("confluence", check_01_confluence),
    2: ("normal-form determinism", check_02_determinism),
    3: ("tree lemmas", check_03_lemmas),
    4: ("monomial engine", check_04_monomials),
    5: ("GoI consistency", check_05_goi),
    6: ("address duality", check_06_duality),
    7: ("trace correctness", check_07_trace),
    8: ("semantic invariance", check_08_invariance),
    9: ("iota fixture", check_09_iota),
    10: ("full-abstraction witnesses", check_10_full_abstraction),
    11: ("visible vs finitary", check_11_visible),
    12: ("codes", check_12_codes),
    13: ("recursion and ping-pong", check_13_recursion),
    14: ("collapse and genericity", check_14_collapse_genericity),
}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number: int) -> None:
    name, check = CHECKS[number]
    ok, detail = check()
    RESULTS[number] = (ok, detail)
    print(f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def main(argv: list[str]) -> int:
    wanted = [int(a) for a in argv] or sorted(CHECKS)
    bad = 0
    for number in wanted:
        name, check = CHECKS[number]
        ok, detail = check()
        bad += not ok
        print(f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
