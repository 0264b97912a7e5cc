"""Multiplexing trees, Lafont and cut-free codes, recursion solver, named corpus."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .netcore import (
    FREE, EpsLeaf, InterfaceMismatch, Kind, Leaf, Net, NetError, Node, Port, Tree,
    alpha_equal, build_tree, decompose, free, is_cut_free, juxtapose, parse_net,
)
from .rewrite import FULL_PARALLEL, allow, guided_reduce, reduce


class MalformedTemplate(NetError):
    pass


# ---------------------------------------------------------------------------
# trees

def mux_tree(kind: Kind, k: int) -> Tree:
    """Left comb with ``k`` leaves; one eps cell for k = 0, a bare wire for k = 1."""
    if k < 0:
        raise ValueError("a tree has a non-negative number of leaves")
    if k == 0:
        return EpsLeaf()
    tree: Tree = Leaf()
    for _ in range(k - 1):
        tree = Node(kind, tree, Leaf())
    return tree


def tree_net(tree: Tree) -> Net:
    """The tree as a net: root at free port 1, leaves at ports 2.. in order."""
    net = Net()
    if isinstance(tree, Leaf):
        net.interface = 2
        net.connect(free(1), free(2))
        return net
    root, leaves = build_tree(net, tree)
    net.interface = 1 + len(leaves)
    net.connect(free(1), root)
    for l, port in enumerate(leaves, start=2):
        net.connect(port, free(l))
    return net


# ---------------------------------------------------------------------------
# tagged assembly

@dataclass
class Tagged:
    """A net with a tag per cell, used to steer replays of decoding."""
    net: Net
    tags: dict[int, str] = field(default_factory=dict)

    @staticmethod
    def uniform(net: Net, tag: str) -> "Tagged":
        return Tagged(net, {c: tag for c in net.kinds})


Endpoint = tuple  # ("out", k) or (part index, k)


def assemble_parts(parts: list[Tagged], links: list[tuple[Endpoint, Endpoint]],
                   interface: int, name: str = "net") -> Tagged:
    """Glue nets along their free ports.

    Each link joins a free port (part index, k) to another part's free port or
    to an outer port ("out", k).  Every free port must be linked exactly once.
    Chains through wires inside parts are followed; closed chains become loops.
    """
    out = Net(interface=interface, name=name)
    tags: dict[int, str] = {}
    ids: list[dict[int, int]] = []
    for part in parts:
        m = {}
        for c in sorted(part.net.kinds):
            m[c] = out.add_cell(part.net.kinds[c])
            tags[m[c]] = part.tags.get(c, "")
        ids.append(m)
        out.loops += part.net.loops
    ext: dict[Endpoint, Endpoint] = {}
    for x, y in links:
        for e in (x, y):
            if e in ext:
                raise ValueError(f"endpoint {e} linked twice")
        ext[x] = y
        ext[y] = x
    terminals = [(idx, k) for idx, p in enumerate(parts) for k in range(1, p.net.interface + 1)]
    for e in terminals + [("out", k) for k in range(1, interface + 1)]:
        if e not in ext:
            raise ValueError(f"endpoint {e} is not linked")

    def across(idx: int, q: Port):
        """Node reached inside part ``idx`` at its port ``q``."""
        return ("t", idx, q[1]) if q[0] == FREE else ("cell", (ids[idx][q[0]], q[1]))

    def outer(e: Endpoint):
        return ("out", e[1]) if e[0] == "out" else ("t", e[0], e[1])

    visited: set = set()

    def walk(node, side: str):
        """Follow terminals from ``node`` (entered on ``side``) to a real endpoint."""
        while node[0] == "t":
            visited.add(node)
            _, idx, k = node
            if side == "inner":
                node, side = outer(ext[(idx, k)]), "outer"
            else:
                node, side = across(idx, parts[idx].net.link[free(k)]), "inner"
        return node

    def real(node) -> Port:
        return free(node[1]) if node[0] == "out" else node[1]

    done: set = set()
    starts = [("cell", (ids[idx][c], s), idx, (c, s))
              for idx, p in enumerate(parts) for c in sorted(p.net.kinds)
              for s in range(p.net.kinds[c].arity + 1)]
    for _, port, idx, orig in starts:
        node = ("cell", port)
        if node in done:
            continue
        end = walk(across(idx, parts[idx].net.link[orig]), "inner")
        done.add(node)
        done.add(end)
        out.connect(port, real(end))
    for k in range(1, interface + 1):
        node = ("out", k)
        if node in done:
            continue
        end = walk(outer(ext[node]), "outer")
        done.add(node)
        done.add(end)
        out.connect(free(k), real(end))
    for idx, k in terminals:
        if ("t", idx, k) in visited:
            continue
        node, side = ("t", idx, k), "inner"
        while node[0] == "t" and node not in visited:
            visited.add(node)
            _, i, kk = node
            if side == "inner":
                node, side = outer(ext[(i, kk)]), "outer"
            else:
                node, side = across(i, parts[i].net.link[free(kk)]), "inner"
        out.loops += 1
    return Tagged(out, tags)


def apply_decoder(decoder: Tagged, inputs: int, code: Tagged) -> Tagged:
    """Fuse the first ``inputs`` ports of ``decoder`` with those of ``code``.

    The result has the decoder's remaining ports first, then the code's.
    """
    a, c = inputs, code.net.interface
    b = decoder.net.interface - a
    if c < a:
        raise InterfaceMismatch(f"decoder expects {a} inputs, code has {c} ports")
    links = [((0, i), (1, i)) for i in range(1, a + 1)]
    links += [(("out", r), (0, a + r)) for r in range(1, b + 1)]
    links += [(("out", b + r), (1, a + r)) for r in range(1, c - a + 1)]
    return assemble_parts([decoder, code], links, b + c - a, code.net.name)


# ---------------------------------------------------------------------------
# Lafont code

def _lafont(tagged: Tagged, tag: str = "code") -> Tagged:
    net = tagged.net
    if net.interface != 1:
        raise InterfaceMismatch(f"the Lafont code takes a one-port net, got {net.interface}")
    ds = sorted(c for c, k in net.kinds.items() if k is Kind.DELTA)
    n = len(ds)
    out = Net(interface=1, loops=net.loops, name=net.name)
    tags: dict[int, str] = {}
    ids = {}
    for c in sorted(net.kinds):
        if net.kinds[c] is not Kind.DELTA:
            ids[c] = out.add_cell(net.kinds[c])
            tags[ids[c]] = tagged.tags.get(c, "")
    first = out.next_id
    c1, c2, c3 = (out.add_cell(Kind.ZETA) for _ in range(3))
    out.connect(free(1), (c1, 0))
    out.connect((c1, 2), (c2, 0))
    out.connect((c2, 2), (c3, 0))
    leaf: dict[Port, Port] = {}
    for slot, root in ((0, (c2, 1)), (1, (c3, 1)), (2, (c3, 2))):
        _, leaves = build_tree(out, mux_tree(Kind.ZETA, n), root)
        for d, port in zip(ds, leaves):
            leaf[(d, slot)] = port
    for c in range(first, out.next_id):
        tags[c] = tag

    def endpoint(p: Port) -> Port:
        if p == free(1):
            return (c1, 1)
        if p in leaf:
            return leaf[p]
        return (ids[p[0]], p[1])

    for a, b in net.wires():
        out.connect(endpoint(a), endpoint(b))
    return Tagged(out, tags)


def lafont_code(net: Net) -> Net:
    """A delta-free cut-free one-port net from which ``net`` can be decoded."""
    return _lafont(Tagged.uniform(net, "net")).net


def lafont_decoder() -> Net:
    """Port 1 takes a Lafont code, port 2 gives the decoded net."""
    net = Net(interface=2, name="decoder")
    u1, u2, u3 = (net.add_cell(Kind.ZETA) for _ in range(3))
    d = net.add_cell(Kind.DELTA)
    net.connect(free(1), (u1, 0))
    net.connect((u1, 1), free(2))
    net.connect((u1, 2), (u2, 0))
    net.connect((u2, 1), (d, 0))
    net.connect((u2, 2), (u3, 0))
    net.connect((u3, 1), (d, 1))
    net.connect((u3, 2), (d, 2))
    return net


# ---------------------------------------------------------------------------
# cut-free code

def _cut_free_code(tagged: Tagged, tag: str = "cf") -> Tagged:
    net = tagged.net
    nu, sigma = decompose(net)
    n = net.interface
    m = len(sigma) // 2
    out = Net(interface=n + 1, name=net.name)
    tags: dict[int, str] = {}
    ids = {}
    for c in sorted(nu.kinds):
        ids[c] = out.add_cell(nu.kinds[c])
        tags[ids[c]] = tagged.tags.get(c, "")
    first = out.next_id
    p = out.add_cell(Kind.DELTA)
    out.connect(free(1), (p, 0))
    ends: dict[int, Port] = {}
    for slot, offset in ((1, 1), (2, 2)):
        _, leaves = build_tree(out, mux_tree(Kind.DELTA, m), (p, slot))
        for h, port in enumerate(leaves):
            ends[n + 2 * h + offset] = port
    for c in range(first, out.next_id):
        tags[c] = tag

    def endpoint(q: Port) -> Port:
        if q[0] == FREE:
            return free(q[1] + 1) if q[1] <= n else ends[q[1]]
        return (ids[q[0]], q[1])

    for a, b in nu.wires():
        out.connect(endpoint(a), endpoint(b))
    return Tagged(out, tags)


def cut_free_code(net: Net) -> Net:
    """Port 1 carries the feedback as two delta trees; ports 2.. are the net's."""
    return _cut_free_code(Tagged.uniform(net, "net")).net


def recover() -> Net:
    """A delta cell whose auxiliary ports are wired together."""
    net = Net(interface=1, name="recover")
    r = net.add_cell(Kind.DELTA)
    net.connect(free(1), (r, 0))
    net.connect((r, 1), (r, 2))
    return net


# ---------------------------------------------------------------------------
# full code

def _pack(tagged: Tagged, tag: str = "pack") -> Tagged:
    n = tagged.net.interface
    mux = Tagged.uniform(tree_net(mux_tree(Kind.ZETA, n)), tag)
    links = [(("out", 1), (0, 1))] + [((0, i + 1), (1, i)) for i in range(1, n + 1)]
    return assemble_parts([mux, tagged], links, 1, tagged.net.name)


def _tail_decoder(n: int) -> Net:
    """Unpack n + 1 ports and recover the first: port 1 in, ports 2..n+1 out."""
    net = Net(interface=n + 1, name="tail")
    r = net.add_cell(Kind.DELTA)
    net.connect((r, 1), (r, 2))
    tree = mux_tree(Kind.ZETA, n + 1)
    if isinstance(tree, Leaf):
        net.connect(free(1), (r, 0))
        return net
    root, leaves = build_tree(net, tree)
    net.connect(free(1), root)
    net.connect(leaves[0], (r, 0))
    for i, port in enumerate(leaves[1:], start=2):
        net.connect(port, free(i))
    return net


def full_code(net: Net) -> Net:
    """Cut-free and delta-free code of any net."""
    return _full_code(Tagged.uniform(net, "net")).net


def _full_code(tagged: Tagged) -> Tagged:
    return _lafont(_pack(_cut_free_code(tagged)))


def full_decoder(n: int) -> Net:
    """Port 1 takes the code of an n-port net; ports 2..n+1 give the net."""
    return _full_decoder(n).net


def _full_decoder(n: int) -> Tagged:
    lafont = Tagged.uniform(lafont_decoder(), "dec")
    tail = Tagged.uniform(_tail_decoder(n), "tail")
    links = [(("out", 1), (0, 1)), ((0, 2), (1, 1))]
    links += [(("out", i), (1, i)) for i in range(2, n + 2)]
    out = assemble_parts([lafont, tail], links, n + 1, "decoder")
    return out


# ---------------------------------------------------------------------------
# decoding replays

_LAFONT_STEPS = allow(("dec", "code"), ("code", "code"))
_RECOVER_STEPS = allow(("tail", "pack"), ("tail", "cf"), ("cf", "cf"))
_BUDGET = 400


def lafont_roundtrip(net: Net, budget: int = _BUDGET) -> tuple[bool, Net]:
    """Code then decode; True when the result is alpha-equal to ``net``."""
    code = _lafont(Tagged.uniform(net, "net"))
    t = apply_decoder(Tagged.uniform(lafont_decoder(), "dec"), 1, code)
    out = guided_reduce(t.net, t.tags, _LAFONT_STEPS, budget)[0]
    return alpha_equal(out, net), out


def cut_free_roundtrip(net: Net, budget: int = _BUDGET) -> tuple[bool, Net]:
    code = _cut_free_code(Tagged.uniform(net, "net"))
    t = apply_decoder(Tagged.uniform(recover(), "tail"), 1, code)
    out = guided_reduce(t.net, t.tags, _RECOVER_STEPS, budget)[0]
    return alpha_equal(out, net), out


def full_roundtrip(net: Net, budget: int = _BUDGET) -> tuple[bool, Net]:
    """Decode the full code in two checked stages: Lafont, then unpack and recover."""
    n = net.interface
    inner = _pack(_cut_free_code(Tagged.uniform(net, "net")))
    code = _lafont(inner)
    t = apply_decoder(_full_decoder(n), 1, code)
    stage1 = guided_reduce(t.net, t.tags, _LAFONT_STEPS, budget)[0]
    expected = apply_decoder(Tagged.uniform(_tail_decoder(n), "tail"), 1, inner)
    if not alpha_equal(stage1, expected.net):
        return False, stage1
    out = guided_reduce(expected.net, expected.tags, _RECOVER_STEPS, budget)[0]
    return alpha_equal(out, net), out


def dup_context(k: int) -> Net:
    """A left comb of k - 1 delta cells: port 1 to plug, ports 2..k+1 for copies."""
    return tree_net(mux_tree(Kind.DELTA, k))


def duplicate(code: Net, k: int = 2, budget: int = 200) -> Net:
    """Plug a delta tree on a one-port cut-free net and reduce."""
    if code.interface != 1:
        raise InterfaceMismatch("duplication takes a one-port net")
    ctx = dup_context(k)
    links = [((0, 1), (1, 1))] + [(("out", i), (0, i + 1)) for i in range(1, k + 1)]
    t = assemble_parts([Tagged.uniform(ctx, "dup"), Tagged.uniform(code, "code")],
                       links, k, code.name)
    return reduce(t.net, FULL_PARALLEL, budget).net


# ---------------------------------------------------------------------------
# recursion

@dataclass
class RecursionSpec:
    """Right-hand side of mu -> template[mu, ..., mu] with k copies of an n-port mu.

    The template has n + k*n ports: 1..n are the outer ports, and copy h
    (1-based) occupies ports n + (h-1)*n + 1 .. n + h*n.
    """
    n: int
    template: Net
    k: int

    def validate(self) -> None:
        if self.n < 0 or self.k < 0:
            raise MalformedTemplate("arity and copy count are non-negative")
        if self.template.interface != self.n + self.k * self.n:
            raise MalformedTemplate(
                f"template needs {self.n + self.k * self.n} ports, has {self.template.interface}")
        if not is_cut_free(self.template):
            raise MalformedTemplate("template must be cut-free")


def _rhs(spec: RecursionSpec, copies: list[Tagged]) -> Tagged:
    n, k = spec.n, spec.k
    parts = [Tagged.uniform(spec.template, "tmpl")] + copies
    links = [(("out", i), (0, i)) for i in range(1, n + 1)]
    for h in range(1, k + 1):
        for j in range(1, n + 1):
            links.append(((0, n + (h - 1) * n + j), (h, j)))
    return assemble_parts(parts, links, n, spec.template.name)


def _generator(spec: RecursionSpec) -> Tagged:
    """The template with a duplicator on port n + 1 feeding k full decoders."""
    n, k = spec.n, spec.k
    parts = [Tagged.uniform(spec.template, "tmpl"),
             Tagged.uniform(dup_context(2 * k), "dup")]
    dec = _full_decoder(n + 1)
    dec = Tagged(dec.net, {c: "dec" for c in dec.net.kinds})
    parts += [dec] * k
    links = [(("out", i), (0, i)) for i in range(1, n + 1)]
    links.append((("out", n + 1), (1, 1)))
    for h in range(1, k + 1):
        d = 1 + h
        links.append(((1, 1 + 2 * h - 1), (d, 1)))
        links.append(((1, 1 + 2 * h), (d, n + 2)))
        for j in range(1, n + 1):
            links.append(((0, n + (h - 1) * n + j), (d, 1 + j)))
    return assemble_parts(parts, links, n + 1, spec.template.name)


def _solution(spec: RecursionSpec) -> Tagged:
    spec.validate()
    g = _generator(spec)
    code = _full_code(Tagged.uniform(g.net, "arg"))
    code = Tagged(code.net, {c: "arg" for c in code.net.kinds})
    n = spec.n
    links = [(("out", i), (0, i)) for i in range(1, n + 1)]
    links.append(((0, n + 1), (1, 1)))
    return assemble_parts([g, code], links, n, spec.template.name)


def solve_recursion(spec: RecursionSpec) -> Net:
    """A net mu with mu ->beta template[mu, ..., mu]."""
    return _solution(spec).net


_DUP_STEPS = allow(("dup", "arg"), ("dup", "dup"))
_DECODE_STEPS = allow(("dec", "x"), ("x", "x"), ("dec", "dec"))


def _mark_inputs(net: Net, tags: dict[int, str]) -> dict[int, str]:
    """Split code copies: those sitting on a decoder input become 'x', others 'y'."""
    tags = dict(tags)
    arg = {c for c, t in tags.items() if t == "arg"}
    seen: set[int] = set()
    for start in sorted(arg):
        if start in seen:
            continue
        comp, stack = set(), [start]
        while stack:
            c = stack.pop()
            if c in comp:
                continue
            comp.add(c)
            for p in net.ports_of(c):
                q = net.link[p]
                if q[0] != FREE and q[0] in arg and q[0] not in comp:
                    stack.append(q[0])
        seen |= comp
        fed = any(net.link[(c, 0)][0] != FREE and net.link[(c, 0)][1] == 0
                  and tags.get(net.link[(c, 0)][0]) == "dec" for c in comp)
        for c in comp:
            tags[c] = "x" if fed else "y"
    return tags


def unfold(tagged: Tagged, budget: int = _BUDGET) -> Net:
    """Duplicate every code, then decode the copies fed to decoders."""
    net, tags, _ = guided_reduce(tagged.net, tagged.tags, _DUP_STEPS, budget)
    tags = _mark_inputs(net, tags)
    return guided_reduce(net, tags, _DECODE_STEPS, budget)[0]


def verify_recursion(spec: RecursionSpec, unfoldings: int = 2) -> list[bool]:
    """Replay mu -> RHS[mu] and RHS^i[mu] -> RHS^(i+1)[mu]; one flag per unfolding."""
    mu = _solution(spec)
    results = []
    cur = mu
    plain = mu.net
    for _ in range(unfoldings):
        got = unfold(cur)
        plain_next = _rhs(spec, [Tagged.uniform(plain, "")] * spec.k).net
        results.append(alpha_equal(got, plain_next))
        cur = _rhs(spec, [cur] * spec.k)
        plain = plain_next
    return results


def prepend_template(kind: Kind = Kind.DELTA) -> RecursionSpec:
    """mu -> a layer of two cells joined on their first auxiliary ports, mu below."""
    t = Net(interface=4, name="layer")
    a, b = t.add_cell(kind), t.add_cell(kind)
    t.connect((a, 0), free(1))
    t.connect((b, 0), free(2))
    t.connect((a, 1), (b, 1))
    t.connect((a, 2), free(3))
    t.connect((b, 2), free(4))
    return RecursionSpec(2, t, 1)


# ---------------------------------------------------------------------------
# corpus

CORPUS_NAMES = (
    "wire", "eps1", "eps2", "loop", "eps_pair", "delta_pair", "delta_zeta", "fig1",
    "fig4", "iota", "fig12_mu", "fig12_nu", "pingpong_a", "pingpong_b", "quasi_wire",
    "parallelizer", "vicious_circle",
)


def fixture_source(name: str) -> str:
    return resources.files("symcomb").joinpath("fixtures", f"{name}.net").read_text()


def corpus() -> dict[str, Net]:
    out = {}
    for name in CORPUS_NAMES:
        net = parse_net(fixture_source(name))
        net.validate()
        out[name] = net
    return out


def parallelizer(nu: Net, n: int) -> Net:
    """Context mapping every n-port net mu to mu juxtaposed with nu."""
    ident = Net(interface=2 * n)
    for i in range(1, n + 1):
        ident.connect(free(i), free(n + i))
    return juxtapose(ident, nu)
