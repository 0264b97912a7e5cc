"""Nets of symmetric interaction combinators.

A net is a set of cells (delta, zeta, eps) together with a perfect pairing of
port endpoints.  Ports are ``(owner, slot)`` tuples: for a cell the owner is its
integer id and the slot is 0 (principal), 1 or 2 (auxiliary); free ports use the
owner ``FREE`` and the slot is the 1-based interface index.
"""

from __future__ import annotations

import hashlib
import random
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Union

FREE = -1
PRINCIPAL = 0

Port = tuple[int, int]


class Kind(Enum):
    DELTA = "delta"
    ZETA = "zeta"
    EPS = "eps"

    @property
    def arity(self) -> int:
        return 0 if self is Kind.EPS else 2

    @property
    def letter(self) -> str:
        return {"delta": "δ", "zeta": "ζ", "eps": "ε"}[self.value]


class WireClass(Enum):
    PROPER_AXIOM = "ProperAxiom"
    PROPER_CUT = "ProperCut"
    AXIOM_CUT = "AxiomCut"
    INTERNAL = "Internal"


class NetError(Exception):
    pass


class NotCutFree(NetError):
    pass


class InterfaceTooSmall(NetError):
    pass


class InterfaceMismatch(NetError):
    pass


class InvalidNet(NetError):
    pass


def free(k: int) -> Port:
    return (FREE, k)


def is_free(port: Port) -> bool:
    return port[0] == FREE


def is_principal(port: Port) -> bool:
    return port[0] != FREE and port[1] == PRINCIPAL


@dataclass
class Net:
    interface: int = 0
    kinds: dict[int, Kind] = field(default_factory=dict)
    link: dict[Port, Port] = field(default_factory=dict)
    loops: int = 0
    name: str = "net"
    next_id: int = 0

    # construction

    def add_cell(self, kind: Kind) -> int:
        cid = self.next_id
        self.next_id += 1
        self.kinds[cid] = kind
        return cid

    def connect(self, a: Port, b: Port) -> None:
        if a == b:
            raise InvalidNet(f"port {a} cannot be wired to itself")
        self.link[a] = b
        self.link[b] = a

    def disconnect(self, a: Port) -> Port:
        b = self.link.pop(a)
        del self.link[b]
        return b

    def remove_cell(self, cid: int) -> None:
        """Drop a cell; its ports must already be disconnected."""
        for s in range(self.kinds[cid].arity + 1):
            self.link.pop((cid, s), None)
        del self.kinds[cid]

    def copy(self) -> "Net":
        return Net(self.interface, dict(self.kinds), dict(self.link), self.loops,
                   self.name, self.next_id)

    # queries

    def ports_of(self, cid: int) -> list[Port]:
        return [(cid, s) for s in range(self.kinds[cid].arity + 1)]

    def partner(self, port: Port) -> Port:
        return self.link[port]

    def kind_of(self, port: Port) -> Kind | None:
        return None if port[0] == FREE else self.kinds[port[0]]

    def wires(self) -> list[tuple[Port, Port]]:
        out = []
        for a, b in self.link.items():
            if a < b:
                out.append((a, b))
        out.sort()
        return out

    def cells(self) -> list[int]:
        return sorted(self.kinds)

    def count(self, kind: Kind) -> int:
        return sum(1 for k in self.kinds.values() if k is kind)

    def active_pairs(self) -> list[tuple[int, int]]:
        pairs = []
        for c in sorted(self.kinds):
            o = self.link.get((c, 0))
            if o is not None and o[0] != FREE and o[1] == 0 and c < o[0]:
                pairs.append((c, o[0]))
        return pairs

    def validate(self) -> None:
        for c, k in self.kinds.items():
            for s in range(k.arity + 1):
                if (c, s) not in self.link:
                    raise InvalidNet(f"port {port_name((c, s))} is not wired")
        for k in range(1, self.interface + 1):
            if free(k) not in self.link:
                raise InvalidNet(f"free port {k} is not wired")
        for a, b in self.link.items():
            if self.link.get(b) != a:
                raise InvalidNet(f"asymmetric wire at {a}")
            for p in (a, b):
                if p[0] == FREE:
                    if not 1 <= p[1] <= self.interface:
                        raise InvalidNet(f"free index {p[1]} out of range")
                elif p[0] not in self.kinds or p[1] > self.kinds[p[0]].arity:
                    raise InvalidNet(f"dangling endpoint {p}")

    def __str__(self) -> str:
        return serialize_net(self)


def port_name(port: Port, names: dict[int, str] | None = None) -> str:
    owner, slot = port
    if owner == FREE:
        return f"free.{slot}"
    label = names[owner] if names is not None else f"c{owner}"
    return f"{label}.{'p' if slot == 0 else slot}"


# ---------------------------------------------------------------------------
# parsing

class ParseError(NetError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class DuplicateEndpoint(ParseError):
    pass


class MissingFreeIndex(ParseError):
    pass


class UnknownCell(ParseError):
    pass


class AuxOnEps(ParseError):
    pass


class DanglingPort(ParseError):
    pass


_TOKEN = re.compile(r"\s+|#[^\n]*|[A-Za-z_][A-Za-z0-9_]*|\d+|[{};:.]|.")


def _tokens(text: str):
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if not (tok.isspace() or tok.startswith("#")):
            yield tok, line, col
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)


def parse_net(text: str) -> Net:
    toks = list(_tokens(text))
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else ("<eof>", 0, 0)

    def take(expected: str | None = None, what: str = "token"):
        nonlocal pos
        tok = peek()
        if tok[0] == "<eof>":
            raise ParseError(f"unexpected end of input, expected {expected or what}",
                             *_last_pos(toks))
        if expected is not None and tok[0] != expected:
            raise ParseError(f"expected '{expected}', found '{tok[0]}'", tok[1], tok[2])
        pos += 1
        return tok

    def ident():
        tok = take(what="identifier")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok[0]):
            raise ParseError(f"expected identifier, found '{tok[0]}'", tok[1], tok[2])
        return tok

    def nat():
        tok = take(what="number")
        if not tok[0].isdigit():
            raise ParseError(f"expected number, found '{tok[0]}'", tok[1], tok[2])
        return int(tok[0]), tok

    take("net")
    name = ident()[0]
    take("{")
    interface = 0
    cells: dict[str, tuple[Kind, int]] = {}
    wires: list[tuple[tuple, tuple, tuple]] = []
    loops = 0
    while peek()[0] != "}":
        kw = take(what="declaration")
        if kw[0] == "interface":
            interface, _ = nat()
            take(";")
        elif kw[0] == "cell":
            cname = ident()
            if cname[0] == "free":
                raise ParseError("'free' is reserved", cname[1], cname[2])
            if cname[0] in cells:
                raise ParseError(f"cell '{cname[0]}' declared twice", cname[1], cname[2])
            take(":")
            ktok = ident()
            try:
                kind = Kind(ktok[0])
            except ValueError:
                raise ParseError(f"unknown cell kind '{ktok[0]}'", ktok[1], ktok[2]) from None
            cells[cname[0]] = (kind, len(cells))
            take(";")
        elif kw[0] == "wire":
            a = _endpoint(take, ident, nat)
            b = _endpoint(take, ident, nat)
            take(";")
            wires.append((a, b, kw))
        elif kw[0] == "loop":
            take(";")
            loops += 1
        else:
            raise ParseError(f"unknown declaration '{kw[0]}'", kw[1], kw[2])
    take("}")
    if pos != len(toks):
        tok = toks[pos]
        raise ParseError(f"trailing input '{tok[0]}'", tok[1], tok[2])

    net = Net(interface=interface, loops=loops, name=name)
    ids = {}
    for cname, (kind, _) in sorted(cells.items(), key=lambda kv: kv[1][1]):
        ids[cname] = net.add_cell(kind)
    used: dict[Port, tuple] = {}
    for a, b, kw in wires:
        ports = []
        for owner, slot, tok in (a, b):
            if owner == "free":
                if not 1 <= slot <= interface:
                    raise MissingFreeIndex(f"free.{slot} outside interface 1..{interface}",
                                           tok[1], tok[2])
                port = free(slot)
            else:
                if owner not in cells:
                    raise UnknownCell(f"unknown cell '{owner}'", tok[1], tok[2])
                kind = cells[owner][0]
                if kind is Kind.EPS and slot != 0:
                    raise AuxOnEps(f"eps cell '{owner}' has no port {slot}", tok[1], tok[2])
                port = (ids[owner], slot)
            if port in used:
                raise DuplicateEndpoint(f"endpoint {owner}.{slot_label(slot, owner)} used twice",
                                        tok[1], tok[2])
            used[port] = tok
            ports.append(port)
        if ports[0] == ports[1]:
            raise DuplicateEndpoint("wire joins an endpoint to itself", kw[1], kw[2])
        net.connect(ports[0], ports[1])
    for k in range(1, interface + 1):
        if free(k) not in used:
            raise MissingFreeIndex(f"free.{k} is never wired", *_last_pos(toks))
    for cname, cid in ids.items():
        for port in net.ports_of(cid):
            if port not in used:
                raise DanglingPort(f"port {cname}.{slot_label(port[1], cname)} is never wired",
                                   *_last_pos(toks))
    return net


def slot_label(slot: int, owner: str) -> str:
    if owner == "free":
        return str(slot)
    return "p" if slot == 0 else str(slot)


def _last_pos(toks) -> tuple[int, int]:
    return (toks[-1][1], toks[-1][2]) if toks else (1, 1)


def _endpoint(take, ident, nat):
    owner = ident()
    take(".")
    if owner[0] == "free":
        k, _ = nat()
        return ("free", k, owner)
    tok = take(what="port")
    if tok[0] == "p":
        return (owner[0], 0, owner)
    if tok[0] in ("1", "2"):
        return (owner[0], int(tok[0]), owner)
    raise ParseError(f"expected p, 1 or 2, found '{tok[0]}'", tok[1], tok[2])


# ---------------------------------------------------------------------------
# canonical form

def _bfs(net: Net, start_ports: Iterable[Port], start_cells: Iterable[int],
         numbering: dict[int, int], base: int):
    """Breadth-first numbering; returns cells in order and wires in discovery order."""
    order: list[int] = []
    wires: list[tuple[Port, Port]] = []
    seen: set[Port] = set()
    queue: deque[int] = deque()

    def visit(c: int) -> None:
        if c not in numbering:
            numbering[c] = base + len(order)
            order.append(c)
            queue.append(c)

    def emit(p: Port) -> None:
        if p in seen:
            return
        q = net.link[p]
        seen.add(p)
        seen.add(q)
        wires.append((p, q))
        if q[0] != FREE:
            visit(q[0])

    for p in start_ports:
        emit(p)
        while queue:
            c = queue.popleft()
            for port in net.ports_of(c):
                emit(port)
    for c in start_cells:
        visit(c)
        while queue:
            c = queue.popleft()
            for port in net.ports_of(c):
                emit(port)
    return order, wires


def _code(net: Net, order, wires, numbering) -> tuple:
    def ref(p: Port):
        return (-1, p[1]) if p[0] == FREE else (numbering[p[0]], p[1])
    return (tuple(net.kinds[c].value for c in order),
            tuple((ref(a), ref(b)) for a, b in wires))


def _components(net: Net, cells: Iterable[int]) -> list[list[int]]:
    todo = set(cells)
    comps = []
    while todo:
        start = min(todo)
        comp = []
        stack = [start]
        todo.discard(start)
        while stack:
            c = stack.pop()
            comp.append(c)
            for port in net.ports_of(c):
                o = net.link[port][0]
                if o != FREE and o in todo:
                    todo.discard(o)
                    stack.append(o)
        comps.append(comp)
    return comps


def canonical_structure(net: Net) -> tuple[list[int], list[tuple[Port, Port]]]:
    """Canonical cell order and wire order of a net."""
    numbering: dict[int, int] = {}
    order, wires = _bfs(net, [free(k) for k in range(1, net.interface + 1)], [],
                        numbering, 0)
    rest = [c for c in net.kinds if c not in numbering]
    if rest:
        coded = []
        for comp in _components(net, rest):
            best = None
            for s in comp:
                local: dict[int, int] = {}
                o, w = _bfs(net, [], [s], local, 0)
                key = _code(net, o, w, local)
                if best is None or key < best[0]:
                    best = (key, o, w)
            coded.append(best)
        coded.sort(key=lambda t: t[0])
        for _, o, w in coded:
            for c in o:
                numbering[c] = len(order)
                order.append(c)
            wires.extend(w)
    return order, wires


def serialize_net(net: Net, name: str | None = None) -> str:
    order, wires = canonical_structure(net)
    names = {c: f"c{i}" for i, c in enumerate(order)}
    lines = [f"net {name or net.name} {{", f"  interface {net.interface};"]
    for c in order:
        lines.append(f"  cell {names[c]}: {net.kinds[c].value};")
    for a, b in wires:
        lines.append(f"  wire {port_name(a, names)} {port_name(b, names)};")
    lines.extend("  loop;" for _ in range(net.loops))
    lines.append("}")
    return "\n".join(lines) + "\n"


def canonical_key(net: Net) -> str:
    body = serialize_net(net, name="_")
    return hashlib.sha256(body.encode()).hexdigest()


def alpha_equal(a: Net, b: Net) -> bool:
    return a.interface == b.interface and canonical_key(a) == canonical_key(b)


def renumbered(net: Net) -> Net:
    """A copy with cell ids 0..k-1 in canonical order."""
    order, _ = canonical_structure(net)
    ids = {c: i for i, c in enumerate(order)}
    out = Net(net.interface, loops=net.loops, name=net.name, next_id=len(order))
    for c in order:
        out.kinds[ids[c]] = net.kinds[c]
    for a, b in net.link.items():
        out.link[_rename(a, ids)] = _rename(b, ids)
    return out


def _rename(p: Port, ids: dict[int, int]) -> Port:
    return p if p[0] == FREE else (ids[p[0]], p[1])


# ---------------------------------------------------------------------------
# structural analysis

@dataclass
class WireReport:
    classes: dict[tuple[Port, Port], WireClass]
    active_pairs: list[tuple[int, int]]
    vicious_circles: list[list[int]]
    loops: int

    def count(self, cls: WireClass) -> int:
        n = sum(1 for c in self.classes.values() if c is cls)
        return n + (self.loops if cls is WireClass.AXIOM_CUT else 0)

    @property
    def circle_count(self) -> int:
        return len(self.vicious_circles) + self.loops

    @property
    def cut_free(self) -> bool:
        return not self.active_pairs and self.circle_count == 0


def parent_map(net: Net) -> dict[int, int]:
    """Cell whose principal port hangs on an auxiliary port of another cell."""
    par = {}
    for c in net.kinds:
        o = net.link[(c, 0)]
        if o[0] != FREE and o[1] != 0:
            par[c] = o[0]
    return par


def vicious_circles(net: Net) -> list[list[int]]:
    par = parent_map(net)
    state: dict[int, int] = {}
    circles = []
    for start in sorted(par):
        path = []
        c = start
        while c in par and c not in state:
            state[c] = 1
            path.append(c)
            c = par[c]
        if c in state and state[c] == 1:
            i = path.index(c)
            circles.append(path[i:])
        for x in path:
            state[x] = 2
    return circles


def classify_wires(net: Net) -> WireReport:
    circles = vicious_circles(net)
    on_circle = {c for circ in circles for c in circ}
    classes = {}
    for a, b in net.wires():
        pa, pb = is_principal(a), is_principal(b)
        if pa and pb:
            cls = WireClass.PROPER_CUT
        elif not pa and not pb:
            cls = WireClass.PROPER_AXIOM
        else:
            child, other = (a, b) if pa else (b, a)
            if other[0] != FREE and child[0] in on_circle:
                cls = WireClass.AXIOM_CUT
            else:
                cls = WireClass.INTERNAL
        classes[(a, b)] = cls
    return WireReport(classes, net.active_pairs(), circles, net.loops)


def is_cut_free(net: Net) -> bool:
    return net.loops == 0 and not net.active_pairs() and not vicious_circles(net)


# ---------------------------------------------------------------------------
# trees

@dataclass(frozen=True)
class Leaf:
    def __str__(self) -> str:
        return "⌶"


@dataclass(frozen=True)
class EpsLeaf:
    def __str__(self) -> str:
        return "ε"


@dataclass(frozen=True)
class Node:
    kind: Kind
    left: "Tree"
    right: "Tree"

    def __str__(self) -> str:
        return f"{self.kind.letter}({self.left},{self.right})"


Tree = Union[Leaf, EpsLeaf, Node]


def leaf_count(tree: Tree) -> int:
    if isinstance(tree, Leaf):
        return 1
    if isinstance(tree, EpsLeaf):
        return 0
    return leaf_count(tree.left) + leaf_count(tree.right)


def tree_depth(tree: Tree) -> int:
    if isinstance(tree, Node):
        return 1 + max(tree_depth(tree.left), tree_depth(tree.right))
    return 0


def leaf_addresses(tree: Tree, prefix: tuple[str, str] = ("", "")) -> list[tuple[str, str]]:
    if isinstance(tree, Leaf):
        return [prefix]
    if isinstance(tree, EpsLeaf):
        return []
    out = []
    for letter, sub in (("p", tree.left), ("q", tree.right)):
        if tree.kind is Kind.DELTA:
            nxt = (prefix[0] + letter, prefix[1])
        else:
            nxt = (prefix[0], prefix[1] + letter)
        out.extend(leaf_addresses(sub, nxt))
    return out


def branch_address(tree: Tree, leaf: int) -> tuple[str, str]:
    """Word pair of the ``leaf``-th leaf (1-based, left to right)."""
    addrs = leaf_addresses(tree)
    if not 1 <= leaf <= len(addrs):
        raise IndexError(f"tree has {len(addrs)} leaves, no leaf {leaf}")
    return addrs[leaf - 1]


def build_tree(net: Net, tree: Tree, root: Port | None = None) -> tuple[Port, list[Port]]:
    """Add cells for ``tree`` hanging on ``root``; returns root and leaf endpoints.

    The one-leaf tree has no cell, so its only leaf endpoint is ``root`` itself.
    """
    if isinstance(tree, Leaf):
        if root is None:
            raise ValueError("the one-leaf tree needs an explicit root endpoint")
        return root, [root]
    if isinstance(tree, EpsLeaf):
        c = net.add_cell(Kind.EPS)
        if root is not None:
            net.connect(root, (c, 0))
        return (c, 0), []
    c = net.add_cell(tree.kind)
    if root is not None:
        net.connect(root, (c, 0))
    leaves: list[Port] = []
    for slot, sub in ((1, tree.left), (2, tree.right)):
        if isinstance(sub, Leaf):
            leaves.append((c, slot))
        else:
            _, ls = build_tree(net, sub, (c, slot))
            leaves.extend(ls)
    return (c, 0), leaves


@dataclass
class FreeTrees:
    """The maximal trees hanging from the free ports."""
    cells: set[int]
    leaf_of: dict[Port, tuple[int, tuple[str, str]]]  # leaf endpoint -> (port, word pair)
    roots: dict[int, Tree]
    leaves: dict[int, list[Port]]


def free_trees(net: Net) -> FreeTrees:
    cells: set[int] = set()
    leaf_of: dict[Port, tuple[int, tuple[str, str]]] = {}
    roots: dict[int, Tree] = {}
    leaves: dict[int, list[Port]] = {}

    def walk(port: Port, i: int, addr: tuple[str, str], acc: list[Port]) -> Tree:
        o = net.link[port]
        if o[0] == FREE or o[1] != 0:
            leaf_of[port] = (i, addr)
            acc.append(port)
            return Leaf()
        c = o[0]
        cells.add(c)
        kind = net.kinds[c]
        if kind is Kind.EPS:
            return EpsLeaf()
        subs = []
        for slot, letter in ((1, "p"), (2, "q")):
            nxt = (addr[0] + letter, addr[1]) if kind is Kind.DELTA else (addr[0], addr[1] + letter)
            subs.append(walk((c, slot), i, nxt, acc))
        return Node(kind, subs[0], subs[1])

    for i in range(1, net.interface + 1):
        acc: list[Port] = []
        roots[i] = walk(free(i), i, ("", ""), acc)
        leaves[i] = acc
    return FreeTrees(cells, leaf_of, roots, leaves)



class Pillar(NamedTuple):
    port: int
    w1: str
    w2: str

    def __str__(self) -> str:
        return f"({self.w1 or 'ε'},{self.w2 or 'ε'})@{self.port}"


@dataclass(frozen=True, order=True)
class Address:
    """Unordered pair of pillars; stored with ``a <= b``."""
    a: Pillar
    b: Pillar

    @staticmethod
    def of(x: Pillar, y: Pillar) -> "Address":
        x, y = Pillar(*x), Pillar(*y)
        return Address(x, y) if x <= y else Address(y, x)

    @staticmethod
    def make(s: tuple[str, str], i: int, t: tuple[str, str], j: int) -> "Address":
        return Address.of(Pillar(i, s[0], s[1]), Pillar(j, t[0], t[1]))

    @property
    def degenerate(self) -> bool:
        return self.a == self.b

    def orientations(self) -> list[tuple[Pillar, Pillar]]:
        if self.a == self.b:
            return [(self.a, self.b)]
        return [(self.a, self.b), (self.b, self.a)]

    def __str__(self) -> str:
        return f"⟨{self.a}|{self.b}⟩"


def observable_axioms(net: Net) -> set[Address]:
    ft = free_trees(net)
    out = set()
    for x, (i, s) in ft.leaf_of.items():
        y = net.link[x]
        if y in ft.leaf_of and x < y:
            j, t = ft.leaf_of[y]
            out.add(Address.make(s, i, t, j))
    return out


@dataclass
class CutFreeForm:
    trees: list[Tree]
    wiring: list[tuple[tuple[int, int], tuple[int, int]]]  # ((port, leaf), (port, leaf)), 1-based


def cut_free_canonical_form(net: Net) -> CutFreeForm:
    if not is_cut_free(net):
        raise NotCutFree("net contains a cut")
    ft = free_trees(net)
    index = {}
    for i in range(1, net.interface + 1):
        for l, port in enumerate(ft.leaves[i], start=1):
            index[port] = (i, l)
    wiring = []
    for port, (i, l) in index.items():
        other = index[net.link[port]]
        if (i, l) < other:
            wiring.append(((i, l), other))
    wiring.sort()
    return CutFreeForm([ft.roots[i] for i in range(1, net.interface + 1)], wiring)


def assemble(form: CutFreeForm) -> Net:
    n = len(form.trees)
    net = Net(interface=n)
    leaves: dict[tuple[int, int], Port] = {}
    for i, tree in enumerate(form.trees, start=1):
        if isinstance(tree, Leaf):
            leaves[(i, 1)] = free(i)
            continue
        _, ls = build_tree(net, tree, free(i))
        for l, port in enumerate(ls, start=1):
            leaves[(i, l)] = port
    for x, y in form.wiring:
        net.connect(leaves[x], leaves[y])
    return net


# ---------------------------------------------------------------------------
# decomposition and plugging

Feedback = dict[int, int]


def feedback(*pairs: tuple[int, int]) -> Feedback:
    sigma: Feedback = {}
    for i, j in pairs:
        if i == j or i in sigma or j in sigma:
            raise ValueError("a feedback is a fixpoint-free partial involution")
        sigma[i] = j
        sigma[j] = i
    return sigma


def decompose(net: Net) -> tuple[Net, Feedback]:
    """Open every proper cut and one axiom-cut per vicious circle."""
    nu = net.copy()
    nu.loops = 0
    n = net.interface
    to_open = [(a, b) for a, b in net.wires() if is_principal(a) and is_principal(b)]
    for circ in vicious_circles(net):
        c = min(circ)
        to_open.append(((c, 0), net.link[(c, 0)]))
    pairs = []
    k = n
    for a, b in to_open:
        nu.disconnect(a)
        nu.connect(a, free(k + 1))
        nu.connect(b, free(k + 2))
        pairs.append((k + 1, k + 2))
        k += 2
    for _ in range(net.loops):
        nu.connect(free(k + 1), free(k + 2))
        pairs.append((k + 1, k + 2))
        k += 2
    nu.interface = k
    return nu, feedback(*pairs)


def feedback_context(sigma: Feedback, total: int) -> Net:
    """Wiring with ports 1..total to plug into, then the surviving ports."""
    keep = [i for i in range(1, total + 1) if i not in sigma]
    ctx = Net(interface=total + len(keep))
    for i, j in sigma.items():
        if i < j:
            ctx.connect(free(i), free(j))
    for r, i in enumerate(keep, start=1):
        ctx.connect(free(i), free(total + r))
    return ctx


def apply_feedback(sigma: Feedback, net: Net) -> Net:
    return plug(feedback_context(sigma, net.interface), net)


def identity_context(n: int) -> Net:
    ctx = Net(interface=2 * n)
    for i in range(1, n + 1):
        ctx.connect(free(i), free(n + i))
    return ctx


def plug(context: Net, net: Net) -> Net:
    """Fuse free port i of ``net`` with free port i of ``context``."""
    n, m = net.interface, context.interface
    if m < n:
        raise InterfaceTooSmall(f"context has {m} ports, net has {n}")
    out = Net(interface=m - n, loops=context.loops + net.loops, name=net.name)
    cmap = {c: out.add_cell(k) for c, k in sorted(context.kinds.items())}
    nmap = {c: out.add_cell(k) for c, k in sorted(net.kinds.items())}

    # endpoints: ("C", port) or ("N", port)
    def fused(e) -> bool:
        side, p = e
        return p[0] == FREE and p[1] <= n

    def target(e) -> Port:
        side, p = e
        if p[0] == FREE:
            return free(p[1] - n)
        return ((cmap if side == "C" else nmap)[p[0]], p[1])

    def across(e):
        side, p = e
        src = context if side == "C" else net
        return (side, src.link[p])

    def counterpart(e):
        side, p = e
        return ("N" if side == "C" else "C", p)

    visited = set()
    endpoints = [("C", p) for p in context.link] + [("N", p) for p in net.link]
    for e in endpoints:
        if fused(e) or e in visited:
            continue
        f = across(e)
        visited.add(e)
        while fused(f):
            visited.add(f)
            g = counterpart(f)
            visited.add(g)
            f = across(g)
        visited.add(f)
        out.connect(target(e), target(f))
    for e in endpoints:
        if fused(e) and e not in visited:
            f = e
            while f not in visited:
                visited.add(f)
                g = counterpart(f)
                visited.add(g)
                f = across(g)
            out.loops += 1
    return out


def juxtapose(*nets: Net) -> Net:
    """Disjoint union; free ports numbered consecutively."""
    out = Net()
    for net in nets:
        base = out.interface
        ids = {c: out.add_cell(k) for c, k in sorted(net.kinds.items())}
        for a, b in net.link.items():
            a2 = free(a[1] + base) if a[0] == FREE else (ids[a[0]], a[1])
            b2 = free(b[1] + base) if b[0] == FREE else (ids[b[0]], b[1])
            out.link[a2] = b2
        out.interface += net.interface
        out.loops += net.loops
    return out


def permute_ports(net: Net, perm: list[int]) -> Net:
    """Renumber free port i as perm[i-1]."""
    out = net.copy()
    out.link = {}
    for a, b in net.link.items():
        a2 = free(perm[a[1] - 1]) if a[0] == FREE else a
        b2 = free(perm[b[1] - 1]) if b[0] == FREE else b
        out.link[a2] = b2
    return out


def closed_components(net: Net) -> list[list[int]]:
    """Components of cells not connected to any free port."""
    reach: set[int] = set()
    stack = [net.link[free(k)][0] for k in range(1, net.interface + 1)]
    stack = [c for c in stack if c != FREE]
    while stack:
        c = stack.pop()
        if c in reach:
            continue
        reach.add(c)
        for port in net.ports_of(c):
            o = net.link[port][0]
            if o != FREE and o not in reach:
                stack.append(o)
    return _components(net, [c for c in net.kinds if c not in reach])


def strip_closed(net: Net) -> Net:
    out = net.copy()
    out.loops = 0
    for comp in closed_components(net):
        for c in comp:
            for port in out.ports_of(c):
                out.link.pop(port, None)
            del out.kinds[c]
    return out


# ---------------------------------------------------------------------------
# small nets

def wire_net() -> Net:
    net = Net(interface=2, name="wire")
    net.connect(free(1), free(2))
    return net


def eps_net(n: int) -> Net:
    net = Net(interface=n, name=f"eps{n}")
    for i in range(1, n + 1):
        c = net.add_cell(Kind.EPS)
        net.connect((c, 0), free(i))
    return net


def cell_net(kind: Kind) -> Net:
    """A single cell with all its ports free (principal at free.1)."""
    net = Net(interface=kind.arity + 1)
    c = net.add_cell(kind)
    for s in range(kind.arity + 1):
        net.connect((c, s), free(s + 1))
    return net


def random_net(rng: random.Random, cells: int, interface: int | None = None,
               kinds: tuple[Kind, ...] = (Kind.DELTA, Kind.ZETA, Kind.EPS),
               weights: tuple[float, ...] | None = None, loops: int = 0) -> Net:
    """Random valid net: random kinds, uniformly random perfect pairing."""
    net = Net()
    for _ in range(cells):
        net.add_cell(rng.choices(kinds, weights=weights)[0])
    ports = [p for c in net.kinds for p in net.ports_of(c)]
    if interface is None:
        interface = rng.randint(0, 4)
    if (len(ports) + interface) % 2:
        interface += 1
    net.interface = interface
    ports.extend(free(k) for k in range(1, interface + 1))
    rng.shuffle(ports)
    for i in range(0, len(ports), 2):
        net.connect(ports[i], ports[i + 1])
    net.loops = loops
    return net


def random_tree(rng: random.Random, depth: int, kinds=(Kind.DELTA, Kind.ZETA),
                eps_rate: float = 0.0, leaf_rate: float = 0.3) -> Tree:
    if depth == 0 or rng.random() < leaf_rate:
        return EpsLeaf() if rng.random() < eps_rate else Leaf()
    k = rng.choice(kinds)
    return Node(k, random_tree(rng, depth - 1, kinds, eps_rate, leaf_rate),
                random_tree(rng, depth - 1, kinds, eps_rate, leaf_rate))


def random_cut_free(rng: random.Random, interface: int, depth: int = 3,
                    kinds=(Kind.DELTA, Kind.ZETA), eps_rate: float = 0.15) -> Net:
    """Random cut-free net: random trees, random wiring of the leaves."""
    while True:
        trees = [random_tree(rng, depth, kinds, eps_rate) for _ in range(interface)]
        total = sum(leaf_count(t) for t in trees)
        if total % 2 == 0:
            break
    slots = [(i, l) for i, t in enumerate(trees, start=1) for l in range(1, leaf_count(t) + 1)]
    rng.shuffle(slots)
    wiring = [(slots[k], slots[k + 1]) for k in range(0, len(slots), 2)]
    return assemble(CutFreeForm(trees, wiring))
