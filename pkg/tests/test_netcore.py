import random

import pytest

from symcomb.encodings import corpus
from symcomb.netcore import (
    AuxOnEps, DuplicateEndpoint, EpsLeaf, Kind, Leaf, MissingFreeIndex, Net, Node, ParseError,
    UnknownCell, WireClass, alpha_equal, apply_feedback, assemble, branch_address,
    canonical_key, cell_net, classify_wires, cut_free_canonical_form, decompose, eps_net,
    free, identity_context, is_cut_free, parse_net, plug, random_cut_free, random_net,
    renumbered, serialize_net, wire_net,
)

E2 = "net e2 { interface 2; cell a: eps; cell b: eps; wire a.p free.1; wire b.p free.2; }"


def test_parse_wire():
    net = parse_net("net w { interface 2; wire free.1 free.2; }")
    assert net.interface == 2 and not net.kinds and len(net.wires()) == 1


def test_parse_eps2():
    net = parse_net(E2)
    assert alpha_equal(net, eps_net(2))


@pytest.mark.parametrize("src, err", [
    ("net x { interface 1; cell a: delta; cell b: eps; cell c: eps;"
     " wire a.1 b.p; wire a.1 c.p; wire a.p free.1; }", DuplicateEndpoint),
    ("net x { interface 2; wire free.1 free.3; }", MissingFreeIndex),
    ("net x { interface 1; wire z.p free.1; }", UnknownCell),
    ("net x { interface 2; cell a: eps; wire a.1 free.1; }", AuxOnEps),
    ("net x { interface 1 wire }", ParseError),
])
def test_parse_errors(src, err):
    with pytest.raises(err):
        parse_net(src)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_net("net x {\n  interface 1\n  cell a: eps; }")
    assert e.value.line == 3


def test_serialize_roundtrip_corpus():
    for name, net in corpus().items():
        text = serialize_net(net)
        again = parse_net(text)
        assert serialize_net(again) == text, name


def test_serialize_wire():
    assert serialize_net(wire_net()) == "net wire {\n  interface 2;\n  wire free.1 free.2;\n}\n"


def test_alpha_renaming_gives_identical_text():
    rng = random.Random(1)
    for _ in range(30):
        net = random_net(rng, rng.randint(1, 8))
        ids = list(net.kinds)
        rng.shuffle(ids)
        ren = {c: 100 + i for i, c in enumerate(ids)}
        other = Net(net.interface, {ren[c]: k for c, k in net.kinds.items()},
                    {(ren.get(a[0], a[0]), a[1]): (ren.get(b[0], b[0]), b[1])
                     for a, b in net.link.items()}, net.loops)
        assert serialize_net(other) == serialize_net(net)
        assert canonical_key(other) == canonical_key(net)
        assert alpha_equal(renumbered(net), net)


def test_keys_differ():
    assert canonical_key(wire_net()) != canonical_key(eps_net(2))


def _circle(n: int) -> Net:
    net = Net()
    cells = [net.add_cell(Kind.DELTA) for _ in range(n)]
    for i, c in enumerate(cells):
        net.connect((c, 0), (cells[(i + 1) % n], 1))
    net.interface = n
    for i, c in enumerate(cells, start=1):
        net.connect((c, 2), free(i))
    return net


def test_circles_of_different_length_differ():
    assert canonical_key(_circle(2)) != canonical_key(_circle(3))


def test_classify_fig1():
    rep = classify_wires(corpus()["fig1"])
    assert len(corpus()["fig1"].kinds) == 11
    assert rep.count(WireClass.PROPER_AXIOM) == 7
    assert rep.count(WireClass.PROPER_CUT) == 2
    assert rep.count(WireClass.AXIOM_CUT) == 2


def test_classify_vicious_circle():
    rep = classify_wires(corpus()["vicious_circle"])
    assert rep.count(WireClass.AXIOM_CUT) == 4
    assert len(rep.vicious_circles) == 1


def test_classify_wire():
    rep = classify_wires(wire_net())
    assert list(rep.classes.values()) == [WireClass.PROPER_AXIOM]
    assert not rep.active_pairs and not rep.vicious_circles


def test_cut_free_form_small():
    form = cut_free_canonical_form(wire_net())
    assert form.trees == [Leaf(), Leaf()] and form.wiring == [((1, 1), (2, 1))]
    form = cut_free_canonical_form(eps_net(2))
    assert form.trees == [EpsLeaf(), EpsLeaf()] and form.wiring == []
    form = cut_free_canonical_form(cell_net(Kind.DELTA))
    assert form.trees == [Node(Kind.DELTA, Leaf(), Leaf()), Leaf(), Leaf()]
    assert form.wiring == [((1, 1), (2, 1)), ((1, 2), (3, 1))]


def test_cut_free_form_roundtrip():
    rng = random.Random(2)
    for _ in range(30):
        nu = random_cut_free(rng, rng.randint(1, 4))
        assert alpha_equal(assemble(cut_free_canonical_form(nu)), nu)


def test_decompose():
    w = wire_net()
    nu, sigma = decompose(w)
    assert alpha_equal(nu, w) and sigma == {}

    pair = parse_net("net dd { interface 4; cell a: delta; cell b: delta; wire a.p b.p;"
                     " wire a.1 free.1; wire a.2 free.2; wire b.1 free.3; wire b.2 free.4; }")
    nu, sigma = decompose(pair)
    assert nu.interface == 6 and sigma == {5: 6, 6: 5} and is_cut_free(nu)

    nu, sigma = decompose(corpus()["loop"])
    assert alpha_equal(nu, w) and sigma == {1: 2, 2: 1}


def test_decompose_then_plug_is_identity():
    rng = random.Random(3)
    for _ in range(50):
        net = random_net(rng, rng.randint(0, 8))
        nu, sigma = decompose(net)
        assert is_cut_free(nu)
        assert alpha_equal(apply_feedback(sigma, nu), net)


def test_plug_identity():
    rng = random.Random(4)
    for _ in range(20):
        net = random_net(rng, rng.randint(0, 6))
        assert alpha_equal(plug(identity_context(net.interface), net), net)


def test_branch_address():
    assert branch_address(Leaf(), 1) == ("", "")
    assert branch_address(Node(Kind.DELTA, Leaf(), Leaf()), 2) == ("q", "")
    assert branch_address(Node(Kind.ZETA, Node(Kind.DELTA, Leaf(), Leaf()), Leaf()), 1) == ("p", "p")
    with pytest.raises(IndexError):
        branch_address(Leaf(), 2)


def test_random_nets_are_valid():
    rng = random.Random(5)
    for _ in range(50):
        random_net(rng, rng.randint(0, 12)).validate()
