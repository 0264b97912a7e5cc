import random

import pytest

from symcomb.encodings import corpus
from symcomb.equivalence import (
    Observability, Outcome, Test, Tri, approximations, ax_eq_up_to, beta_eps_eq,
    collapse_replay, discriminating_test, fin_ax_eq, genericity_check, identity_test,
    is_approximation, observability, reaches_quasi_wire, replay_finitary, solving_test,
    visible, visible_eq,
)
from symcomb.netcore import (
    Address, InterfaceMismatch, Kind, Leaf, Net, Node, NotCutFree, Pillar,
    eps_net, free, random_net, renumbered, wire_net,
)
from symcomb.rewrite import eta0_expand, one_step_reducts, reduce

C = corpus()


def A(i, s, j, t):
    return Address.of(Pillar(i, *s), Pillar(j, *t))


def test_observability():
    assert observability(wire_net()) is Observability.IMMEDIATELY_OBSERVABLE
    assert observability(C["iota"]) is Observability.OBSERVABLE
    assert observability(eps_net(2)) is Observability.BLIND
    assert observability(C["fig4"]) is Observability.IMMEDIATELY_OBSERVABLE


def test_solving_test():
    t = solving_test(wire_net())
    assert t == identity_test(2)
    t = solving_test(C["fig4"])
    assert t is not None and isinstance(t.trees[0], Node)
    assert reaches_quasi_wire(t.apply(C["fig4"]), 40)[0]
    assert solving_test(eps_net(2)) is None
    assert solving_test(C["quasi_wire"]) == identity_test(2)


def test_discriminating_test_identity():
    t = discriminating_test(A(1, ("", ""), 2, ("", "")), 2)
    assert t == Test((Leaf(), Leaf()))
    assert replay_finitary(t, wire_net())[0] is Outcome.QUASI_WIRE
    assert replay_finitary(t, eps_net(2))[0] is not Outcome.QUASI_WIRE


def test_discriminating_test_fig4():
    t = discriminating_test(A(1, ("", "pp"), 1, ("", "pq")), 1)
    assert replay_finitary(t, C["fig4"])[0] is Outcome.QUASI_WIRE
    assert replay_finitary(t, eps_net(1))[0] is not Outcome.QUASI_WIRE


def test_discriminating_test_vault_inside_wire():
    t = discriminating_test(A(1, ("p", ""), 2, ("p", "")), 2)
    assert replay_finitary(t, wire_net())[0] is Outcome.QUASI_WIRE


def test_fin_ax_eq():
    ex = eta0_expand(wire_net(), (free(1), free(2)), Kind.DELTA)
    assert fin_ax_eq(wire_net(), ex).verdict == "Equal"
    v = fin_ax_eq(wire_net(), C["iota"])
    assert v.verdict == "Distinguished" and v.witness == identity_test(2)
    assert fin_ax_eq(eps_net(1), C["fig12_nu"]).verdict == "Equal"
    with pytest.raises(InterfaceMismatch):
        fin_ax_eq(wire_net(), eps_net(1))


def test_ax_eq_up_to():
    v = ax_eq_up_to(C["iota"], wire_net(), 5, 8)
    assert v.verdict == "Equal-up-to-5" and v.profile == [True] * 6
    v = ax_eq_up_to(wire_net(), eps_net(2), 3)
    assert v.verdict == "Distinguished" and v.depth == 0
    assert v.witness is not None
    rng = random.Random(3)
    net = random_net(rng, 6, interface=2)
    assert ax_eq_up_to(net, renumbered(net), 4, 8).verdict == "Equal-up-to-4"


def test_beta_eps_eq():
    rng = random.Random(4)
    for _ in range(10):
        net = random_net(rng, 6)
        for r in one_step_reducts(net)[:1]:
            assert beta_eps_eq(net, r).verdict == "Equal"
    assert beta_eps_eq(C["eps_pair"], Net()).verdict == "Equal"
    assert beta_eps_eq(C["pingpong_a"], C["pingpong_b"], 8, 400).verdict == "Inconclusive"


def test_visible():
    assert visible(eps_net(1), 1).verdict == "Visible"
    assert visible(C["fig12_nu"], 1).verdict == "ProvablyNotVisible"
    v = visible(wire_net(), 1)
    assert v.verdict == "Visible" and "wire" in v.shape


def test_visible_eq_fig12():
    v = visible_eq(C["fig12_mu"], C["fig12_nu"])
    assert v.verdict == "Distinguished"


def test_is_approximation():
    rng = random.Random(5)
    for _ in range(10):
        net = random_net(rng, rng.randint(1, 6))
        assert is_approximation(eps_net(net.interface), net) is Tri.YES
    dd = C["delta_pair"]
    assert is_approximation(reduce(dd).net, dd) is Tri.YES
    assert is_approximation(wire_net(), eps_net(2)) is Tri.NO
    with pytest.raises(NotCutFree):
        is_approximation(dd, dd)


def test_approximations_start_with_eps():
    apx = approximations(C["fig1"])
    assert apx[0].kinds and all(k is Kind.EPS for k in apx[0].kinds.values())
    for a in apx:
        assert is_approximation(a, C["fig1"]) is Tri.YES


def test_collapse():
    for name in ("wire", "fig1", "delta_pair", "loop"):
        assert collapse_replay(C[name]).ok, name


def test_genericity():
    ctx = Net(interface=3)
    d = ctx.add_cell(Kind.DELTA)
    ctx.connect((d, 0), free(1))
    ctx.connect((d, 1), free(2))
    ctx.connect((d, 2), free(3))
    xi = Net(interface=1)
    z = xi.add_cell(Kind.ZETA)
    xi.connect((z, 0), free(1))
    xi.connect((z, 1), (z, 2))
    case = genericity_check(C["fig12_nu"], ctx, xi)
    assert case.holds and case.checked >= 2
    with pytest.raises(ValueError):
        genericity_check(wire_net(), ctx, wire_net())
