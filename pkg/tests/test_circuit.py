import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qwsearch.circuit import (
    Circuit,
    CircuitParseError,
    Gate,
    Kind,
    RegisterLayout,
    UnitaryCapError,
    compose,
    count_two_qubit_gates,
    cphase,
    cx,
    cz,
    gphase,
    h,
    inverse,
    mcx,
    parse,
    phase,
    serialize,
    to_unitary,
    toffoli,
    x,
    z,
)
from qwsearch.compiler import build_decrement, build_increment, lower


def layout(n):
    return RegisterLayout((("q", n),))


def gate_strategy(nq):
    q = st.integers(0, nq - 1)
    ang = st.floats(-math.pi, math.pi, allow_nan=False)

    def pair(kind):
        return st.lists(q, min_size=2, max_size=2, unique=True).map(lambda p: kind(p[0], p[1]))

    return st.one_of(
        q.map(h),
        q.map(x),
        q.map(z),
        st.tuples(q, ang).map(lambda a: phase(*a)),
        ang.map(gphase),
        pair(cx),
        pair(cz),
        st.tuples(st.lists(q, min_size=2, max_size=2, unique=True), ang).map(lambda a: cphase(a[0][0], a[0][1], a[1])),
        st.lists(q, min_size=3, max_size=3, unique=True).map(lambda p: toffoli(p[0], p[1], p[2], True, False)),
        st.lists(st.tuples(q, st.booleans()), min_size=3, max_size=4, unique_by=lambda t: t[0]).flatmap(
            lambda ctl: q.filter(lambda t: t not in {c for c, _ in ctl}).map(lambda t: mcx(ctl, t))
        ),
    )


circuits = st.integers(5, 6).flatmap(
    lambda nq: st.lists(gate_strategy(nq), max_size=12).map(lambda gs: Circuit(layout(nq), gs))
)


def test_single_gate_unitaries():
    np.testing.assert_allclose(to_unitary(Circuit(layout(1), [h(0)])), np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    c = Circuit(layout(2), [x(0), x(1), cz(0, 1), x(0), x(1)])
    np.testing.assert_allclose(to_unitary(c), np.diag([-1, 1, 1, 1]))


def test_little_endian_cx():
    U = to_unitary(Circuit(layout(2), [cx(0, 1)]))
    # |q1 q0> = |01> (index 1) -> |11> (index 3)
    assert U[3, 1] == 1 and U[0, 0] == 1


def test_lowered_toffoli():
    low = lower(Circuit(layout(3), [toffoli(0, 1, 2)]))
    assert low.is_elementary
    assert np.abs(to_unitary(low) - oracles.toffoli_matrix()).max() <= 1e-12
    assert count_two_qubit_gates(low) == 6


def test_count():
    assert count_two_qubit_gates(Circuit(layout(2), [cx(0, 1)] * 3)) == 3
    assert count_two_qubit_gates(Circuit(layout(2), [h(0), x(1), phase(0, 0.1)])) == 0
    with pytest.raises(ValueError):
        count_two_qubit_gates(Circuit(layout(3), [toffoli(0, 1, 2)]))


@given(circuits)
@settings(max_examples=40, deadline=None)
def test_compose_and_inverse(c):
    empty = Circuit(c.layout, [])
    assert compose(c, empty) == c
    assert inverse(inverse(c)) == c
    I = to_unitary(compose(c, inverse(c)))
    assert np.abs(I - np.eye(I.shape[0])).max() <= 1e-12
    assert len(compose(c, c)) == 2 * len(c)


@given(circuits, circuits)
@settings(max_examples=30, deadline=None)
def test_compose_order(a, b):
    if a.layout != b.layout:
        with pytest.raises(ValueError):
            compose(a, b)
        return
    np.testing.assert_allclose(to_unitary(compose(a, b)), to_unitary(b) @ to_unitary(a), atol=1e-12)


@given(circuits)
@settings(max_examples=60, deadline=None)
def test_text_round_trip(c):
    assert parse(serialize(c)) == c
    assert serialize(parse(serialize(c))) == serialize(c)


def test_text_examples():
    c = parse("register q 4\ncx q3 q0\n")
    assert c.gates == (cx(3, 0),)
    assert serialize(c).splitlines()[-1] == "cx q3 q0"
    g = parse("register q 3\nmcx +q2 -q1 q0").gates[0]
    assert g.kind is Kind.TOFFOLI or g.kind is Kind.MCX
    assert g.controls == ((2, True), (1, False)) and g.targets == (0,)
    messy = "register   q 3\n\n   h    q0   # comment\nphase(0.5)  q1\n"
    assert serialize(parse(messy)) == "register q 3\nh q0\nphase(0.5) q1\n"


@pytest.mark.parametrize(
    "text",
    [
        "register q 2\nfoo q0",
        "register q 2\ncx q0",
        "register q 2\nh q5",
        "register q 2\nphase q0",
        "register q 2\nh q0\nregister r 1",
        "register q 3\nmcx q0 q1 q2",
        "register q 2\nphase(abc) q0",
        "register q 2\nh -q0",
    ],
)
def test_parse_errors(text):
    with pytest.raises(CircuitParseError):
        parse(text)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(Kind.CX, (0,), ())
    with pytest.raises(ValueError):
        Gate(Kind.PHASE, (0,), ())
    with pytest.raises(ValueError):
        Circuit(layout(2), [cx(0, 2)])


def test_unitary_cap():
    with pytest.raises(UnitaryCapError):
        to_unitary(Circuit(layout(15), []))


def test_increment_decrement_inverse():
    inc, dec = to_unitary(build_increment(3)), to_unitary(build_decrement(3))
    np.testing.assert_allclose(inc, oracles.increment_matrix(3), atol=1e-12)
    np.testing.assert_allclose(dec, inc.T, atol=1e-12)


def test_layout_helpers():
    lay = RegisterLayout((("node", 2), ("subnode", 1), ("work", 2), ("anc", 1)))
    assert lay.num_qubits == 6
    assert lay.qubits("subnode") == [2]
    assert lay.ancilla_qubits == [3, 4, 5]
    assert lay.data_qubits == [0, 1, 2]
    assert lay.with_width("anc", 3).num_qubits == 8
    with pytest.raises(ValueError):
        RegisterLayout((("a", 1), ("a", 2)))
