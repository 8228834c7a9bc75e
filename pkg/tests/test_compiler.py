import numpy as np
import pytest

import oracles
from qwsearch.circuit import Circuit, Kind, RegisterLayout, count_two_qubit_gates, cx, to_unitary, x
from qwsearch.compiler import (
    NotCompilableError,
    build_controlled,
    build_controlled_phase_pi,
    build_decrement,
    build_grover,
    build_increment,
    build_mcx,
    build_step_circuit,
    is_compilable,
    lower,
    step_manifest,
)
from qwsearch.gatesim import restricted_unitary
from qwsearch.graphs import FamilySpec
from qwsearch.walk import SearchConfig, step_matrix

# frozen after checking each against its matrix oracle
INCREMENT3_TWO_QUBIT = 7
HYPERCUBE4_STEP_TWO_QUBIT = 78


def clean_block(c, data):
    return oracles.restrict_to_clean_ancilla(to_unitary(c), data)


def mcx_matrix(k):
    D = 1 << (k + 1)
    M = np.eye(D)
    full = (1 << k) - 1
    M[[full, full | (1 << k)]] = M[[full | (1 << k), full]]
    return M


@pytest.mark.parametrize("k", range(1, 5))
def test_grover(k):
    d = 1 << k
    c = build_grover(k)
    assert c.is_elementary
    np.testing.assert_allclose(clean_block(c, list(range(k))), 2 / d * np.ones((d, d)) - np.eye(d), atol=1e-12)


def test_grover_small_cases():
    np.testing.assert_allclose(to_unitary(build_grover(1)), [[0, 1], [1, 0]], atol=1e-12)
    U = to_unitary(build_grover(2))
    np.testing.assert_allclose(np.diag(U), -0.5, atol=1e-12)


@pytest.mark.parametrize("k", range(1, 7))
def test_increment_is_cyclic(k):
    inc = clean_block(lower(build_increment(k)), list(range(k)))
    dec = clean_block(lower(build_decrement(k)), list(range(k)))
    np.testing.assert_allclose(inc, oracles.increment_matrix(k), atol=1e-12)
    np.testing.assert_allclose(dec @ inc, np.eye(1 << k), atol=1e-12)


def test_increment_examples():
    U = to_unitary(lower(build_increment(3)))
    assert U[0b110, 0b101] == pytest.approx(1)
    assert U[0b000, 0b111] == pytest.approx(1)
    assert count_two_qubit_gates(lower(build_increment(3))) == INCREMENT3_TWO_QUBIT


def test_mcx_small():
    c = build_mcx([(0, True)], 1)
    assert [g.kind for g in c.gates] == [Kind.CX]
    assert count_two_qubit_gates(build_mcx([(0, True), (1, True)], 2)) == 6


@pytest.mark.parametrize("k", range(2, 6))
def test_mcx_vchain(k):
    anc = list(range(k + 1, k + 1 + max(0, k - 2)))
    c = build_mcx([(q, True) for q in range(k)], k, anc)
    assert c.is_elementary
    assert np.abs(clean_block(c, list(range(k + 1))) - mcx_matrix(k)).max() <= 1e-12


def test_mcx_polarity():
    c = build_mcx([(0, True), (1, False), (2, True)], 3, [4])
    U = clean_block(c, [0, 1, 2, 3])
    for v in range(8):
        fire = (v & 1) and not (v >> 1) & 1 and (v >> 2) & 1
        assert U[v ^ (8 if fire else 0), v] == pytest.approx(1)


def test_mcx_rejects_overlap():
    with pytest.raises(ValueError):
        build_mcx([(0, True), (1, True)], 1)


def test_controlled_phase_pi():
    assert [g.kind for g in build_controlled_phase_pi([(0, True)]).gates] == [Kind.Z]
    np.testing.assert_allclose(to_unitary(build_controlled_phase_pi([(0, True), (1, True)])), np.diag([1, 1, 1, -1]), atol=1e-12)
    pattern = [(q, bool((0b0100 >> q) & 1)) for q in range(4)]
    c = build_controlled_phase_pi(pattern, ancilla=[4, 5])
    expected = np.ones(16)
    expected[4] = -1
    np.testing.assert_allclose(clean_block(c, [0, 1, 2, 3]), np.diag(expected), atol=1e-12)


def test_build_controlled():
    lay = RegisterLayout((("q", 2),))
    c = build_controlled(Circuit(lay, [x(1)]), [(0, True)])
    np.testing.assert_allclose(to_unitary(lower(c)), to_unitary(Circuit(lay, [cx(0, 1)])), atol=1e-12)
    g1 = build_grover(1)
    lay2 = RegisterLayout((("subnode", 1), ("c", 1)))
    cg = build_controlled(Circuit(lay2, [g.remap({0: 0}) for g in g1.gates]), [(1, True)])
    np.testing.assert_allclose(to_unitary(lower(cg)), to_unitary(Circuit(lay2, [cx(1, 0)])), atol=1e-12)


def test_controlled_increment():
    inc = build_increment(2)
    lay = RegisterLayout((("reg", 2), ("c", 1)))
    c = build_controlled(Circuit(lay, inc.gates), [(2, True)])
    want = np.zeros((8, 8))
    for v in range(8):
        ctl, r = v >> 2, v & 3
        w = (ctl << 2) | ((r + 1) % 4 if ctl else r)
        want[w, v] = 1
    np.testing.assert_allclose(to_unitary(lower(c)), want, atol=1e-12)


def test_controlled_pattern_uses_work():
    lay = RegisterLayout((("q", 3), ("work", 2), ("anc", 0)))
    c = build_controlled(Circuit(lay, [x(2)]), [(0, True), (1, False)], ancilla=[3, 4])
    U = clean_block(lower(c), [0, 1, 2])
    for v in range(8):
        fire = (v & 1) and not (v >> 1) & 1
        assert U[v ^ (4 if fire else 0), v] == pytest.approx(1)


STEP_SPECS = [FamilySpec.hypercube(2), FamilySpec.hypercube(4), FamilySpec.complete(1), FamilySpec.complete(2), FamilySpec.twisted_toroid(2, 2), FamilySpec.twisted_toroid(1, 2)]


@pytest.mark.parametrize("spec", STEP_SPECS, ids=str)
def test_step_circuit_matches_walk(spec):
    N = spec.node_count
    for marked in sorted({0, N // 3, N - 1}):
        low = lower(build_step_circuit(spec, marked))
        assert low.is_elementary
        block, leak = restricted_unitary(spec, to_unitary(low), low.layout)
        want = step_matrix(spec, SearchConfig(marked))
        k = np.unravel_index(np.argmax(np.abs(want)), want.shape)
        ph = block[k] / want[k]
        assert abs(abs(ph) - 1) < 1e-10
        assert np.abs(block - ph * want).max() <= 1e-10
        assert leak <= 1e-10


def test_hypercube4_count_is_marked_independent():
    s = FamilySpec.hypercube(4)
    counts = {count_two_qubit_gates(lower(build_step_circuit(s, m))) for m in range(16)}
    assert counts == {HYPERCUBE4_STEP_TWO_QUBIT}


@pytest.mark.parametrize("n", [1, 3, 5, 6])
def test_non_compilable_hypercube(n):
    s = FamilySpec.hypercube(n)
    assert not is_compilable(s)
    with pytest.raises(NotCompilableError):
        build_step_circuit(s, 0)


def test_manifest_consistent():
    s = FamilySpec.twisted_toroid(2, 3)
    comp = build_step_circuit(s, 5)
    low = lower(comp)
    man = step_manifest(s, 5, comp, low)
    assert man["lowered_two_qubit_count"] == count_two_qubit_gates(low)
    assert man["num_qubits"] == sum(man["registers"].values())
    assert man["ancilla_count"] == man["registers"]["work"] + man["registers"]["anc"]


def test_lower_is_identity_on_elementary():
    c = Circuit(RegisterLayout((("q", 2),)), [cx(0, 1)])
    assert lower(c) == c


def test_step_rejects_bad_marked():
    with pytest.raises(ValueError):
        build_step_circuit(FamilySpec.complete(2), 4)
