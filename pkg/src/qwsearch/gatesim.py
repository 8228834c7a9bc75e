"""Gate-level state-vector simulation and the bridge to walk states.

A qubit state is a flat ``2**q`` complex vector in little-endian order. The
walk amplitude of ``(v, a)`` sits at basis index ``v + (a << node_bits)``
with every ancilla at ``|0>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .graphs import FamilySpec
from .walk import WalkState

__all__ = [
    "QubitState",
    "run",
    "embedding_indices",
    "embed_walk_state",
    "extract_walk_state",
    "restricted_unitary",
    "phase_aligned_deviation",
]


@dataclass
class QubitState:
    num_qubits: int
    amps: np.ndarray

    @classmethod
    def zero(cls, num_qubits: int) -> QubitState:
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(num_qubits, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def run(c: Circuit, psi: QubitState) -> QubitState:
    """Apply an elementary circuit to ``psi`` and return the new state."""
    if not c.is_elementary:
        raise ValueError("run() executes elementary circuits only; lower it first")
    nq = c.num_qubits
    if psi.num_qubits != nq:
        raise ValueError(f"state has {psi.num_qubits} qubits, circuit has {nq}")
    t = psi.amps.astype(np.complex128, copy=True).reshape((2,) * nq)
    for g in c.gates:
        g.apply_to(t, nq)
    return QubitState(nq, t.reshape(-1))


def _check_layout(spec: FamilySpec, layout) -> None:
    node_bits = layout.num_qubits - len(layout.ancilla_qubits) - layout.width("subnode")
    if node_bits != spec.node_bits:
        raise ValueError(f"layout has {node_bits} node qubits, {spec} needs {spec.node_bits}")
    if (1 << layout.width("subnode")) < spec.degree:
        raise ValueError("subnode register too narrow for the degree")
    if layout.data_qubits != list(range(spec.node_bits + layout.width("subnode"))):
        raise ValueError("layout must place node and subnode registers before ancillas")


def embedding_indices(spec: FamilySpec, layout) -> np.ndarray:
    """Basis index of every walk index ``v * d + a``."""
    _check_layout(spec, layout)
    N, d = spec.node_count, spec.degree
    v = np.repeat(np.arange(N, dtype=np.int64), d)
    a = np.tile(np.arange(d, dtype=np.int64), N)
    return v + (a << spec.node_bits)


def embed_walk_state(spec: FamilySpec, w: WalkState, layout) -> QubitState:
    idx = embedding_indices(spec, layout)
    amps = np.zeros(1 << layout.num_qubits, dtype=np.complex128)
    amps[idx] = w.flat
    return QubitState(layout.num_qubits, amps)


def extract_walk_state(spec: FamilySpec, psi: QubitState, layout) -> tuple[WalkState, float]:
    """Inverse of :func:`embed_walk_state`; also returns the probability left outside."""
    idx = embedding_indices(spec, layout)
    inside = psi.amps[idx]
    leak = max(0.0, float(np.sum(np.abs(psi.amps) ** 2) - np.sum(np.abs(inside) ** 2)))
    w = WalkState(spec, inside.reshape(spec.node_count, spec.degree).copy())
    return w, leak


def restricted_unitary(spec: FamilySpec, unitary: np.ndarray, layout) -> tuple[np.ndarray, float]:
    """Block of ``unitary`` on the embedded walk space, plus the worst column leak."""
    idx = embedding_indices(spec, layout)
    cols = unitary[:, idx]
    block = cols[idx, :]
    leak = float(np.max(1.0 - np.sum(np.abs(block) ** 2, axis=0)))
    return block, max(leak, 0.0)


def phase_aligned_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max entry deviation after removing one global phase.

    The phase reference is the largest-magnitude entry of ``expected``.
    """
    actual = np.asarray(actual).reshape(-1)
    expected = np.asarray(expected).reshape(-1)
    k = int(np.argmax(np.abs(expected)))
    if abs(actual[k]) == 0.0:
        return float(np.max(np.abs(actual - expected)))
    ph = actual[k] / abs(actual[k]) * (abs(expected[k]) / expected[k])
    return float(np.max(np.abs(actual - ph * expected)))
