"""Structured simulator for the search walk ``U = S C``.

The state lives on the (node, subnode) space, stored node-major as an
``(N, d)`` complex array. The coin applies the Grover reflection
``2/d J - I`` to every node block except the marked one, which is negated.
The shift is a fixed index permutation built once per family spec.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .graphs import FamilySpec, neighbor_table

__all__ = [
    "SearchConfig",
    "WalkState",
    "uniform_state",
    "basis_state",
    "apply_coin",
    "apply_shift",
    "step",
    "marked_probability",
    "evolve",
    "step_matrix",
]


@dataclass(frozen=True)
class SearchConfig:
    """Marked node for the search. ``marked=None`` disables the perturbation."""

    marked: int | None

    def validate(self, spec: FamilySpec) -> None:
        if self.marked is not None and not 0 <= self.marked < spec.node_count:
            raise ValueError(f"marked node {self.marked} out of range for {spec}")


@dataclass
class WalkState:
    spec: FamilySpec
    amps: np.ndarray  # shape (N, d), complex128

    @property
    def flat(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def node_marginals(self) -> np.ndarray:
        return np.sum(np.abs(self.amps) ** 2, axis=1)

    def copy(self) -> WalkState:
        return WalkState(self.spec, self.amps.copy())


@lru_cache(maxsize=32)
def _shift_permutation(spec: FamilySpec) -> np.ndarray:
    # gather form new[i] = old[inv[i]]; the shift is an involution so inv == table
    return neighbor_table(spec)


def uniform_state(spec: FamilySpec) -> WalkState:
    spec.check_size()
    N, d = spec.node_count, spec.degree
    amps = np.full((N, d), 1.0 / np.sqrt(N * d), dtype=np.complex128)
    return WalkState(spec, amps)


def basis_state(spec: FamilySpec, v: int, a: int) -> WalkState:
    spec.check_size()
    amps = np.zeros((spec.node_count, spec.degree), dtype=np.complex128)
    amps[v, a] = 1.0
    return WalkState(spec, amps)


def apply_coin(state: WalkState, cfg: SearchConfig) -> WalkState:
    cfg.validate(state.spec)
    amps = state.amps
    out = 2.0 * amps.mean(axis=1, keepdims=True) - amps
    if cfg.marked is not None:
        out[cfg.marked] = -amps[cfg.marked]
    return WalkState(state.spec, out)


def apply_shift(state: WalkState) -> WalkState:
    perm = _shift_permutation(state.spec)
    flat = state.amps.reshape(-1)
    return WalkState(state.spec, flat[perm].reshape(state.amps.shape))


def step(state: WalkState, cfg: SearchConfig) -> WalkState:
    return apply_shift(apply_coin(state, cfg))


def marked_probability(state: WalkState, marked: int) -> float:
    if not 0 <= marked < state.spec.node_count:
        raise ValueError(f"marked node {marked} out of range")
    row = state.amps[marked]
    return float(np.sum(row.real**2 + row.imag**2))


def evolve(spec: FamilySpec, cfg: SearchConfig, steps: int) -> np.ndarray:
    """Success probability ``p(t)`` for ``t = 0..steps`` from the uniform state."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    cfg.validate(spec)
    if cfg.marked is None:
        raise ValueError("evolve needs a marked node")
    state = uniform_state(spec)
    probs = np.empty(steps + 1)
    probs[0] = marked_probability(state, cfg.marked)
    for t in range(1, steps + 1):
        state = step(state, cfg)
        probs[t] = marked_probability(state, cfg.marked)
    return probs


def step_matrix(spec: FamilySpec, cfg: SearchConfig) -> np.ndarray:
    """Dense matrix of ``step``, built column by column. Small sizes only."""
    N, d = spec.node_count, spec.degree
    dim = N * d
    if dim > 4096:
        raise ValueError(f"step_matrix is for small specs, got dimension {dim}")
    cols = np.eye(dim, dtype=np.complex128).reshape(dim, N, d)
    out = np.empty((dim, dim), dtype=np.complex128)
    for j in range(dim):
        out[:, j] = step(WalkState(spec, cols[j]), cfg).flat
    return out
