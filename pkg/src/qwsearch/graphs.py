"""Graph families for coined quantum-walk search.

Three regular families are supported:

- ``hypercube``: ``2**n`` nodes, degree ``n``; coin ``a`` flips bit ``a`` of the node.
- ``complete``: ``2**n`` nodes with a self loop on every node, degree ``2**n``;
  the shift swaps the node and subnode labels.
- ``twisted_toroid``: a ``2**n x 2**m`` grid whose boundary wraps with a
  one-unit offset, degree 4.

Node indices of the toroid pack ``x`` into the high bits and ``y`` into the low
bits (``index = x * 2**m + y``). Toroid subnodes are ``0=+x, 1=-x, 2=+y, 3=-y``;
bit 0 is the sign and bit 1 the axis. Every shift here is flip-flop, so
``neighbor(neighbor(v, a)) == (v, a)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "FamilySpec",
    "SizeCapError",
    "DEFAULT_MAX_AMPS",
    "max_amps",
    "node_count",
    "degree",
    "neighbor",
    "neighbor_table",
    "encode_node",
    "decode_node",
    "toroid_coords",
    "toroid_index",
]

MAX_EXPONENT = 40
DEFAULT_MAX_AMPS = 2**26

PLUS_X, MINUS_X, PLUS_Y, MINUS_Y = 0, 1, 2, 3


class SizeCapError(ValueError):
    """Raised when a walk would need more amplitudes than the configured cap."""


def max_amps() -> int:
    """Amplitude cap, overridable through ``QWALK_MAX_AMPS``."""
    raw = os.environ.get("QWALK_MAX_AMPS")
    if raw is None:
        return DEFAULT_MAX_AMPS
    return int(raw)


class Family(str, Enum):
    HYPERCUBE = "hypercube"
    COMPLETE = "complete"
    TWISTED_TOROID = "twisted_toroid"


@dataclass(frozen=True)
class FamilySpec:
    """A graph family plus its size parameters.

    ``n`` is the hypercube dimension, or the log2 node count of the complete
    graph, or the log2 width of the toroid along x. ``m`` is only used by the
    toroid (log2 height along y).
    """

    family: Family
    n: int
    m: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if self.family is Family.TWISTED_TOROID:
            if self.m is None or self.m < 1:
                raise ValueError("twisted_toroid needs m >= 1")
            if self.n + self.m > MAX_EXPONENT:
                raise ValueError(f"n + m = {self.n + self.m} exceeds cap {MAX_EXPONENT}")
        else:
            if self.m is not None:
                raise ValueError(f"{self.family.value} takes no m parameter")
            if self.n > MAX_EXPONENT:
                raise ValueError(f"n = {self.n} exceeds cap {MAX_EXPONENT}")

    @classmethod
    def hypercube(cls, n: int) -> FamilySpec:
        return cls(Family.HYPERCUBE, n)

    @classmethod
    def complete(cls, n: int) -> FamilySpec:
        return cls(Family.COMPLETE, n)

    @classmethod
    def twisted_toroid(cls, n: int, m: int) -> FamilySpec:
        return cls(Family.TWISTED_TOROID, n, m)

    @classmethod
    def from_dict(cls, d: dict) -> FamilySpec:
        """Build from the JSON form, e.g. ``{"family": "twisted_toroid", "n": 5, "m": 5}``."""
        return cls(Family(d["family"]), int(d["n"]), None if d.get("m") is None else int(d["m"]))

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "n": self.n}
        if self.m is not None:
            d["m"] = self.m
        return d

    @property
    def node_count(self) -> int:
        return node_count(self)

    @property
    def degree(self) -> int:
        return degree(self)

    @property
    def node_bits(self) -> int:
        """Width of the node bit string."""
        if self.family is Family.TWISTED_TOROID:
            return self.n + self.m
        return self.n

    def check_size(self, cap: int | None = None) -> None:
        cap = max_amps() if cap is None else cap
        if self.node_count * self.degree > cap:
            raise SizeCapError(
                f"{self.node_count} nodes x {self.degree} subnodes exceeds cap of {cap} amplitudes"
            )

    def __str__(self):
        if self.family is Family.TWISTED_TOROID:
            return f"{self.family.value}({self.n},{self.m})"
        return f"{self.family.value}({self.n})"


def node_count(spec: FamilySpec) -> int:
    if spec.family is Family.TWISTED_TOROID:
        return 1 << (spec.n + spec.m)
    return 1 << spec.n


def degree(spec: FamilySpec) -> int:
    if spec.family is Family.HYPERCUBE:
        return spec.n
    if spec.family is Family.COMPLETE:
        return 1 << spec.n
    return 4


def toroid_coords(spec: FamilySpec, v):
    """Split a toroid node index into ``(x, y)``. Works elementwise on arrays."""
    return v >> spec.m, v & ((1 << spec.m) - 1)


def toroid_index(spec: FamilySpec, x, y):
    return (x << spec.m) | y


def _toroid_neighbor(spec: FamilySpec, v, a):
    nx, ny = 1 << spec.n, 1 << spec.m
    x, y = toroid_coords(spec, v)
    axis_y = (a >> 1) & 1
    minus = a & 1
    # +x: x+1, wrapping (nx-1, y) -> (0, y-1); -x is the inverse
    px = np.where(x == nx - 1, 0, x + 1)
    py_for_x = np.where(x == nx - 1, (y - 1) % ny, y)
    mx = np.where(x == 0, nx - 1, x - 1)
    my_for_x = np.where(x == 0, (y + 1) % ny, y)
    # +y: y+1, wrapping (x, ny-1) -> (x-1, 0); -y is the inverse
    qy = np.where(y == ny - 1, 0, y + 1)
    qx_for_y = np.where(y == ny - 1, (x - 1) % nx, x)
    ry = np.where(y == 0, ny - 1, y - 1)
    rx_for_y = np.where(y == 0, (x + 1) % nx, x)

    new_x = np.where(axis_y, np.where(minus, rx_for_y, qx_for_y), np.where(minus, mx, px))
    new_y = np.where(axis_y, np.where(minus, ry, qy), np.where(minus, my_for_x, py_for_x))
    return toroid_index(spec, new_x, new_y), a ^ 1


def neighbor(spec: FamilySpec, v: int, a: int) -> tuple[int, int]:
    """Shift target of ``(v, a)``.

    >>> neighbor(FamilySpec.hypercube(5), 0b00000, 2)
    (4, 2)
    """
    d = degree(spec)
    if not 0 <= a < d:
        raise ValueError(f"subnode {a} out of range for degree {d}")
    if not 0 <= v < node_count(spec):
        raise ValueError(f"node {v} out of range")
    if spec.family is Family.HYPERCUBE:
        return v ^ (1 << a), a
    if spec.family is Family.COMPLETE:
        return a, v
    w, b = _toroid_neighbor(spec, np.int64(v), np.int64(a))
    return int(w), int(b)


def neighbor_table(spec: FamilySpec) -> np.ndarray:
    """Flat shift permutation over ``node * degree + subnode`` indices.

    ``table[i]`` is the index that amplitude ``i`` moves to.
    """
    N, d = node_count(spec), degree(spec)
    v = np.repeat(np.arange(N, dtype=np.int64), d)
    a = np.tile(np.arange(d, dtype=np.int64), N)
    if spec.family is Family.HYPERCUBE:
        w, b = v ^ (np.int64(1) << a), a
    elif spec.family is Family.COMPLETE:
        w, b = a, v
    else:
        w, b = _toroid_neighbor(spec, v, a)
    return w * d + b


def encode_node(spec: FamilySpec, v: int) -> str:
    """Bit string of node ``v``, most significant bit first.

    For the toroid this is the x bits followed by the y bits.
    """
    if not 0 <= v < node_count(spec):
        raise ValueError(f"node {v} out of range")
    return format(v, f"0{spec.node_bits}b")


def decode_node(spec: FamilySpec, bits: str) -> int:
    if len(bits) != spec.node_bits or set(bits) - {"0", "1"}:
        raise ValueError(f"expected {spec.node_bits} binary digits, got {bits!r}")
    return int(bits, 2)
