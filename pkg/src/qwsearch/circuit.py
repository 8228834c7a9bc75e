"""Circuit intermediate representation.

A :class:`Circuit` is an ordered tuple of :class:`Gate` records over a
:class:`RegisterLayout`. Gates carry polarity-tagged controls, so a control
can fire on ``|0>`` as well as ``|1>``. A circuit is *elementary* when it only
contains ``h, x, z, phase, cx, cz, cphase, gphase`` with positive controls;
anything else (``toffoli``, ``mcx``, negative controls) is *composite* and
must go through :func:`qwsearch.compiler.lower` before gate counting.

Text format, one gate per line::

    register node 2
    register subnode 1
    h q0
    cx q2 q0
    mcx +q2 -q1 q0
    phase(0.7853981633974483) q1
    gphase(3.141592653589793)

Controls come before targets. For ``cx/cz/cphase/toffoli`` a bare control is
positive; ``mcx`` controls are always signed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernel

__all__ = [
    "Kind",
    "Gate",
    "RegisterLayout",
    "Circuit",
    "CircuitParseError",
    "UnitaryCapError",
    "compose",
    "inverse",
    "to_unitary",
    "count_two_qubit_gates",
    "serialize",
    "parse",
    "MAX_UNITARY_QUBITS",
]

MAX_UNITARY_QUBITS = 14
ANCILLA_REGISTERS = ("work", "anc")


class CircuitParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class UnitaryCapError(ValueError):
    pass


class Kind(str, Enum):
    H = "h"
    X = "x"
    Z = "z"
    PHASE = "phase"
    CX = "cx"
    CZ = "cz"
    CPHASE = "cphase"
    TOFFOLI = "toffoli"
    MCX = "mcx"
    GLOBALPHASE = "gphase"


ELEMENTARY_KINDS = frozenset(
    {Kind.H, Kind.X, Kind.Z, Kind.PHASE, Kind.CX, Kind.CZ, Kind.CPHASE, Kind.GLOBALPHASE}
)
TWO_QUBIT_KINDS = frozenset({Kind.CX, Kind.CZ, Kind.CPHASE})
PARAMETRIC_KINDS = frozenset({Kind.PHASE, Kind.CPHASE, Kind.GLOBALPHASE})

# fixed control arity; None means variable (mcx)
_N_CONTROLS = {
    Kind.H: 0, Kind.X: 0, Kind.Z: 0, Kind.PHASE: 0, Kind.GLOBALPHASE: 0,
    Kind.CX: 1, Kind.CZ: 1, Kind.CPHASE: 1, Kind.TOFFOLI: 2, Kind.MCX: None,
}

_BASE_OP = {
    Kind.H: "h", Kind.X: "x", Kind.CX: "x", Kind.TOFFOLI: "x", Kind.MCX: "x",
    Kind.Z: "z", Kind.CZ: "z", Kind.PHASE: "phase", Kind.CPHASE: "phase",
    Kind.GLOBALPHASE: "gphase",
}


@dataclass(frozen=True)
class Gate:
    """One gate: a base operation on ``targets`` gated by ``controls``.

    ``controls`` holds ``(qubit, positive)`` pairs.
    """

    kind: Kind
    targets: tuple[int, ...]
    controls: tuple[tuple[int, bool], ...] = ()
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(
            self, "controls", tuple((int(q), bool(p)) for q, p in self.controls)
        )
        want = _N_CONTROLS[self.kind]
        if want is not None and len(self.controls) != want:
            raise ValueError(f"{self.kind.value} takes {want} controls, got {len(self.controls)}")
        n_targets = 0 if self.kind is Kind.GLOBALPHASE else 1
        if len(self.targets) != n_targets:
            raise ValueError(f"{self.kind.value} takes {n_targets} targets")
        if (self.theta is None) == (self.kind in PARAMETRIC_KINDS):
            raise ValueError(f"theta mismatch for {self.kind.value}")
        qs = self.qubits
        if len(set(qs)) != len(qs):
            raise ValueError(f"repeated qubit in {self}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.controls) + self.targets

    @property
    def is_elementary(self) -> bool:
        return self.kind in ELEMENTARY_KINDS and all(p for _, p in self.controls)

    def inverse(self) -> Gate:
        if self.kind in PARAMETRIC_KINDS:
            return Gate(self.kind, self.targets, self.controls, -self.theta)
        return self

    def remap(self, mapping) -> Gate:
        return Gate(
            self.kind,
            tuple(mapping[t] for t in self.targets),
            tuple((mapping[q], p) for q, p in self.controls),
            self.theta,
        )

    def apply_to(self, psi: np.ndarray, nq: int) -> None:
        """Apply this gate in place to a tensor-shaped state (see ``_kernel``)."""
        target = self.targets[0] if self.targets else None
        _kernel.apply(psi, _BASE_OP[self.kind], target, self.controls, self.theta, nq)


# constructors kept short; the compiler uses them heavily
def h(q):
    return Gate(Kind.H, (q,))


def x(q):
    return Gate(Kind.X, (q,))


def z(q):
    return Gate(Kind.Z, (q,))


def phase(q, theta):
    return Gate(Kind.PHASE, (q,), theta=float(theta))


def gphase(theta):
    return Gate(Kind.GLOBALPHASE, (), theta=float(theta))


def cx(c, t, positive=True):
    return Gate(Kind.CX, (t,), ((c, positive),))


def cz(c, t, positive=True):
    return Gate(Kind.CZ, (t,), ((c, positive),))


def cphase(c, t, theta, positive=True):
    return Gate(Kind.CPHASE, (t,), ((c, positive),), float(theta))


def toffoli(c1, c2, t, p1=True, p2=True):
    return Gate(Kind.TOFFOLI, (t,), ((c1, p1), (c2, p2)))


def mcx(controls, t):
    """X on ``t`` gated by ``controls``; picks the narrowest kind that fits."""
    controls = tuple(controls)
    if len(controls) == 0:
        return x(t)
    if len(controls) == 1:
        return Gate(Kind.CX, (t,), controls)
    if len(controls) == 2:
        return Gate(Kind.TOFFOLI, (t,), controls)
    return Gate(Kind.MCX, (t,), controls)


@dataclass(frozen=True)
class RegisterLayout:
    """Named, disjoint qubit registers laid out consecutively from qubit 0.

    Register-local index ``i`` of a register is bit ``i`` of its value.
    ``work`` and ``anc`` are ancilla registers: ``work`` holds ancillas the
    composite circuit uses explicitly, ``anc`` is scratch for lowering.
    """

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        regs = tuple((str(n), int(w)) for n, w in self.registers)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names: {names}")
        if any(w < 0 for _, w in regs):
            raise ValueError("register widths must be >= 0")
        object.__setattr__(self, "registers", regs)

    @property
    def num_qubits(self) -> int:
        return sum(w for _, w in self.registers)

    def width(self, name: str) -> int:
        return dict(self.registers).get(name, 0)

    def offset(self, name: str) -> int:
        off = 0
        for n, w in self.registers:
            if n == name:
                return off
            off += w
        raise KeyError(name)

    def qubits(self, name: str) -> list[int]:
        if name not in dict(self.registers):
            return []
        off = self.offset(name)
        return list(range(off, off + self.width(name)))

    @property
    def ancilla_qubits(self) -> list[int]:
        return [q for name in ANCILLA_REGISTERS for q in self.qubits(name)]

    @property
    def data_qubits(self) -> list[int]:
        anc = set(self.ancilla_qubits)
        return [q for q in range(self.num_qubits) if q not in anc]

    def with_width(self, name: str, width: int) -> RegisterLayout:
        regs = dict(self.registers)
        if name in regs:
            return RegisterLayout(tuple((n, width if n == name else w) for n, w in self.registers))
        return RegisterLayout(self.registers + ((name, width),))

    def to_dict(self) -> dict:
        return {n: w for n, w in self.registers}


@dataclass(frozen=True)
class Circuit:
    layout: RegisterLayout
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        nq = self.layout.num_qubits
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < nq:
                    raise ValueError(f"gate {g} references qubit {q} outside 0..{nq - 1}")

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    @property
    def level(self) -> str:
        return "elementary" if all(g.is_elementary for g in self.gates) else "composite"

    @property
    def is_elementary(self) -> bool:
        return self.level == "elementary"

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Gates of ``a`` followed by gates of ``b``."""
    if a.layout != b.layout:
        raise ValueError("cannot compose circuits with different layouts")
    return Circuit(a.layout, a.gates + b.gates)


def inverse(c: Circuit) -> Circuit:
    return Circuit(c.layout, tuple(g.inverse() for g in reversed(c.gates)))


def to_unitary(c: Circuit, max_qubits: int = MAX_UNITARY_QUBITS) -> np.ndarray:
    """Matrix of ``c`` in the little-endian computational basis.

    Works for composite circuits too; each gate is applied as its exact
    (multi-)controlled base operation.
    """
    nq = c.num_qubits
    if nq > max_qubits:
        raise UnitaryCapError(f"{nq} qubits exceeds the toUnitary cap of {max_qubits}")
    dim = 1 << nq
    psi = np.eye(dim, dtype=np.complex128).reshape((2,) * nq + (dim,))
    for g in c.gates:
        g.apply_to(psi, nq)
    return psi.reshape(dim, dim)


def count_two_qubit_gates(c: Circuit) -> int:
    if not c.is_elementary:
        raise ValueError("two-qubit counting needs an elementary circuit; lower it first")
    return sum(1 for g in c.gates if g.kind in TWO_QUBIT_KINDS)


def _fmt_q(q, positive=None):
    if positive is None:
        return f"q{q}"
    return f"{'+' if positive else '-'}q{q}"


def serialize(c: Circuit) -> str:
    lines = [f"register {n} {w}" for n, w in c.layout.registers]
    for g in c.gates:
        head = g.kind.value
        if g.theta is not None:
            head = f"{head}({g.theta!r})"
        parts = [head]
        for q, p in g.controls:
            if g.kind is Kind.MCX:
                parts.append(_fmt_q(q, p))
            else:
                parts.append(_fmt_q(q) if p else _fmt_q(q, False))
        parts.extend(_fmt_q(t) for t in g.targets)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


_HEAD_RE = re.compile(r"^([a-z]+)(?:\(([^()]*)\))?$")
_QUBIT_RE = re.compile(r"^([+-]?)q(\d+)$")


def parse(text: str) -> Circuit:
    registers: list[tuple[str, int]] = []
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "register":
            if gates:
                raise CircuitParseError(lineno, "register declared after gates")
            if len(toks) != 3 or not toks[2].isdigit():
                raise CircuitParseError(lineno, "expected 'register <name> <width>'")
            registers.append((toks[1], int(toks[2])))
            continue
        m = _HEAD_RE.match(toks[0])
        if not m:
            raise CircuitParseError(lineno, f"bad gate head {toks[0]!r}")
        try:
            kind = Kind(m.group(1))
        except ValueError:
            raise CircuitParseError(lineno, f"unknown gate kind {m.group(1)!r}") from None
        theta = None
        if m.group(2) is not None:
            try:
                theta = float(m.group(2))
            except ValueError:
                raise CircuitParseError(lineno, f"bad angle {m.group(2)!r}") from None
        operands = []
        for tok in toks[1:]:
            qm = _QUBIT_RE.match(tok)
            if not qm:
                raise CircuitParseError(lineno, f"bad qubit operand {tok!r}")
            operands.append((qm.group(1), int(qm.group(2))))
        n_targets = 0 if kind is Kind.GLOBALPHASE else 1
        if len(operands) < n_targets:
            raise CircuitParseError(lineno, f"{kind.value} needs a target")
        split = len(operands) - n_targets
        ctrl_ops, tgt_ops = operands[:split], operands[split:]
        if any(sign for sign, _ in tgt_ops):
            raise CircuitParseError(lineno, "targets cannot carry a polarity sign")
        if kind is Kind.MCX and any(not sign for sign, _ in ctrl_ops):
            raise CircuitParseError(lineno, "mcx controls must be signed (+q/-q)")
        controls = tuple((q, sign != "-") for sign, q in ctrl_ops)
        try:
            gates.append(Gate(kind, tuple(q for _, q in tgt_ops), controls, theta))
        except ValueError as exc:
            raise CircuitParseError(lineno, str(exc)) from None
    try:
        return Circuit(RegisterLayout(tuple(registers)), tuple(gates))
    except ValueError as exc:
        raise CircuitParseError(0, str(exc)) from None
