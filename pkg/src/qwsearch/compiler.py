"""Step-circuit construction and lowering to elementary gates.

Every family's walk step ``U = S C`` is built as a composite circuit over the
registers ``node`` (or ``y``, ``x`` for the toroid), ``subnode``, ``work`` and
``anc``:

- ``work`` holds ancillas the composite circuit manages itself: the AND chain
  that computes "node == marked" into a single match qubit, and the one-hot
  decoder the hypercube shift uses.
- ``anc`` is scratch for :func:`lower`, which expands each ``mcx`` into a
  Toffoli V-chain and restores the scratch qubits after every gate.

The coin is: compute match, ``Z`` on match (the ``-I`` block on the marked
node), Grover on ``subnode`` anti-controlled on match, uncompute. Lowered
circuits only contain ``h, x, z, phase, cx, cz, cphase, gphase``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import (
    Circuit,
    Gate,
    Kind,
    RegisterLayout,
    count_two_qubit_gates,
    cphase,
    cx,
    cz,
    gphase,
    h,
    inverse,
    mcx,
    phase,
    toffoli,
    x,
    z,
)
from .graphs import Family, FamilySpec

__all__ = [
    "AncillaError",
    "NotCompilableError",
    "StepCircuitPlan",
    "lower",
    "lower_gate",
    "build_mcx",
    "build_grover",
    "build_increment",
    "build_decrement",
    "build_controlled",
    "build_controlled_phase_pi",
    "build_step_circuit",
    "plan_step",
    "is_compilable",
    "step_manifest",
]

Pattern = list[tuple[int, bool]]


class AncillaError(ValueError):
    """Not enough ancilla qubits for a requested construction."""


class NotCompilableError(ValueError):
    pass


# --------------------------------------------------------------------------- #
# primitive decompositions


def _toffoli_elementary(a: int, b: int, t: int) -> list[Gate]:
    """Standard 6-CX Toffoli (controls ``a``, ``b``; target ``t``)."""
    T, Tdg = math.pi / 4, -math.pi / 4
    return [
        h(t),
        cx(b, t), phase(t, Tdg),
        cx(a, t), phase(t, T),
        cx(b, t), phase(t, Tdg),
        cx(a, t), phase(b, T), phase(t, T),
        h(t),
        cx(a, b), phase(a, T), phase(b, Tdg),
        cx(a, b),
    ]


def _flip_negative(controls) -> list[Gate]:
    return [x(q) for q, p in controls if not p]


def _mcx_chain(controls: list[int], target: int, ancilla: list[int]) -> list[Gate]:
    """Positive-control MCX as a compute/uncompute V-chain of elementary Toffolis."""
    c = len(controls)
    if c == 0:
        return [x(target)]
    if c == 1:
        return [cx(controls[0], target)]
    if c == 2:
        return _toffoli_elementary(controls[0], controls[1], target)
    need = c - 2
    if len(ancilla) < need:
        raise AncillaError(f"mcx with {c} controls needs {need} ancillas, got {len(ancilla)}")
    anc = list(ancilla[:need])
    chain = [(controls[0], controls[1], anc[0])]
    for i in range(2, c - 1):
        chain.append((controls[i], anc[i - 2], anc[i - 1]))
    out: list[Gate] = []
    for a, b, t in chain:
        out += _toffoli_elementary(a, b, t)
    out += _toffoli_elementary(controls[-1], anc[-1], target)
    for a, b, t in reversed(chain):
        out += _toffoli_elementary(a, b, t)
    return out


def _mcx_elementary(controls, target, ancilla) -> list[Gate]:
    flips = _flip_negative(controls)
    return flips + _mcx_chain([q for q, _ in controls], target, ancilla) + flips


def _layout_for(qubits, name="q") -> RegisterLayout:
    return RegisterLayout(((name, max(qubits) + 1),))


def build_mcx(controls: Pattern, target: int, ancilla=(), layout: RegisterLayout | None = None) -> Circuit:
    """Elementary circuit flipping ``target`` iff every control matches its polarity.

    Uses ``max(0, len(controls) - 2)`` ancillas, all returned to ``|0>``.
    """
    controls = [(int(q), bool(p)) for q, p in controls]
    ancilla = list(ancilla)
    qubits = [q for q, _ in controls] + [target] + ancilla
    if len(set(qubits)) != len(qubits):
        raise ValueError("controls, target and ancillas must be distinct")
    gates = _mcx_elementary(controls, target, ancilla)
    return Circuit(layout or _layout_for(qubits), gates)


# --------------------------------------------------------------------------- #
# lowering


def lower_gate(g: Gate, scratch: list[int]) -> list[Gate]:
    """Elementary expansion of one gate, taking MCX ancillas from ``scratch``."""
    if g.is_elementary:
        return [g]
    if g.kind in (Kind.TOFFOLI, Kind.MCX):
        free = [q for q in scratch if q not in g.qubits]
        return _mcx_elementary(g.controls, g.targets[0], free)
    if g.kind in (Kind.CX, Kind.CZ, Kind.CPHASE):
        flips = _flip_negative(g.controls)
        pos = Gate(g.kind, g.targets, tuple((q, True) for q, _ in g.controls), g.theta)
        return flips + [pos] + flips
    raise ValueError(f"cannot lower {g}")


def lower(c: Circuit) -> Circuit:
    """Lower a composite circuit; the ``anc`` register supplies MCX scratch qubits."""
    scratch = c.layout.qubits("anc")
    out: list[Gate] = []
    for g in c.gates:
        out += lower_gate(g, scratch)
    return Circuit(c.layout, out)


def scratch_needed(gates) -> int:
    """Scratch ancillas :func:`lower` will need for ``gates``."""
    return max((len(g.controls) - 2 for g in gates if g.kind is Kind.MCX), default=0)


# --------------------------------------------------------------------------- #
# controlled application


def _controlled_h(c: int, positive: bool, t: int) -> list[Gate]:
    S, T = math.pi / 2, math.pi / 4
    seq = [
        h(t), phase(t, -S), cx(c, t), h(t), phase(t, T), cx(c, t),
        phase(t, T), h(t), phase(t, S), x(t), phase(c, S),
    ]
    flip = [] if positive else [x(c)]
    return flip + seq + flip


def _controlled_cphase(g: Gate, ctrl: tuple[int, bool]) -> list[Gate]:
    (c1, p1), (c2, p2) = g.controls[0], ctrl
    t, th = g.targets[0], g.theta
    flips = _flip_negative([(c1, p1), (c2, p2)])
    core = [
        cphase(c2, t, th / 2), cx(c1, c2), cphase(c2, t, -th / 2), cx(c1, c2), cphase(c1, t, th / 2),
    ]
    return flips + core + flips


def _control_gate(g: Gate, ctrl: tuple[int, bool]) -> list[Gate]:
    if g.kind in (Kind.X, Kind.CX, Kind.TOFFOLI, Kind.MCX):
        return [mcx(g.controls + (ctrl,), g.targets[0])]
    t = g.targets[0]
    if g.kind is Kind.Z:
        return [cz(ctrl[0], t, ctrl[1])]
    if g.kind is Kind.CZ:
        return [h(t), mcx(g.controls + (ctrl,), t), h(t)]
    if g.kind is Kind.PHASE:
        return [cphase(ctrl[0], t, g.theta, ctrl[1])]
    if g.kind is Kind.CPHASE:
        return _controlled_cphase(g, ctrl)
    if g.kind is Kind.H:
        return _controlled_h(ctrl[0], ctrl[1], t)
    raise ValueError(f"cannot control {g}")


def _phase_on(ctrl: tuple[int, bool], theta: float) -> list[Gate]:
    q, positive = ctrl
    if positive:
        return [phase(q, theta)]
    return [x(q), phase(q, theta), x(q)]


def control_gates(gates, ctrl: tuple[int, bool]) -> list[Gate]:
    """Gate list applying ``gates`` only when qubit ``ctrl[0]`` equals ``ctrl[1]``.

    Global phases become a phase on the control. A leading block that is
    undone by a trailing block (``P M P^-1``) is left uncontrolled, since
    only ``M`` needs the control.
    """
    gates = list(gates)
    theta = sum(g.theta for g in gates if g.kind is Kind.GLOBALPHASE)
    rest = [g for g in gates if g.kind is not Kind.GLOBALPHASE]
    k = 0
    while 2 * (k + 1) <= len(rest) and rest[k] == rest[-1 - k].inverse():
        k += 1
    prefix, middle, suffix = rest[:k], rest[k:len(rest) - k], rest[len(rest) - k:]
    out: list[Gate] = []
    if math.remainder(theta, 2 * math.pi) != 0.0:
        out += _phase_on(ctrl, theta)
    out += prefix
    for g in middle:
        out += _control_gate(g, ctrl)
    out += suffix
    return out


def _and_chain(pattern: Pattern, work: list[int]) -> tuple[list[Gate], int]:
    """Toffoli chain leaving the AND of ``pattern`` on the returned qubit.

    Intermediate chain qubits stay set until the caller uncomputes with the
    reversed gate list.
    """
    c = len(pattern)
    if c < 2:
        raise ValueError("and-chain needs at least two pattern qubits")
    if len(work) < c - 1:
        raise AncillaError(f"pattern of {c} qubits needs {c - 1} work ancillas, got {len(work)}")
    (q0, p0), (q1, p1) = pattern[0], pattern[1]
    gates = [toffoli(q0, q1, work[0], p0, p1)]
    for i in range(2, c):
        q, p = pattern[i]
        gates.append(toffoli(q, work[i - 2], work[i - 1], p, True))
    return gates, work[c - 2]


def _controlled_on_pattern(body: list[Gate], pattern: Pattern, work: list[int]) -> list[Gate]:
    if len(pattern) == 1:
        return control_gates(body, pattern[0])
    compute, match = _and_chain(pattern, work)
    return compute + control_gates(body, (match, True)) + list(reversed(compute))


def build_controlled(body: Circuit, pattern: Pattern, ancilla=()) -> Circuit:
    """Apply ``body`` only on basis states matching ``pattern``.

    Patterns longer than one qubit are ANDed into one ancilla (``ancilla[-1]``
    of the used chain) which then single-controls every body gate.
    """
    pattern = [(int(q), bool(p)) for q, p in pattern]
    if not pattern:
        raise ValueError("pattern must be nonempty")
    body_qubits = {q for g in body.gates for q in g.qubits}
    if body_qubits & {q for q, _ in pattern}:
        raise ValueError("body must act on qubits disjoint from the pattern")
    ancilla = list(ancilla)
    if body_qubits & set(ancilla):
        raise ValueError("body must not touch the control ancillas")
    return Circuit(body.layout, _controlled_on_pattern(list(body.gates), pattern, ancilla))


def build_controlled_phase_pi(pattern: Pattern, ancilla=(), layout: RegisterLayout | None = None) -> Circuit:
    """Elementary circuit multiplying basis states matching ``pattern`` by -1."""
    pattern = [(int(q), bool(p)) for q, p in pattern]
    if not pattern:
        raise ValueError("pattern must be nonempty")
    qubits = [q for q, _ in pattern] + list(ancilla)
    if len(set(qubits)) != len(qubits):
        raise ValueError("pattern and ancilla qubits must be distinct")
    *rest, (t, tp) = pattern
    flip_t = [] if tp else [x(t)]
    if not rest:
        core = [z(t)]
    else:
        core = [h(t)] + _mcx_elementary(rest, t, list(ancilla)) + [h(t)]
    return Circuit(layout or _layout_for(qubits), flip_t + core + flip_t)


# --------------------------------------------------------------------------- #
# arithmetic and Grover blocks


def grover_gates(qubits: list[int]) -> list[Gate]:
    """Composite Grover reflection ``2/d J - I`` on ``qubits`` (``d = 2**k``).

    ``G = -(H X (C^{k-1} Z) X H)``; the minus sign is kept as ``gphase(pi)``.
    """
    if not qubits:
        raise ValueError("grover needs at least one qubit")
    t = qubits[-1]
    pre = [h(q) for q in qubits] + [x(q) for q in qubits] + [h(t)]
    core = mcx([(q, True) for q in qubits[:-1]], t)
    return [gphase(math.pi)] + pre + [core] + [g.inverse() for g in reversed(pre)]


def build_grover(k: int) -> Circuit:
    """Elementary circuit on ``k`` subnode qubits (plus ``k-3`` scratch for k >= 4)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    layout = RegisterLayout((("subnode", k), ("anc", max(0, k - 3))))
    return lower(Circuit(layout, grover_gates(layout.qubits("subnode"))))


def increment_gates(qubits: list[int]) -> list[Gate]:
    """MCX ladder mapping ``|v> -> |v+1 mod 2**k>``; ``qubits[0]`` is the LSB."""
    out = []
    for i in range(len(qubits) - 1, 0, -1):
        out.append(mcx([(q, True) for q in qubits[:i]], qubits[i]))
    out.append(x(qubits[0]))
    return out


def decrement_gates(qubits: list[int]) -> list[Gate]:
    return [g.inverse() for g in reversed(increment_gates(qubits))]


def build_increment(k: int) -> Circuit:
    if k < 1:
        raise ValueError("k must be >= 1")
    layout = RegisterLayout((("reg", k), ("anc", max(0, k - 3))))
    return Circuit(layout, increment_gates(layout.qubits("reg")))


def build_decrement(k: int) -> Circuit:
    return inverse(build_increment(k))


# --------------------------------------------------------------------------- #
# step circuits


@dataclass(frozen=True)
class StepCircuitPlan:
    spec: FamilySpec
    marked: int
    layout: RegisterLayout
    ancilla_budget: int


def is_compilable(spec: FamilySpec) -> bool:
    if spec.family is Family.HYPERCUBE:
        return spec.n >= 2 and spec.n & (spec.n - 1) == 0
    return True


def _node_qubits(spec: FamilySpec, layout: RegisterLayout) -> list[int]:
    if spec.family is Family.TWISTED_TOROID:
        return layout.qubits("y") + layout.qubits("x")
    return layout.qubits("node")


def _marked_pattern(node_qubits: list[int], marked: int) -> Pattern:
    return [(q, bool((marked >> i) & 1)) for i, q in enumerate(node_qubits)]


def _coin_gates(spec, layout, marked) -> list[Gate]:
    node = _node_qubits(spec, layout)
    sub = layout.qubits("subnode")
    work = layout.qubits("work")
    pattern = _marked_pattern(node, marked)
    if len(pattern) == 1:
        compute, (match, hit) = [], pattern[0]
    else:
        (compute, match), hit = _and_chain(pattern, work), True
    marked_phase = list(build_controlled_phase_pi([(match, hit)]).gates)
    grover = control_gates(grover_gates(sub), (match, not hit))
    return compute + marked_phase + grover + list(reversed(compute))


def _one_hot_shift(sub: list[int], node: list[int], work: list[int]) -> list[Gate]:
    """X on ``node[a]`` iff the subnode register holds ``a``, via a one-hot decoder."""
    msb = sub[-1]
    leaves = [(work[0], 0), (work[1], 1)]
    decode = [cx(msb, work[0], positive=False), cx(msb, work[1])]
    free = iter(work[2:])
    for b in reversed(sub[:-1]):
        nxt = []
        for q, val in leaves:
            child = next(free)
            decode += [toffoli(q, b, child), cx(child, q)]
            nxt += [(q, 2 * val), (child, 2 * val + 1)]
        leaves = nxt
    act = [cx(q, node[val]) for q, val in leaves]
    return decode + act + list(reversed(decode))


def _shift_gates(spec, layout) -> list[Gate]:
    sub = layout.qubits("subnode")
    work = layout.qubits("work")
    if spec.family is Family.HYPERCUBE:
        return _one_hot_shift(sub, layout.qubits("node"), work)
    if spec.family is Family.COMPLETE:
        out = []
        for a, b in zip(layout.qubits("node"), sub):
            out += [cx(a, b), cx(b, a), cx(a, b)]
        return out
    xs, ys = layout.qubits("x"), layout.qubits("y")
    out = []
    for coin in range(4):
        minus, axis_y = coin & 1, (coin >> 1) & 1
        pattern = [(sub[0], bool(minus)), (sub[1], bool(axis_y))]
        moved, other = (ys, xs) if axis_y else (xs, ys)
        # plus: increment, wrapped iff all zeros, then decrement the other axis
        move = decrement_gates(moved) if minus else increment_gates(moved)
        twist = increment_gates(other) if minus else decrement_gates(other)
        wrapped = [(q, bool(minus)) for q in moved]
        out += _controlled_on_pattern(move, pattern, work)
        out += _controlled_on_pattern(twist, pattern + wrapped, work)
    out.append(x(sub[0]))
    return out


def plan_step(spec: FamilySpec, marked: int) -> StepCircuitPlan:
    if not is_compilable(spec):
        raise NotCompilableError(
            f"{spec} is not compilable: hypercube circuits need n a power of two, n >= 2"
        )
    if not 0 <= marked < spec.node_count:
        raise ValueError(f"marked node {marked} out of range for {spec}")
    n, m = spec.n, spec.m
    if spec.family is Family.HYPERCUBE:
        s = n.bit_length() - 1
        regs = [("node", n), ("subnode", s)]
        work = n  # one-hot decoder needs n; the AND chain needs n - 1
    elif spec.family is Family.COMPLETE:
        regs = [("node", n), ("subnode", n)]
        work = max(n - 1, 1)
    else:
        regs = [("y", m), ("x", n), ("subnode", 2)]
        work = max(n + m - 1, n + 1, m + 1)
    layout = RegisterLayout(tuple(regs) + (("work", work), ("anc", 0)))
    return StepCircuitPlan(spec, marked, layout, work)


def build_step_circuit(spec: FamilySpec, marked: int) -> Circuit:
    """Composite circuit for one search step ``S C`` with ``marked`` as the target."""
    plan = plan_step(spec, marked)
    gates = _coin_gates(spec, plan.layout, marked) + _shift_gates(spec, plan.layout)
    layout = plan.layout.with_width("anc", scratch_needed(gates))
    return Circuit(layout, gates)


def step_manifest(spec: FamilySpec, marked: int, composite: Circuit, lowered: Circuit) -> dict:
    layout = composite.layout
    return {
        "family": spec.to_dict(),
        "marked": marked,
        "registers": layout.to_dict(),
        "num_qubits": layout.num_qubits,
        "ancilla_count": len(layout.ancilla_qubits),
        "composite_gate_count": len(composite.gates),
        "lowered_gate_count": len(lowered.gates),
        "lowered_two_qubit_count": count_two_qubit_gates(lowered),
    }
