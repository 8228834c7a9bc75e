"""Coined quantum-walk search: simulation, circuit compilation and scaling analysis."""

from .graphs import Family, FamilySpec, SizeCapError, neighbor, node_count, degree
from .walk import SearchConfig, WalkState, evolve, step, step_matrix, uniform_state
from .circuit import Circuit, Gate, RegisterLayout, count_two_qubit_gates, parse, serialize, to_unitary
from .compiler import NotCompilableError, build_step_circuit, lower
from .analysis import find_peak, scaling_scan, success_curve

__all__ = [
    "Family",
    "FamilySpec",
    "SizeCapError",
    "neighbor",
    "node_count",
    "degree",
    "SearchConfig",
    "WalkState",
    "evolve",
    "step",
    "step_matrix",
    "uniform_state",
    "Circuit",
    "Gate",
    "RegisterLayout",
    "count_two_qubit_gates",
    "parse",
    "serialize",
    "to_unitary",
    "NotCompilableError",
    "build_step_circuit",
    "lower",
    "find_peak",
    "scaling_scan",
    "success_curve",
]
