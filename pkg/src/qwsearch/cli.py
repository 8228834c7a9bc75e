"""Command-line front end: ``simulate``, ``compile``, ``verify`` and ``scan``.

Exit codes: 0 ok, 2 usage, 3 size cap, 4 not compilable, 5 verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis
from .circuit import MAX_UNITARY_QUBITS, CircuitParseError, parse, serialize, to_unitary
from .compiler import NotCompilableError, build_step_circuit, lower, step_manifest
from .gatesim import (
    embed_walk_state,
    extract_walk_state,
    phase_aligned_deviation,
    restricted_unitary,
    run,
)
from .graphs import Family, FamilySpec, SizeCapError
from .walk import SearchConfig, marked_probability, step, step_matrix, uniform_state

EXIT_OK, EXIT_USAGE, EXIT_SIZE, EXIT_COMPILE, EXIT_VERIFY = 0, 2, 3, 4, 5

DEFAULT_SCANS = {
    ("steps", Family.TWISTED_TOROID): [16, 64, 256, 1024, 4096],
    ("steps", Family.HYPERCUBE): [16, 32, 64, 128, 256],
    ("steps", Family.COMPLETE): [4, 8, 16, 32, 64],
    ("gates", Family.HYPERCUBE): [2, 4, 8, 16],
    ("gates", Family.COMPLETE): [2, 3, 4, 5, 6, 7, 8],
    ("gates", Family.TWISTED_TOROID): [2, 3, 4, 5, 6],
    ("cost", Family.COMPLETE): [2, 3, 4, 5, 6],
    ("cost", Family.HYPERCUBE): [2, 4, 8],
    ("cost", Family.TWISTED_TOROID): [2, 3, 4, 5, 6],
}


class UsageError(Exception):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _csv(rows: list[dict], columns: list[str]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(r[c]) for c in columns) for r in rows]
    return "\n".join(lines) + "\n"


def _spec_from_args(args) -> FamilySpec:
    if args.family is None or args.n is None:
        raise UsageError("--family and --n are required")
    fam = Family(args.family)
    if fam is Family.TWISTED_TOROID and args.m is None:
        raise UsageError("twisted_toroid needs --m")
    try:
        return FamilySpec(fam, args.n, args.m if fam is Family.TWISTED_TOROID else None)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _marked(args, spec: FamilySpec) -> int:
    marked = analysis.default_marked(spec) if args.marked is None else args.marked
    if not 0 <= marked < spec.node_count:
        raise UsageError(f"--marked must lie in [0, {spec.node_count})")
    return marked


def cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    marked = _marked(args, spec)
    t_max = analysis.default_tmax(spec) if args.tmax is None else args.tmax
    if t_max < 1:
        raise UsageError("--tmax must be >= 1")
    curve = analysis.success_curve(spec, marked, t_max)
    peak = analysis.find_peak(curve)
    summary = {"family": spec.to_dict(), "marked": marked, "t_max": t_max, **peak.to_dict()}
    out = Path(args.out)
    if args.format == "json":
        summary["curve"] = curve.probabilities.tolist()
        _write(out / "curve.json", _dump_json(summary))
    else:
        _write(out / "curve.csv", curve.to_csv())
        _write(out / "peak.json", _dump_json(summary))
    print(f"{spec} marked={marked}: t_star={peak.t_star} p_star={peak.p_star:.6g} period={peak.period}")
    return EXIT_OK


def cmd_compile(args) -> int:
    spec = _spec_from_args(args)
    marked = _marked(args, spec)
    composite = build_step_circuit(spec, marked)
    lowered = lower(composite)
    manifest = step_manifest(spec, marked, composite, lowered)
    out = Path(args.out)
    emitted = composite if args.level == "composite" else lowered
    manifest["emitted_level"] = emitted.level
    _write(out / "step.qc", serialize(emitted))
    _write(out / "manifest.json", _dump_json(manifest))
    print(
        f"{spec} marked={marked}: {manifest['num_qubits']} qubits, "
        f"{manifest['lowered_two_qubit_count']} two-qubit gates"
    )
    return EXIT_OK


def verify_unitary(spec: FamilySpec, marked: int, circuit) -> tuple[float, float]:
    """(phase-aligned deviation, worst ancilla leak) of a step circuit's unitary."""
    lowered = circuit if circuit.is_elementary else lower(circuit)
    U = to_unitary(lowered)
    block, leak = restricted_unitary(spec, U, lowered.layout)
    return phase_aligned_deviation(block, step_matrix(spec, SearchConfig(marked))), leak


def verify_trajectory(spec: FamilySpec, marked: int, circuit, steps: int) -> dict:
    """Run the lowered step ``steps`` times on the gate simulator against the walk."""
    lowered = circuit if circuit.is_elementary else lower(circuit)
    cfg = SearchConfig(marked)
    w = uniform_state(spec)
    psi = embed_walk_state(spec, w, lowered.layout)
    worst = {"amplitude": 0.0, "probability": 0.0, "leak": 0.0}
    for _ in range(steps):
        w = step(w, cfg)
        psi = run(lowered, psi)
        got, leak = extract_walk_state(spec, psi, lowered.layout)
        worst["amplitude"] = max(worst["amplitude"], phase_aligned_deviation(got.flat, w.flat))
        worst["probability"] = max(
            worst["probability"], abs(marked_probability(got, marked) - marked_probability(w, marked))
        )
        worst["leak"] = max(worst["leak"], leak)
    return worst


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    marked = _marked(args, spec)
    if args.circuit:
        try:
            circuit = parse(Path(args.circuit).read_text())
        except (OSError, CircuitParseError) as exc:
            print(f"verification failed: cannot load circuit: {exc}")
            return EXIT_VERIFY
    else:
        circuit = build_step_circuit(spec, marked)
    try:
        if circuit.num_qubits <= MAX_UNITARY_QUBITS and args.steps == 0:
            dev, leak = verify_unitary(spec, marked, circuit)
            report = {"mode": "unitary", "deviation": dev, "leak": leak}
        else:
            worst = verify_trajectory(spec, marked, circuit, max(args.steps, 1))
            dev, leak = worst["amplitude"], worst["leak"]
            report = {"mode": "trajectory", "deviation": dev, "leak": leak,
                      "probability_deviation": worst["probability"]}
    except ValueError as exc:
        print(f"verification failed: {exc}")
        return EXIT_VERIFY
    ok = dev <= args.tol and leak <= args.tol
    print(f"{spec} marked={marked} {report['mode']}: max deviation {dev:.3e}, leak {leak:.3e} "
          f"-> {'OK' if ok else 'MISMATCH'}")
    if args.out:
        _write(Path(args.out) / "verify.json", _dump_json({**report, "ok": ok}))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_scan(args) -> int:
    if args.family is None:
        raise UsageError("--family is required")
    fam = Family(args.family)
    sizes = args.sizes or DEFAULT_SCANS.get((args.metric, fam))
    if not sizes or len(sizes) < 3:
        raise UsageError("a scan needs at least 3 sizes")
    out = Path(args.out)
    if args.metric == "steps":
        fit, rows = analysis.scaling_scan(fam, sizes)
        cols = ["N", "t_star", "p_star", "period", "recurrence_period", "steps"]
        _write(out / "scan.csv", _csv(rows, cols))
        summary = {"family": fam.value, "metric": "steps", "fit": fit.to_dict()}
        msg = f"alpha={fit.alpha:.4f} r2={fit.r2:.4f}"
    elif args.metric == "gates":
        rows, fit = analysis.gate_count_scan(fam, sizes)
        _write(out / "gates.csv", _csv(rows, ["N", "two_qubit_gates"]))
        summary = {"family": fam.value, "metric": "gates", "fit": {"a": fit.c, "k": fit.alpha, "r2": fit.r2}}
        if fam is Family.TWISTED_TOROID:
            ratios = [r["two_qubit_gates"] / (2 * r["n"] ** 3) for r in rows]
            summary["cubic_bound"] = {"c": ratios[0], "ratios": ratios}
        msg = f"k={fit.alpha:.4f}"
    else:
        rows, cfit = analysis.cost_scan(fam, sizes)
        _write(out / "cost.csv", _csv(rows, ["N", "steps", "two_qubit_gates", "total", "ratio"]))
        summary = {"family": fam.value, "metric": "cost", "fit": cfit}
        msg = f"c={cfit['c']:.4f} factor={cfit['factor']:.4f}"
    _write(out / "fit.json", _dump_json(summary))
    print(f"{fam.value} {args.metric} scan over {sizes}: {msg}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def family_args(p, need_n=True):
        p.add_argument("--family", choices=[f.value for f in Family], required=True)
        p.add_argument("--n", type=int, required=need_n)
        p.add_argument("--m", type=int)

    p = sub.add_parser("simulate", help="success-probability curve and peak report")
    family_args(p)
    p.add_argument("--marked", type=int)
    p.add_argument("--tmax", type=int)
    p.add_argument("--out", default=".")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compile", help="emit the step circuit and its manifest")
    family_args(p)
    p.add_argument("--marked", type=int)
    p.add_argument("--out", default=".")
    p.add_argument("--level", choices=["elementary", "composite"], default="elementary")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check a compiled step against the structured walk")
    family_args(p)
    p.add_argument("--marked", type=int)
    p.add_argument("--circuit", help="circuit file to check instead of compiling")
    p.add_argument("--steps", type=int, default=0, help="gate-level trajectory length (0: unitary check)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="scaling scan over sizes")
    p.add_argument("--family", choices=[f.value for f in Family], required=True)
    p.add_argument("--metric", choices=["steps", "gates", "cost"], default="steps")
    p.add_argument("--sizes", type=int, nargs="+",
                   help="node counts N for steps; family parameter n for gates/cost")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except NotCompilableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPILE


if __name__ == "__main__":
    sys.exit(main())
