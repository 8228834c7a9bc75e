"""Search-dynamics experiments: curves, peaks, periods and scaling fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import count_two_qubit_gates
from .compiler import build_step_circuit, lower
from .graphs import Family, FamilySpec
from .walk import SearchConfig, evolve

__all__ = [
    "Curve",
    "PeakReport",
    "ScalingFit",
    "default_marked",
    "default_tmax",
    "success_curve",
    "find_peak",
    "estimate_period",
    "recurrence_period",
    "steps_to_peak",
    "fit_power_law",
    "scaling_scan",
    "gate_count_scan",
    "cost_scan",
    "spec_for_size",
    "PLATEAU_TOL",
]

# probabilities closer than this are treated as one plateau
PLATEAU_TOL = 1e-9


@dataclass
class Curve:
    spec: FamilySpec
    marked: int
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("curve needs at least one point")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        self.probabilities = p

    @property
    def steps(self) -> np.ndarray:
        return np.arange(self.probabilities.size)

    @property
    def baseline(self) -> float:
        return 1.0 / self.spec.node_count

    def points(self) -> list[tuple[int, float]]:
        return list(zip(range(self.probabilities.size), self.probabilities.tolist()))

    def to_csv(self) -> str:
        rows = ["step,probability"]
        rows += [f"{t},{p:.17g}" for t, p in self.points()]
        return "\n".join(rows) + "\n"


@dataclass
class PeakReport:
    t_star: int
    p_star: float
    baseline: float
    period: float | None = None

    def to_dict(self) -> dict:
        return {
            "t_star": self.t_star,
            "p_star": self.p_star,
            "period": self.period,
            "baseline": self.baseline,
        }


@dataclass
class ScalingFit:
    """Least-squares fit of ``value = c * N**alpha`` on log-log points."""

    points: list[tuple[int, float]]
    c: float
    alpha: float
    r2: float
    extra: dict = field(default_factory=dict)

    def predict(self, N):
        return self.c * np.asarray(N, dtype=float) ** self.alpha

    def to_dict(self) -> dict:
        return {"c": self.c, "alpha": self.alpha, "r2": self.r2}


def default_marked(spec: FamilySpec) -> int:
    """Deterministic marked node ``floor(N / 3)``; avoids special nodes like 0."""
    return spec.node_count // 3


def default_tmax(spec: FamilySpec) -> int:
    return math.ceil(6 * math.sqrt(spec.node_count))


def spec_for_size(family: Family | str, N: int) -> FamilySpec:
    """Family spec with ``N`` nodes; toroids are square when ``log2 N`` is even."""
    family = Family(family)
    k = int(N).bit_length() - 1
    if N < 2 or 1 << k != N:
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if family is Family.TWISTED_TOROID:
        if k < 2:
            raise ValueError("twisted toroid needs N >= 4")
        return FamilySpec.twisted_toroid(k - k // 2, k // 2)
    if family is Family.HYPERCUBE:
        return FamilySpec.hypercube(k)
    return FamilySpec.complete(k)


def success_curve(spec: FamilySpec, marked: int | None = None, t_max: int | None = None) -> Curve:
    marked = default_marked(spec) if marked is None else marked
    t_max = default_tmax(spec) if t_max is None else t_max
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    return Curve(spec, marked, evolve(spec, SearchConfig(marked), t_max))


def find_peak(c: Curve) -> PeakReport:
    """First step attaining the windowed maximum.

    Values within :data:`PLATEAU_TOL` of the maximum count as ties, and ties
    go to the smallest step, so rounding noise cannot move the peak.
    """
    p = c.probabilities
    t = int(np.argmax(p >= p.max() - PLATEAU_TOL))
    return PeakReport(t_star=t, p_star=float(p[t]), baseline=c.baseline, period=estimate_period(c))


def _plateau_maxima(p: np.ndarray, tol: float) -> list[int]:
    """Start index of every strict local-maximum plateau in the interior."""
    out = []
    t = 1
    while t < p.size - 1:
        j = t
        while j + 1 < p.size and abs(p[j + 1] - p[t]) <= tol:
            j += 1
        if j + 1 < p.size and p[t - 1] < p[t] - tol and p[j + 1] < p[t] - tol:
            out.append(t)
        t = j + 1
    return out


def estimate_period(c: Curve, tol: float = PLATEAU_TOL) -> float | None:
    """Mean spacing of local maxima at least half-way from baseline to the peak.

    A run of equal values (within ``tol``) counts as one maximum located at
    its first step. Returns ``None`` with fewer than two qualifying maxima.
    """
    p = c.probabilities
    base = c.baseline
    threshold = base + 0.5 * (float(p.max()) - base)
    peaks = [t for t in _plateau_maxima(p, tol) if p[t] >= threshold]
    if len(peaks) < 2:
        return None
    return float(np.mean(np.diff(peaks)))


def recurrence_period(c: Curve, pad: int = 1 << 16) -> float | None:
    """Period of the dominant oscillation of ``p(t)``, from a zero-padded FFT.

    Unlike :func:`estimate_period` this ignores the small fast ripple riding
    on top of the slow search oscillation. Periods longer than the window
    are not considered.
    """
    p = c.probabilities
    if p.size < 3 or np.ptp(p) == 0.0:
        return None
    size = max(pad, p.size)
    power = np.abs(np.fft.rfft(p - p.mean(), size))
    freqs = np.fft.rfftfreq(size)
    k = int(np.argmax(np.where(freqs >= 1.0 / p.size, power, -1.0)))
    return float(1.0 / freqs[k])


def steps_to_peak(c: Curve) -> float | None:
    """Half the recurrence period: steps from the uniform start to peak success."""
    period = recurrence_period(c)
    return None if period is None else period / 2


def fit_power_law(points) -> ScalingFit:
    pts = [(int(N), float(v)) for N, v in points]
    if len(pts) < 3:
        raise ValueError("a scaling fit needs at least 3 points")
    lx = np.log([N for N, _ in pts])
    ly = np.log([v for _, v in pts])
    alpha, logc = np.polyfit(lx, ly, 1)
    resid = ly - (alpha * lx + logc)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return ScalingFit(pts, float(math.exp(logc)), float(alpha), float(min(max(r2, 0.0), 1.0)))


def scaling_scan(family, sizes, t_max_rule=default_tmax) -> tuple[ScalingFit, list[dict]]:
    """Steps-to-peak against node count, fitted as ``steps = c * N**alpha``.

    ``steps`` is half the recurrence period of the success probability. The
    windowed global maximum ``t_star`` is reported alongside but not fitted:
    successive revivals differ in height by well under a percent, so the
    argmax jumps between them.
    """
    sizes = sorted(int(N) for N in sizes)
    if len(sizes) < 3:
        raise ValueError("scaling scan needs at least 3 sizes")
    rows = []
    for N in sizes:
        spec = spec_for_size(family, N)
        curve = success_curve(spec, default_marked(spec), t_max_rule(spec))
        peak = find_peak(curve)
        rows.append({
            "N": N,
            "t_star": peak.t_star,
            "p_star": peak.p_star,
            "period": peak.period,
            "recurrence_period": recurrence_period(curve),
            "steps": steps_to_peak(curve),
        })
    fit = fit_power_law([(r["N"], r["steps"]) for r in rows])
    return fit, rows


def lowered_two_qubit_count(spec: FamilySpec, marked: int | None = None) -> int:
    marked = default_marked(spec) if marked is None else marked
    return count_two_qubit_gates(lower(build_step_circuit(spec, marked)))


def gate_count_scan(family, ns) -> tuple[list[dict], ScalingFit]:
    """Per-step lowered 2-qubit counts, fitted as ``a * (log2 N)**k``.

    ``ns`` are the family's ``n`` parameters (``n = m`` for the toroid). The
    fit is returned as a :class:`ScalingFit` over ``log2 N``; ``alpha`` is ``k``.
    """
    family = Family(family)
    rows = []
    for n in ns:
        if family is Family.TWISTED_TOROID:
            spec = FamilySpec.twisted_toroid(n, n)
        else:
            spec = FamilySpec(family, n)
        count = lowered_two_qubit_count(spec)
        rows.append({"N": spec.node_count, "n": n, "log2N": spec.node_bits, "two_qubit_gates": count})
    fit = fit_power_law([(r["log2N"], r["two_qubit_gates"]) for r in rows])
    return rows, fit


def cost_scan(family, ns) -> tuple[list[dict], dict]:
    """Total search cost ``steps * per-step 2-qubit count`` against ``sqrt(N) log2 N``.

    Reports the constant ``c`` minimising the worst multiplicative error and
    that error (``factor``): every point lies within ``factor`` of
    ``c * sqrt(N) * log2(N)``.
    """
    family = Family(family)
    rows = []
    for n in ns:
        spec = FamilySpec.twisted_toroid(n, n) if family is Family.TWISTED_TOROID else FamilySpec(family, n)
        curve = success_curve(spec)
        steps = steps_to_peak(curve)
        per_step = lowered_two_qubit_count(spec)
        model = math.sqrt(spec.node_count) * spec.node_bits
        rows.append({
            "N": spec.node_count,
            "steps": steps,
            "two_qubit_gates": per_step,
            "total": steps * per_step,
            "ratio": steps * per_step / model,
        })
    ratios = [r["ratio"] for r in rows]
    lo, hi = min(ratios), max(ratios)
    return rows, {"c": math.sqrt(lo * hi), "factor": math.sqrt(hi / lo)}
