"""In-place gate application on a tensor-shaped state vector.

The state has shape ``(2,) * nq + extra``; qubit ``j`` lives on axis
``nq - 1 - j`` so the flattened index is little-endian (qubit 0 is bit 0).
Trailing ``extra`` axes are batch dimensions (columns of a unitary).
"""

from __future__ import annotations

import numpy as np

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def _slices(nq, ndim, controls, target, value):
    idx = [slice(None)] * ndim
    for q, positive in controls:
        idx[nq - 1 - q] = 1 if positive else 0
    if target is not None:
        idx[nq - 1 - target] = value
    return tuple(idx)


def apply(psi: np.ndarray, op: str, target, controls, theta, nq: int) -> None:
    """Apply one (possibly controlled) base operation to ``psi`` in place.

    ``op`` is one of ``"h"``, ``"x"``, ``"z"``, ``"phase"``, ``"gphase"``.
    """
    ndim = psi.ndim
    if op == "gphase":
        sel = _slices(nq, ndim, controls, None, None)
        psi[sel] *= np.exp(1j * theta)
        return
    i0 = _slices(nq, ndim, controls, target, 0)
    i1 = _slices(nq, ndim, controls, target, 1)
    if op == "x":
        tmp = psi[i0].copy()
        psi[i0] = psi[i1]
        psi[i1] = tmp
    elif op == "z":
        psi[i1] *= -1.0
    elif op == "phase":
        psi[i1] *= np.exp(1j * theta)
    elif op == "h":
        a0 = psi[i0].copy()
        a1 = psi[i1]
        psi[i0] = (a0 + a1) * _SQRT_HALF
        psi[i1] = (a0 - psi[i1]) * _SQRT_HALF
    else:
        raise ValueError(f"unknown base op {op!r}")
