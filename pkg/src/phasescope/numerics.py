"""Finite-difference stencils and radial shell regression helpers."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConeStarvation, EmptyRegion

# centered first- and second-derivative stencils by accuracy order
_D1 = {
    2: (np.array([-0.5, 0.0, 0.5]), 1),
    4: (np.array([1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12]), 2),
    6: (np.array([-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60]), 3),
}
_D2 = {
    2: (np.array([1.0, -2.0, 1.0]), 1),
    4: (np.array([-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12]), 2),
    6: (
        np.array([1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90]),
        3,
    ),
}


def _apply_stencil(values, axis, coeffs, reach, step, power):
    out = np.zeros_like(values, dtype=np.complex128)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        shift = k - reach
        out += c * np.roll(values, -shift, axis=axis)
    return out / step**power
    # edge bands are wrap-contaminated; callers mask them via fd_margin


def diff_axis(values: np.ndarray, axis: int, step: float, order: int = 1, acc: int = 4):
    """Centered finite difference along one axis (order 1 or 2 per call)."""
    if order == 0:
        return values.astype(np.complex128, copy=True)
    table = _D1 if order == 1 else _D2
    if order not in (1, 2):
        # compose first derivatives for higher orders
        out = values
        for _ in range(order):
            out = diff_axis(out, axis, step, 1, acc)
        return out
    coeffs, reach = table[acc]
    return _apply_stencil(values, axis, coeffs, reach, step, order)


def diff_multi(values: np.ndarray, alpha, steps, acc: int = 4):
    """Mixed partial derivative for a multi-index alpha."""
    out = values.astype(np.complex128, copy=True)
    for axis, k in enumerate(alpha):
        rem = k
        while rem >= 2:
            out = diff_axis(out, axis, steps[axis], 2, acc)
            rem -= 2
        if rem == 1:
            out = diff_axis(out, axis, steps[axis], 1, acc)
    return out


def diff_direction(values: np.ndarray, shifts: tuple[int, ...], step: float, acc: int = 4):
    """Directional derivative along an integer lattice direction.

    shifts gives the per-axis node offsets of one stencil step; step is the
    physical length of that offset vector.
    """
    coeffs, reach = _D1[acc]
    out = np.zeros_like(values, dtype=np.complex128)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        m = k - reach
        out += c * np.roll(values, tuple(-m * s for s in shifts), axis=tuple(range(values.ndim)))
    return out / step


def fd_margin(alpha_total: int, acc: int = 4) -> int:
    """Nodes to crop from each edge after differentiating."""
    reach = _D1[acc][1]
    return reach * max(1, alpha_total)


def loglog_fit(radii: np.ndarray, sups: np.ndarray):
    """Least-squares fit of log(sup) against log(radius).

    Returns (exponent, log_constant, residual_rms). Zero sups are floored
    to keep the fit defined; callers treat an all-zero region separately.
    """
    r = np.asarray(radii, dtype=np.float64)
    s = np.maximum(np.asarray(sups, dtype=np.float64), 1e-300)
    x = np.log(r)
    y = np.log(s)
    n = x.size
    if n < 2:
        raise EmptyRegion("need at least two shells for a decay fit")
    xm = x.mean()
    ym = y.mean()
    denom = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / denom)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    return slope, intercept, float(np.sqrt(np.mean(resid**2)))


def shell_edges(r_min: float, r_max: float, count: int) -> np.ndarray:
    if not (r_max > r_min > 0.0):
        raise EmptyRegion(f"invalid shell range [{r_min}, {r_max}]")
    return np.exp(np.linspace(math.log(r_min), math.log(r_max), count + 1))


def shell_sups(
    radii: np.ndarray,
    values: np.ndarray,
    edges: np.ndarray,
    mask: np.ndarray | None = None,
    min_nodes: int = 1,
):
    """Per-shell sup of |values| with bracket-weight abscissas.

    Returns (abscissas, sups) where each abscissa is sqrt(1 + r*^2) for the
    argmax node radius r* in its shell. Shells with fewer than min_nodes
    nodes raise; empty ranges raise EmptyRegion.
    """
    r = radii.ravel()
    v = np.abs(values).ravel()
    if mask is not None:
        keep = mask.ravel()
        r = r[keep]
        v = v[keep]
    absc = []
    sups = []
    for i in range(len(edges) - 1):
        sel = (r >= edges[i]) & (r < edges[i + 1])
        cnt = int(np.count_nonzero(sel))
        if cnt == 0:
            continue
        if cnt < min_nodes:
            raise ConeStarvation(
                f"shell [{edges[i]:.3g}, {edges[i + 1]:.3g}) holds {cnt} nodes, "
                f"needs {min_nodes}"
            )
        vv = v[sel]
        k = int(np.argmax(vv))
        sups.append(float(vv[k]))
        absc.append(math.sqrt(1.0 + float(r[sel][k]) ** 2))
    if len(absc) < 2:
        raise EmptyRegion("fewer than two populated shells in the requested range")
    return np.array(absc), np.array(sups)


def trend_slope(radii: np.ndarray, constants: np.ndarray) -> float:
    """Log-log slope of a per-shell envelope constant.

    Positive slopes mean the claimed envelope is being outgrown.
    """
    slope, _, _ = loglog_fit(radii, constants)
    return slope
