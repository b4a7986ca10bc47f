"""Global symbol classes with isotropic weight on the whole space.

A smooth function a belongs to the class of order m and parameter rho when
|d^alpha a(z)| <= C_alpha <z>^(m - rho*|alpha|) for every multi-index alpha,
with <z> = (1 + |z|^2)^(1/2).  This module measures those envelopes three
ways: directly on the symbol grid, on the phase-space transform (where the
same class shows up as <x>^(m - rho*|alpha|) growth times rapid xi decay),
and through products of the vector fields x_j d/d(x_n).  It also estimates
the order from shell suprema and tests for one-step polyhomogeneity using
the radial vector field R = <z, grad> and its transform-side conjugate.

Verdicts combine two gates: every constant stays under a fixed ceiling and
the per-shell constants show no growth trend beyond tolerance.  The trend
gate is what separates, at desk scale, a genuine symbol from impostors such
as the quadratic chirp whose derivatives grow only linearly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .exceptions import DimensionMismatch, PhasescopeError, UnsupportedOperation
from .grid import GridFunction, GridSpec
from .numerics import (
    diff_axis,
    diff_multi,
    fd_margin,
    loglog_fit,
    shell_edges,
    shell_sups,
    trend_slope,
)
from .signals import Sampled, StandardGaussian, Window, window_norm
from .fbi import transform

__all__ = [
    "SymbolGrid",
    "SeminormReport",
    "OrderEstimate",
    "DefectReport",
    "make_symbol",
    "shubin_seminorm",
    "estimate_order",
    "transform_side_check",
    "geometric_check",
    "classical_defect",
    "radial_transform_defect",
]


@dataclass
class SymbolGrid:
    """Symbol samples with a declared order and regularity parameter."""

    spec: GridSpec
    values: np.ndarray
    m: float
    rho: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.spec.shape:
            raise DimensionMismatch(
                f"symbol shape {self.values.shape} does not match grid {self.spec.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise PhasescopeError("symbol values must be finite")
        if not 0.0 <= self.rho <= 1.0:
            raise PhasescopeError(f"rho must lie in [0, 1], got {self.rho}")

    @property
    def dim(self) -> int:
        return self.spec.dim


def _smoothstep(s: np.ndarray) -> np.ndarray:
    # C^3 polynomial step: 0 below 0, 1 above 1
    s = np.clip(s, 0.0, 1.0)
    return s**4 * (35.0 - 84.0 * s + 70.0 * s**2 - 20.0 * s**3)


def make_symbol(kind: str, spec: GridSpec, degree: float = 0.0, rho: float | None = None) -> SymbolGrid:
    """Build a corpus symbol on the given grid.

    Kinds: "bracket" <z>^degree; "homogeneous" |z|^degree cut off smoothly
    inside |z| <= 2; "log_periodic" <z>^degree (2 + sin log<z>); "oscillatory"
    sin<z>; "gaussian" with declared order `degree`; "chirp" e^{i|z|^2/2};
    "constant" 1; "quadratic" |z|^2.
    """
    mesh = spec.mesh()
    r2 = mesh[0] * 0.0
    for c in mesh:
        r2 = r2 + c * c
    r2 = np.broadcast_to(r2, spec.shape)
    bracket = np.sqrt(1.0 + r2)
    if kind == "bracket":
        vals, m, r0 = bracket**degree, degree, 1.0
    elif kind == "homogeneous":
        r = np.sqrt(r2)
        vals = np.zeros(spec.shape)
        core = r > 1.0
        vals[core] = _smoothstep(r[core] - 1.0) * r[core] ** degree
        m, r0 = degree, 1.0
    elif kind == "log_periodic":
        vals = bracket**degree * (2.0 + np.sin(np.log(bracket)))
        m, r0 = degree, 1.0
    elif kind == "oscillatory":
        vals, m, r0 = np.sin(bracket), 0.0, 0.0
    elif kind == "gaussian":
        vals = np.pi ** (-spec.dim / 4.0) * np.exp(-0.5 * r2)
        m, r0 = degree, 1.0
    elif kind == "chirp":
        vals, m, r0 = np.exp(0.5j * r2), 0.0, 0.0
    elif kind == "constant":
        vals, m, r0 = np.ones(spec.shape), 0.0, 1.0
    elif kind == "quadratic":
        vals, m, r0 = r2.copy(), 2.0, 1.0
    else:
        raise PhasescopeError(f"unknown symbol kind {kind!r}")
    return SymbolGrid(spec, vals, m, r0 if rho is None else rho)


@dataclass
class SeminormReport:
    """Envelope constants and per-shell growth trends, with a verdict.

    `constants` maps a check key (multi-index, vector-field sequence, or
    weight power) to the best constant over the probe set; `trends` maps the
    same keys to the log-log slope of the per-shell constants.  The verdict
    requires every constant under the ceiling and every trend under the
    tolerance.
    """

    kind: str
    order: float
    rho: float
    constants: dict
    trends: dict
    ceiling: float
    trend_tolerance: float
    verdict: bool

    @property
    def max_constant(self) -> float:
        return max(self.constants.values())

    @property
    def max_trend(self) -> float:
        return max(self.trends.values())


@dataclass
class OrderEstimate:
    exponent: float
    residual: float
    abscissas: np.ndarray
    sups: np.ndarray


@dataclass
class DefectReport:
    """Order of an iterated radial defect against its classicality threshold.

    `negligible` marks defects at the rounding floor relative to the symbol
    itself (an exactly homogeneous tail); the fitted exponent is then
    meaningless and the verdict passes outright.
    """

    exponent: float | None
    residual: float
    threshold: float
    negligible: bool
    verdict: bool


def _multi_indices(dim: int, total_max: int) -> list[tuple[int, ...]]:
    out = [
        alpha
        for alpha in itertools.product(range(total_max + 1), repeat=dim)
        if sum(alpha) <= total_max
    ]
    out.sort(key=lambda t: (sum(t), t))
    return out


def _grid_radii(spec: GridSpec) -> np.ndarray:
    mesh = spec.mesh()
    q = mesh[0] * 0.0
    for c in mesh:
        q = q + c * c
    return np.sqrt(np.broadcast_to(q, spec.shape))


def _bracket_block(spec: GridSpec, axes) -> np.ndarray:
    """Broadcastable <z> over a subset of axes."""
    mesh = spec.mesh()
    q = None
    for i in axes:
        q = mesh[i] ** 2 if q is None else q + mesh[i] ** 2
    return np.sqrt(1.0 + q)


def _block_radii(spec: GridSpec, axes) -> np.ndarray:
    """|z| over a subset of axes, broadcast to the full grid shape.

    Growth envelopes on transform fields are radial in the first block
    only; shells in the full phase-space radius would dilute them with
    nodes where the field has already decayed in the second block.
    """
    mesh = spec.mesh()
    q = None
    for i in axes:
        q = mesh[i] ** 2 if q is None else q + mesh[i] ** 2
    return np.broadcast_to(np.sqrt(q), spec.shape)


def _block_edges(spec: GridSpec, axes) -> np.ndarray:
    r_max = DEFAULTS["shell_r_max_fraction"] * min(spec.axes[i].half_width for i in axes)
    return shell_edges(DEFAULTS["shell_r_min"], r_max, DEFAULTS["shell_count"])


def _probe_mask(spec: GridSpec, crops=None, margin: float | None = None) -> np.ndarray:
    mask = spec.interior_mask(DEFAULTS["probe_margin"] if margin is None else margin)
    if crops is not None:
        for ax, c in enumerate(crops):
            if c <= 0:
                continue
            sl = [slice(None)] * spec.dim
            sl[ax] = slice(0, c)
            mask[tuple(sl)] = False
            sl[ax] = slice(-c, None)
            mask[tuple(sl)] = False
    return mask


def _field_mask(spec: GridSpec, d: int, crops=None) -> np.ndarray:
    """Probe mask for weighted envelopes on a transform field.

    The second block is additionally capped at half the first-block extent:
    decay weights grow with <xi> while box-truncation junk in the field is
    roughly flat in xi, so an unbounded band would let amplified junk outgrow
    the genuine envelope constants at the outer shells.
    """
    mask = _probe_mask(spec, crops=crops)
    band = 0.5 * min(spec.axes[i].half_width for i in range(d))
    for i in range(d, 2 * d):
        keep = np.abs(spec.nodes(i)) <= band
        shape = [1] * (2 * d)
        shape[i] = -1
        mask = np.logical_and(mask, keep.reshape(shape))
    return mask


def _default_edges(spec: GridSpec) -> np.ndarray:
    r_max = DEFAULTS["shell_r_max_fraction"] * min(a.half_width for a in spec.axes)
    return shell_edges(DEFAULTS["shell_r_min"], r_max, DEFAULTS["shell_count"])


def _gate(entries, ceiling, trend_tol):
    cmax = max(c for c, _, _ in entries.values())
    floor = 1e-10 * max(cmax, 1e-300)
    constants = {}
    trends = {}
    for key, (c, absc, sups) in entries.items():
        constants[key] = c
        # components at the rounding floor carry no trend information
        trends[key] = 0.0 if float(np.max(sups)) <= floor else trend_slope(absc, sups)
    verdict = cmax <= ceiling and all(t <= trend_tol for t in trends.values())
    return constants, trends, verdict


def _finish(kind, order, rho, entries, ceiling, trend_tol) -> SeminormReport:
    constants, trends, verdict = _gate(entries, ceiling, trend_tol)
    return SeminormReport(kind, order, rho, constants, trends, ceiling, trend_tol, verdict)


def shubin_seminorm(
    a: SymbolGrid,
    M: int = 3,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> SeminormReport:
    """Best constants in |d^alpha a| <= C <z>^(m - rho|alpha|) for |alpha| <= M."""
    if M > 4:
        raise UnsupportedOperation(f"derivative cap M={M} exceeds the supported 4")
    acc = DEFAULTS["fd_order"] if acc is None else acc
    ceiling = DEFAULTS["constant_ceiling"] if ceiling is None else ceiling
    trend_tol = DEFAULTS["trend_tolerance"] if trend_tol is None else trend_tol
    radii = _grid_radii(a.spec)
    bracket = np.sqrt(1.0 + radii**2)
    edges = _default_edges(a.spec)
    entries = {}
    for alpha in _multi_indices(a.dim, M):
        tot = sum(alpha)
        der = a.values if tot == 0 else diff_multi(a.values, alpha, a.spec.steps, acc)
        weighted = np.abs(der) * bracket ** (a.rho * tot - a.m)
        mask = _probe_mask(a.spec, crops=[fd_margin(tot, acc) if tot else 0] * a.dim)
        absc, sups = shell_sups(radii, weighted, edges, mask=mask)
        entries[alpha] = (float(weighted[mask].max()), absc, sups)
    return _finish("direct", a.m, a.rho, entries, ceiling, trend_tol)


def estimate_order(a: SymbolGrid, mask: np.ndarray | None = None) -> OrderEstimate:
    """Fit sup|a| over radial shells to <r>^m and return the exponent."""
    if not np.any(a.values):
        raise PhasescopeError("cannot estimate the order of the zero symbol")
    radii = _grid_radii(a.spec)
    base = _probe_mask(a.spec) if mask is None else mask
    absc, sups = shell_sups(radii, np.abs(a.values), _default_edges(a.spec), mask=base)
    slope, _, resid = loglog_fit(absc, sups)
    return OrderEstimate(slope, resid, absc, sups)


def _symbol_field(a: SymbolGrid, g: Window | None):
    # class membership is scale-invariant in g, so verdicts divide it out
    g = StandardGaussian(a.dim) if g is None else g
    F = transform(Sampled(GridFunction(a.spec, a.values)), g)
    return F.with_values(F.values / window_norm(g, a.spec))


def transform_side_check(
    a: SymbolGrid,
    g: Window | None = None,
    order: float | None = None,
    rho: float | None = None,
    alpha_max: int = 2,
    decay: int = 4,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> SeminormReport:
    """Check |d_x^alpha T_g a| <= C <x>^(m - rho|alpha|) <xi>^(-decay).

    The transform turns membership in the order-m class into joint growth
    control in x and rapid decay in xi, uniformly over windows.
    """
    if alpha_max > 3:
        raise UnsupportedOperation(f"alpha_max={alpha_max} exceeds the supported 3")
    if decay > 6:
        raise UnsupportedOperation(f"decay exponent {decay} exceeds the supported 6")
    m = a.m if order is None else order
    r0 = a.rho if rho is None else rho
    acc = DEFAULTS["fd_order"] if acc is None else acc
    ceiling = DEFAULTS["constant_ceiling"] if ceiling is None else ceiling
    trend_tol = DEFAULTS["trend_tolerance"] if trend_tol is None else trend_tol
    F = _symbol_field(a, g)
    spec, d = F.spec, F.base_dim
    radii = _block_radii(spec, range(d))
    bx = _bracket_block(spec, range(d))
    bxi = _bracket_block(spec, range(d, 2 * d))
    edges = _block_edges(spec, range(d))
    entries = {}
    for alpha in _multi_indices(d, alpha_max):
        tot = sum(alpha)
        der = F.values if tot == 0 else diff_multi(F.values, alpha + (0,) * d, spec.steps, acc)
        weighted = np.abs(der) * bx ** (r0 * tot - m) * bxi**decay
        crops = [fd_margin(tot, acc) if tot else 0] * d + [0] * d
        mask = _field_mask(spec, d, crops=crops)
        absc, sups = shell_sups(radii, weighted, edges, mask=mask)
        entries[alpha] = (float(weighted[mask].max()), absc, sups)
    return _finish("transform", m, r0, entries, ceiling, trend_tol)


def geometric_check(
    a: SymbolGrid,
    g: Window | None = None,
    k: int = 1,
    decay: int = 3,
    order: float | None = None,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> SeminormReport:
    """Check |L_1 ... L_j T_g a| <= C <x>^m <xi>^(-decay) for j <= k.

    The L_i run over all vector fields x_p d/d(x_q) on the first block; at
    k=0 this is the alpha=0 case of transform_side_check.
    """
    if k > 2:
        raise UnsupportedOperation(f"vector-field depth k={k} exceeds the supported 2")
    m = a.m if order is None else order
    acc = DEFAULTS["fd_order"] if acc is None else acc
    ceiling = DEFAULTS["constant_ceiling"] if ceiling is None else ceiling
    trend_tol = DEFAULTS["trend_tolerance"] if trend_tol is None else trend_tol
    F = _symbol_field(a, g)
    spec, d = F.spec, F.base_dim
    mesh = spec.mesh()
    radii = _block_radii(spec, range(d))
    bx = _bracket_block(spec, range(d))
    bxi = _bracket_block(spec, range(d, 2 * d))
    edges = _block_edges(spec, range(d))
    pairs = list(itertools.product(range(d), repeat=2))
    entries = {}
    for depth in range(k + 1):
        for seq in itertools.product(pairs, repeat=depth):
            vals = F.values
            for p, q in reversed(seq):
                vals = mesh[p] * diff_axis(vals, q, spec.steps[q], 1, acc)
            weighted = np.abs(vals) * bx ** (-m) * bxi**decay
            crops = [fd_margin(depth, acc) if depth else 0] * d + [0] * d
            mask = _field_mask(spec, d, crops=crops)
            absc, sups = shell_sups(radii, weighted, edges, mask=mask)
            entries[seq] = (float(weighted[mask].max()), absc, sups)
    return _finish("geometric", m, a.rho, entries, ceiling, trend_tol)


def classical_defect(
    a: SymbolGrid,
    order: float | None = None,
    depth: int = 1,
    acc: int | None = None,
) -> DefectReport:
    """Order of (R - m + depth - 1) ... (R - m) a with R = <z, grad>.

    A symbol of order m is polyhomogeneous exactly when each such iterate
    drops by a full order per factor; the verdict passes when the fitted
    defect order stays below m - depth plus a fixed margin.  Rightmost
    factor first.
    """
    if depth > 3:
        raise UnsupportedOperation(f"defect depth {depth} exceeds the supported 3")
    m = a.m if order is None else order
    acc = DEFAULTS["fd_order"] if acc is None else acc
    mesh = a.spec.mesh()
    vals = a.values
    for i in range(depth):
        radial = np.zeros(a.spec.shape, dtype=np.complex128)
        for j in range(a.dim):
            radial += mesh[j] * diff_axis(vals, j, a.spec.steps[j], 1, acc)
        vals = radial - (m - i) * vals
    radii = _grid_radii(a.spec)
    edges = _default_edges(a.spec)
    mask = _probe_mask(a.spec, crops=[fd_margin(depth, acc)] * a.dim)
    absc, sups = shell_sups(radii, np.abs(vals), edges, mask=mask)
    _, ref_sups = shell_sups(radii, np.abs(a.values), edges, mask=mask)
    threshold = m - depth + DEFAULTS["classical_margin"]
    # defect at the rounding floor of the symbol itself: exactly homogeneous
    negligible = bool(np.max(sups / np.maximum(ref_sups, 1e-300)) <= 1e-8)
    if negligible:
        return DefectReport(None, 0.0, threshold, True, True)
    slope, _, resid = loglog_fit(absc, sups)
    return DefectReport(slope, resid, threshold, False, slope <= threshold)


def radial_transform_defect(
    a: SymbolGrid,
    g: Window | None = None,
    order: float | None = None,
    depth: int = 1,
    weight_max: int = 4,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> SeminormReport:
    """Transform-side classicality: iterate <x + i grad_xi, grad_x> - shifts.

    The radial field conjugates through the transform to this first-order
    operator; the iterated defect must obey the envelope
    <x>^(m - depth) <xi>^(-M) for M up to weight_max.  Depth 0 reduces to
    the alpha=0 transform-side envelope.
    """
    if depth > 2:
        raise UnsupportedOperation(f"radial defect depth {depth} exceeds the supported 2")
    if weight_max > 4:
        raise UnsupportedOperation(f"weight power {weight_max} exceeds the supported 4")
    m = a.m if order is None else order
    acc = DEFAULTS["fd_order"] if acc is None else acc
    ceiling = DEFAULTS["constant_ceiling"] if ceiling is None else ceiling
    trend_tol = DEFAULTS["trend_tolerance"] if trend_tol is None else trend_tol
    F = _symbol_field(a, g)
    spec, d = F.spec, F.base_dim
    mesh = spec.mesh()
    vals = F.values
    for i in range(depth):
        nxt = np.zeros(spec.shape, dtype=np.complex128)
        for j in range(d):
            dx = diff_axis(vals, j, spec.steps[j], 1, acc)
            nxt += mesh[j] * dx + 1j * diff_axis(dx, d + j, spec.steps[d + j], 1, acc)
        vals = nxt - (m - i) * vals
    radii = _block_radii(spec, range(d))
    bx = _bracket_block(spec, range(d))
    bxi = _bracket_block(spec, range(d, 2 * d))
    edges = _block_edges(spec, range(d))
    mask = _field_mask(spec, d, crops=[fd_margin(depth, acc) if depth else 0] * (2 * d))
    entries = {}
    for power in range(weight_max + 1):
        weighted = np.abs(vals) * bx ** (depth - m) * bxi**power
        absc, sups = shell_sups(radii, weighted, edges, mask=mask)
        entries[(power,)] = (float(weighted[mask].max()), absc, sups)
    return _finish("radial", m, a.rho, entries, ceiling, trend_tol)
