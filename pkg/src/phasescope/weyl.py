"""Kernels of phase-space quantized operators and their transform-side checks.

A symbol a(x, xi) on R^{2d} is quantized through the kernel

    K_a(s, t) = (2pi)^{-d/2} (F2^{-1} a)((s + t)/2, s - t),

where F2^{-1} inverts the Fourier transform in the xi block.  On a grid
whose xi axes are the duals of its x axes the change of variables is exact:
midpoints (s + t)/2 land on the once-refined x lattice and differences
s - t land on the original lattice mod the period.

The transform of the kernel factors through the symbol.  With the paired
window h = F2(g o kappa), kappa(x, y) = (x + y/2, x - y/2),

    T_g K_a(z1, z2, zeta1, zeta2)
        = (2pi)^{-d/2} T_h a((z1+z2)/2, (zeta1-zeta2)/2, zeta1+zeta2, z2-z1)
          * exp((i/2) <zeta1-zeta2, z1-z2>),

so growth of the twisted field exp(-(i/2)<zeta1-zeta2, z1-z2>) T_g K_a is
read off along the diagonal block (z1+z2, zeta1-zeta2) while the
transversal block (z1-z2, zeta1+zeta2) carries rapid decay.  The checks
below probe that envelope the same way the symbol-side checks do: sup over
shells in the diagonal radius, with a ceiling on the constants and a trend
gate on the shell slopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as _grid
from .defaults import DEFAULTS
from .exceptions import (
    DimensionMismatch,
    InvalidGrid,
    PhasescopeError,
    UnsupportedOperation,
)
from .fbi import phase_twist_diag, transform, transform_at
from .grid import GridFunction, GridSpec
from .numerics import diff_direction, fd_margin, shell_edges, shell_sups
from .signals import (
    LinearCombination,
    PointMass,
    Sampled,
    Signal,
    StandardGaussian,
    Window,
    has_point_mass,
    sample,
    window_kappa,
    window_norm,
    window_tensor,
)
from .symclass import SeminormReport, _finish


__all__ = [
    "KernelGrid",
    "KernelIdentityReport",
    "kernel_from_symbol",
    "apply_kernel",
    "apply_weyl",
    "kernel_transform_identity_check",
    "conjugated_kernel",
    "kernel_conormal_check",
]


@dataclass
class KernelGrid:
    """Sampled two-point kernel K(s, t) on a product of two equal grids."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.spec.dim % 2 != 0:
            raise DimensionMismatch("a kernel grid needs an even rank")
        d = self.spec.dim // 2
        for i in range(d):
            if self.spec.axes[i] != self.spec.axes[d + i]:
                raise InvalidGrid("kernel grid blocks must use identical axes")
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.spec.shape:
            raise DimensionMismatch("kernel values do not match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise PhasescopeError("kernel contains non-finite entries")

    @property
    def base_dim(self) -> int:
        return self.spec.dim // 2

    @property
    def domain_spec(self) -> GridSpec:
        return GridSpec(self.spec.axes[: self.base_dim])


def _symbol_parts(a):
    spec = a.spec
    values = a.values
    if spec.dim % 2 != 0:
        raise DimensionMismatch("a symbol grid needs an even rank")
    return spec, np.asarray(values, dtype=np.complex128)


def kernel_from_symbol(a) -> KernelGrid:
    """Exact discrete kernel of the symmetrically quantized symbol.

    The symbol grid must pair each x axis with its dual xi axis; only then
    do the midpoint and difference coordinates land on lattice nodes.  The
    midpoint axis is refined once by trigonometric interpolation, which
    keeps original nodes exact, and the difference axis wraps mod the
    period.
    """
    spec, values = _symbol_parts(a)
    d = spec.dim // 2
    for i in range(d):
        if spec.axes[d + i] != spec.axes[i].dual():
            raise InvalidGrid(
                "symbol grid is not midpoint compatible: xi axes must be the "
                "duals of the x axes"
            )
    base = _grid.partial_ifourier(
        GridFunction(spec, values), tuple(range(d, 2 * d))
    )
    fine = base
    for i in range(d):
        fine = _grid.refine_axis(fine, i)
    index = [None] * (2 * d)
    for i in range(d):
        n = spec.axes[i].n
        p = np.arange(n).reshape([-1 if a_ == i else 1 for a_ in range(2 * d)])
        q = np.arange(n).reshape([-1 if a_ == d + i else 1 for a_ in range(2 * d)])
        index[i] = p + q
        index[d + i] = (p - q + n // 2) % n
    vals = (2.0 * np.pi) ** (-d / 2.0) * fine.values[tuple(index)]
    axes = spec.axes[:d]
    return KernelGrid(GridSpec(axes + axes), vals)


def _node_index(spec, location) -> tuple:
    idx = []
    for ax, c in zip(spec.axes, location):
        t = (float(c) + ax.half_width) / ax.step
        j = int(round(t))
        if abs(t - j) > 1e-9 or not (0 <= j < ax.n):
            raise UnsupportedOperation("point mass must sit on a kernel node")
        idx.append(j)
    return tuple(idx)


def _apply_distributional(K: KernelGrid, f: Signal) -> GridFunction:
    dom = K.domain_spec
    if isinstance(f, PointMass):
        # K(s, t) integrated against w delta_{t0} is w K(s, t0), no volume
        d = K.base_dim
        sl = (slice(None),) * d + _node_index(dom, f.location)
        return GridFunction(dom, complex(f.weight) * K.values[sl])
    if isinstance(f, LinearCombination):
        out = np.zeros(dom.shape, dtype=np.complex128)
        for c, t in f.terms:
            out += complex(c) * apply_kernel(K, t).values
        return GridFunction(dom, out)
    raise UnsupportedOperation(
        f"cannot apply a kernel to a distributional {type(f).__name__}"
    )


def apply_kernel(K: KernelGrid, f) -> GridFunction:
    """Integrate K(s, t) f(t) dt by the rectangle rule on the second block.

    Point masses (alone or inside combinations) skip the quadrature and
    read the kernel column at their node exactly.
    """
    dom = K.domain_spec
    if isinstance(f, GridFunction):
        if f.spec != dom:
            raise DimensionMismatch("input grid does not match the kernel domain")
        fv = f.values
    elif isinstance(f, Signal):
        if has_point_mass(f):
            return _apply_distributional(K, f)
        fv = sample(f, dom).values
    else:
        fv = np.asarray(f, dtype=np.complex128)
        if fv.shape != dom.shape:
            raise DimensionMismatch("input values do not match the kernel domain")
    nx = int(np.prod(dom.shape))
    mat = K.values.reshape(nx, nx)
    out = np.einsum("st,t->s", mat, fv.reshape(nx), optimize=False)
    out = out * dom.volume_element
    return GridFunction(dom, out.reshape(dom.shape))


def apply_weyl(a, f) -> GridFunction:
    """Apply the quantized symbol to f through its discrete kernel."""
    return apply_kernel(kernel_from_symbol(a), f)


@dataclass
class KernelIdentityReport:
    """Probe comparison of a kernel transform against its symbol transform."""

    max_err: float
    scale: float
    n_probes: int

    @property
    def passed(self) -> bool:
        return self.max_err <= 1e-5


def kernel_transform_identity_check(
    a,
    g: Window | None = None,
    n_probes: int = 64,
    seed: int | None = None,
    margin: float = 0.3,
) -> KernelIdentityReport:
    """Compare T_g K_a against the remapped symbol transform at probe nodes.

    The left side is the gridded transform of the kernel; the right side is
    the direct quadrature transform of the symbol with the paired window
    F2(g o kappa), evaluated at the remapped points

        ((z1+z2)/2, (zeta1-zeta2)/2, zeta1+zeta2, z2-z1)

    and multiplied by (2pi)^{-d/2} exp((i/2)(zeta1-zeta2)(z1-z2)).  Probes
    are interior nodes whose field magnitude clears a relative floor and
    whose transversal radius |(z1-z2, zeta1+zeta2)| stays inside half the
    domain half-width: the difference coordinate of the discrete kernel
    wraps mod the period, so corners of the kernel plane alias the
    diagonal and only the banded region compares against the continuum
    identity.  The report gives the largest deviation relative to the
    field maximum.
    """
    spec, values = _symbol_parts(a)
    d = spec.dim // 2
    if d != 1:
        raise UnsupportedOperation("the kernel identity check runs on R^2 symbols")
    K = kernel_from_symbol(a)
    if g is None:
        g = StandardGaussian(2)
    F = transform(Sampled(GridFunction(K.spec, K.values)), g)
    h = window_kappa(g, K.spec)

    scale = float(np.max(np.abs(F.values)))
    if scale == 0.0:
        raise PhasescopeError("the kernel transform vanishes identically")
    mask = F.spec.interior_mask(margin)
    mask &= np.abs(F.values) > 1e-8 * scale
    mesh = F.spec.mesh()
    minus_r = np.sqrt((mesh[0] - mesh[1]) ** 2 + (mesh[2] + mesh[3]) ** 2)
    band = 0.5 * min(ax.half_width for ax in F.spec.axes)
    mask &= minus_r <= band
    flat = np.flatnonzero(mask.reshape(-1))
    if flat.size == 0:
        raise PhasescopeError("no admissible probe nodes for the identity check")
    rng = np.random.default_rng(DEFAULTS["seed"] if seed is None else seed)
    take = min(n_probes, flat.size)
    pick = rng.choice(flat, size=take, replace=False)
    idx = np.unravel_index(pick, F.spec.shape)

    z1 = F.spec.nodes(0)[idx[0]]
    z2 = F.spec.nodes(1)[idx[1]]
    zeta1 = F.spec.nodes(2)[idx[2]]
    zeta2 = F.spec.nodes(3)[idx[3]]
    points = np.stack(
        [0.5 * (z1 + z2), 0.5 * (zeta1 - zeta2), zeta1 + zeta2, z2 - z1], axis=-1
    )
    rhs = transform_at(Sampled(GridFunction(spec, values)), h, spec, points)
    rhs = rhs * (2.0 * np.pi) ** (-d / 2.0)
    rhs = rhs * np.exp(0.5j * (zeta1 - zeta2) * (z1 - z2))
    lhs = F.values[idx]
    err = float(np.max(np.abs(lhs - rhs))) / scale
    return KernelIdentityReport(err, scale, take)


def conjugated_kernel(a, g: Window | None = None, h: Window | None = None) -> KernelGrid:
    """Kernel of the operator conjugated by a transform pair.

    Sandwiching the quantized symbol between a synthesis with window g and
    an analysis with window h yields an operator on phase space whose
    kernel is a relabeling of T_{g (x) conj h} K_a: the output slots are
    (z1, zeta1; z2, zeta2) and the fourth slot carries a sign flip, taken
    exactly on the sign-symmetric frequency lattice.
    """
    spec, values = _symbol_parts(a)
    d = spec.dim // 2
    K = kernel_from_symbol(a)
    if g is None:
        g = StandardGaussian(d)
    if h is None:
        h = StandardGaussian(d)
    dom = K.domain_spec
    W = window_tensor(g, h, dom, dom, conj_second=True)
    F = transform(Sampled(GridFunction(K.spec, K.values)), W)
    perm = (
        tuple(range(d))
        + tuple(range(2 * d, 3 * d))
        + tuple(range(d, 2 * d))
        + tuple(range(3 * d, 4 * d))
    )
    vals = np.transpose(F.values, perm)
    for i in range(d):
        axis = 3 * d + i
        n = F.spec.axes[axis].n
        neg = (-np.arange(n)) % n
        vals = np.take(vals, neg, axis=axis)
    block = spec.axes[:d] + tuple(ax.dual() for ax in spec.axes[:d])
    return KernelGrid(GridSpec(block + block), np.ascontiguousarray(vals))


def _plus_minus_weights(spec: GridSpec, d: int):
    mesh = spec.mesh()
    plus2 = np.zeros(spec.shape)
    minus2 = np.zeros(spec.shape)
    for i in range(d):
        plus2 = plus2 + (mesh[i] + mesh[d + i]) ** 2
        minus2 = minus2 + (mesh[i] - mesh[d + i]) ** 2
    for i in range(d):
        plus2 = plus2 + (mesh[2 * d + i] - mesh[3 * d + i]) ** 2
        minus2 = minus2 + (mesh[2 * d + i] + mesh[3 * d + i]) ** 2
    return np.sqrt(plus2), np.sqrt(minus2)


def kernel_conormal_check(
    K: KernelGrid,
    g: Window | None = None,
    order: float = 0.0,
    rho: float = 1.0,
    alpha_max: int = 1,
    beta_max: int = 1,
    decay: int | None = None,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> SeminormReport:
    """Diagonal-growth envelope test for a quantized kernel.

    The twisted transform of a kernel quantized from a symbol of order m
    and regularity rho obeys

        |(d_z1 + d_z2)^alpha (d_zeta1 - d_zeta2)^beta  G|
            <= C <((z1+z2)/2, (zeta1-zeta2)/2)>^(m - rho (alpha+beta))
                 <(z1-z2, zeta1+zeta2)>^(-N)

    for every N, where G is exp(-(i/2)<zeta1-zeta2, z1-z2>) T_g K and the
    half coordinates are the symbol-plane midpoint variables.  Each
    derivative pair is taken as a directional finite difference, weighted
    by the reciprocal envelope, and the sup is tracked over shells in the
    diagonal radius |(z1+z2, zeta1-zeta2)|.  Probes keep the transversal
    block inside half the domain half-width so the enforced decay weight
    does not amplify box-truncation residue.
    """
    if K.base_dim != 1:
        raise UnsupportedOperation("the kernel envelope check runs on R^2 kernels")
    if alpha_max < 0 or beta_max < 0 or alpha_max + beta_max > 2:
        raise UnsupportedOperation("kernel envelope derivatives are limited to total order 2")
    if decay is None:
        decay = DEFAULTS["conormal_n_decay"] - 1
    if decay < 0 or decay > 6:
        raise UnsupportedOperation("transversal decay weights are limited to power 6")
    if acc is None:
        acc = DEFAULTS["fd_order"]
    if ceiling is None:
        ceiling = DEFAULTS["constant_ceiling"]
    if trend_tol is None:
        trend_tol = DEFAULTS["trend_tolerance"]
    if g is None:
        g = StandardGaussian(2)

    F = transform(Sampled(GridFunction(K.spec, K.values)), g)
    # conormality is scale-invariant in the window; divide its norm out
    G = phase_twist_diag(F.with_values(F.values / window_norm(g, K.spec)))
    spec = G.spec
    step_x = spec.axes[0].step
    step_xi = spec.axes[2].step

    plus_r, minus_r = _plus_minus_weights(spec, 1)
    # the envelope lives in the symbol-plane midpoint variables, half the
    # diagonal sums; shells may keep the unscaled radius since a flat
    # weighted field fits flat under any abscissa rescaling
    bracket_plus = np.sqrt(1.0 + 0.25 * plus_r**2)
    bracket_minus = np.sqrt(1.0 + minus_r**2)

    base_mask = spec.interior_mask(DEFAULTS["probe_margin"])
    band = 0.5 * min(ax.half_width for ax in spec.axes)
    base_mask &= minus_r <= band
    r_hi = 0.8 * float(np.max(plus_r[base_mask]))
    edges = shell_edges(DEFAULTS["shell_r_min"], r_hi, DEFAULTS["shell_count"])

    entries = {}
    for a_ in range(alpha_max + 1):
        for b in range(beta_max + 1):
            if a_ + b > 2:
                continue
            der = G.values
            for _ in range(a_):
                der = diff_direction(der, (1, 1, 0, 0), step_x, acc)
            for _ in range(b):
                der = diff_direction(der, (0, 0, 1, -1), step_xi, acc)
            weighted = (
                np.abs(der)
                * bracket_plus ** (rho * (a_ + b) - order)
                * bracket_minus**decay
            )
            mask = base_mask.copy()
            reach = fd_margin(a_ + b, acc)
            if reach > 0:
                crop = np.zeros(spec.shape, dtype=bool)
                sl = tuple(slice(reach, n - reach) for n in spec.shape)
                crop[sl] = True
                mask &= crop
            abscissas, sups = shell_sups(plus_r, weighted, edges, mask=mask)
            entries[(a_, b)] = (
                float(np.max(weighted[mask])),
                abscissas,
                sups,
            )
    return _finish("kernel", order, rho, entries, ceiling, trend_tol)
