"""Phase-space transform, adjoint, inversion, twists, and decay fitting.

The transform of a signal u against a window g is

    T_g u(x, xi) = (2pi)^{-d/2} (u, T_x M_xi g),
    T_x M_xi g(y) = e^{i<y-x, xi>} g(y - x),

equivalently e^{i<x,xi>} F[u conj(g(. - x))](xi). On the grid this is one
windowed FFT per x node with the window looked up periodically (mod 2L),
which makes the discrete map exactly isometric for unit-norm windows and
the adjoint an exact transpose. Inversion is therefore limited only by
how well the samples represent the signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import grid as _grid
from . import numerics, signals
from .defaults import DEFAULTS
from .exceptions import (
    DimensionMismatch,
    EmptyRegion,
    NearOrthogonalWindows,
    PhasescopeError,
    UnsupportedOperation,
)
from .grid import GridFunction, GridSpec, partial_fourier, partial_ifourier, quadrature_inner
from .signals import (
    Constant,
    GaussianPacket,
    LinearCombination,
    PointMass,
    Sampled,
    Signal,
    StandardGaussian,
    TensorProduct,
    Window,
    as_sampled,
    check_window,
    describe_signal,
    describe_window,
    has_point_mass,
    sample,
    window_moment,
)
from .subspaces import SubspaceSpec

_TWO_PI = 2.0 * math.pi


@dataclass
class PhaseSpaceField:
    """Complex samples of a transform on an (x-grid) x (xi-grid) product.

    The first base_dim axes are spatial, the rest are their duals unless
    the field was produced by an axis remap.
    """

    spec: GridSpec
    base_dim: int
    values: np.ndarray
    window: str = ""
    signal: str = ""
    twists: tuple[str, ...] = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.spec.dim != 2 * self.base_dim:
            raise DimensionMismatch("phase-space rank must be twice the base dimension")
        if self.values.shape != self.spec.shape:
            raise DimensionMismatch("field values do not match the grid shape")
        if not np.all(np.isfinite(self.values)):
            raise PhasescopeError("field contains non-finite entries")

    @property
    def x_spec(self) -> GridSpec:
        return GridSpec(self.spec.axes[: self.base_dim])

    @property
    def xi_spec(self) -> GridSpec:
        return GridSpec(self.spec.axes[self.base_dim :])

    def norm(self) -> float:
        return _grid.quadrature_norm(GridFunction(self.spec, self.values))

    def radii(self) -> np.ndarray:
        mesh = self.spec.mesh()
        r2 = np.zeros(self.spec.shape)
        for m in mesh:
            r2 = r2 + m**2
        return np.sqrt(r2)

    def with_values(self, values: np.ndarray, twist: str | None = None) -> "PhaseSpaceField":
        twists = self.twists + ((twist,) if twist else ())
        return PhaseSpaceField(self.spec, self.base_dim, values, self.window, self.signal, twists)


# ---------------------------------------------------------------------------
# forward transform


def _window_shift_table(g_node: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Table W[k, j] = g((y_j - x_k) mod 2L), axes grouped (k..., j...)."""
    d = spec.dim
    index = []
    for i, ax in enumerate(spec.axes):
        j = np.arange(ax.n)
        m = (j[None, :] - j[:, None] + ax.n // 2) % ax.n
        shape = [1] * (2 * d)
        shape[i] = ax.n
        shape[d + i] = ax.n
        index.append(m.reshape(shape))
    return g_node[tuple(index)]


def _phase_grid(vals: np.ndarray, spec: GridSpec, centers=None, sign: float = 1.0) -> np.ndarray:
    """Multiply by prod_i exp(sign * i (x_i - c_i) xi_i) over the 2d mesh."""
    d = spec.dim
    for i, ax in enumerate(spec.axes):
        x = ax.nodes() - (0.0 if centers is None else centers[i])
        xi = ax.dual().nodes()
        ph = np.exp(1j * sign * np.outer(x, xi))
        shape = [1] * (2 * d)
        shape[i] = ax.n
        shape[d + i] = ax.n
        vals = vals * ph.reshape(shape)
    return vals


def _transform_sampled(uv: np.ndarray, g: Window, spec: GridSpec) -> np.ndarray:
    d = spec.dim
    g_node = np.asarray(g.values(spec))
    table = np.conj(_window_shift_table(g_node, spec))
    U = uv.reshape((1,) * d + uv.shape) * table
    big = GridSpec(spec.axes + spec.axes)
    F = partial_fourier(GridFunction(big, U), tuple(range(d, 2 * d)))
    return _phase_grid(F.values, spec)


def _transform_pointmass(u: PointMass, g: Window, spec: GridSpec) -> np.ndarray:
    d = spec.dim
    x0 = np.asarray(u.location, dtype=np.float64)
    X = spec.points()
    w = np.conj(g.eval(x0[None, :] - X)).reshape(spec.shape)
    amp = complex(u.weight) * _TWO_PI ** (-d / 2.0)
    vals = (amp * w).reshape(spec.shape + (1,) * d)
    vals = np.broadcast_to(vals, spec.shape * 2).copy()
    return _phase_grid(vals, spec, centers=x0)


def _tensor_field_values(parts: list[np.ndarray], dims: list[int]) -> np.ndarray:
    vals = None
    for p in parts:
        vals = p if vals is None else np.multiply.outer(vals, p)
    perm_x: list[int] = []
    perm_xi: list[int] = []
    off = 0
    for db in dims:
        perm_x.extend(range(off, off + db))
        perm_xi.extend(range(off + db, off + 2 * db))
        off += 2 * db
    return np.transpose(vals, perm_x + perm_xi)


def transform(u: Signal, g: Window, spec: GridSpec | None = None) -> PhaseSpaceField:
    """Phase-space transform of u against window g on the x-grid spec."""
    if isinstance(u, Sampled):
        if spec is None:
            spec = u.data.spec
    if spec is None:
        raise PhasescopeError("a grid is required for non-sample-backed signals")
    if u.dim != spec.dim or g.dim != spec.dim:
        raise DimensionMismatch("signal, window and grid dimensions must agree")
    check_window(g, spec, DEFAULTS["inner_product_floor"])

    if isinstance(u, LinearCombination):
        vals = None
        for c, term in u.terms:
            f = transform(term, g, spec)
            vals = complex(c) * f.values if vals is None else vals + complex(c) * f.values
        out_spec = GridSpec(spec.axes + tuple(a.dual() for a in spec.axes))
        return PhaseSpaceField(
            out_spec, spec.dim, vals, describe_window(g), describe_signal(u)
        )
    if isinstance(u, PointMass):
        vals = _transform_pointmass(u, g, spec)
    elif isinstance(u, TensorProduct) and has_point_mass(u):
        if not isinstance(g, StandardGaussian):
            raise UnsupportedOperation(
                "point-mass tensor factors need the factorizing standard window"
            )
        parts = []
        dims = []
        pos = 0
        for f in u.factors:
            sub = GridSpec(spec.axes[pos : pos + f.dim])
            parts.append(transform(f, StandardGaussian(f.dim), sub).values)
            dims.append(f.dim)
            pos += f.dim
        vals = _tensor_field_values(parts, dims)
    else:
        vals = _transform_sampled(sample(u, spec).values, g, spec)
    out_spec = GridSpec(spec.axes + tuple(a.dual() for a in spec.axes))
    return PhaseSpaceField(out_spec, spec.dim, vals, describe_window(g), describe_signal(u))


# ---------------------------------------------------------------------------
# pointwise transform at arbitrary phase-space probes


def transform_at(u: Signal, g: Window, spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate T_g u at arbitrary phase-space points of shape (..., 2d).

    Direct quadrature against the shifted, modulated window; closed forms
    for point masses. Independent of the gridded transform path, so the
    two can check each other.
    """
    pts = np.asarray(points, dtype=np.float64)
    d = spec.dim
    if pts.shape[-1] != 2 * d:
        raise DimensionMismatch("probe points need 2d phase-space coordinates")
    flat = pts.reshape(-1, 2 * d)
    x_p = flat[:, :d]
    xi_p = flat[:, d:]

    if isinstance(u, LinearCombination):
        out = np.zeros(flat.shape[0], dtype=np.complex128)
        for c, term in u.terms:
            out += complex(c) * transform_at(term, g, spec, flat)
        return out.reshape(pts.shape[:-1])
    if isinstance(u, PointMass):
        x0 = np.asarray(u.location, dtype=np.float64)
        w = np.conj(g.eval(x0[None, :] - x_p))
        phase = np.exp(1j * np.sum((x_p - x0[None, :]) * xi_p, axis=1))
        amp = complex(u.weight) * _TWO_PI ** (-d / 2.0)
        return (amp * w * phase).reshape(pts.shape[:-1])
    if isinstance(u, TensorProduct) and has_point_mass(u):
        if not isinstance(g, StandardGaussian):
            raise UnsupportedOperation(
                "point-mass tensor factors need the factorizing standard window"
            )
        out = np.ones(flat.shape[0], dtype=np.complex128)
        pos = 0
        for f in u.factors:
            sub = GridSpec(spec.axes[pos : pos + f.dim])
            cols = np.concatenate(
                [flat[:, pos : pos + f.dim], flat[:, d + pos : d + pos + f.dim]], axis=1
            )
            out *= transform_at(f, StandardGaussian(f.dim), sub, cols)
            pos += f.dim
        return out.reshape(pts.shape[:-1])

    uv = sample(u, spec).values.ravel()
    Y = spec.points()
    amp = _TWO_PI ** (-d / 2.0) * spec.volume_element
    out = np.empty(flat.shape[0], dtype=np.complex128)
    chunk = max(1, int(2**21 // max(1, uv.size)))
    for start in range(0, flat.shape[0], chunk):
        xb = x_p[start : start + chunk]
        xib = xi_p[start : start + chunk]
        diff = Y[None, :, :] - xb[:, None, :]
        w = np.conj(g.eval(diff))
        phase = np.exp(-1j * ((Y @ xib.T).T - np.sum(xb * xib, axis=1)[:, None]))
        out[start : start + chunk] = amp * np.sum(uv[None, :] * w * phase, axis=1)
    return out.reshape(pts.shape[:-1])


# ---------------------------------------------------------------------------
# adjoint and inversion


def adjoint(F: PhaseSpaceField, g: Window) -> GridFunction:
    """Adjoint T_g^* of the discretized transform; exact transpose."""
    d = F.base_dim
    xspec = F.x_spec
    if g.dim != d:
        raise DimensionMismatch("window dimension must match the field base")
    vals = _phase_grid(F.values.copy(), xspec, sign=-1.0)
    P = partial_ifourier(GridFunction(F.spec, vals), tuple(range(d, 2 * d)))
    g_node = np.asarray(g.values(xspec))
    table = _window_shift_table(g_node, xspec)
    out = xspec.volume_element * np.sum(P.values * table, axis=tuple(range(d)))
    return GridFunction(xspec, out)


def invert(F: PhaseSpaceField, g: Window, h: Window | None = None) -> GridFunction:
    """Reconstruct u from T_g u using analysis window g and synthesis h."""
    if h is None:
        h = g
    xspec = F.x_spec
    ip = quadrature_inner(as_sampled(h, xspec), as_sampled(g, xspec))
    if abs(ip) <= DEFAULTS["inner_product_floor"]:
        raise NearOrthogonalWindows(
            f"window pairing |(h, g)| = {abs(ip):.3e} is too small to invert"
        )
    rec = adjoint(F, h)
    return GridFunction(xspec, rec.values / ip)


# ---------------------------------------------------------------------------
# phase twists


def phase_twist_Y(F: PhaseSpaceField, Y: SubspaceSpec, conjugate: bool = False) -> PhaseSpaceField:
    """Twist by exp(-i <pi_{Y-perp} x, xi>)."""
    d = F.base_dim
    if Y.dim != d:
        raise DimensionMismatch("subspace dimension must match the field base")
    X = F.x_spec.points() @ Y.projector_perp.T
    Xi = F.xi_spec.points()
    sign = 1.0 if conjugate else -1.0
    phase = np.exp(sign * 1j * (X @ Xi.T)).reshape(F.spec.shape)
    tag = f"Y*({Y.n}/{d})" if conjugate else f"Y({Y.n}/{d})"
    return F.with_values(F.values * phase, tag)


def phase_twist_diag(F: PhaseSpaceField, conjugate: bool = False) -> PhaseSpaceField:
    """Twist by exp(-(i/2) <xi_1 - xi_2, x_1 - x_2>) on a paired field."""
    if F.base_dim % 2 != 0:
        raise DimensionMismatch("the paired twist needs an even base dimension")
    n = F.base_dim // 2
    mesh = F.spec.mesh()
    acc = np.zeros(F.spec.shape)
    for i in range(n):
        dz = mesh[i] - mesh[n + i]
        dzeta = mesh[2 * n + i] - mesh[3 * n + i]
        acc = acc + dzeta * dz
    sign = 0.5 if conjugate else -0.5
    phase = np.exp(sign * 1j * acc)
    return F.with_values(F.values * phase, "diag*" if conjugate else "diag")


# ---------------------------------------------------------------------------
# differential identities and window change


def signal_derivative(u: Signal, alpha, spec: GridSpec) -> Signal:
    """Spectral derivative d^alpha u as a sample-backed signal."""
    if all(a == 0 for a in alpha):
        return u
    uv = sample(u, spec)
    U = _grid.fourier(uv)
    mesh = U.spec.mesh()
    mult = np.ones(U.spec.shape, dtype=np.complex128)
    for i, a in enumerate(alpha):
        if a:
            mult = mult * (1j * mesh[i]) ** a
    back = _grid.ifourier(GridFunction(U.spec, U.values * mult))
    return Sampled(GridFunction(spec, back.values))


def _combined_mask(spec2d: GridSpec, alpha_total: int, acc: int, margin: float) -> np.ndarray:
    mask = spec2d.interior_mask(margin)
    if alpha_total > 0:
        m = numerics.fd_margin(alpha_total, acc)
        for axis, ax in enumerate(spec2d.axes):
            edge = np.ones(ax.n, dtype=bool)
            edge[:m] = False
            edge[ax.n - m :] = False
            shape = [1] * spec2d.dim
            shape[axis] = ax.n
            mask = mask & edge.reshape(shape)
    return mask


def diff_identity_check(
    u: Signal,
    g: Window,
    spec: GridSpec,
    alpha: tuple[int, ...],
    beta: tuple[int, ...],
    acc: int | None = None,
) -> float:
    """Max relative error of d_x^alpha D_xi^beta T_g u = T_{g_beta}(d^alpha u).

    The left side uses centered finite differences on the transform; the
    right side is an independent transform with the moment window and the
    spectrally differentiated signal.
    """
    acc = DEFAULTS["fd_order"] if acc is None else acc
    d = spec.dim
    if len(alpha) != d or len(beta) != d:
        raise DimensionMismatch("multi-index ranks must match the grid")
    F = transform(u, g, spec)
    full = tuple(alpha) + tuple(beta)
    lhs = numerics.diff_multi(F.values, full, [a.step for a in F.spec.axes], acc)
    lhs = lhs * (-1j) ** sum(beta)
    gb = window_moment(g, beta, spec) if any(beta) else g
    rhs = transform(signal_derivative(u, alpha, spec), gb, spec).values
    mask = _combined_mask(F.spec, sum(full), acc, DEFAULTS["probe_margin"])
    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        return float(np.max(np.abs(lhs[mask])))
    return float(np.max(np.abs((lhs - rhs)[mask])) / scale)


@dataclass
class EnvelopeReport:
    verdict: bool
    max_ratio: float
    slack: float


def window_change_envelope(
    u: Signal,
    f: Window,
    g: Window,
    h: Window,
    spec: GridSpec,
    alpha: tuple[int, ...],
    beta: tuple[int, ...],
    slack: float = 5e-2,
    acc: int | None = None,
) -> EnvelopeReport:
    """Check |d_x^a d_xi^b T_f u| <= (2pi)^{-d/2}|(h,g)|^{-1} |d_x^a T_g u| * |T_{f_b} h|.

    The right side convolves moduli over phase space; the verdict requires
    the pointwise bound (with the stated slack) away from the grid rim.
    """
    acc = DEFAULTS["fd_order"] if acc is None else acc
    d = spec.dim
    ip = quadrature_inner(as_sampled(h, spec), as_sampled(g, spec))
    if abs(ip) <= DEFAULTS["inner_product_floor"]:
        raise NearOrthogonalWindows("window pairing (h, g) is numerically zero")
    Ff = transform(u, f, spec)
    full = tuple(alpha) + tuple(beta)
    lhs = np.abs(numerics.diff_multi(Ff.values, full, [a.step for a in Ff.spec.axes], acc))
    p1 = np.abs(transform(signal_derivative(u, alpha, spec), g, spec).values)
    fb = window_moment(f, beta, spec) if any(beta) else f
    p2 = np.abs(transform(Sampled(as_sampled(h, spec)), fb, spec).values)
    conv = scipy.signal.fftconvolve(p1, p2, mode="full")
    centers = tuple(ax.n // 2 for ax in Ff.spec.axes)
    sl = tuple(slice(c, c + ax.n) for c, ax in zip(centers, Ff.spec.axes))
    conv = conv[sl]
    vol = 1.0
    for ax in Ff.spec.axes:
        vol *= ax.step
    rhs = _TWO_PI ** (-d / 2.0) / abs(ip) * vol * conv
    mask = _combined_mask(Ff.spec, sum(full), acc, DEFAULTS["probe_margin"])
    mask = mask & (rhs > 1e-12 * float(np.max(rhs)))
    ratio = float(np.max(lhs[mask] / rhs[mask]))
    return EnvelopeReport(ratio <= 1.0 + slack, ratio, slack)


# ---------------------------------------------------------------------------
# decay fitting


@dataclass(frozen=True)
class Region:
    """Shell or cone probe region in phase space."""

    kind: str = "shell"
    direction: tuple[float, ...] | None = None
    aperture_deg: float = 10.0
    r_min: float = DEFAULTS["shell_r_min"]
    r_max: float | None = None
    count: int = DEFAULTS["shell_count"]

    def __post_init__(self):
        if self.kind not in ("shell", "cone"):
            raise PhasescopeError(f"unknown region kind {self.kind!r}")
        if self.kind == "cone" and self.direction is None:
            raise PhasescopeError("a cone region needs a direction")


@dataclass
class DecayReport:
    region: Region
    radii: np.ndarray
    sups: np.ndarray
    exponent: float
    residual: float
    declared: float | None
    constant: float
    trend: float
    verdict: bool


def decay_fit(
    F: PhaseSpaceField,
    region: Region | None = None,
    declared: float | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> DecayReport:
    """Fit sup |F| over radial shells (optionally cut to a cone) by a power law.

    With a declared exponent the verdict applies the envelope rule: the
    per-shell constants sup/<r>^declared must stay under the ceiling and
    must not grow with radius faster than the trend tolerance.
    """
    ceiling = DEFAULTS["constant_ceiling"] if ceiling is None else ceiling
    trend_tol = DEFAULTS["trend_tolerance"] if trend_tol is None else trend_tol
    region = Region() if region is None else region
    extent = min(ax.half_width for ax in F.spec.axes)
    r_cap = DEFAULTS["shell_r_max_fraction"] * extent
    r_max = r_cap if region.r_max is None else region.r_max
    if r_max > r_cap * (1.0 + 1e-12):
        raise EmptyRegion(f"shell radii beyond {r_cap:.3g} touch the grid rim")
    radii = F.radii()
    mask = None
    if region.kind == "cone":
        w = np.asarray(region.direction, dtype=np.float64)
        if w.shape != (F.spec.dim,):
            raise DimensionMismatch("cone direction must be a phase-space vector")
        w = w / np.linalg.norm(w)
        mesh = F.spec.mesh()
        dot = np.zeros(F.spec.shape)
        for i, m in enumerate(mesh):
            dot = dot + w[i] * m
        cos_ap = math.cos(math.radians(region.aperture_deg))
        mask = dot >= cos_ap * radii
        mask = mask & (radii > 0)
    edges = numerics.shell_edges(region.r_min, r_max, region.count)
    absc, sups = numerics.shell_sups(radii, F.values, edges, mask)
    exponent, intercept, residual = numerics.loglog_fit(absc, sups)
    if declared is None:
        constant = float(np.max(sups / absc**exponent))
        trend = 0.0
        verdict = bool(np.isfinite(exponent))
    else:
        consts = sups / absc ** float(declared)
        constant = float(np.max(consts))
        trend = numerics.trend_slope(absc, consts)
        verdict = bool(constant <= ceiling and trend <= trend_tol)
    return DecayReport(
        region, absc, sups, float(exponent), float(residual), declared, constant, trend, verdict
    )
