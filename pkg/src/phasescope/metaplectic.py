"""Generators of the symplectic action and their transform covariances.

Each generator acts three ways: on phase-space points, on signals (the
unitary representative), and on transforms. The transform action reads

    T_g (mu u)(z) = phase(z) * scalar * T_{g''} u (chi^{-1} z)

with the window replacement g'' and point map depending on the variant:

    coordinate change A:  scalar |det A|^{-1/2}, window g o A^{-1},
                          points (A x, A^{-t} xi)
    quarter rotation:     phase e^{i<x,xi>}, window F^{-1} g,
                          points (-xi, x)
    shear B:              phase e^{(i/2)<x,Bx>}, window e^{-(i/2)<y,By>} g,
                          points (x, xi - Bx)
    shift (x0, xi0):      phase e^{i<xi0, x-x0>}, window g,
                          points (x - x0, xi - xi0)

Compositions fold these rules outermost-first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as _grid
from .defaults import DEFAULTS
from .exceptions import (
    DimensionMismatch,
    PhasescopeError,
    SingularMatrix,
    UnsupportedOperation,
)
from .fbi import transform, transform_at
from .grid import GridFunction, GridSpec
from .signals import (
    Constant,
    GaussianPacket,
    LinearCombination,
    PointMass,
    Sampled,
    SampledWindow,
    Signal,
    StandardGaussian,
    TensorProduct,
    Window,
    _check_symmetric,
    as_sampled,
    fourier_signal,
    sample,
    scale,
    window_chirp,
    window_fourier,
    window_pullback,
)

_MAX_COMPOSITION = 16


class MetaplecticElement:
    pass


@dataclass(frozen=True, eq=False)
class CoordChange(MetaplecticElement):
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch("coordinate change needs a square matrix")
        if abs(np.linalg.det(A)) < 1e-12:
            raise SingularMatrix("coordinate change matrix is singular")
        object.__setattr__(self, "matrix", A)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class FourierRot(MetaplecticElement):
    dim: int = 1


@dataclass(frozen=True, eq=False)
class Shear(MetaplecticElement):
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        object.__setattr__(self, "matrix", _check_symmetric(A, A.shape[0]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Shift(MetaplecticElement):
    x0: tuple[float, ...]
    xi0: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "xi0", tuple(float(v) for v in self.xi0))
        if len(self.x0) != len(self.xi0):
            raise DimensionMismatch("shift components have different lengths")

    @property
    def dim(self) -> int:
        return len(self.x0)


@dataclass(frozen=True, eq=False)
class Composition(MetaplecticElement):
    ops: tuple[MetaplecticElement, ...]

    def __post_init__(self):
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        flat = flatten(self)
        if len(flat) > _MAX_COMPOSITION:
            raise PhasescopeError(f"composition exceeds {_MAX_COMPOSITION} generators")
        dims = {o.dim for o in flat}
        if len(dims) > 1:
            raise DimensionMismatch("composition mixes dimensions")

    @property
    def dim(self) -> int:
        return self.ops[0].dim


def flatten(op: MetaplecticElement) -> list[MetaplecticElement]:
    """Generators in application-to-transform order (outermost first)."""
    if isinstance(op, Composition):
        out: list[MetaplecticElement] = []
        for o in op.ops:
            out.extend(flatten(o))
        return out
    return [op]


# ---------------------------------------------------------------------------
# action on points


def apply_point(op: MetaplecticElement, points: np.ndarray) -> np.ndarray:
    """Symplectic/affine action on phase-space points of shape (..., 2d)."""
    pts = np.asarray(points, dtype=np.float64)
    d = op.dim
    if pts.shape[-1] != 2 * d:
        raise DimensionMismatch("points must have 2d phase-space coordinates")
    if isinstance(op, Composition):
        out = pts
        for o in reversed(flatten(op)):
            out = apply_point(o, out)
        return out
    x = pts[..., :d]
    xi = pts[..., d:]
    if isinstance(op, CoordChange):
        A = op.matrix
        return np.concatenate([x @ np.linalg.inv(A).T, xi @ A], axis=-1)
    if isinstance(op, FourierRot):
        return np.concatenate([xi, -x], axis=-1)
    if isinstance(op, Shear):
        return np.concatenate([x, xi + x @ op.matrix.T], axis=-1)
    if isinstance(op, Shift):
        return np.concatenate(
            [x + np.asarray(op.x0), xi + np.asarray(op.xi0)], axis=-1
        )
    raise PhasescopeError(f"unknown generator {type(op).__name__}")


def apply_point_inverse(op: MetaplecticElement, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    d = op.dim
    if isinstance(op, Composition):
        out = pts
        for o in flatten(op):
            out = apply_point_inverse(o, out)
        return out
    x = pts[..., :d]
    xi = pts[..., d:]
    if isinstance(op, CoordChange):
        A = op.matrix
        return np.concatenate([x @ A.T, xi @ np.linalg.inv(A)], axis=-1)
    if isinstance(op, FourierRot):
        return np.concatenate([-xi, x], axis=-1)
    if isinstance(op, Shear):
        return np.concatenate([x, xi - x @ op.matrix.T], axis=-1)
    if isinstance(op, Shift):
        return np.concatenate(
            [x - np.asarray(op.x0), xi - np.asarray(op.xi0)], axis=-1
        )
    raise PhasescopeError(f"unknown generator {type(op).__name__}")


def symplectic_form(p: np.ndarray, q: np.ndarray, d: int) -> np.ndarray:
    """sigma((x, xi), (y, eta)) = <y, xi> - <x, eta>."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    return np.sum(q[..., :d] * p[..., d:], axis=-1) - np.sum(
        p[..., :d] * q[..., d:], axis=-1
    )


# ---------------------------------------------------------------------------
# action on signals


def _is_block_diagonal(A: np.ndarray, dims: list[int]) -> bool:
    off = 0
    mask = np.ones_like(A, dtype=bool)
    for db in dims:
        mask[off : off + db, off : off + db] = False
        off += db
    return bool(np.max(np.abs(A[mask])) < 1e-14) if mask.any() else True


def _sample_spec(u: Signal, spec: GridSpec | None) -> GridSpec:
    if isinstance(u, Sampled):
        return u.data.spec
    if spec is None:
        raise PhasescopeError("a grid is required to act on this signal")
    return spec


def apply_signal(op: MetaplecticElement, u: Signal, spec: GridSpec | None = None) -> Signal:
    """Unitary representative mu(chi) acting on a signal.

    Closed forms keep point masses, constants and Gaussian packets inside
    the signal menu wherever the variant allows; everything else is
    resampled through the trigonometric interpolant.
    """
    if isinstance(op, Composition):
        out = u
        for o in reversed(flatten(op)):
            out = apply_signal(o, out, spec)
        return out
    if op.dim != u.dim:
        raise DimensionMismatch("generator and signal dimensions differ")
    if isinstance(u, LinearCombination):
        return LinearCombination(tuple((c, apply_signal(op, t, spec)) for c, t in u.terms))
    if isinstance(op, Shift):
        return _apply_shift(op, u, spec)
    if isinstance(op, CoordChange):
        return _apply_coord(op, u, spec)
    if isinstance(op, FourierRot):
        return fourier_signal(u, _maybe_spec(u) or spec)
    if isinstance(op, Shear):
        return _apply_shear(op, u, spec)
    raise PhasescopeError(f"unknown generator {type(op).__name__}")


def _maybe_spec(u: Signal) -> GridSpec | None:
    return u.data.spec if isinstance(u, Sampled) else None


def _apply_shift(op: Shift, u: Signal, spec: GridSpec | None) -> Signal:
    a = np.asarray(op.x0)
    b = np.asarray(op.xi0)
    if isinstance(u, PointMass):
        loc = np.asarray(u.location)
        w = complex(u.weight) * complex(np.exp(1j * float(loc @ b)))
        return PointMass(tuple(float(v) for v in loc + a), w)
    if isinstance(u, GaussianPacket) and u.chirp is None:
        amp = complex(np.exp(1j * float(np.asarray(u.center) @ b)))
        packet = GaussianPacket(
            tuple(float(v) for v in np.asarray(u.center) + a),
            tuple(float(v) for v in np.asarray(u.modulation) + b),
            u.sigma,
        )
        return scale(amp, packet)
    if isinstance(u, Constant) and not np.any(b):
        return u
    if isinstance(u, TensorProduct):
        out = []
        pos = 0
        for f in u.factors:
            sub = Shift(tuple(a[pos : pos + f.dim]), tuple(b[pos : pos + f.dim]))
            out.append(_apply_shift(sub, f, None))
            pos += f.dim
        return TensorProduct(tuple(out))
    s = _sample_spec(u, spec)
    uv = sample(u, s)
    U = _grid.fourier(uv)
    omega = U.spec.points()
    shifted = _grid.ifourier(
        GridFunction(U.spec, U.values * np.exp(-1j * (omega @ a)).reshape(U.spec.shape))
    )
    pts = s.points()
    mod = np.exp(1j * ((pts - a) @ b)).reshape(s.shape)
    return Sampled(GridFunction(s, shifted.values * mod))


def _apply_coord(op: CoordChange, u: Signal, spec: GridSpec | None) -> Signal:
    A = op.matrix
    det = abs(np.linalg.det(A))
    if isinstance(u, PointMass):
        loc = np.linalg.solve(A, np.asarray(u.location))
        return PointMass(tuple(float(v) for v in loc), complex(u.weight) * det**-0.5)
    if isinstance(u, Constant):
        return Constant(complex(u.value) * det**0.5, u.dim)
    orthogonal = np.max(np.abs(A.T @ A - np.eye(op.dim))) < 1e-12
    if isinstance(u, GaussianPacket) and orthogonal:
        chirp = None
        if u.chirp is not None:
            chirp = tuple(tuple(float(v) for v in row) for row in A.T @ u.chirp_matrix() @ A)
        return GaussianPacket(
            tuple(float(v) for v in np.linalg.solve(A, np.asarray(u.center))),
            tuple(float(v) for v in A.T @ np.asarray(u.modulation)),
            u.sigma,
            chirp,
        )
    if isinstance(u, TensorProduct):
        dims = [f.dim for f in u.factors]
        if _is_block_diagonal(A, dims):
            out = []
            pos = 0
            for f in u.factors:
                block = A[pos : pos + f.dim, pos : pos + f.dim]
                out.append(_apply_coord(CoordChange(block), f, None))
                pos += f.dim
            return TensorProduct(tuple(out))
    s = _sample_spec(u, spec)
    uv = sample(u, s)
    vals = det**0.5 * _grid.trig_interp(uv, s.points() @ A.T).reshape(s.shape)
    return Sampled(GridFunction(s, vals))


def _apply_shear(op: Shear, u: Signal, spec: GridSpec | None) -> Signal:
    B = op.matrix
    if isinstance(u, PointMass):
        loc = np.asarray(u.location)
        w = complex(u.weight) * complex(np.exp(0.5j * float(loc @ B @ loc)))
        return PointMass(u.location, w)
    if isinstance(u, GaussianPacket):
        chirp = u.chirp_matrix() + B
        return GaussianPacket(
            u.center, u.modulation, u.sigma, tuple(tuple(float(v) for v in r) for r in chirp)
        )
    if isinstance(u, TensorProduct):
        dims = [f.dim for f in u.factors]
        if _is_block_diagonal(B, dims):
            out = []
            pos = 0
            for f in u.factors:
                block = B[pos : pos + f.dim, pos : pos + f.dim]
                out.append(_apply_shear(Shear(block), f, None))
                pos += f.dim
            return TensorProduct(tuple(out))
    s = _sample_spec(u, spec)
    uv = sample(u, s)
    pts = s.points()
    quad = np.einsum("ni,ij,nj->n", pts, B, pts)
    return Sampled(GridFunction(s, uv.values * np.exp(0.5j * quad).reshape(s.shape)))


# ---------------------------------------------------------------------------
# covariance of the transform


def _home_spec(g: Window, fallback: GridSpec) -> GridSpec:
    return g.data.spec if isinstance(g, SampledWindow) else fallback


def _fold_rules(op: MetaplecticElement, g: Window, spec: GridSpec, points: np.ndarray):
    """Fold phases, window replacements and point maps, outermost first."""
    amp = np.ones(points.shape[0], dtype=np.complex128)
    pts = np.array(points, dtype=np.float64, copy=True)
    gw = g
    d = op.dim
    for o in flatten(op):
        x = pts[:, :d]
        xi = pts[:, d:]
        if isinstance(o, Shift):
            amp = amp * np.exp(1j * ((x - np.asarray(o.x0)) @ np.asarray(o.xi0)))
        elif isinstance(o, CoordChange):
            amp = amp * abs(np.linalg.det(o.matrix)) ** -0.5
            gw = window_pullback(gw, o.matrix, _home_spec(gw, spec))
        elif isinstance(o, FourierRot):
            amp = amp * np.exp(1j * np.sum(x * xi, axis=1))
            gw = window_fourier(gw, _home_spec(gw, spec), inverse=True)
        elif isinstance(o, Shear):
            amp = amp * np.exp(0.5j * np.einsum("ni,ij,nj->n", x, o.matrix, x))
            gw = window_chirp(gw, o.matrix, _home_spec(gw, spec))
        else:
            raise PhasescopeError(f"unknown generator {type(o).__name__}")
        pts = apply_point_inverse(o, pts)
    return amp, gw, pts


def covariance_check(
    op: MetaplecticElement,
    u: Signal,
    g: Window,
    spec: GridSpec,
    n_probes: int = 24,
    seed: int | None = None,
) -> float:
    """Max relative probe error of the transform covariance identity.

    The left side transforms the transported signal; the right side folds
    the per-generator phase, window replacement and inverse point map onto
    direct quadrature evaluations of the original transform.
    """
    seed = DEFAULTS["seed"] if seed is None else seed
    rng = np.random.default_rng(seed)
    d = spec.dim
    if op.dim != d or u.dim != d:
        raise DimensionMismatch("generator, signal and grid dimensions must agree")
    v = apply_signal(op, u, spec)
    spec_l = v.data.spec if isinstance(v, Sampled) else spec
    extent = min(
        min(ax.half_width for ax in spec_l.axes),
        min(ax.half_width for ax in spec.axes),
        min(ax.dual().half_width for ax in spec.axes),
    )
    cap = 0.6 * extent
    probes = rng.uniform(-cap, cap, size=(n_probes, 2 * d))
    lhs = transform_at(v, g, spec_l, probes)
    amp, gw, pts = _fold_rules(op, g, spec, probes)
    rhs = amp * transform_at(u, gw, spec, pts)
    ref = float(np.max(np.abs(lhs)))
    if ref == 0.0:
        return float(np.max(np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs)) / ref)


def partial_fourier_covariance_check(
    u: Signal, g: Window, spec: GridSpec, split: int
) -> float:
    """Max relative node error of the partial-Fourier covariance.

    With x = (x1, x2) split after the first `split` axes the identity reads
    T_g u(x1, x2, xi1, xi2) = e^{i<x2,xi2>} T_{F2 g} F2 u (x1, xi2, xi1, -x2);
    grid duality puts every swapped coordinate back on a node.
    """
    d = spec.dim
    if not (0 <= split <= d):
        raise DimensionMismatch(f"split must lie in [0, {d}]")
    if split == d:
        return 0.0
    n = split
    lhs = transform(u, g, spec).values

    rear = tuple(range(n, d))
    u2 = _grid.partial_fourier(sample(u, spec), rear)
    spec2 = u2.spec
    if isinstance(g, StandardGaussian):
        g2: Window = g
    else:
        g2 = SampledWindow(_grid.partial_fourier(as_sampled(g, spec), rear), ("partial_fourier",))
    rhs = transform(Sampled(u2), g2, spec2).values

    for i in range(n, d):
        ax = spec.axes[i]
        neg = (ax.n - np.arange(ax.n)) % ax.n
        rhs = np.take(rhs, neg, axis=d + n + (i - n))
    perm = (
        list(range(n))
        + list(range(d + n, 2 * d))
        + list(range(d, d + n))
        + list(range(n, d))
    )
    rhs = np.transpose(rhs, perm)
    for i in range(n, d):
        ax = spec.axes[i]
        ph = np.exp(1j * np.outer(ax.nodes(), ax.dual().nodes()))
        shape = [1] * (2 * d)
        shape[i] = ax.n
        shape[d + i] = ax.n
        rhs = rhs * ph.reshape(shape)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)))
