"""Window and signal menus plus the window algebra.

Windows are Schwartz-class localizers for the phase-space transform:
either the standard Gaussian psi_0(x) = pi^{-d/4} exp(-|x|^2/2) with
exact off-grid evaluation, or grid samples with a derivation trail and
trigonometric off-grid evaluation.

Signals form a small closed menu. Pointwise kinds (Sampled, Constant,
GaussianPacket) can be sampled on a grid; PointMass and tensor products
containing one are handled analytically by the transform layer and
refuse pointwise sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import grid as _grid
from .exceptions import (
    DegenerateWindow,
    DimensionMismatch,
    PhasescopeError,
    SingularMatrix,
    UnsupportedOperation,
    UnsupportedSampling,
)
from .grid import GridFunction, GridSpec, resample_linear_map

_MAX_NESTING = 8


# ---------------------------------------------------------------------------
# windows


class Window:
    """Base class; see StandardGaussian and SampledWindow."""

    dim: int

    def values(self, spec: GridSpec) -> np.ndarray:
        raise NotImplementedError

    def eval(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class StandardGaussian(Window):
    dim: int = 1

    def values(self, spec: GridSpec) -> np.ndarray:
        if spec.dim != self.dim:
            raise DimensionMismatch("window and grid dimension differ")
        return self.eval(spec.points()).reshape(spec.shape)

    def eval(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        quad = np.sum(pts * pts, axis=-1)
        return (np.pi ** (-self.dim / 4.0) * np.exp(-0.5 * quad)).astype(np.complex128)

    def factor(self) -> "StandardGaussian":
        """One-dimensional tensor factor."""
        return StandardGaussian(1)


@dataclass
class SampledWindow(Window):
    data: GridFunction
    trail: tuple[str, ...] = ()

    def __post_init__(self):
        self.dim = self.data.spec.dim

    def values(self, spec: GridSpec) -> np.ndarray:
        if spec != self.data.spec:
            raise DimensionMismatch("sampled window is bound to its own grid")
        return self.data.values

    def eval(self, points: np.ndarray) -> np.ndarray:
        return _grid.trig_interp(self.data, points)


def as_sampled(g: Window, spec: GridSpec) -> GridFunction:
    return GridFunction(spec, g.values(spec))


def window_norm(g: Window, spec: GridSpec) -> float:
    return _grid.quadrature_norm(as_sampled(g, spec))


def window_inner(h: Window, g: Window, spec: GridSpec) -> complex:
    return _grid.quadrature_inner(as_sampled(h, spec), as_sampled(g, spec))


def check_window(g: Window, spec: GridSpec, floor: float = 1e-8) -> None:
    if window_norm(g, spec) <= floor:
        raise DegenerateWindow("window has numerically zero norm on this grid")


def window_moment(g: Window, beta: tuple[int, ...], spec: GridSpec) -> SampledWindow:
    """Moment window g_beta(x) = (-x)^beta g(x)."""
    if len(beta) != spec.dim:
        raise DimensionMismatch("moment multi-index rank must match the grid")
    vals = np.asarray(g.values(spec), dtype=np.complex128).copy()
    for axis, b in enumerate(beta):
        if b == 0:
            continue
        x = spec.nodes(axis).reshape([-1 if i == axis else 1 for i in range(spec.dim)])
        vals = vals * (-x) ** b
    trail = getattr(g, "trail", ()) + (f"moment{tuple(beta)}",)
    return SampledWindow(GridFunction(spec, vals), trail)


def window_chirp(g: Window, B: np.ndarray, spec: GridSpec) -> SampledWindow:
    """Chirped window exp(-(i/2) <y, B y>) g(y) for symmetric B."""
    B = _check_symmetric(B, spec.dim)
    pts = spec.points()
    quad = np.einsum("ni,ij,nj->n", pts, B, pts)
    vals = g.values(spec) * np.exp(-0.5j * quad).reshape(spec.shape)
    trail = getattr(g, "trail", ()) + ("chirp",)
    return SampledWindow(GridFunction(spec, vals), trail)


def window_pullback(g: Window, A: np.ndarray, spec: GridSpec) -> SampledWindow:
    """Window A^{-*} g = g(A^{-1} x).

    Exact evaluation for the standard Gaussian; band-limited resampling
    otherwise.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.shape != (spec.dim, spec.dim):
        raise DimensionMismatch("pullback matrix rank must match the grid")
    det = np.linalg.det(A)
    if abs(det) < 1e-12:
        from .exceptions import SingularMatrix

        raise SingularMatrix("pullback matrix is singular")
    Ainv = np.linalg.inv(A)
    pts = spec.points() @ Ainv.T
    vals = g.eval(pts).reshape(spec.shape)
    trail = getattr(g, "trail", ()) + ("pullback",)
    return SampledWindow(GridFunction(spec, vals), trail)


def window_fourier(g: Window, spec: GridSpec, inverse: bool = False) -> Window:
    """Fourier (or inverse Fourier) of a window. Gaussian is a fixed point."""
    if isinstance(g, StandardGaussian):
        return g
    f = _grid.ifourier(as_sampled(g, spec)) if inverse else _grid.fourier(as_sampled(g, spec))
    trail = getattr(g, "trail", ()) + ("ifourier" if inverse else "fourier",)
    return SampledWindow(f, trail)


def window_tensor(g: Window, h: Window, spec_g: GridSpec, spec_h: GridSpec,
                  conj_second: bool = False) -> SampledWindow:
    """Tensor window (g x h)(y, y') with an optional conjugate on h."""
    gv = g.values(spec_g)
    hv = h.values(spec_h)
    if conj_second:
        hv = np.conj(hv)
    vals = np.multiply.outer(gv, hv)
    spec = GridSpec(spec_g.axes + spec_h.axes)
    trail = getattr(g, "trail", ()) + getattr(h, "trail", ()) + ("tensor",)
    return SampledWindow(GridFunction(spec, vals), trail)


def window_kappa(g: Window, spec: GridSpec) -> SampledWindow:
    """Kernel-side companion window F_2(g o kappa), kappa(x,y) = (x+y/2, x-y/2).

    The grid must have even rank 2d with matching block axes; the second
    block of the output lives on the dual axes.
    """
    if spec.dim % 2 != 0:
        raise DimensionMismatch("kappa composition needs an even-rank grid")
    d = spec.dim // 2
    for i in range(d):
        if spec.axes[i] != spec.axes[d + i]:
            raise DimensionMismatch("kappa composition needs matching block axes")
    if isinstance(g, StandardGaussian):
        # psi_0(x + y/2) psi_0(x - y/2) = pi^{-d/2} exp(-|x|^2 - |y|^2/4), exact
        mesh = spec.mesh()
        qx = sum(mesh[i] ** 2 for i in range(d))
        qy = sum(mesh[d + i] ** 2 for i in range(d))
        comp = GridFunction(spec, np.pi ** (-d / 2.0) * np.exp(-qx - qy / 4.0) + 0j)
    else:
        comp = GridFunction(spec, _compose_kappa(as_sampled(g, spec)))
    out = _grid.partial_fourier(comp, tuple(range(d, 2 * d)))
    trail = getattr(g, "trail", ()) + ("kappa",)
    return SampledWindow(out, trail)


def _compose_kappa(f: GridFunction) -> np.ndarray:
    # sample f(x + y/2, x - y/2) by gathering on 2x refined data; both
    # composed arguments land exactly on the half-step lattice
    d = f.spec.dim // 2
    fine = f
    for i in range(2 * d):
        fine = _grid.refine_axis(fine, i)
    n = f.spec.axes[0].n
    index = [None] * (2 * d)
    for i in range(d):
        j = np.arange(n).reshape([-1 if a == i else 1 for a in range(2 * d)])
        k = np.arange(n).reshape([-1 if a == d + i else 1 for a in range(2 * d)])
        index[i] = (2 * j + k - n // 2) % (2 * n)
        index[d + i] = (2 * j - k + n // 2) % (2 * n)
    return fine.values[tuple(index)]


# ---------------------------------------------------------------------------
# signals


class Signal:
    dim: int


@dataclass
class Sampled(Signal):
    data: GridFunction

    def __post_init__(self):
        self.dim = self.data.spec.dim


@dataclass(frozen=True)
class PointMass(Signal):
    location: tuple[float, ...]
    weight: complex = 1.0

    @property
    def dim(self) -> int:
        return len(self.location)


@dataclass(frozen=True)
class Constant(Signal):
    value: complex = 1.0
    dim: int = 1


@dataclass(frozen=True)
class GaussianPacket(Signal):
    """sigma^{-d/2} pi^{-d/4} exp(-|x-x0|^2/(2 sigma^2) + i<x-x0, xi0> + (i/2)<x, Bx>)."""

    center: tuple[float, ...]
    modulation: tuple[float, ...]
    sigma: float = 1.0
    chirp: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise PhasescopeError("packet width must be positive")
        if len(self.center) != len(self.modulation):
            raise DimensionMismatch("packet center and modulation rank differ")
        if self.chirp is not None:
            _check_symmetric(np.asarray(self.chirp), len(self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def chirp_matrix(self) -> np.ndarray:
        if self.chirp is None:
            return np.zeros((self.dim, self.dim))
        return np.asarray(self.chirp, dtype=np.float64)


@dataclass
class TensorProduct(Signal):
    factors: tuple[Signal, ...]

    def __post_init__(self):
        self.dim = sum(f.dim for f in self.factors)
        _check_depth(self)


@dataclass
class LinearCombination(Signal):
    terms: tuple[tuple[complex, Signal], ...]

    def __post_init__(self):
        dims = {s.dim for _, s in self.terms}
        if len(dims) != 1:
            raise DimensionMismatch("combination members have mixed dimensions")
        self.dim = dims.pop()
        _check_depth(self)


@dataclass
class Pullback(Signal):
    """Deferred composition x -> base(matrix x).

    Kept symbolic so that successive coordinate changes compose at the
    matrix level; a chain that cancels down to a scaled permutation
    resolves analytically even for distributional kinds.
    """

    base: Signal
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != self.base.dim:
            raise DimensionMismatch("pullback matrix must be square of the signal dimension")
        if abs(np.linalg.det(A)) < 1e-12:
            raise SingularMatrix("pullback matrix is singular")
        self.matrix = A
        self.dim = self.base.dim
        _check_depth(self)


def _check_depth(s: Signal, depth: int = 0) -> None:
    if depth > _MAX_NESTING:
        raise PhasescopeError(f"signal nesting exceeds {_MAX_NESTING} levels")
    if isinstance(s, TensorProduct):
        for f in s.factors:
            _check_depth(f, depth + 1)
    elif isinstance(s, LinearCombination):
        for _, f in s.terms:
            _check_depth(f, depth + 1)
    elif isinstance(s, Pullback):
        _check_depth(s.base, depth + 1)


def _check_symmetric(B, d: int) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    if B.shape != (d, d):
        raise DimensionMismatch(f"matrix must be {d}x{d}")
    if np.max(np.abs(B - B.T)) > 1e-12 * max(1.0, np.max(np.abs(B))):
        raise PhasescopeError("matrix must be symmetric")
    return 0.5 * (B + B.T)


def has_point_mass(s: Signal) -> bool:
    if isinstance(s, PointMass):
        return True
    if isinstance(s, TensorProduct):
        return any(has_point_mass(f) for f in s.factors)
    if isinstance(s, LinearCombination):
        return any(has_point_mass(f) for _, f in s.terms)
    if isinstance(s, Pullback):
        return has_point_mass(s.base)
    return False


def sample(s: Signal, spec: GridSpec) -> GridFunction:
    """Pointwise samples of a signal; refuses distributional kinds."""
    if s.dim != spec.dim:
        raise DimensionMismatch("signal and grid dimension differ")
    if isinstance(s, Sampled):
        if s.data.spec != spec:
            raise DimensionMismatch("sampled signal is bound to its own grid")
        return s.data
    if isinstance(s, PointMass):
        raise UnsupportedSampling("a point mass has no pointwise samples")
    if isinstance(s, Constant):
        return GridFunction(spec, np.full(spec.shape, complex(s.value)))
    if isinstance(s, GaussianPacket):
        return GridFunction(spec, eval_packet(s, spec.points()).reshape(spec.shape))
    if isinstance(s, TensorProduct):
        if any(has_point_mass(f) for f in s.factors):
            raise UnsupportedSampling("tensor product contains a point mass")
        pos = 0
        vals = None
        for f in s.factors:
            sub = GridSpec(spec.axes[pos : pos + f.dim])
            fv = sample(f, sub).values
            vals = fv if vals is None else np.multiply.outer(vals, fv)
            pos += f.dim
        return GridFunction(spec, vals)
    if isinstance(s, LinearCombination):
        if has_point_mass(s):
            raise UnsupportedSampling("combination contains a point mass")
        vals = np.zeros(spec.shape, dtype=np.complex128)
        for c, f in s.terms:
            vals += complex(c) * sample(f, spec).values
        return GridFunction(spec, vals)
    if isinstance(s, Pullback):
        return resample_linear_map(sample(s.base, spec), s.matrix)
    raise PhasescopeError(f"unknown signal kind {type(s).__name__}")


def eval_packet(p: GaussianPacket, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    x0 = np.asarray(p.center)
    xi0 = np.asarray(p.modulation)
    diff = pts - x0
    quad = np.sum(diff * diff, axis=-1)
    phase = diff @ xi0
    out = np.exp(-quad / (2.0 * p.sigma**2) + 1j * phase)
    if p.chirp is not None:
        B = p.chirp_matrix()
        out = out * np.exp(0.5j * np.einsum("...i,ij,...j->...", pts, B, pts))
    norm = p.sigma ** (-p.dim / 2.0) * np.pi ** (-p.dim / 4.0)
    return (norm * out).astype(np.complex128)


def scale(c: complex, s: Signal) -> Signal:
    """Multiply a signal by a complex constant without growing the tree."""
    c = complex(c)
    if c == 1.0:
        return s
    if isinstance(s, Sampled):
        return Sampled(GridFunction(s.data.spec, c * s.data.values))
    if isinstance(s, PointMass):
        return PointMass(s.location, c * complex(s.weight))
    if isinstance(s, Constant):
        return Constant(c * complex(s.value), s.dim)
    if isinstance(s, LinearCombination):
        return LinearCombination(tuple((c * complex(a), f) for a, f in s.terms))
    return LinearCombination(((c, s),))


def fourier_signal(s: Signal, spec: GridSpec | None = None) -> Signal:
    """Full Fourier transform inside the signal menu.

    Closed forms where the menu allows them; FFT on samples otherwise (a
    grid is then required, and the result lives on its dual).
    """
    d = s.dim
    if isinstance(s, PointMass):
        if any(abs(c) > 0 for c in s.location):
            raise UnsupportedOperation(
                "Fourier of an off-origin point mass is a modulated constant, "
                "which the signal menu does not contain"
            )
        return Constant(complex(s.weight) * (2.0 * math.pi) ** (-d / 2.0), d)
    if isinstance(s, Constant):
        return PointMass((0.0,) * d, complex(s.value) * (2.0 * math.pi) ** (d / 2.0))
    if isinstance(s, GaussianPacket):
        return _fourier_packet(s)
    if isinstance(s, TensorProduct):
        pos = 0
        outs = []
        for f in s.factors:
            sub = GridSpec(spec.axes[pos : pos + f.dim]) if spec is not None else None
            outs.append(fourier_signal(f, sub))
            pos += f.dim
        return TensorProduct(tuple(outs))
    if isinstance(s, LinearCombination):
        return LinearCombination(tuple((c, fourier_signal(f, spec)) for c, f in s.terms))
    if isinstance(s, Sampled):
        return Sampled(_grid.fourier(s.data))
    if spec is None:
        raise PhasescopeError("a grid is required to Fourier-transform this signal")
    return Sampled(_grid.fourier(sample(s, spec)))


def _fourier_packet(p: GaussianPacket) -> Signal:
    if p.chirp is not None and np.max(np.abs(p.chirp_matrix())) > 0:
        raise UnsupportedOperation("Fourier closed form for chirped packets is not provided")
    x0 = np.asarray(p.center)
    xi0 = np.asarray(p.modulation)
    # F[sigma^{-d/2} pi^{-d/4} e^{-|x-x0|^2/(2s^2)} e^{i<x-x0,xi0>}]
    #   = e^{-i<x0,xi>} s^{d/2} pi^{-d/4} e^{-s^2 |xi-xi0|^2 / 2}
    packet = GaussianPacket(
        tuple(float(v) for v in xi0),
        tuple(float(v) for v in -x0),
        float(1.0 / p.sigma),
    )
    amp = complex(np.exp(-1j * float(x0 @ xi0)))
    return scale(amp, packet)


def describe_window(g: Window) -> str:
    if isinstance(g, StandardGaussian):
        return f"standard_gaussian(d={g.dim})"
    if isinstance(g, SampledWindow):
        inner = "+".join(g.trail) if g.trail else "raw"
        return f"sampled[{inner}]"
    return type(g).__name__


def describe_signal(s: Signal) -> str:
    if isinstance(s, Sampled):
        return f"sampled(d={s.dim})"
    if isinstance(s, PointMass):
        return f"point_mass@{tuple(float(c) for c in s.location)}"
    if isinstance(s, Constant):
        return f"constant({complex(s.value)})"
    if isinstance(s, GaussianPacket):
        return f"packet(x0={s.center}, xi0={s.modulation}, sigma={s.sigma})"
    if isinstance(s, TensorProduct):
        return "tensor(" + ", ".join(describe_signal(f) for f in s.factors) + ")"
    if isinstance(s, LinearCombination):
        return "combo(" + ", ".join(describe_signal(f) for _, f in s.terms) + ")"
    return type(s).__name__


def signal_conj(s: Signal) -> Signal:
    if isinstance(s, Sampled):
        return Sampled(GridFunction(s.data.spec, np.conj(s.data.values)))
    if isinstance(s, PointMass):
        return PointMass(s.location, complex(np.conj(s.weight)))
    if isinstance(s, Constant):
        return Constant(complex(np.conj(s.value)), s.dim)
    raise UnsupportedOperation(f"conjugate not provided for {type(s).__name__}")
