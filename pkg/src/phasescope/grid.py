"""Symmetric sample grids, unitary Fourier transforms, quadrature.

An axis holds N uniform nodes x_k = -L + k*h with h = 2L/N, so 0 is
always a node and the box is [-L, L). The dual axis holds the N
frequencies xi_m = pi*(m - N/2)/L. With the unitary normalization

    F f(xi) = (2pi)^{-d/2} integral f(x) exp(-i<x, xi>) dx

the rectangle-rule discretization of F is an exactly unitary map
between the quadrature inner products of an axis and its dual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .exceptions import DimensionMismatch, InvalidGrid

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Cap the worker count used by batched FFT calls.

    Parallelism only splits independent batch transforms, so results are
    bit-identical for every worker count.
    """
    global _fft_workers
    _fft_workers = max(1, int(n))


def get_fft_workers() -> int:
    return _fft_workers


@dataclass(frozen=True)
class AxisSpec:
    """One grid axis: node count and half width.

    Attributes
    ----------
    n : int
        Number of nodes, even and >= 16. The midpoint refinement and the
        centered frequency ladder both need an even count.
    half_width : float
        L > 0; nodes cover [-L, L).
    """

    n: int
    half_width: float
    _dual: "AxisSpec | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 16 or self.n % 2 != 0:
            raise InvalidGrid(f"axis node count must be even and >= 16, got {self.n}")
        if not (self.half_width > 0.0) or not math.isfinite(self.half_width):
            raise InvalidGrid(f"axis half width must be positive and finite, got {self.half_width}")

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.n

    def nodes(self) -> np.ndarray:
        k = np.arange(self.n)
        return -self.half_width + k * self.step

    def dual(self) -> "AxisSpec":
        """Frequency axis; dual of the dual is this exact object."""
        if self._dual is None:
            lw = math.pi * self.n / (2.0 * self.half_width)
            other = AxisSpec(self.n, lw)
            object.__setattr__(other, "_dual", self)
            object.__setattr__(self, "_dual", other)
        return self._dual


@dataclass(frozen=True)
class GridSpec:
    """Product grid over up to four axes."""

    axes: tuple[AxisSpec, ...]

    def __post_init__(self):
        if not (1 <= len(self.axes) <= 4):
            raise InvalidGrid(f"grid rank must be between 1 and 4, got {len(self.axes)}")

    @staticmethod
    def regular(d: int, n: int, half_width: float) -> "GridSpec":
        return GridSpec(tuple(AxisSpec(n, half_width) for _ in range(d)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(a.step for a in self.axes)

    @property
    def volume_element(self) -> float:
        v = 1.0
        for a in self.axes:
            v *= a.step
        return v

    def nodes(self, axis: int) -> np.ndarray:
        return self.axes[axis].nodes()

    def mesh(self) -> list[np.ndarray]:
        """Sparse broadcastable coordinate arrays, one per axis."""
        return list(np.meshgrid(*[a.nodes() for a in self.axes], indexing="ij", sparse=True))

    def points(self) -> np.ndarray:
        """Dense (prod(shape), dim) array of node coordinates."""
        grids = np.meshgrid(*[a.nodes() for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def dual(self, axes: tuple[int, ...] | None = None) -> "GridSpec":
        """Replace the given axes (default all) by their duals."""
        which = set(range(self.dim)) if axes is None else set(axes)
        return GridSpec(tuple(a.dual() if i in which else a for i, a in enumerate(self.axes)))

    def interior_mask(self, margin: float) -> np.ndarray:
        """Boolean mask of nodes at least margin*(2L) from either box edge."""
        masks = []
        for a in self.axes:
            x = a.nodes()
            lim = a.half_width * (1.0 - 2.0 * margin)
            masks.append(np.abs(x) <= lim)
        out = masks[0]
        for m in masks[1:]:
            out = np.logical_and.outer(out, m)
        return out


@dataclass
class GridFunction:
    """Complex samples on a GridSpec."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.spec.shape:
            raise DimensionMismatch(
                f"values shape {self.values.shape} does not match grid shape {self.spec.shape}"
            )

    def copy(self) -> "GridFunction":
        return GridFunction(self.spec, self.values.copy())


def quadrature_inner(f: GridFunction, g: GridFunction) -> complex:
    """Rectangle-rule L2 pairing (f, g) = integral f * conj(g)."""
    if f.spec != g.spec:
        raise DimensionMismatch("inner product operands live on different grids")
    # pairwise np.sum keeps the reduction order independent of threading
    return complex(f.spec.volume_element * np.sum(f.values * np.conj(g.values)))


def quadrature_norm(f: GridFunction) -> float:
    s = np.sum(np.abs(f.values) ** 2)
    return float(math.sqrt(f.spec.volume_element * float(s)))


def _shifted(values: np.ndarray, axes: tuple[int, ...], inverse: bool):
    if inverse:
        return scipy.fft.ifftshift(values, axes=axes)
    return scipy.fft.fftshift(values, axes=axes)


def partial_fourier(f: GridFunction, axes: tuple[int, ...]) -> GridFunction:
    """Unitary Fourier transform along a subset of axes.

    The output lives on the spec with those axes replaced by their duals.
    """
    axes = tuple(sorted(set(axes)))
    for a in axes:
        if not (0 <= a < f.spec.dim):
            raise DimensionMismatch(f"axis {a} out of range for rank {f.spec.dim}")
    v = _shifted(f.values, axes, inverse=True)
    v = scipy.fft.fftn(v, axes=axes, workers=_fft_workers)
    v = _shifted(v, axes, inverse=False)
    scale = 1.0
    for a in axes:
        scale *= f.spec.axes[a].step / math.sqrt(2.0 * math.pi)
    return GridFunction(f.spec.dual(axes), v * scale)


def partial_ifourier(f: GridFunction, axes: tuple[int, ...]) -> GridFunction:
    """Inverse of partial_fourier on the same axes."""
    axes = tuple(sorted(set(axes)))
    v = _shifted(f.values, axes, inverse=True)
    v = scipy.fft.ifftn(v, axes=axes, workers=_fft_workers)
    v = _shifted(v, axes, inverse=False)
    scale = 1.0
    for a in axes:
        ax = f.spec.axes[a]
        scale *= math.sqrt(2.0 * math.pi) / ax.dual().step
    return GridFunction(f.spec.dual(axes), v * scale)


def fourier(f: GridFunction) -> GridFunction:
    return partial_fourier(f, tuple(range(f.spec.dim)))


def ifourier(f: GridFunction) -> GridFunction:
    return partial_ifourier(f, tuple(range(f.spec.dim)))


def refine_axis(f: GridFunction, axis: int) -> GridFunction:
    """Double the node count of one axis by zero-padded Fourier interpolation.

    The result samples the trigonometric interpolant at half steps; the
    original nodes keep their exact values.
    """
    spec = f.spec
    ax = spec.axes[axis]
    F = partial_fourier(f, (axis,))
    n = ax.n
    pad_shape = list(F.values.shape)
    pad_shape[axis] = 2 * n
    padded = np.zeros(pad_shape, dtype=np.complex128)
    sl = [slice(None)] * F.values.ndim
    sl[axis] = slice(n // 2, n // 2 + n)
    padded[tuple(sl)] = F.values
    # split the Nyquist line symmetrically so real inputs stay real
    lo = [slice(None)] * F.values.ndim
    lo[axis] = n // 2
    hi = [slice(None)] * F.values.ndim
    hi[axis] = n // 2 + n
    padded[tuple(hi)] = 0.5 * padded[tuple(lo)]
    padded[tuple(lo)] = 0.5 * padded[tuple(lo)]
    fine_axis = AxisSpec(2 * n, ax.half_width)
    # the padded spectrum lives on the dual of the fine axis
    mixed = GridSpec(
        tuple(fine_axis.dual() if i == axis else spec.axes[i] for i in range(spec.dim))
    )
    return partial_ifourier(GridFunction(mixed, padded), (axis,))


def trig_interp(f: GridFunction, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of f at arbitrary points.

    points has shape (..., dim). Cost is len(points) * prod(shape), so keep
    point sets modest. Exact for band-limited periodic data.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-1] != f.spec.dim:
        raise DimensionMismatch("interpolation points have wrong dimension")
    flat = pts.reshape(-1, f.spec.dim)
    F = fourier(f)
    coeff = F.values.ravel()
    freq = F.spec.points()
    scale = F.spec.volume_element / (2.0 * math.pi) ** (f.spec.dim / 2.0)
    out = np.empty(flat.shape[0], dtype=np.complex128)
    chunk = max(1, int(2**22 // max(1, coeff.size)))
    for start in range(0, flat.shape[0], chunk):
        block = flat[start : start + chunk]
        phases = np.exp(1j * (block @ freq.T))
        out[start : start + chunk] = scale * (phases @ coeff)
    return out.reshape(pts.shape[:-1])


def resample_linear_map(f: GridFunction, A: np.ndarray) -> GridFunction:
    """Resample f(A y) on the nodes of f's own grid.

    The trigonometric interpolant is periodic, so images that leave the box
    wrap around; callers keep content away from the edges.  Axis-mixing maps
    require identical axes, otherwise the wrapped image is ill-defined.
    """
    spec = f.spec
    d = spec.dim
    A = np.asarray(A, dtype=np.float64)
    mixes = np.abs(A - np.diag(np.diag(A))).max() > 1e-14 if d > 1 else False
    if mixes and any(spec.axes[i] != spec.axes[0] for i in range(d)):
        raise DimensionMismatch("axis-mixing pullbacks need identical grid axes")
    pts = spec.points() @ A.T
    vals = trig_interp(f, pts).reshape(spec.shape)
    return GridFunction(spec, vals)


def multilinear_interp(values: np.ndarray, spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of real samples at arbitrary points.

    Points outside the box clamp to the boundary cell. Used where a cheap
    smooth read of a modulus field is enough.
    """
    pts = np.asarray(points, dtype=np.float64)
    flat = pts.reshape(-1, spec.dim)
    idx = []
    frac = []
    for a in range(spec.dim):
        ax = spec.axes[a]
        t = (flat[:, a] + ax.half_width) / ax.step
        t = np.clip(t, 0.0, ax.n - 1.000001)
        i0 = np.floor(t).astype(np.int64)
        idx.append(i0)
        frac.append(t - i0)
    out = np.zeros(flat.shape[0], dtype=np.float64)
    for corner in range(2**spec.dim):
        w = np.ones(flat.shape[0])
        ind = []
        for a in range(spec.dim):
            bit = (corner >> a) & 1
            ind.append(np.minimum(idx[a] + bit, spec.axes[a].n - 1))
            w = w * (frac[a] if bit else (1.0 - frac[a]))
        out += w * values[tuple(ind)]
    return out.reshape(pts.shape[:-1])
