"""Distributions conormal to a linear subspace, built and tested on grids.

A tempered distribution u is conormal of degree m to an n-dimensional
subspace Y of R^d when its transform obeys the two-block envelope

    |L_1 ... L_k T_g u(x, xi)|
        <= C (1 + dist((x, xi), V))^(m - rho k)
             (1 + dist((x, xi), N(Y)))^(-N)

for all N, where N(Y) = Y x Y-perp is the conormal space of Y in phase
space, V is any transversal complement (default N(Y-perp)), and the L_j
differentiate along N(Y) directions.  In coordinates where Y = R^n x {0}
the envelope becomes a plain axis statement for the twisted field
exp(-i<x_2, xi_2>) T_g u: derivatives d_{x_1}^alpha d_{xi_2}^beta grow at
most like <(x_1, xi_2)>^(m - rho|alpha+beta|) and decay rapidly in
(x_2, xi_1).  The membership test always rotates to those flat
coordinates first; the verdict must not depend on the rotation, the
window, or the choice of V, and the tests exercise exactly that.

Such distributions arise from symbols: u = F2^{-1} a, the inverse Fourier
transform of a symbol a(t, theta) in its second block, is conormal to
R^n x {0} of the symbol's order, and pulling back by an orthogonal matrix
[M1 M2] transports the statement to Y = range(M1).
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
from .fbi import phase_twist_Y, transform
from .grid import GridFunction, GridSpec, resample_linear_map
from .numerics import diff_multi, fd_margin, shell_edges, shell_sups
from .signals import (
    Constant,
    GaussianPacket,
    LinearCombination,
    PointMass,
    Pullback,
    Sampled,
    Signal,
    StandardGaussian,
    TensorProduct,
    Window,
    fourier_signal,
    has_point_mass,
    sample,
    scale,
    window_norm,
)
from .subspaces import SubspaceSpec, dist_to_span, make_subspace
from .symclass import _gate, _multi_indices


__all__ = [
    "ConormalReport",
    "construct",
    "membership_test",
    "fourier_map",
    "coord_map",
    "random_transversal",
]


@dataclass
class ConormalReport:
    """Envelope constants and shell trends for a conormal membership test."""

    ambient: int
    subspace_dim: int
    order: float
    rho: float
    decay: int
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


def _is_identity(A: np.ndarray) -> bool:
    return A.shape[0] == A.shape[1] and np.allclose(A, np.eye(A.shape[0]), atol=1e-12)


def _pullback_signal(u: Signal, A: np.ndarray, spec: GridSpec | None) -> Signal:
    """Composition u o A inside the signal menu, analytic where possible.

    Distributional kinds that a single matrix cannot move analytically are
    wrapped in a deferred Pullback; a later composition (the flat rotation
    of a membership test undoing a coordinate change, say) may cancel the
    chain down to a scaled permutation that the menu resolves exactly.
    """
    A = np.asarray(A, dtype=np.float64)
    if _is_identity(A):
        return u
    if isinstance(u, Pullback):
        return _pullback_signal(u.base, u.matrix @ A, spec)
    det = float(np.linalg.det(A))
    if isinstance(u, PointMass):
        loc = np.linalg.solve(A, np.asarray(u.location, dtype=np.float64))
        return PointMass(tuple(loc), u.weight / abs(det))
    if isinstance(u, Constant):
        return Constant(u.value, u.dim)
    if isinstance(u, LinearCombination):
        return LinearCombination(
            tuple((c, _pullback_signal(t, A, spec)) for c, t in u.terms)
        )
    if isinstance(u, GaussianPacket):
        gram = A.T @ A
        s2 = gram[0, 0]
        if np.abs(gram - s2 * np.eye(A.shape[0])).max() <= 1e-12 * max(s2, 1.0):
            s = float(np.sqrt(s2))
            center = np.linalg.solve(A, np.asarray(u.center, dtype=np.float64))
            mod = A.T @ np.asarray(u.modulation, dtype=np.float64)
            chirp = A.T @ u.chirp_matrix() @ A
            moved = GaussianPacket(
                tuple(center),
                tuple(mod),
                u.sigma / s,
                tuple(tuple(row) for row in chirp),
            )
            return scale(s ** (-u.dim / 2.0), moved)
    if isinstance(u, TensorProduct) and np.abs(A - np.diag(np.diag(A))).max() <= 1e-14:
        pos = 0
        parts = []
        for fct in u.factors:
            block = np.diag(np.diag(A)[pos : pos + fct.dim])
            sub = GridSpec(spec.axes[pos : pos + fct.dim]) if spec is not None else None
            parts.append(_pullback_signal(fct, block, sub))
            pos += fct.dim
        return TensorProduct(tuple(parts))
    if isinstance(u, TensorProduct) and all(f.dim == 1 for f in u.factors):
        nz = np.abs(A) > 1e-14
        if np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1):
            # scaled permutation: argument axis j feeds the factor in row i(j)
            parts = []
            for j in range(A.shape[0]):
                i = int(np.flatnonzero(nz[:, j])[0])
                sub = GridSpec(spec.axes[j : j + 1]) if spec is not None else None
                parts.append(_pullback_signal(u.factors[i], A[i : i + 1, j : j + 1], sub))
            return TensorProduct(tuple(parts))
    if isinstance(u, Sampled):
        return Sampled(resample_linear_map(u.data, A))
    if spec is not None and not has_point_mass(u):
        return Sampled(resample_linear_map(sample(u, spec), A))
    return Pullback(u, A)


def _default_spec(dim: int) -> GridSpec:
    if dim == 1:
        p = DEFAULTS["grid_d1"]
    elif dim == 2:
        p = DEFAULTS["grid_d2"]
    else:
        raise UnsupportedOperation("default grids cover dimensions 1 and 2 only")
    return GridSpec.regular(dim, p["n"], p["half_width"])


def _resolve_spec(u: Signal, spec: GridSpec | None) -> GridSpec:
    if spec is not None:
        return spec
    if isinstance(u, Sampled):
        return u.data.spec
    return _default_spec(u.dim)


def construct(a, M1, M2) -> tuple[Signal, SubspaceSpec]:
    """Distribution conormal to range(M1) synthesized from a symbol.

    In flat position the construction is u = F2^{-1} a: the symbol's first
    block rides along Y and its second block is the frequency content
    conormal to Y.  The output grid pairs the symbol's first-block axes
    with the duals of its second-block axes.  A general position is
    reached by pulling back with the orthogonal matrix U = [M1 M2];
    non-orthogonal invertible U must be absorbed into the symbol by a
    linear change of its variables first.
    """
    spec = a.spec
    values = np.asarray(a.values, dtype=np.complex128)
    d = spec.dim
    M1 = np.asarray(M1, dtype=np.float64).reshape(d, -1)
    M2 = np.asarray(M2, dtype=np.float64).reshape(d, -1)
    n = M1.shape[1]
    if n + M2.shape[1] != d:
        raise DimensionMismatch("[M1 M2] must assemble to a square matrix")
    U = np.concatenate([M1, M2], axis=1)
    if abs(np.linalg.det(U)) < 1e-12:
        raise SingularMatrix("[M1 M2] is not invertible")
    if np.abs(U.T @ U - np.eye(d)).max() > 1e-10:
        raise UnsupportedOperation(
            "non-orthogonal frames must be absorbed into the symbol by a "
            "linear change of variables"
        )
    flat = _grid.partial_ifourier(GridFunction(spec, values), tuple(range(n, d)))
    if n == 0:
        Y = make_subspace(np.zeros((0, d)), d)
    else:
        Y = make_subspace(M1.T)
    if _is_identity(U):
        return Sampled(flat), Y
    nz = np.abs(U) > 1e-14
    if np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1):
        # signed permutations land on exact nodes; resample eagerly
        return Sampled(resample_linear_map(flat, U.T)), Y
    # axis-mixing frames stay deferred: the flat rotation of a later
    # membership test composes with U^t to a sign matrix, so the ridge
    # content never passes through an off-node resampling
    return Pullback(Sampled(flat), U.T), Y


def membership_test(
    u: Signal,
    Y: SubspaceSpec,
    m: float = 0.0,
    rho: float = 1.0,
    g: Window | None = None,
    k_max: int | None = None,
    decay: int | None = None,
    spec: GridSpec | None = None,
    transversal: np.ndarray | None = None,
    acc: int | None = None,
    ceiling: float | None = None,
    trend_tol: float | None = None,
) -> ConormalReport:
    """Two-block envelope test for membership of degree m conormal to Y.

    The signal is rotated so Y becomes R^n x {0}, the transform is twisted
    by exp(-i<x_2, xi_2>), and each derivative d_{x_1}^alpha d_{xi_2}^beta
    up to total order k_max is weighted by the reciprocal envelope.  Sups
    are tracked over shells in the transversal distance; verdicts require
    every constant under the ceiling and every shell trend under the
    tolerance.  A custom transversal V replaces the default N(Y-perp) in
    the growth weight only; verdicts must agree for any valid choice.
    """
    if k_max is None:
        k_max = DEFAULTS["conormal_k_max"]
    if decay is None:
        decay = DEFAULTS["conormal_n_decay"]
    if k_max < 0 or k_max > 2:
        raise UnsupportedOperation("membership derivatives are limited to total order 2")
    if decay < 0 or decay > 5:
        raise UnsupportedOperation("membership decay weights are limited to power 5")
    if acc is None:
        acc = DEFAULTS["fd_order"]
    if ceiling is None:
        ceiling = DEFAULTS["constant_ceiling"]
    if trend_tol is None:
        trend_tol = DEFAULTS["trend_tolerance"]
    d = u.dim
    if Y.dim != d:
        raise DimensionMismatch("subspace ambient dimension must match the signal")
    spec = _resolve_spec(u, spec)
    if spec.dim != d:
        raise DimensionMismatch("grid rank must match the signal dimension")
    if g is None:
        g = StandardGaussian(d)

    R = Y.rotation()
    flat_u = _pullback_signal(u, R, spec)
    n = Y.n
    Y_flat = SubspaceSpec(d, np.eye(d)[:, :n])
    F = transform(flat_u, g, spec)
    # membership is scale-invariant in the window; divide its norm out
    G = phase_twist_Y(F.with_values(F.values / window_norm(g, spec)), Y_flat)
    fspec = F.spec

    mesh = fspec.mesh()
    growth2 = np.zeros(fspec.shape)
    decay2 = np.zeros(fspec.shape)
    for i in range(n):
        growth2 = growth2 + mesh[i] ** 2
        decay2 = decay2 + mesh[d + i] ** 2
    for j in range(n, d):
        growth2 = growth2 + mesh[d + j] ** 2
        decay2 = decay2 + mesh[j] ** 2
    decay_r = np.sqrt(decay2)

    if transversal is None:
        dist_v = np.sqrt(growth2)
    else:
        Vb = np.asarray(transversal, dtype=np.float64).reshape(2 * d, -1)
        if Vb.shape[1] != d:
            raise DimensionMismatch("a transversal needs d basis columns in R^{2d}")
        rot = np.zeros((2 * d, 2 * d))
        rot[:d, :d] = R.T
        rot[d:, d:] = R.T
        Vb = rot @ Vb
        q, r = np.linalg.qr(Vb)
        if np.min(np.abs(np.diag(r))) < 1e-10:
            raise SingularMatrix("transversal basis is degenerate")
        stack = np.concatenate([q, Y_flat.conormal_basis()], axis=1)
        if np.linalg.svd(stack, compute_uv=False)[-1] < 1e-8:
            raise SingularMatrix("transversal does not complement the conormal space")
        pts = fspec.points()
        dist_v = dist_to_span(pts, q).reshape(fspec.shape)

    w_growth = 1.0 + dist_v
    w_decay = 1.0 + decay_r

    base_mask = fspec.interior_mask(DEFAULTS["probe_margin"])
    band = 0.5 * min(ax.half_width for ax in fspec.axes)
    base_mask &= decay_r <= band
    r_hi = 0.8 * float(np.max(dist_v[base_mask]))
    edges = shell_edges(DEFAULTS["shell_r_min"], r_hi, DEFAULTS["shell_count"])

    entries = {}
    for alpha in _multi_indices(n, k_max):
        for beta in _multi_indices(d - n, k_max - sum(alpha)):
            k = sum(alpha) + sum(beta)
            full = alpha + (0,) * (d - n) + (0,) * n + beta
            der = diff_multi(G.values, full, fspec.steps, acc)
            weighted = np.abs(der) * w_growth ** (rho * k - m) * w_decay**decay
            mask = base_mask
            reach = fd_margin(k, acc)
            if reach > 0:
                crop = np.zeros(fspec.shape, dtype=bool)
                sl = tuple(slice(reach, s - reach) for s in fspec.shape)
                crop[sl] = True
                mask = base_mask & crop
            absc, sups = shell_sups(dist_v, weighted, edges, mask=mask)
            entries[(alpha, beta)] = (float(np.max(weighted[mask])), absc, sups)
    constants, trends, verdict = _gate(entries, ceiling, trend_tol)
    return ConormalReport(
        d, n, m, rho, decay, constants, trends, ceiling, trend_tol, verdict
    )


def fourier_map(u: Signal, Y: SubspaceSpec, spec: GridSpec | None = None):
    """Transport (u, Y) to (Fu, Y-perp); membership order is preserved."""
    if Y.dim != u.dim:
        raise DimensionMismatch("subspace ambient dimension must match the signal")
    fu = fourier_signal(u, spec)
    return fu, Y.perp()


def coord_map(u: Signal, B, Y: SubspaceSpec, spec: GridSpec | None = None):
    """Transport (u, Y) to (u o B, B^{-1} Y) for invertible B."""
    B = np.asarray(B, dtype=np.float64)
    d = u.dim
    if B.shape != (d, d):
        raise DimensionMismatch("coordinate matrix must be square of the signal dimension")
    if Y.dim != d:
        raise DimensionMismatch("subspace ambient dimension must match the signal")
    det = float(np.linalg.det(B))
    if abs(det) < 1e-12:
        raise SingularMatrix("coordinate matrix is singular")
    moved = _pullback_signal(u, B, _resolve_spec(u, spec))
    return moved, Y.map(np.linalg.inv(B))


def random_transversal(Y: SubspaceSpec, spread: float = 0.5, seed: int | None = None) -> np.ndarray:
    """Random complement of N(Y), drawn as a graph over the default V.

    Any perturbation of N(Y-perp) by directions inside N(Y) stays
    transversal; the spread controls how far from the default it tilts.
    """
    rng = np.random.default_rng(DEFAULTS["seed"] if seed is None else seed)
    d = Y.dim
    V0 = Y.transversal_basis()
    NB = Y.conormal_basis()
    tilt = spread * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(V0 + NB @ tilt)
    return q
