"""Wave front sets read off the phase-space transform at finite radius.

A direction on the phase-space sphere is absent from the wave front set
of u when |T_g u| decays rapidly in an open cone around it.  On a grid
the conic limit becomes two falsifiable gates over the probe annulus
r_min <= |z| <= r_max: the fitted decay exponent of the cone's shell
suprema must reach -threshold, and the supremum must live on the central
ray rather than drift toward a cone edge.  The ridge gate is what keeps
classifications sharp at finite radius: a flat ridge bordering the cone
(the xi-axis seen from a nearby direction, say) props up the cone sups at
every radius the grid can reach, so the exponent alone would smear the
front across the whole aperture.  Both gates compare suprema against
suprema, so classifications are exactly invariant under u -> c u and, by
construction, under rescaling the window.

Wave fronts of conormal distributions land in the conormal space N(Y),
metaplectic operators move them by the underlying phase-space point map,
and quantized symbols cannot enlarge them; containment_check,
transport_check and microlocality_check test those statements on the
sampled direction sets with a fixed angular tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .exceptions import (
    ConeStarvation,
    DimensionMismatch,
    EmptyRegion,
    PhasescopeError,
    UnsupportedOperation,
)
from .fbi import transform
from .grid import GridSpec, multilinear_interp
from .metaplectic import MetaplecticElement, apply_point, apply_signal
from .numerics import loglog_fit, shell_edges
from .signals import Sampled, Signal, StandardGaussian, Window
from .subspaces import SubspaceSpec
from .weyl import apply_kernel, kernel_from_symbol

__all__ = [
    "WaveFrontReport",
    "sphere_directions",
    "wf_estimate",
    "containment_check",
    "transport_check",
    "microlocality_check",
]

# inverse plastic number and its square: the 2-d Kronecker rotation pair
_KRONECKER_1 = 0.7548776662466927
_KRONECKER_2 = 0.5698402909980532


def sphere_directions(phase_dim: int, count: int | None = None) -> np.ndarray:
    """Fixed quasi-uniform unit directions on the phase-space sphere.

    Dimension 2 is a uniform circle ladder; dimension 4 distributes points
    by a Kronecker sequence in Hopf coordinates, where the area element is
    uniform in (sin^2 theta, phi_1, phi_2).  Both ladders are deterministic
    so reports are reproducible across runs.
    """
    if phase_dim == 2:
        n = DEFAULTS["wf_directions_d1"] if count is None else int(count)
        if n < 4:
            raise PhasescopeError("need at least 4 directions on the circle")
        ang = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if phase_dim == 4:
        n = DEFAULTS["wf_directions_d2"] if count is None else int(count)
        if n < 16:
            raise PhasescopeError("need at least 16 directions on the 3-sphere")
        i = np.arange(n)
        theta = np.arcsin(np.sqrt((i + 0.5) / n))
        a1 = 2.0 * np.pi * np.mod(i * _KRONECKER_1, 1.0)
        a2 = 2.0 * np.pi * np.mod(i * _KRONECKER_2, 1.0)
        return np.column_stack(
            [
                np.cos(theta) * np.cos(a1),
                np.cos(theta) * np.sin(a1),
                np.sin(theta) * np.cos(a2),
                np.sin(theta) * np.sin(a2),
            ]
        )
    raise UnsupportedOperation("direction ladders cover phase dimensions 2 and 4")


@dataclass
class WaveFrontReport:
    """Per-direction decay exponents, ridge ratios and classifications."""

    directions: np.ndarray
    exponents: np.ndarray
    ridge_ratios: np.ndarray
    in_set: np.ndarray
    aperture_deg: float
    threshold: float
    ridge_tolerance: float
    r_min: float
    r_max: float
    base_dim: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.exponents)):
            raise PhasescopeError("wave front exponents must be finite")
        if len(self.in_set) != len(self.directions):
            raise PhasescopeError("classification must cover every direction")

    @property
    def in_directions(self) -> np.ndarray:
        return self.directions[self.in_set]

    @property
    def count_in(self) -> int:
        return int(np.count_nonzero(self.in_set))


def _resolve_spec(u: Signal, spec: GridSpec | None) -> GridSpec:
    if spec is not None:
        return spec
    if isinstance(u, Sampled):
        return u.data.spec
    if u.dim == 1:
        p = DEFAULTS["grid_d1"]
    elif u.dim == 2:
        p = DEFAULTS["grid_d2"]
    else:
        raise UnsupportedOperation("default grids cover dimensions 1 and 2 only")
    return GridSpec.regular(u.dim, p["n"], p["half_width"])


def wf_estimate(
    u: Signal,
    g: Window | None = None,
    spec: GridSpec | None = None,
    directions: int | np.ndarray | None = None,
    aperture_deg: float | None = None,
    threshold: float | None = None,
    r_min: float | None = None,
    r_max: float | None = None,
    ridge_tol: float | None = None,
    min_shell_nodes: int = 8,
) -> WaveFrontReport:
    """Classify phase-space directions as inside or outside the wave front.

    A direction is IN when the cone around it shows a fitted shell-sup
    exponent above -threshold AND the central ray carries at least
    (1 - ridge_tolerance) of the cone supremum on the outer shells.  Shells
    with fewer than min_shell_nodes cone nodes are dropped; a direction
    must keep at least three usable shells or the cone is starved.

    Classifications are exact under u -> c u and under window rescaling.
    Full window independence is an asymptotic statement: a window whose
    modulus vanishes or peaks off the front's transverse center smears the
    observable ridge sideways by the footprint angle atan(c_g / r), which
    at the default radii can exceed the ladder spacing.  The standard
    Gaussian window reads centered fronts without such displacement.
    """
    spec = _resolve_spec(u, spec)
    if g is None:
        g = StandardGaussian(spec.dim)
    F = transform(u, g, spec)
    fspec = F.spec

    aperture = DEFAULTS["wf_aperture_deg"] if aperture_deg is None else float(aperture_deg)
    thresh = DEFAULTS["wf_threshold"] if threshold is None else float(threshold)
    rtol = DEFAULTS["wf_ridge_tolerance"] if ridge_tol is None else float(ridge_tol)
    extent = min(ax.half_width for ax in fspec.axes)
    cap = DEFAULTS["shell_r_max_fraction"] * extent
    lo = DEFAULTS["shell_r_min"] if r_min is None else float(r_min)
    hi = cap if r_max is None else float(r_max)
    if hi > cap * (1.0 + 1e-12):
        raise EmptyRegion(f"shell radii beyond {cap:.3g} touch the grid rim")

    if directions is None:
        W = sphere_directions(fspec.dim)
    elif np.isscalar(directions):
        W = sphere_directions(fspec.dim, int(directions))
    else:
        W = np.asarray(directions, dtype=np.float64)
        if W.ndim != 2 or W.shape[1] != fspec.dim:
            raise DimensionMismatch("directions must be rows in phase space")
        W = W / np.linalg.norm(W, axis=1, keepdims=True)

    edges = shell_edges(lo, hi, DEFAULTS["shell_count"])
    ns = len(edges) - 1
    mids = np.sqrt(edges[:-1] * edges[1:])
    modulus = np.abs(F.values)

    radii = F.radii().ravel()
    ann = (radii >= edges[0]) & (radii < edges[-1])
    vals = modulus.ravel()[ann]
    pts = fspec.points()[ann]
    sid = np.digitize(radii[ann], edges) - 1
    cos_ap = math.cos(math.radians(aperture))
    r_ann = radii[ann]

    n_dir = W.shape[0]
    exponents = np.empty(n_dir)
    ridge = np.empty(n_dir)
    in_set = np.zeros(n_dir, dtype=bool)
    for k in range(n_dir):
        along = pts @ W[k]
        sel = along >= cos_ap * r_ann
        counts = np.bincount(sid[sel], minlength=ns)
        usable = counts >= min_shell_nodes
        n_use = int(np.count_nonzero(usable))
        if n_use < 3:
            raise ConeStarvation(
                f"cone around direction {k} keeps {n_use} usable shells "
                f"(need 3 with >= {min_shell_nodes} nodes); widen the "
                "aperture or refine the grid"
            )
        sups = np.zeros(ns)
        np.maximum.at(sups, sid[sel], vals[sel])
        absc = np.sqrt(1.0 + mids[usable] ** 2)
        slope, _, _ = loglog_fit(absc, sups[usable])
        outer = np.flatnonzero(usable)[-3:]
        ray_pts = mids[outer, None] * W[k][None, :]
        ray_vals = multilinear_interp(modulus, fspec, ray_pts)
        ratios = ray_vals / np.maximum(sups[outer], 1e-300)
        exponents[k] = slope
        ridge[k] = float(np.min(ratios))
        in_set[k] = (slope > -thresh) and (ridge[k] >= 1.0 - rtol)
    return WaveFrontReport(
        W, exponents, ridge, in_set, aperture, thresh, rtol, lo, hi, F.base_dim
    )


def _min_angles_deg(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each row of A, the angle to the nearest row of B."""
    if A.shape[0] == 0:
        return np.zeros(0)
    if B.shape[0] == 0:
        return np.full(A.shape[0], 180.0)
    cos = np.clip(A @ B.T, -1.0, 1.0)
    return np.degrees(np.arccos(np.max(cos, axis=1)))


def containment_check(
    report: WaveFrontReport, Y: SubspaceSpec, slack_deg: float | None = None
) -> bool:
    """Every IN direction lies near the unit sphere of N(Y).

    The tolerance is the report aperture plus an angular slack; an empty
    IN set passes for any subspace.
    """
    if report.directions.shape[1] != 2 * Y.dim:
        raise DimensionMismatch("report and subspace phase dimensions differ")
    slack = DEFAULTS["wf_angular_slack_deg"] if slack_deg is None else float(slack_deg)
    w = report.in_directions
    if w.shape[0] == 0:
        return True
    # nearest unit vector of a subspace subtends cos = |projection|
    proj = w @ Y.conormal_basis()
    cos = np.clip(np.linalg.norm(proj, axis=1), 0.0, 1.0)
    ang = np.degrees(np.arccos(cos))
    return bool(np.all(ang <= report.aperture_deg + slack))


def transport_check(
    u: Signal,
    op: MetaplecticElement,
    g: Window | None = None,
    spec: GridSpec | None = None,
    slack_deg: float | None = None,
    **wf_kwargs,
) -> bool:
    """Wave front of the operator image equals the moved wave front.

    Directions transform by the linear part of the phase-space point map
    (cone classifications cannot see the affine shift), and the two sets
    must match within aperture plus slack, both ways.
    """
    spec = _resolve_spec(u, spec)
    slack = DEFAULTS["wf_angular_slack_deg"] if slack_deg is None else float(slack_deg)
    rep_u = wf_estimate(u, g, spec, **wf_kwargs)
    v = apply_signal(op, u, spec)
    # a resampled image carries its own grid; closed forms reuse the input grid
    v_spec = None if isinstance(v, Sampled) else spec
    rep_v = wf_estimate(v, g, v_spec, **wf_kwargs)
    src = rep_u.in_directions
    origin = apply_point(op, np.zeros(src.shape[1] if src.size else 2 * u.dim))
    if src.shape[0]:
        img = apply_point(op, src) - origin
        img = img / np.linalg.norm(img, axis=1, keepdims=True)
    else:
        img = src
    got = rep_v.in_directions
    tol = rep_u.aperture_deg + slack
    fwd = np.all(_min_angles_deg(img, got) <= tol)
    back = np.all(_min_angles_deg(got, img) <= tol)
    return bool(fwd and back)


def microlocality_check(
    a,
    u: Signal,
    g: Window | None = None,
    slack_deg: float | None = None,
    **wf_kwargs,
) -> bool:
    """Quantizing a symbol cannot enlarge the wave front.

    Applies the symbol through its kernel and requires every IN direction
    of the image to fall within aperture plus slack of an IN direction of
    the input.
    """
    slack = DEFAULTS["wf_angular_slack_deg"] if slack_deg is None else float(slack_deg)
    K = kernel_from_symbol(a)
    dom = K.domain_spec
    Au = apply_kernel(K, u)
    rep_u = wf_estimate(u, g, dom, **wf_kwargs)
    rep_a = wf_estimate(Sampled(Au), g, dom, **wf_kwargs)
    ang = _min_angles_deg(rep_a.in_directions, rep_u.in_directions)
    return bool(np.all(ang <= rep_u.aperture_deg + slack))
