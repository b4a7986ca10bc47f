"""Phase-space weighted Sobolev norms and operator continuity probes.

The scale is defined through the transform itself:

    ||u||_{Q^s} = || <.>^s T_g u ||_{L^2(R^{2d})},

so Q^0 recovers ||u||_{L^2} ||g||_{L^2} by the transform isometry and
larger s charges growth away from the phase-space origin.  A symbol of
order m with bounded derivatives maps Q^{s+m} into Q^s continuously; on a
grid that statement is probed, not proved: the operator is applied to a
fixed corpus spanning localized, oscillatory and shifted behavior, and the
max norm ratio is reported so refinement studies can confirm it stays
stable as the grid doubles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .exceptions import PhasescopeError
from .fbi import transform
from .grid import GridFunction, GridSpec, quadrature_norm
from .signals import (
    GaussianPacket,
    Sampled,
    Signal,
    StandardGaussian,
    Window,
    describe_signal,
    sample,
    window_moment,
)
from .weyl import apply_kernel, kernel_from_symbol


__all__ = [
    "QsParams",
    "qs_norm",
    "hermite_corpus",
    "default_corpus",
    "ContinuityReport",
    "continuity_ratio",
]


@dataclass(frozen=True)
class QsParams:
    """Weight exponent and window label for a Q^s norm."""

    s: float
    window: str = "standard_gaussian"

    def __post_init__(self):
        if not np.isfinite(self.s) or abs(self.s) > 10.0:
            raise PhasescopeError("the weight exponent is supported for |s| <= 10")


def qs_norm(u, s: float, g: Window | None = None, spec: GridSpec | None = None) -> float:
    """Weighted norm || <.>^s T_g u ||_{L^2} by phase-space quadrature."""
    QsParams(s)
    if isinstance(u, GridFunction):
        u = Sampled(u)
    if spec is None and isinstance(u, Sampled):
        spec = u.data.spec
    if spec is None:
        raise PhasescopeError("a grid is required for non-sample-backed signals")
    if g is None:
        g = StandardGaussian(spec.dim)
    F = transform(u, g, spec)
    weight = (1.0 + F.radii() ** 2) ** (s / 2.0)
    return quadrature_norm(GridFunction(F.spec, weight * F.values))


def hermite_corpus(spec: GridSpec, count: int = 6) -> list[GridFunction]:
    """First `count` orthonormal moment signals of the standard window.

    Gram-Schmidt on (-x)^k psi_0 reproduces the Hermite ladder up to signs;
    orthonormality is taken in the grid quadrature inner product.
    """
    if count < 1:
        raise PhasescopeError("the moment corpus needs at least one element")
    if spec.dim != 1:
        raise PhasescopeError("the moment corpus is built on one-dimensional grids")
    g = StandardGaussian(1)
    cols = []
    for k in range(count):
        w = window_moment(g, (k,), spec)
        cols.append(w.data.values)
    mat = np.stack(cols, axis=-1)
    sw = np.sqrt(spec.volume_element)
    q, _ = np.linalg.qr(mat * sw)
    return [GridFunction(spec, q[:, k] / sw) for k in range(count)]


def default_corpus(spec: GridSpec) -> list[tuple[str, Signal]]:
    """Moment ladder plus chirped and shifted packets on the given grid."""
    out = []
    for k, f in enumerate(hermite_corpus(spec, 6)):
        out.append((f"moment{k}", Sampled(f)))
    out.append(("chirp+", GaussianPacket((0.0,), (0.0,), 1.0, ((0.5,),))))
    out.append(("chirp-", GaussianPacket((0.0,), (0.0,), 1.0, ((-1.0,),))))
    out.append(("shifted", GaussianPacket((1.5,), (2.0,), 1.0)))
    return out


@dataclass
class ContinuityReport:
    """Norm ratios of a quantized symbol over a signal corpus."""

    order: float
    s: float
    ratios: dict
    max_ratio: float
    attained: str


def continuity_ratio(
    a,
    s: float,
    corpus: list[tuple[str, Signal]] | None = None,
    g: Window | None = None,
) -> ContinuityReport:
    """Max of ||a^w u||_{Q^s} / ||u||_{Q^{s+m}} over the corpus.

    A finite, refinement-stable value is the grid surrogate for the
    continuity of a^w from Q^{s+m} to Q^s.
    """
    QsParams(s)
    m = float(a.m)
    K = kernel_from_symbol(a)
    dom = K.domain_spec
    if corpus is None:
        corpus = default_corpus(dom)
    if not corpus:
        raise PhasescopeError("the continuity corpus is empty")
    if g is None:
        g = StandardGaussian(dom.dim)
    ratios = {}
    best = ("", -np.inf)
    for name, u in corpus:
        uf = sample(u, dom) if not isinstance(u, Sampled) else u.data
        denom = qs_norm(uf, s + m, g)
        if denom <= DEFAULTS["inner_product_floor"]:
            raise PhasescopeError(f"corpus element {name or describe_signal(u)} has negligible norm")
        Au = apply_kernel(K, uf)
        ratios[name] = qs_norm(Au, s, g) / denom
        if ratios[name] > best[1]:
            best = (name, ratios[name])
    return ContinuityReport(m, s, ratios, best[1], best[0])
