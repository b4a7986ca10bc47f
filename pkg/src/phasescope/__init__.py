"""Numerical phase-space analysis on regular grids.

The package computes windowed phase-space transforms of tempered
signals, applies metaplectic operators, classifies Shubin-type symbols,
builds symmetric-quantization kernels, evaluates weighted Sobolev
norms, constructs and tests conormal elements, and estimates wave
front sets from cone-localized decay.  Everything is driven by
explicit grid specifications so results are reproducible bit for bit.
"""

from .exceptions import (
    PhasescopeError,
    DimensionMismatch,
    InvalidGrid,
    UnsupportedSampling,
    UnsupportedOperation,
    NearOrthogonalWindows,
    DegenerateWindow,
    SingularMatrix,
    EmptyRegion,
    ConeStarvation,
    InvalidFormat,
)
from .defaults import DEFAULTS, manifest_block
from .grid import (
    AxisSpec,
    GridSpec,
    GridFunction,
    set_fft_workers,
    get_fft_workers,
    quadrature_inner,
    quadrature_norm,
    fourier,
    ifourier,
    partial_fourier,
    partial_ifourier,
    refine_axis,
    trig_interp,
    resample_linear_map,
    multilinear_interp,
)
from .signals import (
    Window,
    StandardGaussian,
    SampledWindow,
    window_norm,
    window_inner,
    window_moment,
    window_chirp,
    window_pullback,
    window_fourier,
    window_tensor,
    window_kappa,
    Signal,
    Sampled,
    PointMass,
    Constant,
    GaussianPacket,
    TensorProduct,
    LinearCombination,
    Pullback,
    sample,
    scale,
    fourier_signal,
)
from .fbi import (
    PhaseSpaceField,
    transform,
    transform_at,
    adjoint,
    invert,
    phase_twist_Y,
    phase_twist_diag,
    signal_derivative,
    diff_identity_check,
    EnvelopeReport,
    window_change_envelope,
    Region,
    DecayReport,
    decay_fit,
)
from .metaplectic import (
    MetaplecticElement,
    CoordChange,
    FourierRot,
    Shear,
    Shift,
    Composition,
    apply_point,
    apply_point_inverse,
    apply_signal,
    symplectic_form,
    covariance_check,
    partial_fourier_covariance_check,
)
from .subspaces import SubspaceSpec, make_subspace
from .symclass import (
    SymbolGrid,
    SeminormReport,
    OrderEstimate,
    DefectReport,
    make_symbol,
    shubin_seminorm,
    estimate_order,
    transform_side_check,
    geometric_check,
    classical_defect,
)
from .weyl import (
    KernelGrid,
    KernelIdentityReport,
    kernel_from_symbol,
    apply_kernel,
    apply_weyl,
    kernel_transform_identity_check,
    conjugated_kernel,
    kernel_conormal_check,
)
from .sobolev import (
    QsParams,
    qs_norm,
    hermite_corpus,
    default_corpus,
    ContinuityReport,
    continuity_ratio,
)
from .conormal import (
    ConormalReport,
    construct,
    membership_test,
    fourier_map,
    coord_map,
    random_transversal,
)
from .wavefront import (
    WaveFrontReport,
    sphere_directions,
    wf_estimate,
    containment_check,
    transport_check,
    microlocality_check,
)

__version__ = "0.1.0"

__all__ = [
    "PhasescopeError",
    "DimensionMismatch",
    "InvalidGrid",
    "UnsupportedSampling",
    "UnsupportedOperation",
    "NearOrthogonalWindows",
    "DegenerateWindow",
    "SingularMatrix",
    "EmptyRegion",
    "ConeStarvation",
    "InvalidFormat",
    "DEFAULTS",
    "manifest_block",
    "AxisSpec",
    "GridSpec",
    "GridFunction",
    "set_fft_workers",
    "get_fft_workers",
    "quadrature_inner",
    "quadrature_norm",
    "fourier",
    "ifourier",
    "partial_fourier",
    "partial_ifourier",
    "refine_axis",
    "trig_interp",
    "resample_linear_map",
    "multilinear_interp",
    "Window",
    "StandardGaussian",
    "SampledWindow",
    "window_norm",
    "window_inner",
    "window_moment",
    "window_chirp",
    "window_pullback",
    "window_fourier",
    "window_tensor",
    "window_kappa",
    "Signal",
    "Sampled",
    "PointMass",
    "Constant",
    "GaussianPacket",
    "TensorProduct",
    "LinearCombination",
    "Pullback",
    "sample",
    "scale",
    "fourier_signal",
    "PhaseSpaceField",
    "transform",
    "transform_at",
    "adjoint",
    "invert",
    "phase_twist_Y",
    "phase_twist_diag",
    "signal_derivative",
    "diff_identity_check",
    "EnvelopeReport",
    "window_change_envelope",
    "Region",
    "DecayReport",
    "decay_fit",
    "MetaplecticElement",
    "CoordChange",
    "FourierRot",
    "Shear",
    "Shift",
    "Composition",
    "apply_point",
    "apply_point_inverse",
    "apply_signal",
    "symplectic_form",
    "covariance_check",
    "partial_fourier_covariance_check",
    "SubspaceSpec",
    "make_subspace",
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
    "KernelGrid",
    "KernelIdentityReport",
    "kernel_from_symbol",
    "apply_kernel",
    "apply_weyl",
    "kernel_transform_identity_check",
    "conjugated_kernel",
    "kernel_conormal_check",
    "QsParams",
    "qs_norm",
    "hermite_corpus",
    "default_corpus",
    "ContinuityReport",
    "continuity_ratio",
    "ConormalReport",
    "construct",
    "membership_test",
    "fourier_map",
    "coord_map",
    "random_transversal",
    "WaveFrontReport",
    "sphere_directions",
    "wf_estimate",
    "containment_check",
    "transport_check",
    "microlocality_check",
    "__version__",
]
