import numpy as np
import pytest

from phasescope.exceptions import NearOrthogonalWindows
from phasescope.fbi import (
    PhaseSpaceField,
    Region,
    decay_fit,
    diff_identity_check,
    invert,
    phase_twist_diag,
    phase_twist_Y,
    signal_derivative,
    transform,
    transform_at,
    window_change_envelope,
)
from phasescope.grid import GridFunction, GridSpec, quadrature_norm
from phasescope.signals import (
    Constant,
    GaussianPacket,
    PointMass,
    Sampled,
    SampledWindow,
    StandardGaussian,
    sample,
    window_moment,
)
from phasescope.sobolev import hermite_corpus
from phasescope.subspaces import make_subspace


def _closed_form_delta(spec):
    X = spec.nodes(0)[:, None]
    XI = spec.axes[0].dual().nodes()[None, :]
    return (2 * np.pi) ** -0.5 * np.pi**-0.25 * np.exp(-0.5 * X**2) * np.exp(1j * X * XI)


def test_transform_point_mass_closed_form(spec1, psi0):
    F = transform(PointMass((0.0,), 1.0), psi0, spec1)
    exact = _closed_form_delta(spec1)
    assert np.abs(F.values - exact).max() / np.abs(exact).max() < 1e-12
    assert F.base_dim == 1 and F.spec.dim == 2


def test_transform_constant_closed_form(spec1, psi0):
    F = transform(Constant(1.0, 1), psi0, spec1)
    XI = spec1.axes[0].dual().nodes()[None, :]
    exact = np.pi**-0.25 * np.exp(-0.5 * XI**2) * np.ones((256, 1))
    assert np.abs(F.values - exact).max() / np.abs(exact).max() < 1e-12


def test_transform_shifted_weighted_point_mass(spec1, psi0):
    x0, w = 1.5, 2.0 - 1.0j
    F = transform(PointMass((x0,), w), psi0, spec1)
    X = spec1.nodes(0)[:, None]
    XI = spec1.axes[0].dual().nodes()[None, :]
    exact = (
        w
        * (2 * np.pi) ** -0.5
        * np.pi**-0.25
        * np.exp(-0.5 * (x0 - X) ** 2)
        * np.exp(1j * (X - x0) * XI)
    )
    assert np.abs(F.values - exact).max() / np.abs(exact).max() < 1e-12


def test_isometry_and_inversion(spec1, psi0):
    for f in hermite_corpus(spec1, 6):
        F = transform(Sampled(f), psi0)
        nf = quadrature_norm(f)
        assert abs(F.norm() - nf) / nf < 1e-12
        rec = invert(F, psi0)
        err = quadrature_norm(GridFunction(spec1, rec.values - f.values)) / nf
        assert err < 1e-12


def test_inversion_second_window(spec1, psi0):
    f = sample(GaussianPacket((0.5,), (1.0,), 0.9), spec1)
    F = transform(Sampled(f), psi0)
    x = spec1.nodes(0)
    h = SampledWindow(GridFunction(spec1, (1.0 + x**2) * np.exp(-0.5 * x**2)))
    rec = invert(F, psi0, h)
    err = quadrature_norm(GridFunction(spec1, rec.values - f.values)) / quadrature_norm(f)
    assert err < 1e-10


def test_inversion_rejects_orthogonal_windows(spec1, psi0):
    f = sample(GaussianPacket((0.0,), (0.0,), 1.0), spec1)
    F = transform(Sampled(f), psi0)
    odd = window_moment(psi0, (1,), spec1)
    with pytest.raises(NearOrthogonalWindows):
        invert(F, psi0, odd)


def test_transform_at_matches_grid(spec1, psi0):
    u = GaussianPacket((0.3,), (-1.0,), 0.9)
    F = transform(u, psi0, spec1)
    xs = spec1.nodes(0)
    xis = spec1.axes[0].dual().nodes()
    pts = np.array([[xs[40], xis[90]], [xs[200], xis[10]], [xs[128], xis[128]]])
    got = transform_at(u, psi0, spec1, pts)
    want = np.array([F.values[40, 90], F.values[200, 10], F.values[128, 128]])
    assert np.abs(got - want).max() < 1e-13


def test_phase_twist_round_trip(spec1, psi0):
    F = transform(PointMass((0.0,), 1.0), psi0, spec1)
    Y = make_subspace(np.zeros((0, 1)), 1)
    T = phase_twist_Y(F, Y)
    assert np.abs(np.abs(T.values) - np.abs(F.values)).max() < 1e-13
    back = phase_twist_Y(T, Y, conjugate=True)
    assert np.abs(back.values - F.values).max() < 1e-12


def test_phase_twist_diag_needs_pairs(spec1, spec2, psi0):
    F1 = transform(PointMass((0.0,), 1.0), psi0, spec1)
    with pytest.raises(Exception):
        phase_twist_diag(F1)
    F2 = transform(GaussianPacket((0.0, 0.0), (0.0, 0.0), 1.0), StandardGaussian(2), spec2)
    D = phase_twist_diag(F2)
    assert np.abs(np.abs(D.values) - np.abs(F2.values)).max() < 1e-13
    assert np.abs(phase_twist_diag(D, conjugate=True).values - F2.values).max() < 1e-12


def test_signal_derivative_closed_form(spec1):
    p = GaussianPacket((0.0,), (0.0,), 1.0)
    du = signal_derivative(p, (1,), spec1)
    x = spec1.nodes(0)
    exact = -x * np.pi**-0.25 * np.exp(-0.5 * x**2)
    assert np.abs(du.data.values - exact).max() < 1e-12


def test_diff_identity_small(spec1, psi0):
    u = GaussianPacket((0.0,), (0.0,), 1.0)
    assert diff_identity_check(u, psi0, spec1, (1,), (0,)) < 1e-3
    assert diff_identity_check(u, psi0, spec1, (0,), (1,), acc=6) < 1e-3


def test_window_change_envelope_holds(spec1, psi0):
    x = spec1.nodes(0)
    f_w = window_moment(psi0, (1,), spec1)
    h_w = SampledWindow(GridFunction(spec1, (1.0 + x**2) * np.exp(-0.5 * x**2)))
    for u in (GaussianPacket((0.0,), (0.0,), 1.0), GaussianPacket((1.0,), (-2.0,), 0.8)):
        rep = window_change_envelope(u, f_w, psi0, h_w, spec1, (1,), (1,))
        assert rep.verdict and rep.max_ratio <= 1.05


def test_decay_fit_schwartz_vs_delta(spec1, psi0):
    F_g = transform(GaussianPacket((0.0,), (0.0,), 1.0), psi0, spec1)
    rep = decay_fit(F_g)
    assert rep.exponent < -10.0
    F_d = transform(PointMass((0.0,), 1.0), psi0, spec1)
    cone = Region(kind="cone", direction=(0.0, 1.0))
    rep_d = decay_fit(F_d, cone)
    # along the xi axis the transform modulus is constant in xi
    assert abs(rep_d.exponent) < 0.05
    rep_ok = decay_fit(F_d, cone, declared=0.0)
    assert rep_ok.verdict
    rep_bad = decay_fit(F_d, cone, declared=-1.0)
    assert not rep_bad.verdict


def test_field_with_values_and_radii(spec1, psi0):
    F = transform(Constant(1.0, 1), psi0, spec1)
    r = F.radii()
    assert r.shape == (256, 256) or r.ndim == 2
    G = F.with_values(2.0 * F.values)
    assert isinstance(G, PhaseSpaceField)
    assert G.norm() == pytest.approx(2.0 * F.norm(), rel=1e-13)
