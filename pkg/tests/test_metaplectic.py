import numpy as np
import pytest

from phasescope.exceptions import SingularMatrix, UnsupportedOperation
from phasescope.grid import GridFunction, GridSpec, quadrature_norm
from phasescope.metaplectic import (
    Composition,
    CoordChange,
    FourierRot,
    Shear,
    Shift,
    apply_point,
    apply_point_inverse,
    apply_signal,
    covariance_check,
    partial_fourier_covariance_check,
    symplectic_form,
)
from phasescope.signals import (
    Constant,
    GaussianPacket,
    PointMass,
    Sampled,
    StandardGaussian,
    eval_packet,
    sample,
)
from phasescope.sobolev import hermite_corpus


GENS = [
    CoordChange(np.array([[2.0]])),
    FourierRot(1),
    Shear(np.array([[1.0]])),
    Shift((0.7,), (-0.3,)),
]


def test_point_maps_preserve_symplectic_form():
    z1 = np.array([[1.0, 0.0]])
    z2 = np.array([[0.0, 1.0]])
    for op in GENS:
        a = apply_point(op, z1) - apply_point(op, np.zeros((1, 2)))
        b = apply_point(op, z2) - apply_point(op, np.zeros((1, 2)))
        got = symplectic_form(a[0], b[0], 1)
        want = symplectic_form(z1[0], z2[0], 1)
        assert got == pytest.approx(want, abs=1e-14)


def test_point_map_rows():
    # coordinate change sends (x, xi) -> (A^{-1} x, A^t xi)
    got = apply_point(CoordChange(np.array([[2.0]])), np.array([[1.0, 1.0]]))
    assert np.allclose(got, [[0.5, 2.0]])
    # quarter rotation sends (x, xi) -> (xi, -x)
    got = apply_point(FourierRot(1), np.array([[1.0, 0.0]]))
    assert np.allclose(got, [[0.0, -1.0]])
    # shear fixes x and tilts xi by Bx
    got = apply_point(Shear(np.array([[1.0]])), np.array([[1.0, 0.0]]))
    assert np.allclose(got, [[1.0, 1.0]])
    # shift translates both coordinates
    got = apply_point(Shift((0.7,), (-0.3,)), np.array([[0.0, 0.0]]))
    assert np.allclose(got, [[0.7, -0.3]])


def test_point_map_inverse_round_trip():
    pts = np.array([[0.3, -1.2], [2.0, 0.5]])
    for op in GENS:
        back = apply_point_inverse(op, apply_point(op, pts))
        assert np.abs(back - pts).max() < 1e-13
    comp = Composition((FourierRot(1), Shift((0.7,), (-0.3,)), Shear(np.array([[1.0]]))))
    back = apply_point_inverse(comp, apply_point(comp, pts))
    assert np.abs(back - pts).max() < 1e-13


def test_apply_signal_closed_forms(spec1):
    # the standard packet is fixed by the quarter rotation
    p = GaussianPacket((0.0,), (0.0,), 1.0)
    q = apply_signal(FourierRot(1), p, spec1)
    pts = np.array([[0.2], [1.4]])
    assert np.abs(eval_packet(q, pts) - eval_packet(p, pts)).max() < 1e-13
    # shearing the flat signal produces the unit chirp
    c = apply_signal(Shear(np.array([[1.0]])), Constant(1.0, 1), spec1)
    v = sample(c, spec1) if isinstance(c, Sampled) else None
    x = spec1.nodes(0)
    if v is None:
        got = eval_packet(c, x[:, None]) if isinstance(c, GaussianPacket) else None
        assert got is None or np.abs(got - np.exp(0.5j * x**2)).max() < 1e-12
    else:
        assert np.abs(v.values - np.exp(0.5j * x**2)).max() < 1e-12
    # shifting a point mass moves its location
    d = apply_signal(Shift((0.7,), (-0.3,)), PointMass((0.0,), 1.0), spec1)
    assert isinstance(d, PointMass) and d.location == (0.7,)


def test_apply_signal_preserves_norm(spec1):
    u = GaussianPacket((0.5,), (1.0,), 0.9)
    n0 = quadrature_norm(sample(u, spec1))
    for op in (FourierRot(1), Shear(np.array([[1.0]])), Shift((0.7,), (-0.3,))):
        v = apply_signal(op, u, spec1)
        vals = v.data if isinstance(v, Sampled) else sample(v, spec1)
        assert quadrature_norm(vals) == pytest.approx(n0, rel=1e-10)


def test_covariance_all_generators(spec1, psi0):
    packets = [GaussianPacket((0.0,), (0.0,), 1.0), GaussianPacket((1.0,), (-2.0,), 0.8)]
    moment2 = Sampled(hermite_corpus(spec1, 3)[2])
    assert covariance_check(CoordChange(np.array([[2.0]])), packets[0], psi0, spec1) < 1e-5
    for u in packets + [moment2]:
        assert covariance_check(CoordChange(np.array([[-1.0]])), u, psi0, spec1) < 1e-12
        assert covariance_check(FourierRot(1), u, psi0, spec1) < 1e-12
        assert covariance_check(Shear(np.array([[1.0]])), u, psi0, spec1) < 1e-12
        assert covariance_check(Shift((0.7,), (-0.3,)), u, psi0, spec1) < 1e-12


def test_covariance_composition(spec1, psi0):
    comp = Composition((Shear(np.array([[1.0]])), FourierRot(1)))
    u = GaussianPacket((0.0,), (0.0,), 1.0)
    assert covariance_check(comp, u, psi0, spec1) < 1e-5


def test_partial_fourier_covariance(spec2):
    g2 = StandardGaussian(2)
    u = GaussianPacket((0.5, -0.3), (1.0, 0.7), 0.9)
    for split in (0, 1):
        assert partial_fourier_covariance_check(u, g2, spec2, split) < 1e-8
    assert partial_fourier_covariance_check(u, g2, spec2, 2) == 0.0


def test_fourier_of_chirped_packet_needs_samples(spec1):
    p = GaussianPacket((0.0,), (0.0,), 1.0, ((0.5,),))
    with pytest.raises(UnsupportedOperation):
        apply_signal(FourierRot(1), p, spec1)
    out = apply_signal(FourierRot(1), Sampled(sample(p, spec1)), spec1)
    assert isinstance(out, Sampled)


def test_coord_change_rejects_singular():
    with pytest.raises(SingularMatrix):
        CoordChange(np.array([[0.0]]))
