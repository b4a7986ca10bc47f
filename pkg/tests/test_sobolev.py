import numpy as np
import pytest
from scipy.special import exp1

from phasescope.exceptions import PhasescopeError
from phasescope.grid import AxisSpec, GridSpec, quadrature_inner
from phasescope.signals import GaussianPacket, Sampled
from phasescope.sobolev import (
    ContinuityReport,
    QsParams,
    continuity_ratio,
    default_corpus,
    hermite_corpus,
    qs_norm,
)
from phasescope.symclass import make_symbol


def _kspec(n=32, hw=6.0):
    ax = AxisSpec(n, hw)
    return GridSpec((ax, ax.dual()))


def test_qs_norm_gaussian_closed_forms(spec1):
    # |T psi0|^2 = (2pi)^{-1} e^{-r^2/2}, so Q^s(psi0)^2 = int_0^inf
    # (1+2t)^s e^{-t} dt: 1, 3, 13 at s = 0, 1, 2 and e^{1/2} E1(1/2)/2
    # at s = -1
    u = GaussianPacket((0.0,), (0.0,), 1.0)
    assert qs_norm(u, 0.0, spec=spec1) == pytest.approx(1.0, rel=1e-10)
    assert qs_norm(u, 1.0, spec=spec1) == pytest.approx(np.sqrt(3.0), rel=1e-10)
    assert qs_norm(u, 2.0, spec=spec1) == pytest.approx(np.sqrt(13.0), rel=1e-10)
    want = np.sqrt(0.5 * np.exp(0.5) * exp1(0.5))
    assert qs_norm(u, -1.0, spec=spec1) == pytest.approx(want, rel=1e-8)


def test_qs_norm_monotone_in_s(spec1):
    u = GaussianPacket((1.0,), (-1.0,), 0.8)
    vals = [qs_norm(u, s, spec=spec1) for s in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_qs_params_validation():
    with pytest.raises(PhasescopeError):
        QsParams(11.0)
    with pytest.raises(PhasescopeError):
        qs_norm(GaussianPacket((0.0,), (0.0,), 1.0), float("nan"), spec=GridSpec.regular(1, 32, 6.0))


def test_hermite_corpus_orthonormal(spec1):
    corpus = hermite_corpus(spec1, 6)
    assert len(corpus) == 6
    for i, f in enumerate(corpus):
        for j, g in enumerate(corpus):
            want = 1.0 if i == j else 0.0
            assert abs(quadrature_inner(f, g) - want) < 1e-12
    # element 0 is the standard window itself
    x = spec1.nodes(0)
    psi = np.pi**-0.25 * np.exp(-0.5 * x**2)
    assert np.abs(np.abs(corpus[0].values) - psi).max() < 1e-12


def test_default_corpus_contents(spec1):
    corpus = default_corpus(spec1)
    names = [n for n, _ in corpus]
    assert names[:6] == [f"moment{k}" for k in range(6)]
    assert {"chirp+", "chirp-", "shifted"} <= set(names)


def test_continuity_constant_symbol_is_isometry():
    spec = _kspec()
    a = make_symbol("constant", spec)
    for s in (-1.0, 0.0, 1.0):
        rep = continuity_ratio(a, s)
        assert isinstance(rep, ContinuityReport)
        assert rep.max_ratio == pytest.approx(1.0, abs=1e-6)


def test_continuity_bracket_golden():
    spec = _kspec()
    a = make_symbol("bracket", spec, 1.0)
    rep = continuity_ratio(a, 0.0)
    assert rep.order == pytest.approx(1.0)
    assert rep.max_ratio == pytest.approx(0.9608, abs=5e-3)
    assert np.isfinite(rep.max_ratio) and rep.max_ratio < 2.0


def test_continuity_stable_under_refinement():
    for kind, deg in (("bracket", 1.0), ("gaussian", 0.0)):
        vals = []
        for n in (32, 64):
            a = make_symbol(kind, _kspec(n), deg)
            vals.append(continuity_ratio(a, 1.0).max_ratio)
        assert abs(vals[1] - vals[0]) / vals[0] < 0.1


def test_qs_norm_of_samples(spec1):
    corpus = hermite_corpus(spec1, 2)
    n0 = qs_norm(Sampled(corpus[0]), 0.0)
    assert n0 == pytest.approx(1.0, rel=1e-10)
