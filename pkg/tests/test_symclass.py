import numpy as np
import pytest

from phasescope.exceptions import PhasescopeError
from phasescope.grid import GridFunction, GridSpec
from phasescope.signals import SampledWindow, StandardGaussian, window_moment
from phasescope.symclass import (
    SymbolGrid,
    classical_defect,
    estimate_order,
    geometric_check,
    make_symbol,
    radial_transform_defect,
    shubin_seminorm,
    transform_side_check,
)


@pytest.fixture(scope="module")
def g1():
    return GridSpec.regular(1, 256, 12.0)


def test_seminorm_bracket_matches_closed_form(g1):
    a = make_symbol("bracket", g1, 1.0)
    rep = shubin_seminorm(a, M=3)
    assert rep.verdict and rep.max_constant <= 3.0
    # best constants of <z> in d=1: sup |d^k <z>| <z>^{k-1}
    x = np.linspace(-7.2, 7.2, 20001)
    b = np.sqrt(1 + x * x)
    oracle = {
        (0,): 1.0,
        (1,): np.max(np.abs(x / b)),
        (2,): np.max(b**-2),
        (3,): np.max(np.abs(3 * x) * b**-3),
    }
    for key, want in oracle.items():
        assert abs(rep.constants[key] - want) / want < 2e-2


def test_seminorm_constant_and_chirp(g1):
    rep = shubin_seminorm(make_symbol("constant", g1), M=2)
    assert rep.verdict
    assert rep.constants[(0,)] == pytest.approx(1.0, abs=1e-12)
    assert rep.constants[(1,)] < 1e-12
    rep_c = shubin_seminorm(make_symbol("chirp", g1), M=2)
    assert not rep_c.verdict and rep_c.max_trend > 0.5


def test_estimate_order_recovers_degree(g1):
    for kind, deg in (("bracket", 1.5), ("constant", 0.0), ("bracket", -1.0)):
        est = estimate_order(make_symbol(kind, g1, deg))
        assert abs(est.exponent - deg) <= 0.1
    prod = SymbolGrid(
        g1,
        make_symbol("bracket", g1, 1.0).values * make_symbol("bracket", g1, 0.5).values,
        1.5,
    )
    assert abs(estimate_order(prod).exponent - 1.5) <= 0.2


def test_transform_side_verdicts(g1):
    assert transform_side_check(make_symbol("bracket", g1, 1.0), alpha_max=2, decay=4).verdict
    assert not transform_side_check(make_symbol("chirp", g1), decay=2).verdict
    assert transform_side_check(make_symbol("gaussian", g1, -5.0), alpha_max=0, decay=4).verdict
    assert transform_side_check(make_symbol("gaussian", g1, -3.0), alpha_max=2, decay=4).verdict


def test_geometric_check_agrees_at_depth_zero(g1):
    a = make_symbol("bracket", g1, 1.0)
    assert geometric_check(a, k=1, decay=3).verdict
    rep0 = geometric_check(a, k=0, decay=4)
    repT = transform_side_check(a, alpha_max=0, decay=4)
    assert abs(rep0.constants[()] - repT.constants[(0,)]) < 1e-12
    assert not geometric_check(make_symbol("chirp", g1), k=1, decay=2).verdict


def test_classical_defect_three_kinds(g1):
    d_br = classical_defect(make_symbol("bracket", g1, 2.0), depth=1)
    assert d_br.verdict and abs(d_br.exponent) <= 0.3
    d_h = classical_defect(make_symbol("homogeneous", g1, 2.0), depth=1)
    assert d_h.verdict
    d_l = classical_defect(make_symbol("log_periodic", g1, 2.0), depth=1)
    assert not d_l.verdict and d_l.exponent > 1.25


def test_radial_transform_defect(g1):
    assert radial_transform_defect(make_symbol("bracket", g1, 2.0), depth=1, weight_max=4).verdict
    assert not radial_transform_defect(
        make_symbol("log_periodic", g1, 2.0), depth=1, weight_max=2
    ).verdict
    a = make_symbol("bracket", g1, 1.0)
    r0 = radial_transform_defect(a, depth=0, weight_max=4)
    t0 = transform_side_check(a, alpha_max=0, decay=4)
    assert abs(r0.constants[(4,)] - t0.constants[(0,)]) < 1e-12


def test_window_independence_of_verdicts(g1):
    a = make_symbol("bracket", g1, 1.0)
    ch = make_symbol("chirp", g1)
    w_m = window_moment(StandardGaussian(1), (1,), g1)
    nodes = g1.nodes(0)
    bump = SampledWindow(GridFunction(g1, (1 + nodes**2) * np.exp(-0.5 * nodes**2)))
    assert all(transform_side_check(a, g=w, decay=4).verdict for w in (None, w_m, bump))
    assert not any(transform_side_check(ch, g=w, decay=2).verdict for w in (None, w_m, bump))


def test_order_monotonicity(g1):
    a = make_symbol("bracket", g1, 1.0)
    assert transform_side_check(a, order=2.0, decay=4).verdict


def test_square_grid_two_dim(spec2):
    a2 = make_symbol("bracket", spec2, 1.5)
    assert abs(estimate_order(a2).exponent - 1.5) <= 0.1
    assert shubin_seminorm(a2, M=2).verdict
    rep = transform_side_check(a2, alpha_max=1, decay=2)
    assert rep.verdict


def test_unknown_kind_rejected(g1):
    with pytest.raises(PhasescopeError):
        make_symbol("mystery", g1)
