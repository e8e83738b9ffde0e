import io
import math

import numpy as np
import pytest
from scipy import special

from helpers import airy_inputs
from supbound import growth, spectral
from supbound.errors import BelowThreshold, InvalidParameter, SWindowEmpty
from supbound.growth import Segmentation, WeightFunction

E = math.e


@pytest.fixture(scope="module")
def inp():
    return airy_inputs()


def _weights(inp, delta=1.0, s=1.0, theta=0.5):
    return growth.iterated_log_weights(1.0, 0.5, delta, s, theta, growth.eps_k(inp, Segmentation(A=0.5, L=1.0), 0))


def test_geometric_segments():
    seg = Segmentation(A=0.5, L=1.0)
    assert seg.b_at(3) == pytest.approx(E**3) and seg.b_at(3) == pytest.approx(20.0855, abs=1e-4)
    assert seg.b_at(0) == 0.0
    assert seg.width(0) == pytest.approx(E)
    assert seg.width(4) == pytest.approx(E**5 - E**4)
    # far segments stay finite in log form
    assert seg.log_width(10**9) == pytest.approx(10**9 + math.log(E - 1))


def test_segment_width_invariant():
    with pytest.raises(InvalidParameter):
        Segmentation(A=1.0, b=(0.0, 1.0, 5.0))
    with pytest.raises(InvalidParameter):
        Segmentation(A=2.0, L=0.5)
    seg = Segmentation(A=1.0, b=(0.0, 2.0, 5.0, 9.0))
    assert seg.finite and list(seg.indices()) == [0, 1, 2]
    np.testing.assert_allclose(seg.width(seg.indices()), [2.0, 3.0, 4.0])


def test_iterated_log_weights_constant():
    w = growth.iterated_log_weights(1.0, 0.5, 1.0, 1.0, 0.5, 1.0)
    assert w.D == pytest.approx(8.0)
    assert w.c_t(E**E) == pytest.approx(8.0)
    assert w.c_k(Segmentation(A=0.5, L=1.0), 3) == pytest.approx(8.0 * math.sqrt(math.log(3.0)))
    with pytest.raises(InvalidParameter):
        growth.iterated_log_weights(0.1, 0.5, 1.0, 1.0, 0.5, 1.0)
    with pytest.raises(InvalidParameter):
        growth.iterated_log_weights(1.0, 0.5, 0.0, 1.0, 0.5, 1.0)


def test_weight_values():
    seg = Segmentation(A=0.5, b=(0.0, 1.0, 2.0, 3.0))
    w = WeightFunction.from_values([1.0, 2.0, 3.0])
    np.testing.assert_allclose(w.c_k(seg, seg.indices()), [1.0, 2.0, 3.0])
    assert not w.monotone
    with pytest.raises(InvalidParameter):
        WeightFunction.from_values([-1.0])


def test_eps_majorant(inp):
    seg = Segmentation(A=0.5, L=1.0)
    assert growth.eps_k(inp, seg, 0) == pytest.approx(1.0)
    m = spectral.SpectralMeasure.atoms([0.0], [2.0])
    one = airy_inputs()
    one_atom = type(one)(one.f, one.z, m, one.eq, one.dom)
    assert growth.eps_k(one_atom, seg, 2, refine=True) == pytest.approx(math.sqrt(2.0))


def test_eps_refinement_below_majorant():
    base = airy_inputs()
    m = spectral.SpectralMeasure.from_density(spectral.Density.gaussian(1.0, 1.0))
    dens = type(base)(base.f, base.z, m, base.eq, base.dom)
    seg = Segmentation(A=0.5, L=1.0)
    major = growth.eps_k(dens, seg, 0)
    for k in range(5):
        assert growth.eps_k(dens, seg, k, refine=True) <= major


def test_i_phi_k_limits(inp):
    seg = Segmentation(A=0.5, L=1.0)
    assert growth.i_phi_k(inp, seg, 3, 1e-14) < 1e-5
    vals = [growth.i_phi_k(inp, seg, k, 0.5) for k in range(6)]
    assert np.all(np.diff(vals) > 0)
    with pytest.raises(InvalidParameter):
        growth.i_phi_k(inp, seg, 3, 0.0)


@pytest.mark.parametrize("delta, k0", [(1.0, 3), (0.5, 4)])
def test_series_matches_hurwitz_zeta(inp, delta, k0):
    # this choice of D makes every term exactly k^{-(1 + delta)}
    w = _weights(inp, delta)
    seg = Segmentation(A=0.5, L=1.0, k_start=k0)
    r = growth.series_sum(inp, seg, w, 1.0, 0.5)
    assert r.converged
    assert r.total == pytest.approx(float(special.zeta(1 + delta, k0)), rel=1e-9)


def test_series_frozen_value(inp):
    r = growth.series_sum(inp, Segmentation(A=0.5, L=1.0, k_start=3), _weights(inp), 1.0, 0.5)
    assert r.k_used == 159124980
    assert r.total == pytest.approx(0.39493406684822646, rel=1e-12)


def test_series_terms_direct(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3, k_end=40)
    r = growth.series_sum(inp, seg, w, 1.0, 0.5)
    assert r.total == pytest.approx(math.fsum(k**-2.0 for k in range(3, 40)), rel=1e-12)
    assert r.k_used == 39


def test_series_constant_not_converged(inp):
    seg = Segmentation(A=0.5, L=1.0, k_start=3)
    r = growth.series_sum(inp, seg, WeightFunction.constant(2.0), 1.0, 0.5)
    assert not r.converged and r.reason
    assert r == growth.series_sum(inp, seg, WeightFunction.constant(2.0), 1.0, 0.5)


def test_series_small_kmax(inp):
    seg = Segmentation(A=0.5, L=1.0, k_start=3, K_max=10**4)
    assert not growth.series_sum(inp, seg, _weights(inp), 1.0, 0.5).converged


def test_series_nonincreasing_in_s(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3, k_end=200)
    vals = [growth.series_sum(inp, seg, w, s, 0.5).total for s in (1.0, 1.5, 2.0, 4.0)]
    assert np.all(np.diff(vals) <= 0)


def test_window(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=1)
    assert growth.s_window_low(inp, seg, w, 0.5) == math.inf
    assert growth.first_valid_k(inp, seg, w, 1.0, 0.5) == 3
    low = growth.s_window_low(inp, seg.with_range(3), w, 0.5)
    assert low == pytest.approx(4 / (8 * math.sqrt(math.log(3)) * 0.5))


def test_thresholds(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3)
    th = growth.growth_threshold(inp, seg, w, 0.5, rule="first_segment")
    assert th.value == th.first_segment == pytest.approx(6.50087, rel=1e-5)
    # I_k grows like sqrt(k) while c_k grows like sqrt(ln k)
    assert th.sup_segments == math.inf
    fin = growth.growth_threshold(inp, seg.with_range(3, 20), w, 0.5)
    assert math.isfinite(fin.sup_segments) and fin.sup_segments >= fin.first_segment
    with pytest.raises(InvalidParameter):
        growth.growth_threshold(inp, seg, w, 0.5, rule="other")


def test_bound_gaussian_form(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3)
    ser = growth.series_sum(inp, seg, w, 1.0, 0.5)
    for u in (7.0, 9.0, 12.0):
        b = growth.growth_bound(inp, seg, w, u, 1.0, 0.5, threshold_rule="first_segment")
        assert b == pytest.approx(2 * math.exp(-u * u / 2) * ser.total, rel=1e-12)


def test_bound_decreasing(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3)
    vals = [growth.growth_bound(inp, seg, w, u, 1.0, 0.5, threshold_rule="first_segment") for u in np.linspace(6.6, 14, 8)]
    assert np.all(np.diff(vals) < 0) and all(0 < v <= 1 for v in vals)


def test_bound_errors(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=3)
    with pytest.raises(BelowThreshold):
        growth.growth_bound(inp, seg, w, 6.0, 1.0, 0.5, threshold_rule="first_segment")
    with pytest.raises(InvalidParameter):
        growth.growth_bound(inp, seg, w, 8.0, 0.5, 0.5, threshold_rule="first_segment")
    with pytest.raises(SWindowEmpty):
        growth.growth_bound(inp, seg.with_range(1, 3), w, 8.0, 1.0, 0.5)
    with pytest.raises(SWindowEmpty):
        growth.growth_bound(inp, seg, w, 1.0, 1.0, 0.5)


def test_report(inp):
    w = _weights(inp)
    seg = Segmentation(A=0.5, L=1.0, k_start=1)
    rep = growth.growth_report(inp, seg, w, np.linspace(2, 12, 11), s=1.0, theta=0.5, threshold_rule="first_segment")
    assert rep.k_start == 3 and rep.t_min == pytest.approx(E**3)
    feas = [r for r in rep.rows if r.feasible]
    assert [r.u for r in feas] == [7.0, 8.0, 9.0, 10.0, 11.0, 12.0]
    assert np.all(np.diff([r.bound for r in rep.rows]) <= 0)
    assert rep.xi_tail() == [(r.u, r.bound) for r in feas]
    buf = io.StringIO()
    growth.write_growth_csv(rep, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(growth.GROWTH_COLUMNS) and len(lines) == 12


def test_report_picks_s_for_constant_free_weights(inp):
    seg = Segmentation(A=0.5, b=(0.0, 2.0, 4.0, 8.0, 16.0))
    w = WeightFunction.from_values([5.0, 6.0, 7.0, 8.0])
    rep = growth.growth_report(inp, seg, w, [30.0, 40.0], theta=0.5, threshold_rule="sup_segments")
    low = growth.s_window_low(inp, seg, w, 0.5)
    # s is tuned at the largest u, inside (low, u_max / 2)
    assert low < rep.s < 20.0
    assert rep.rows[-1].feasible and rep.rows[-1].bound < 1e-9
