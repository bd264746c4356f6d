"""Bessel evaluation, quadrature bricks, and the radial lower-bound path."""
import dataclasses
import math

import numpy as np
import pytest

from carlab.bump import CustomCutoff
from carlab.oscillatory import (EmptyWindowError, LowerBoundParams, Phi5Spec,
                                annulus_radii, bessel_j, bessel_ju,
                                frak_s_sample, i_integral, im_mtilde_sign,
                                in_resonant_set, j_decomposition,
                                lorentzian_mass, mtilde_radial, solve_lambda,
                                sphere_hat)
from carlab.quadrature import (QuadratureError, gauss_kronrod_batch,
                               gauss_legendre_rule)

# ---------------------------------------------------------------------------
# Bessel routines.  The closed forms pin the half-integer branch; scipy is
# the independent oracle for everything else (test-only dependency).


def test_j_half_closed_form():
    for r in (1.0, 10.0, 100.0):
        want = math.sqrt(2.0 / (math.pi * r)) * math.sin(r)
        assert bessel_j(0.5, r) == pytest.approx(want, abs=1e-13)


def test_j_zero_at_origin():
    assert bessel_j(0.0, 0.0) == 1.0
    assert bessel_j(2.0, 0.0) == 0.0


def test_ju_regular_value_at_origin():
    for nu in (0.0, 0.5, 1.5, 3.0):
        want = 1.0 / (2.0 ** nu * math.gamma(nu + 1.0))
        assert bessel_ju(nu, 0.0) == pytest.approx(want, rel=1e-13)


def test_against_scipy_orders_and_ranges():
    jv = pytest.importorskip("scipy.special").jv
    r = np.concatenate([np.linspace(0.0, 11.9, 120),
                        np.geomspace(12.0, 1e4, 160)])
    for nu in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 5.5, 7.0):
        got = bessel_j(nu, r)
        want = jv(nu, r)
        assert np.abs(got - want).max() <= 1e-10, nu


def test_hankel_asymptotic_remainder_decay():
    # |J_nu(r) - sqrt(2/(pi r)) cos(r - nu pi/2 - pi/4)| <= C r^(-3/2).
    # Orders with 4 nu^2 != 1 so the r^(-3/2) correction actually exists
    # (at nu = 1/2 the leading asymptotic is exact).
    r = np.geomspace(10.0, 1e4, 400)
    for nu in (1.0, 2.5, 7.0):
        lead = np.sqrt(2.0 / (np.pi * r)) * np.cos(
            r - nu * np.pi / 2.0 - np.pi / 4.0)
        scaled = np.abs(bessel_j(nu, r) - lead) * r ** 1.5
        # the fitted constant stays bounded: no growth across the range
        head = scaled[r < 100].max()
        tail = scaled[r > 1000].max()
        assert tail <= 2.0 * head
        assert scaled.max() < 40.0


def test_sphere_hat_circle_and_point_mass():
    r = np.linspace(0.0, 30.0, 100)
    np.testing.assert_allclose(sphere_hat(2, r),
                               2.0 * math.pi * bessel_j(0.0, r), atol=1e-10)
    # at the origin the transform returns the total measure
    assert sphere_hat(3, 0.0) == pytest.approx(4.0 * math.pi)
    assert sphere_hat(4, 0.0) == pytest.approx(2.0 * math.pi ** 2)


def test_sphere_hat_s2_closed_form_and_quadrature():
    from carlab.identities import sphere_integral
    r = 2.0
    want = 4.0 * math.pi * math.sin(r) / r
    assert sphere_hat(3, r) == pytest.approx(want, rel=1e-12)
    direct = sphere_integral(lambda w: np.cos(r * w[..., 2]), 3)
    assert sphere_hat(3, r) == pytest.approx(direct, rel=1e-8)


# ---------------------------------------------------------------------------
# quadrature bricks


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre_rule(8, 0.0, 1.0)
    assert np.dot(w, x ** 15) == pytest.approx(1.0 / 16.0, rel=1e-13)
    assert np.dot(w, np.ones_like(x)) == pytest.approx(1.0, rel=1e-14)


def test_gauss_kronrod_smooth_integral():
    val, err = gauss_kronrod_batch(lambda x: np.exp(-x * x), 0.0, 3.0,
                                   abs_tol=1e-12)
    want = math.sqrt(math.pi) / 2.0 * math.erf(3.0)
    assert val == pytest.approx(want, abs=1e-12)
    assert err <= 1e-12


def test_gauss_kronrod_batched_rows():
    freqs = np.array([1.0, 2.0, 5.0])

    def rows(x):
        return np.cos(freqs[:, None] * x[None, :])

    vals, _ = gauss_kronrod_batch(rows, 0.0, 1.0, abs_tol=1e-12)
    np.testing.assert_allclose(vals, np.sin(freqs) / freqs, atol=1e-12)


def test_gauss_kronrod_gives_up_honestly():
    with pytest.raises(QuadratureError):
        gauss_kronrod_batch(lambda x: np.cos(200.0 * x), 0.0, 10.0,
                            abs_tol=1e-14, max_panels=4)


# ---------------------------------------------------------------------------
# lower-bound parameters


def test_lambda_satisfies_printed_threshold():
    lam = solve_lambda()
    # b(u) = 2 arctan(u); the threshold reads arctan(lam/4) = 8 pi / 17
    assert lam == pytest.approx(4.0 * math.tan(8.0 * math.pi / 17.0),
                                rel=1e-10)
    b_quarter = lorentzian_mass(lam / 4.0)
    b_inf = math.pi
    assert b_quarter >= 2.0 ** 4 * (b_inf - b_quarter) - 1e-9


def test_lorentzian_mass_closed_form():
    for u in (0.1, 1.0, 17.0):
        assert lorentzian_mass(u) == pytest.approx(2.0 * math.atan(u),
                                                   rel=1e-13)


def test_params_invariants():
    p = LowerBoundParams.make(5, 2, 2.0 ** -6)
    assert 0.0 < p.delta0 < 0.25
    assert p.lam * p.mu <= 2.0 ** -7 + 1e-15
    lo, hi = annulus_radii(p)
    assert lo == pytest.approx(p.mu / (4.0 * p.eps))
    assert hi == pytest.approx(p.mu / (2.0 * p.eps))


# ---------------------------------------------------------------------------
# the radial profile


@pytest.mark.parametrize("d,k", [(5, 2), (7, 2), (3, 1)])
def test_profile_weighted_evenness_and_plateau(d, k):
    spec = Phi5Spec(d, k)
    u = np.linspace(-2.0 * spec.delta0, 2.0 * spec.delta0, 81)
    left = (1.0 + u) ** ((d - 2.0 * k) / 2.0) * spec.phi(1.0 + u)
    right = (1.0 - u) ** ((d - 2.0 * k) / 2.0) * spec.phi(1.0 - u)
    np.testing.assert_allclose(left, right, atol=1e-12)
    rho = np.linspace(0.5, 1.5, 301)
    weighted = rho ** ((d - 2.0 * k) / 2.0) * spec.phi(rho)
    assert weighted.max() <= 1.0 + 1e-12
    plateau = np.linspace(1.0 - spec.delta0, 1.0 + spec.delta0, 41)
    np.testing.assert_allclose(
        plateau ** ((d - 2.0 * k) / 2.0) * spec.phi(plateau), 1.0,
        atol=1e-12)
    assert spec.phi(1.0 - 2.5 * spec.delta0) == 0.0
    assert spec.phi(1.0 + 2.5 * spec.delta0) == 0.0


# ---------------------------------------------------------------------------
# the one-dimensional building integrals


@pytest.fixture(scope="module")
def prof52():
    spec = Phi5Spec(5, 2)
    return CustomCutoff(spec.varphi, spec.support)


def test_i3_vanishes_at_zero_radius(prof52):
    assert i_integral("3", 1.0, 0.0, 2.0 ** -5, prof52) == 0.0


def test_i1_degenerates_to_tilde1_at_zero_radius(prof52):
    a = i_integral("1", 1.0, 0.0, 2.0 ** -5, prof52)
    b = i_integral("tilde1", 1.0, 0.0, 2.0 ** -5, prof52)
    assert a == pytest.approx(b, rel=1e-12)


def test_tilde2_ratio_to_log_bounded(prof52):
    # Logarithmic growth law: |I~2| <= C log(1/eps), ratio confined to a band
    for m in (4, 6, 8, 10, 12):
        eps = 2.0 ** -m
        v = i_integral("tilde2", 1.0, 0.0, eps, prof52)
        assert abs(v) / math.log(1.0 / eps) <= 0.05


def test_tilde2_abs_tracks_log(prof52):
    # the majorant with |cos| in place of cos really grows like log(1/eps)
    for m in (4, 6, 8, 10, 12):
        eps = 2.0 ** -m
        v = i_integral("tilde2_abs", 1.0, 0.0, eps, prof52)
        assert 0.4 <= v / math.log(1.0 / eps) <= 1.1


def test_plateau_window_bounds(prof52):
    # I1 bounded below, |I2| and |I4| bounded above, on the printed annulus
    mins, maxs = [], []
    for m in (4, 6, 8, 10):
        eps = 2.0 ** -m
        p = LowerBoundParams.make(5, 2, eps)
        ys = np.linspace(*annulus_radii(p), 4)
        c_eps = min(i_integral("1", tau, y, eps, prof52)
                    for y in ys for tau in (0.5, 1.0, 2.0))
        big = max(max(abs(i_integral("2", tau, y, eps, prof52)),
                      abs(i_integral("4", tau, y, eps, prof52)))
                  for y in ys for tau in (0.5, 1.0, 2.0))
        mins.append(c_eps)
        maxs.append(big)
    assert min(mins) > 0.0
    assert max(mins) <= 2.0 * min(mins)
    assert max(maxs) <= 2.0 * min(maxs)


# ---------------------------------------------------------------------------
# operator output at a point: two routes and a grid


def test_direct_vs_decomposition_spot_checks():
    spec = Phi5Spec(5, 2)
    eps = 2.0 ** -5
    for y, t in [(10.2, 0.0), (22.8, 2.0), (3.0, -1.0)]:
        a = mtilde_radial(5, 2, eps, spec, y, t)
        b = j_decomposition(5, 2, eps, spec, y, t).total
        assert abs(a - b) <= 1e-6 * abs(a)


def test_k1_decomposition_degenerates_to_direct():
    spec = Phi5Spec(3, 1)
    for y, t in [(3.0, 0.5), (20.0, 0.0)]:
        a = mtilde_radial(3, 1, 2.0 ** -5, spec, y, t)
        dec = j_decomposition(3, 1, 2.0 ** -5, spec, y, t)
        assert len(dec.terms) == 1
        assert abs(dec.total - a) <= 1e-12 * abs(a)


def test_decomposition_top_split_reassembles():
    spec = Phi5Spec(5, 2)
    dec = j_decomposition(5, 2, 2.0 ** -5, spec, 16.5, 0.0)
    top = dec.top_main + dec.top_cross + dec.top_remainder
    assert abs(top - dec.terms[-1]) <= 1e-8 * abs(dec.terms[-1])


def test_low_order_terms_obey_printed_envelope():
    # |J_0| <= C eps^(d/2 - 1 - s) at (d,k)=(5,2), s=0.1, on the window
    s = 0.1
    ratios = []
    for m in (4, 6, 8):
        eps = 2.0 ** -m
        p = LowerBoundParams.make(5, 2, eps)
        y = float(frak_s_sample(p)[0])
        dec = j_decomposition(5, 2, eps, Phi5Spec(5, 2), y, 0.0)
        ratios.append(abs(dec.terms[0]) / eps ** (2.5 - 1.0 - s))
    assert max(ratios) <= 4.0 * min(ratios)


def test_top_term_lower_bound_on_window():
    # |J_{k-1}| >= c eps^(d/2-k) over the resonant set, |t| <= t_small
    ratios = []
    for m in (4, 6, 8):
        eps = 2.0 ** -m
        p = LowerBoundParams.make(5, 2, eps)
        spec = Phi5Spec(5, 2)
        low = min(abs(j_decomposition(5, 2, eps, spec, float(y), t).terms[-1])
                  for y in frak_s_sample(p)[:3] for t in (0.0, 3.0))
        ratios.append(low / eps ** 0.5)
    assert min(ratios) > 0.0
    assert max(ratios) <= 4.0 * min(ratios)


def test_matches_full_grid_route():
    """d=3 slice: lattice evaluation of the same operator output."""
    from carlab.spectral import apply_multiplier, default_grid

    d, k, eps = 3, 1, 2.0 ** -4
    spec = Phi5Spec(d, k)
    g = default_grid(d, n=128, freq_span=3.0)
    e1, e2, tau = np.meshgrid(*g.freq_axes(), indexing="ij", sparse=True)
    fhat = spec.phi(np.sqrt(e1 ** 2 + e2 ** 2)) * spec.phi(tau) + 0j
    f = g.with_values(np.broadcast_to(fhat, g.shape).copy(), in_space=False)

    def sym(a, b, c):
        return 1.0 / (a * a + b * b - 1.0 + (eps * c) ** 2 + 2j * eps * c)

    out = apply_multiplier(f, sym).to_space()
    xs = g.space_axes()
    num = den = 0.0
    for i in (3, 5, 8, 12, 17):
        for j in (0, 1):
            ref = mtilde_radial(d, k, eps, spec, float(xs[0][i]),
                                float(xs[2][j]))
            num += abs(out.values[i, 0, j] - ref)
            den += abs(ref)
    assert num / den <= 1e-2  # periodization-limited


# ---------------------------------------------------------------------------
# the resonant sample set


def test_samples_lie_in_the_set():
    p = LowerBoundParams.make(5, 2, 2.0 ** -6)
    ys = frak_s_sample(p)
    assert len(ys) > 0
    assert np.all(in_resonant_set(p, ys))
    assert np.all(ys >= p.c1 / p.eps - 1e-9)
    assert np.all(ys <= p.c2 / p.eps + 1e-9)


def test_samples_spaced_by_two_pi():
    ys = frak_s_sample(LowerBoundParams.make(5, 2, 2.0 ** -7))
    gaps = np.diff(ys)
    np.testing.assert_allclose(gaps / (2.0 * math.pi),
                               np.round(gaps / (2.0 * math.pi)), atol=1e-6)


def test_count_matches_direct_enumeration():
    p = LowerBoundParams.make(5, 2, 2.0 ** -6)
    ys = frak_s_sample(p)
    lo, hi = p.c1 / p.eps, p.c2 / p.eps
    alpha = math.pi / 4.0 * (p.d + 2 * p.k - 4)
    count = 0
    n = math.floor((lo - alpha) / (2.0 * math.pi)) - 2
    while alpha + 2.0 * math.pi * n <= hi + 1.0:
        base = alpha + 2.0 * math.pi * n
        if lo <= base <= hi:  # c0-window centers inside the annulus
            count += 1
        n += 1
    assert abs(len(ys) - count) <= 1  # edge windows may straddle the cut


def test_wide_window_admits_everything():
    p = dataclasses.replace(LowerBoundParams.make(5, 2, 2.0 ** -6),
                            c0=math.pi)
    lo, hi = p.c1 / p.eps, p.c2 / p.eps
    ys = np.linspace(lo, hi, 50)
    assert np.all(in_resonant_set(p, ys))


def test_empty_window_is_reported():
    base = LowerBoundParams.make(5, 2, 2.0 ** -6)
    alpha = math.pi / 4.0 * (base.d + 2 * base.k - 4)
    # center the annulus between two lattice hits, narrower than both
    mid = alpha + 2.0 * math.pi * 3 + math.pi
    p = dataclasses.replace(base, c1=(mid - 1.0) * base.eps,
                            c2=(mid + 1.0) * base.eps)
    with pytest.raises(EmptyWindowError):
        frak_s_sample(p)


# ---------------------------------------------------------------------------
# sign constancy of the imaginary part


def test_im_sign_constant_and_negative_for_k1():
    s = im_mtilde_sign(3, 1, 2.0 ** -5)
    assert s == -1
    assert im_mtilde_sign(3, 1, 2.0 ** -5, seed=3) == s


def test_im_sign_defined_for_higher_order():
    for k in (2, 3):
        assert im_mtilde_sign(7, k, 2.0 ** -6) in (-1, 1)
