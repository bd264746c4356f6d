"""Operator-norm lower bounds, power iteration, scaling fits."""
from fractions import Fraction

import numpy as np
import pytest

from carlab.normest import (ExponentKind, NormEstimate, certified_lower_bound,
                            dualize, estimate_operator_norm, fit_scaling,
                            power_method, theoretical_exponent)
from carlab.regions import ExponentPoint
from carlab.spectral import apply_multiplier, default_grid, lp_norm
from carlab.symbols import SymbolSpec, symbol_on_axes

RNG = np.random.Generator(np.random.Philox(77))


def pt(x, y) -> ExponentPoint:
    return ExponentPoint(Fraction(x), Fraction(y))


# ---------------------------------------------------------------------------
# predicted exponents


def test_me_upper_example():
    got = theoretical_exponent(ExponentKind.ME_UPPER, 3, 1, pt("2/3", "1/6"))
    assert got == pytest.approx(1.0 / 3.0)


def test_me_knapp_diagonal_is_minus_k():
    for k in (1, 2, 3):
        got = theoretical_exponent(ExponentKind.ME_KNAPP, 5, k,
                                   pt("3/5", "3/5"))
        assert got == pytest.approx(-float(k))


def test_tilde_lower_sup_norm_path():
    got = theoretical_exponent(ExponentKind.TILDE_LOWER, 5, 2, pt("1/2", 0))
    assert got == pytest.approx(0.5)


def test_tilde_knapp_quarter():
    got = theoretical_exponent(ExponentKind.TILDE_KNAPP, 3, 1,
                               pt("3/4", "1/4"))
    assert got == pytest.approx(-0.25)


def test_l2_ring_exponent():
    for k in (1, 2):
        got = theoretical_exponent(ExponentKind.L2_RING, 3, k,
                                   pt("1/2", "1/2"))
        assert got == pytest.approx(0.5 - k)


# ---------------------------------------------------------------------------
# certified bounds


def test_single_mode_gives_symbol_modulus():
    g = default_grid(2, n=32, for_full_symbol=True)
    vals = np.zeros(g.shape, complex)
    vals[3, 7] = 2.0
    f = g.with_values(vals, in_space=False)
    spec = SymbolSpec("full", 2, 1)
    m = symbol_on_axes(spec, g.freq_axes())
    est = certified_lower_bound(f, spec, 2.0, 2.0)
    assert est == pytest.approx(abs(m[3, 7]), rel=1e-10)


def test_witness_scale_invariance():
    g = default_grid(2, n=32)
    f = g.with_values(RNG.standard_normal(g.shape)
                      + 1j * RNG.standard_normal(g.shape), in_space=True)
    spec = SymbolSpec("full", 2, 1)
    a = certified_lower_bound(f, spec, 1.5, 3.0)
    b = certified_lower_bound(f.with_values(17.0 * f.values), spec, 1.5, 3.0)
    assert a == pytest.approx(b, rel=1e-12)


def test_zero_witness_rejected():
    g = default_grid(2, n=16)
    f = g.with_values(np.zeros(g.shape, complex), in_space=True)
    with pytest.raises(ValueError):
        certified_lower_bound(f, SymbolSpec("full", 2, 1), 2.0, 2.0)


def test_conjugate_reflected_witness_duality():
    from carlab.spectral import conjugate_reflect
    g = default_grid(2, n=64)
    f = g.with_values(RNG.standard_normal(g.shape)
                      + 1j * RNG.standard_normal(g.shape), in_space=True)
    spec = SymbolSpec("full", 2, 2)

    def conj_symbol(e1, tau):
        return np.conj((e1 * e1 + tau * tau - 1.0 + 2j * tau) ** -2)

    a = certified_lower_bound(f, spec, 1.25, 5.0)
    b = certified_lower_bound(conjugate_reflect(f), conj_symbol, 1.25, 5.0)
    assert a == pytest.approx(b, rel=1e-10)


# ---------------------------------------------------------------------------
# power iteration


def test_power_method_hits_sup_norm_at_p2():
    g = default_grid(2, n=32, for_full_symbol=True)
    spec = SymbolSpec("full", 2, 1)
    target = float(np.abs(symbol_on_axes(spec, g.freq_axes())).max())
    est = estimate_operator_norm(g, spec, 2.0, 2.0, n_random=2, tol=1e-8,
                                 max_iter=200)
    assert est.value == pytest.approx(target, rel=1e-3)
    assert est.value <= target * (1 + 1e-9)


def test_power_method_value_is_history_max():
    g = default_grid(2, n=32)
    f = g.with_values(RNG.standard_normal(g.shape) + 0j, in_space=True)
    est = power_method(f, SymbolSpec("full", 2, 1), 1.5, 4.0, max_iter=8)
    assert isinstance(est, NormEstimate)
    assert est.value == max(est.history)


def test_degenerate_init_reports_zero():
    g = default_grid(2, n=32, freq_span=0.4)
    vals = np.zeros(g.shape, complex)
    vals[1, 1] = 1.0  # single mode far from the tilde tau-window
    f = g.with_values(vals, in_space=False)
    est = power_method(f, SymbolSpec("tilde", 2, 1, eps=2.0 ** -5), 2.0, 2.0,
                       max_iter=6)
    assert est.value == 0.0
    assert est.aborted


def test_power_beats_any_explicit_init():
    g = default_grid(2, n=32)
    f = g.with_values(RNG.standard_normal(g.shape)
                      + 1j * RNG.standard_normal(g.shape), in_space=True)
    spec = SymbolSpec("full", 2, 1)
    base = certified_lower_bound(f, spec, 2.0, 6.0)
    est = estimate_operator_norm(g, spec, 2.0, 6.0, extra_inits=(f,),
                                 n_random=1)
    assert est.value >= base * (1 - 1e-12)


def test_imaginary_part_never_dominates():
    # lower bounds for the Im-part operator stay below the full-symbol norm
    g = default_grid(3, n=32)
    d, k, eps = 3, 1, 2.0 ** -5
    full_spec = SymbolSpec("tilde", d, k, eps=eps)

    def im_symbol(e1, e2, tau):
        from carlab.symbols import eval_from_radial
        spec = SymbolSpec("tilde_im", d, k, eps=eps)
        return eval_from_radial(spec, e1 * e1 + e2 * e2, tau) + 0j

    rng = np.random.Generator(np.random.Philox(9))
    f = g.with_values(rng.standard_normal(g.shape) + 0j, in_space=True)
    im_val = certified_lower_bound(f, im_symbol, 2.0, 4.0)
    full_val = estimate_operator_norm(g, full_spec, 2.0, 4.0,
                                      extra_inits=(f,), n_random=1)
    assert im_val <= full_val.value * (1 + 1e-9)


# ---------------------------------------------------------------------------
# dualize


def test_dualize_zero_and_exponent_guard():
    out = dualize(np.array([0.0 + 0.0j, 2.0j]), 3.0)
    assert out[0] == 0.0
    assert out[1] == pytest.approx(4.0j)
    with pytest.raises(ValueError):
        dualize(np.array([1.0 + 0j]), 0.5)


# ---------------------------------------------------------------------------
# scaling fits


def test_exact_power_law_recovered():
    eps = [2.0 ** -m for m in range(3, 8)]
    vals = [e ** 0.75 for e in eps]
    fit = fit_scaling(eps, vals)
    assert fit.slope == pytest.approx(0.75, abs=1e-12)
    assert fit.max_residual <= 1e-12
    assert np.isnan(fit.theory)  # no kind requested, nothing to compare


def test_noisy_fixture_within_tolerance():
    rng = np.random.Generator(np.random.Philox(123))
    eps = [2.0 ** -m for m in range(3, 9)]
    vals = [3.0 * e ** (1.0 / 3.0) * (1.0 + 0.01 * rng.uniform(-1, 1))
            for e in eps]
    fit = fit_scaling(eps, vals)
    assert abs(fit.slope - 1.0 / 3.0) <= 0.02


def test_theory_attached_when_kind_given():
    eps = [2.0 ** -m for m in range(3, 7)]
    vals = [e ** -0.25 for e in eps]
    fit = fit_scaling(eps, vals, kind=ExponentKind.TILDE_KNAPP, d=3, k=1,
                      point=pt("3/4", "1/4"))
    assert fit.theory == pytest.approx(-0.25)
    assert fit.kind is ExponentKind.TILDE_KNAPP


def test_degenerate_abscissae_rejected():
    with pytest.raises(ValueError):
        fit_scaling([0.5, 0.5, 0.25], [1.0, 1.0, 2.0])
