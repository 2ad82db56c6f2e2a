import math

import numpy as np
import pytest

from services.coeffs import SchemeId, TermKind, assembled_weights
from services.errors import FieldShapeError
from services.spectral import (
    CurveKind,
    SpectralCurve,
    curve_from_weights,
    equivalent_reynolds,
    is_overdissipative,
    overdissipation_peak,
    resolving_efficiency,
    sample_curve,
    scheme_report,
    spectra_rows,
    spectral_viscosity,
    symbol_from_weights,
    symbol_imaginary,
    symbol_mixed,
    symbol_straight,
)


def me4_base_symbol(k):
    return -365 / 144 + 87 / 32 * np.cos(k) - 3 / 16 * np.cos(2 * k) + 1 / 288 * np.cos(3 * k)


def me6_base_symbol(k):
    return (-2539103 / 921600 + 12505 / 4096 * np.cos(k) - 335 / 1024 * np.cos(2 * k)
            + 2245 / 73728 * np.cos(3 * k) - 5 / 4096 * np.cos(4 * k) + 9 / 204800 * np.cos(5 * k))


def me4_opti_symbol(k):
    return (-558379 / 180000 + 142793 / 40000 * np.cos(k) - 52793 / 100000 * np.cos(2 * k)
            + 108379 / 1800000 * np.cos(3 * k))


def me6_opti_symbol(k):
    return (-9223447 / 2880000 + 2261149 / 600000 * np.cos(k) - 821149 / 1200000 * np.cos(2 * k)
            + 1663447 / 12600000 * np.cos(3 * k) - 461149 / 33600000 * np.cos(4 * k))


@pytest.mark.parametrize("name,closed_form", [
    ("me4-base", me4_base_symbol),
    ("me6-base", me6_base_symbol),
    ("me4-opti", me4_opti_symbol),
    ("me6-opti", me6_opti_symbol),
])
def test_straight_symbols(name, closed_form, wavenumbers):
    np.testing.assert_allclose(symbol_straight(name, wavenumbers), closed_form(wavenumbers), atol=1e-12)
    weights = assembled_weights(SchemeId.parse(name))
    np.testing.assert_allclose(symbol_from_weights(weights, wavenumbers), closed_form(wavenumbers), atol=1e-12)


def test_reference_symbols(wavenumbers):
    visbal = -(4 / 3 * np.sin(wavenumbers) - 1 / 6 * np.sin(2 * wavenumbers)) ** 2
    np.testing.assert_allclose(symbol_straight("visbal-e4", wavenumbers), visbal, atol=1e-12)
    nishikawa = -5 / 2 + 8 / 3 * np.cos(wavenumbers) - 1 / 6 * np.cos(2 * wavenumbers)
    np.testing.assert_allclose(symbol_straight("nishikawa", wavenumbers), nishikawa, atol=1e-12)


def test_odd_even_mode_damped():
    assert abs(symbol_straight("me4-opti", math.pi)[0]) == pytest.approx(7.260072, abs=1e-5)
    assert symbol_straight("visbal-e4", math.pi)[0] == pytest.approx(0.0, abs=1e-12)


def test_symbols_are_real(midpoint_scheme, wavenumbers):
    np.testing.assert_allclose(symbol_imaginary(midpoint_scheme, wavenumbers), 0.0, atol=1e-12)


def test_low_wavenumber_consistency(midpoint_scheme):
    k = np.array([1e-2, 2e-2])
    np.testing.assert_allclose(symbol_straight(midpoint_scheme, k), -k ** 2, rtol=1e-6)
    mixed = midpoint_scheme.with_term(TermKind.MIXED)
    np.testing.assert_allclose(symbol_mixed(mixed, k), -k ** 2, rtol=1e-5)


def test_mixed_base_equals_product_of_interpolated_derivatives(wavenumbers):
    # with constant viscosity the Base mixed term is a midpoint difference of interpolated nodal gradients
    g = 4 / 3 * np.sin(wavenumbers) - 1 / 6 * np.sin(2 * wavenumbers)
    outer = 9 / 8 * 2 * np.sin(wavenumbers / 2) - 1 / 24 * 2 * np.sin(3 * wavenumbers / 2)
    interp = 9 / 8 * np.cos(wavenumbers / 2) - 1 / 8 * np.cos(3 * wavenumbers / 2)
    sampled = symbol_mixed(SchemeId.parse("me4-base", "mixed"), wavenumbers)
    np.testing.assert_allclose(sampled, -outer * interp * g, atol=1e-12)


def test_resolving_efficiency_opti():
    assert resolving_efficiency(sample_curve("me4-opti")) == pytest.approx(0.8249, abs=5e-4)
    assert resolving_efficiency(sample_curve("me6-opti")) == pytest.approx(0.8802, abs=5e-4)


def test_opti_beats_base(wavenumbers):
    for order in (4, 6):
        base = resolving_efficiency(sample_curve(f"me{order}-base"))
        opti = resolving_efficiency(sample_curve(f"me{order}-opti"))
        assert opti > base


def test_overdissipation_peak():
    peak, k = overdissipation_peak(sample_curve("me4-opti"))
    assert peak == pytest.approx(1.0499824, abs=5e-6)
    assert k == pytest.approx(1.8326, abs=2e-3)
    peak, k = overdissipation_peak(sample_curve("me6-opti"))
    assert peak == pytest.approx(1.0500086, abs=5e-6)
    assert k == pytest.approx(2.0967, abs=2e-3)


def test_overdissipation_constraint_honours_slack():
    assert not is_overdissipative(sample_curve("me4-opti"))
    assert not is_overdissipative(sample_curve("me6-opti"))
    assert is_overdissipative(sample_curve("me6-opti"), slack=0.0)


def test_spectral_viscosity_at_cutoff():
    curve = sample_curve("visbal-e4")
    assert spectral_viscosity(curve, 1.0, math.pi) == pytest.approx(-1.0, abs=1e-12)
    assert spectral_viscosity(curve, 1.0, 0.0, limit=True) == 0.0
    with pytest.raises(ValueError):
        spectral_viscosity(curve, 1.0, 0.0)


def test_equivalent_reynolds():
    curve = sample_curve("visbal-e4")
    assert equivalent_reynolds(curve, 1.0, 1.0, 1e-3, math.pi) == math.inf
    exact = curve_from_weights({-1: 1.0, 0: -2.0, 1: 1.0})
    k = 0.5
    kstar = -2 + 2 * math.cos(k)
    assert equivalent_reynolds(exact, 2.0, 3.0, 0.1, k) == pytest.approx(-6.0 * k * k / (0.1 * kstar))
    with pytest.raises(ValueError):
        equivalent_reynolds(curve, 1.0, 1.0, 1.0, 4.0)


def test_scheme_report_and_rows():
    report = scheme_report("me4-base", samples=256)
    data = report.as_dict()
    assert data["scheme"] == "me4-base"
    assert data["kind"] == "straight"
    rows = list(spectra_rows(report.curve))
    assert len(rows) == 256
    assert rows[0] == (0.0, -0.0, 0.0, 0.0)
    k, exact, kstar, visc = rows[-1]
    assert k == pytest.approx(math.pi)
    assert visc == pytest.approx(-(kstar + k * k) / (k * k))


def test_mixed_curve_kind():
    curve = sample_curve(SchemeId.parse("me4-opti", "mixed"), CurveKind.MIXED, samples=64)
    assert curve.kind is CurveKind.MIXED
    assert curve.scheme.term is TermKind.MIXED


def test_empty_curve_rejected():
    with pytest.raises(FieldShapeError):
        resolving_efficiency(SpectralCurve(np.array([]), np.array([])))
    with pytest.raises(FieldShapeError):
        sample_curve("me4-base", samples=1)


def me4_base_mixed(k):
    return (-59 / 64 + 275 / 1152 * np.cos(k) + 65 / 72 * np.cos(2 * k) - 61 / 256 * np.cos(3 * k)
            + 11 / 576 * np.cos(4 * k) - 1 / 2304 * np.cos(5 * k))


def me6_base_mixed(k):
    return (-704663 / 589824 + 31895 / 65536 * np.cos(k) + 333251 / 307200 * np.cos(2 * k)
            - 774123 / 1638400 * np.cos(3 * k) + 26711 / 245760 * np.cos(4 * k) - 2779 / 196608 * np.cos(5 * k)
            + 223 / 184320 * np.cos(6 * k) - 281 / 4915200 * np.cos(7 * k) + 3 / 1638400 * np.cos(8 * k))


def me4_opti_mixed(k):
    return (-438379 / 144000 + 1009171 / 288000 * np.cos(k) - 487 / 900 * np.cos(2 * k)
            + 10919 / 115200 * np.cos(3 * k) - 2293 / 144000 * np.cos(4 * k) + 159 / 64000 * np.cos(5 * k))


def me6_opti_mixed(k):
    return (-180127829 / 57600000 + 28259327 / 7680000 * np.cos(k) - 81089207 / 115200000 * np.cos(2 * k)
            + 7562747 / 38400000 * np.cos(3 * k) - 671839 / 11520000 * np.cos(4 * k)
            + 1784983 / 115200000 * np.cos(5 * k) - 65173 / 23040000 * np.cos(6 * k)
            + 25991 / 115200000 * np.cos(7 * k))


@pytest.mark.parametrize("name,closed_form", [
    ("me4-base", me4_base_mixed),
    ("me6-base", me6_base_mixed),
    ("me4-opti", me4_opti_mixed),
    ("me6-opti", me6_opti_mixed),
])
def test_mixed_symbols(name, closed_form, wavenumbers):
    scheme = SchemeId.parse(name, TermKind.MIXED)
    np.testing.assert_allclose(symbol_mixed(scheme, wavenumbers), closed_form(wavenumbers), atol=1e-12)


def test_mixed_symbols_at_cutoff():
    base = -59 / 64 - 275 / 1152 + 65 / 72 + 61 / 256 + 11 / 576 + 1 / 2304
    assert symbol_mixed(SchemeId.parse("me4-base", TermKind.MIXED), math.pi)[0] == pytest.approx(base, abs=1e-12)
    assert symbol_mixed(SchemeId.parse("me4-opti", TermKind.MIXED), math.pi)[0] == pytest.approx(-7.2027, abs=1e-4)


def _cos_remainder(x):
    """cos(x) - 1 + x^2/2 summed from its series, free of cancellation for small x"""
    total = np.zeros_like(x)
    term = x ** 4 / 24.0
    for n in range(2, 14):
        total = total + term
        term = -term * x * x / ((2 * n + 1) * (2 * n + 2))
    return total


def test_small_wavenumber_error_slope(midpoint_scheme):
    k = np.geomspace(0.01, 0.1, 12)
    weights = assembled_weights(midpoint_scheme)
    # consistency lets k* + k^2 be summed from the remainders alone
    assert sum(weights.values()) == 0
    assert sum(w * p * p for p, w in weights.items()) == 2
    error = sum(float(w) * _cos_remainder(p * k) for p, w in weights.items())
    slope = np.polyfit(np.log(k), np.log(np.abs(error) / k ** 2), 1)[0]
    assert slope == pytest.approx(midpoint_scheme.order, abs=0.1)
