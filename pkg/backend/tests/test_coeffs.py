from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from services.coeffs import (
    OPTIMAL_LEADING_ERRORS,
    SchemeId,
    TermKind,
    Variant,
    assembled_weights,
    base_interpolation,
    baseline_equivalent_psi,
    baseline_midpoint,
    catalog,
    central_first_derivative,
    coefficient_dump,
    derive_midpoint_family,
    family_combination,
    leading_error_datum,
    nishikawa_weights,
    outer_weights,
    parametric_coefficients,
)
from services.errors import UnsupportedSchemeError

small_rationals = st.fractions(min_value=F(-1, 20), max_value=F(1, 20), max_denominator=10000)


def test_outer_weights():
    assert outer_weights(4).factors() == ((F(1, 2), F(9, 8)), (F(3, 2), F(-1, 24)))
    six = outer_weights(6)
    assert (six.a_star, six.b_star, six.c_star) == (F(75, 64), F(-25, 128), F(3, 128))
    assert [loc for loc, _ in six.factors()] == [F(1, 2), F(3, 2), F(5, 2)]
    with pytest.raises(UnsupportedSchemeError):
        outer_weights(8)


def test_scheme_names_round_trip():
    for text, name in (("me4-opti", "ME4-Opti"), ("ME6_Base", "ME6-Base"), ("visbal-e6", "Visbal-E6"),
                       ("nishikawa", "Nishikawa-4")):
        scheme = SchemeId.parse(text)
        assert scheme.name == name
        assert SchemeId.parse(scheme.slug) == scheme


@pytest.mark.parametrize("text", ["me8-opti", "me4-best", "visbal-e5", "foo"])
def test_unknown_scheme_names(text):
    with pytest.raises(UnsupportedSchemeError):
        SchemeId.parse(text)


def test_nishikawa_has_no_mixed_form():
    with pytest.raises(UnsupportedSchemeError):
        SchemeId(4, Variant.NISHIKAWA, TermKind.MIXED)


def test_baseline_midpoint_me4():
    inner = baseline_midpoint(4, F(1, 2))
    assert inner.as_dict() == {-1: F(1, 24), 0: F(-9, 8), 1: F(9, 8), 2: F(-1, 24)}
    outer = baseline_midpoint(4, F(3, 2))
    assert outer.as_dict() == {0: F(1, 24), 1: F(-9, 8), 2: F(9, 8), 3: F(-1, 24)}
    assert inner.moment(0) == 0
    assert inner.moment(1) == 1


def test_mirror_rule():
    stencil = derive_midpoint_family(4, F(1, 2), F(-1, 100))
    mirrored = derive_midpoint_family(4, F(-1, 2), F(-1, 100))
    assert mirrored.offsets == tuple(-p for p in reversed(stencil.offsets))
    assert mirrored.weights == tuple(-w for w in reversed(stencil.weights))
    rule = catalog(SchemeId(4, Variant.OPTI, TermKind.MIXED)).interpolation_at(F(-3, 2))
    positive = catalog(SchemeId(4, Variant.OPTI, TermKind.MIXED)).interpolation_at(F(3, 2))
    assert rule.interp_weights == tuple(reversed(positive.interp_weights))
    assert rule.filter_weights == tuple(-w for w in reversed(positive.filter_weights))


@pytest.mark.parametrize("order", [4, 6])
def test_family_reproduces_optimised_tables(order):
    coeffs = catalog(SchemeId(order, Variant.OPTI))
    for stencil, psi in zip(coeffs.stencils, OPTIMAL_LEADING_ERRORS[order]):
        derived = derive_midpoint_family(order, stencil.location, psi)
        assert derived.offsets == stencil.offsets
        assert derived.weights == stencil.weights


def test_me6_outer_stencil_sums_to_zero():
    stencil = catalog(SchemeId(6, Variant.OPTI)).stencil_at(F(5, 2))
    assert stencil.weights[-1] == F(-400637, 13440000)
    assert sum(stencil.weights) == 0


@settings(max_examples=25, deadline=None)
@given(psi=small_rationals, location=st.sampled_from([F(1, 2), F(3, 2)]))
def test_family_taylor_moments_order4(psi, location):
    stencil = derive_midpoint_family(4, location, psi)
    assert [stencil.moment(q) for q in range(6)] == [0, 1, 0, 0, 0, 0]
    assert stencil.moment(6) == -(psi - leading_error_datum(4, location))


@settings(max_examples=15, deadline=None)
@given(psi=small_rationals, location=st.sampled_from([F(1, 2), F(3, 2), F(5, 2)]))
def test_family_taylor_moments_order6(psi, location):
    stencil = derive_midpoint_family(6, location, psi)
    assert [stencil.moment(q) for q in range(8)] == [0, 1, 0, 0, 0, 0, 0, 0]
    assert stencil.moment(8) == -psi


def test_family_location_checked():
    with pytest.raises(UnsupportedSchemeError):
        derive_midpoint_family(4, F(5, 2), 0)


def test_assembled_me4_base():
    assert assembled_weights(SchemeId(4, Variant.BASE)) == {
        -3: F(1, 576), -2: F(-3, 32), -1: F(87, 64), 0: F(-365, 144),
        1: F(87, 64), 2: F(-3, 32), 3: F(1, 576),
    }


def test_assembled_me6_base():
    weights = assembled_weights(SchemeId(6, Variant.BASE))
    assert weights[0] == F(-2539103, 921600)
    assert [weights[p] for p in range(1, 6)] == [
        F(12505, 8192), F(-335, 2048), F(2245, 147456), F(-5, 8192), F(9, 409600),
    ]
    assert sum(weights.values()) == 0


def test_assembled_reference_schemes():
    assert assembled_weights(SchemeId(4, Variant.VISBAL)) == {
        -4: F(1, 144), -3: F(-1, 9), -2: F(4, 9), -1: F(1, 9), 0: F(-65, 72),
        1: F(1, 9), 2: F(4, 9), 3: F(-1, 9), 4: F(1, 144),
    }
    assert nishikawa_weights() == {-2: F(-1, 12), -1: F(4, 3), 0: F(-5, 2), 1: F(4, 3), 2: F(-1, 12)}


@pytest.mark.parametrize("order", [4, 6])
def test_assembled_depends_only_on_combination(order):
    first = OPTIMAL_LEADING_ERRORS[order]
    if order == 4:
        second = (first[0] + F(1, 1000), first[1] + F(27, 1000))
    else:
        second = (first[0] + F(1, 22500), first[1] + F(1, 1250), first[2])
    assert family_combination(order, first) == family_combination(order, second)
    assert assembled_weights(parametric_coefficients(order, first)) == \
        assembled_weights(parametric_coefficients(order, second))


def test_base_inside_order4_family():
    psi = baseline_equivalent_psi()
    assert assembled_weights(parametric_coefficients(4, psi)) == assembled_weights(SchemeId(4, Variant.BASE))


@pytest.mark.parametrize("text,halo", [("me4-base", 3), ("me6-base", 5), ("me4-opti", 3), ("me6-opti", 4)])
def test_straight_halo(text, halo):
    assert catalog(SchemeId.parse(text)).halo == halo


def test_reference_schemes_have_no_catalog():
    with pytest.raises(UnsupportedSchemeError):
        catalog(SchemeId(4, Variant.VISBAL))


def test_mixed_catalog_carries_filter_only_for_opti():
    opti = catalog(SchemeId(4, Variant.OPTI, TermKind.MIXED))
    base = catalog(SchemeId(4, Variant.BASE, TermKind.MIXED))
    assert opti.stencils == () and base.stencils == ()
    assert all(rule.has_filter for rule in opti.interpolation)
    assert not any(rule.has_filter for rule in base.interpolation)
    assert opti.nodal_derivative == (F(2, 3), F(-1, 12))
    for rule in opti.interpolation:
        assert sum(rule.interp_weights) == 1
        assert sum(rule.filter_weights) == 0


def test_coefficient_dump_me4_opti():
    records = coefficient_dump(SchemeId(4, Variant.OPTI))
    first = records[0]
    assert first["scheme"] == "me4-opti"
    assert first["location"] == "1/2"
    assert first["offsets"] == [-3, -2, -1, 0, 1, 2, 3]
    assert (first["numerators"][0], first["denominators"][0]) == (133, 12500)
    # stencil and interpolation rows at +-1/2 and +-3/2
    assert len(records) == 8
    assert {r["location"] for r in records} == {"1/2", "-1/2", "3/2", "-3/2"}


def test_coefficient_dump_reference_scheme():
    (record,) = coefficient_dump(SchemeId.parse("nishikawa"))
    assert record["offsets"] == [-2, -1, 0, 1, 2]
    assert record["numerators"] == [-1, 4, -5, 4, -1]
    assert record["denominators"] == [12, 3, 2, 3, 12]


@pytest.mark.parametrize("order,degrees", [(4, (3,)), (6, (3, 5))])
def test_central_first_derivative_moments(order, degrees):
    g = central_first_derivative(order)
    assert 2 * sum(w * p for p, w in enumerate(g, start=1)) == 1
    for q in degrees:
        assert sum(w * p ** q for p, w in enumerate(g, start=1)) == 0
    with pytest.raises(UnsupportedSchemeError):
        central_first_derivative(8)


def test_base_interpolation_slides_and_mirrors():
    rule = base_interpolation(4, F(3, 2))
    weights = dict(zip(rule.offsets, rule.interp_weights))
    assert weights == {0: F(-1, 16), 1: F(9, 16), 2: F(9, 16), 3: F(-1, 16)}
    assert sum(w * p for p, w in weights.items()) == F(3, 2)
    assert not rule.has_filter
    left = base_interpolation(6, F(-1, 2))
    assert left.offsets == (-3, -2, -1, 0, 1, 2)
    assert left.interp_weights[2:4] == (F(75, 128), F(75, 128))
