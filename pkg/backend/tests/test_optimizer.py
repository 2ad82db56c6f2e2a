from fractions import Fraction as F

import numpy as np
import pytest
from pydantic import ValidationError

from config import ParameterRange, SearchConfig
from services.errors import UnsupportedSchemeError
from services.optimizer import PointResult, efficiency_surface, evaluate_point, search_straight
from services.spectral import resolving_efficiency, sample_curve


def test_default_grids():
    four = SearchConfig(order=4)
    assert [len(r.values()) for r in four.ranges] == [41, 21]
    six = SearchConfig(order=6)
    assert [len(r.values()) for r in six.ranges] == [11, 11, 3]


def test_range_count_validated():
    with pytest.raises(ValidationError):
        SearchConfig(order=6, ranges=[ParameterRange(lo="0", hi="1/100", step="1/1000")] * 2)


def test_parameter_range_is_exact():
    values = ParameterRange(lo="-3/100", hi="1/100", step="1/1000").values()
    assert values[0] == F(-3, 100) and values[-1] == F(1, 100)
    with pytest.raises(ValidationError):
        ParameterRange(lo="1", hi="0", step="1/10")


def test_evaluate_point_matches_tabulated_scheme():
    point = evaluate_point(4, (F(-1, 100), F(0)))
    assert point.feasible
    assert point.efficiency == pytest.approx(resolving_efficiency(sample_curve("me4-opti")), abs=1e-6)
    assert point.peak == pytest.approx(1.0499824, abs=5e-6)


def test_sort_key_tie_breaks():
    a = PointResult((F(1, 100), F(0)), 0.8, True, 1.0)
    b = PointResult((F(-1, 200), F(0)), 0.8, True, 1.0)
    c = PointResult((F(-1, 200), F(-1, 1000)), 0.8, True, 1.0)
    d = PointResult((F(0), F(1, 200)), 0.8, True, 1.0)
    # smallest L1 norm wins, then the lexicographically smaller tuple
    assert min([a, b, c, d], key=PointResult.sort_key) is b
    higher = PointResult((F(1), F(1)), 0.9, True, 1.0)
    assert min([a, higher], key=PointResult.sort_key) is higher


def test_order4_search_recovers_optimum():
    result = search_straight(4, SearchConfig(order=4, keep_surface=False))
    assert result.feasible
    assert result.optimal_params == (F(-1, 100), F(0))
    assert result.efficiency == pytest.approx(0.8249, abs=5e-4)
    assert result.evaluated == 41 * 21
    assert result.as_dict()["optimal_params"] == ["-1/100", "0"]


@pytest.mark.slow
def test_order6_search_recovers_optimum():
    result = search_straight(6)
    assert result.feasible
    assert result.optimal_params == (F(3, 1250), F(-1, 1250), F(3, 625))
    assert result.efficiency == pytest.approx(0.8802, abs=5e-4)


def test_search_rejects_mismatched_config():
    with pytest.raises(UnsupportedSchemeError):
        search_straight(6, SearchConfig(order=4))


def test_efficiency_surface_small_window():
    cfg = SearchConfig(order=4, ranges=[
        ParameterRange(lo="-12/1000", hi="-8/1000", step="1/1000"),
        ParameterRange(lo="-1/1000", hi="1/1000", step="1/1000"),
    ])
    surface = efficiency_surface(4, cfg)
    assert surface.efficiency.shape == (5, 3)
    rows = list(surface.rows())
    assert len(rows) == 15
    assert all(0.0 < r[2] <= 1.0 for r in rows)
    assert surface.argmax() == (F(-1, 100), F(0))


def test_order6_surface_pins_third_parameter():
    cfg = SearchConfig(order=6, ranges=[
        ParameterRange(lo="29/12500", hi="31/12500", step="1/12500"),
        ParameterRange(lo="-11/12500", hi="-9/12500", step="1/12500"),
        ParameterRange(lo="5/1250", hi="7/1250", step="1/1250"),
    ])
    surface = efficiency_surface(6, cfg)
    assert surface.fixed == {2: F(6, 1250)}
    assert surface.efficiency.shape == (3, 3)
    assert np.all(np.isfinite(surface.efficiency))
