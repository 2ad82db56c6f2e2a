"""
Brute-force search of the leading-error coefficients that maximise the
spectral resolving efficiency under the over-dissipation cap
"""
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import Config, SearchConfig
from .coeffs import SchemeId, Variant, assembled_weights, parametric_coefficients
from .errors import UnsupportedSchemeError
from .spectral import curve_from_weights, overdissipation_peak, resolving_efficiency

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointResult:
    params: Tuple[Fraction, ...]
    efficiency: float
    feasible: bool
    peak: float

    def sort_key(self) -> tuple:
        """Larger efficiency first, then smaller L1 norm, then lexicographic"""
        return (-self.efficiency, sum(abs(p) for p in self.params), self.params)


@dataclass
class SearchResult:
    order: int
    optimal_params: Tuple[Fraction, ...]
    efficiency: float
    feasible: bool
    evaluated: int
    surface: List[PointResult] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "order": self.order,
            "optimal_params": [str(p) for p in self.optimal_params],
            "optimal_params_float": [float(p) for p in self.optimal_params],
            "resolving_efficiency": self.efficiency,
            "feasible": self.feasible,
            "evaluated": self.evaluated,
        }


@dataclass
class SurfaceGrid:
    """e_v over two parameters, the remaining ones held fixed"""
    axes: Tuple[List[Fraction], List[Fraction]]
    efficiency: np.ndarray
    feasible: np.ndarray
    fixed: Dict[int, Fraction] = field(default_factory=dict)

    def rows(self) -> Iterator[Tuple[float, float, float, int]]:
        for i, a in enumerate(self.axes[0]):
            for j, b in enumerate(self.axes[1]):
                yield float(a), float(b), float(self.efficiency[i, j]), int(self.feasible[i, j])

    def argmax(self) -> Tuple[Fraction, Fraction]:
        masked = np.where(self.feasible, self.efficiency, -np.inf)
        i, j = np.unravel_index(int(np.argmax(masked)), masked.shape)
        return self.axes[0][i], self.axes[1][j]


def evaluate_point(order: int, params: Sequence[Fraction], cfg: Optional[SearchConfig] = None) -> PointResult:
    """Resolving efficiency and over-dissipation feasibility of one family member"""
    cfg = cfg or SearchConfig(order=order)
    params = tuple(Fraction(p) for p in params)
    weights = assembled_weights(parametric_coefficients(order, params))
    curve = curve_from_weights(weights, cfg.samples, SchemeId(order, Variant.OPTI))
    peak, _ = overdissipation_peak(curve)
    feasible = peak <= cfg.constraint_factor + cfg.slack
    efficiency = resolving_efficiency(curve, cfg.eps, cfg.slack)
    return PointResult(params, efficiency, feasible, peak)


def _grid(cfg: SearchConfig) -> List[Tuple[Fraction, ...]]:
    return list(itertools.product(*(r.values() for r in cfg.ranges)))


def search_straight(order: int, cfg: Optional[SearchConfig] = None, progress: Optional[bool] = None) -> SearchResult:
    """
    Exhaustive scan of the configured parameter grid. Points violating the
    over-dissipation cap are discarded; the feasible maximiser wins, ties
    going to the smaller L1 norm and then lexicographic order.
    """
    cfg = cfg or SearchConfig(order=order)
    if cfg.order != order:
        raise UnsupportedSchemeError(f"search config is for order {cfg.order}, requested order {order}")
    progress = Config.SHOW_PROGRESS if progress is None else progress
    points = _grid(cfg)
    logger.info("scanning %d order-%d parameter combinations", len(points), order)

    results: List[PointResult] = []
    for params in tqdm(points, desc=f"order-{order} search", disable=not progress):
        results.append(evaluate_point(order, params, cfg))

    feasible = [r for r in results if r.feasible]
    if not feasible:
        logger.warning("no feasible point among %d candidates", len(results))
        best = min(results, key=PointResult.sort_key)
        return SearchResult(order, best.params, best.efficiency, False, len(results),
                            results if cfg.keep_surface else [])

    best = min(feasible, key=PointResult.sort_key)
    logger.info("optimum %s with e_v=%.6f", [str(p) for p in best.params], best.efficiency)
    return SearchResult(order, best.params, best.efficiency, True, len(results),
                        results if cfg.keep_surface else [])


def efficiency_surface(order: int, cfg: Optional[SearchConfig] = None,
                       fixed: Optional[Dict[int, Fraction]] = None, progress: Optional[bool] = None) -> SurfaceGrid:
    """
    Contour data over the first two free parameters. For order 6 the third
    parameter is pinned, by default to the middle of its range.
    """
    cfg = cfg or SearchConfig(order=order)
    progress = Config.SHOW_PROGRESS if progress is None else progress
    fixed = dict(fixed or {})
    free = [i for i in range(len(cfg.ranges)) if i not in fixed]
    if order == 6 and len(free) > 2:
        values = cfg.ranges[2].values()
        fixed[2] = values[len(values) // 2]
        free = [0, 1]
    if len(free) != 2:
        raise UnsupportedSchemeError("a surface needs exactly two free parameters")

    axis_a, axis_b = cfg.ranges[free[0]].values(), cfg.ranges[free[1]].values()
    efficiency = np.zeros((len(axis_a), len(axis_b)))
    feasible = np.zeros((len(axis_a), len(axis_b)), dtype=bool)
    cells = list(itertools.product(range(len(axis_a)), range(len(axis_b))))
    for i, j in tqdm(cells, desc="efficiency surface", disable=not progress):
        params = [Fraction(0)] * len(cfg.ranges)
        params[free[0]], params[free[1]] = axis_a[i], axis_b[j]
        for index, value in fixed.items():
            params[index] = value
        point = evaluate_point(order, params, cfg)
        efficiency[i, j] = point.efficiency
        feasible[i, j] = point.feasible
    return SurfaceGrid((axis_a, axis_b), efficiency, feasible, fixed)
