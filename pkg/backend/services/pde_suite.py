"""
Order-of-accuracy studies and the unsteady nonlinear diffusion benchmark
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from config import Config, DiffusionCase
from .coeffs import SchemeId, TermKind, Variant
from .errors import FieldShapeError, NumericalInstabilityError, UnsupportedSchemeError
from .operators import (
    AlphaDampingOperator,
    Field1D,
    Field2D,
    Periodic,
    SecondDerivativeOperator,
    ghost_fill,
    mixed_d2,
    operator_for,
    straight_d2,
)
from .timeint import rk3_step

logger = logging.getLogger(__name__)

SchemeLike = Union[SchemeId, str, SecondDerivativeOperator]

DEFAULT_GRIDS = (20, 40, 80, 160, 320)


@dataclass
class ConvergenceStudy:
    scheme: str
    term: str
    grids: List[int]
    errors: List[float]
    convention: str = "cell-centred nodes x_j=(j+1/2)/N, analytic ghosts, L1 = mean |error|"

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.grids, self.grids[1:])):
            raise FieldShapeError("grids must be strictly increasing")

    @property
    def orders(self) -> List[Optional[float]]:
        out: List[Optional[float]] = [None]
        for (n0, e0), (n1, e1) in zip(zip(self.grids, self.errors), zip(self.grids[1:], self.errors[1:])):
            if e0 > 0 and e1 > 0:
                out.append(math.log(e0 / e1) / math.log(n1 / n0))
            else:
                out.append(None)
        return out

    def rows(self):
        for n, err, order in zip(self.grids, self.errors, self.orders):
            yield n, err, order

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "term": self.term,
            "grids": self.grids,
            "l1": self.errors,
            "orders": self.orders,
            "convention": self.convention,
        }


def _test_function(s: np.ndarray) -> np.ndarray:
    return np.sin(10.0 * s)


def _test_viscosity(s: np.ndarray) -> np.ndarray:
    return 0.1 * np.exp(2.0 * s)


def _test_exact(s: np.ndarray) -> np.ndarray:
    """d/ds(0.1 e^{2s} d/ds sin 10s)"""
    return np.exp(2.0 * s) * (2.0 * np.cos(10.0 * s) - 10.0 * np.sin(10.0 * s))


def _straight_operator(scheme: SchemeLike) -> SecondDerivativeOperator:
    if isinstance(scheme, SecondDerivativeOperator):
        return scheme
    if isinstance(scheme, str):
        scheme = SchemeId.parse(scheme)
    if scheme.variant is Variant.NISHIKAWA:
        return AlphaDampingOperator(interface="fourth_order")
    return operator_for(scheme)


def _nodes(n: int, halo: int) -> np.ndarray:
    return (np.arange(-halo, n + halo) + 0.5) / n


def oa_straight(scheme: SchemeLike, grids: Sequence[int] = DEFAULT_GRIDS,
                function: Callable[[np.ndarray], np.ndarray] = _test_function,
                viscosity: Callable[[np.ndarray], np.ndarray] = _test_viscosity,
                exact: Callable[[np.ndarray], np.ndarray] = _test_exact) -> ConvergenceStudy:
    """L1 errors of d/dx(mu d f/dx) on [0, 1] with ghost nodes taken from the test function"""
    op = _straight_operator(scheme)
    errors = []
    for n in grids:
        x = _nodes(n, op.halo)
        phi = Field1D(function(x), 1.0 / n, halo=op.halo)
        result = straight_d2(phi, viscosity(x), op).values
        err = float(np.mean(np.abs(result - exact(x[op.halo:-op.halo]))))
        logger.debug("%s straight N=%d L1=%.4e", op.scheme.name, n, err)
        errors.append(err)
    return ConvergenceStudy(op.scheme.name, TermKind.STRAIGHT.value, list(grids), errors)


def oa_mixed(scheme: SchemeLike, grids: Sequence[int] = DEFAULT_GRIDS, filter_penalty: bool = True,
             function: Callable[[np.ndarray], np.ndarray] = _test_function,
             viscosity: Callable[[np.ndarray], np.ndarray] = _test_viscosity,
             exact: Callable[[np.ndarray], np.ndarray] = _test_exact) -> ConvergenceStudy:
    """
    L1 errors of d/dx(mu d g/dy) on [0, 1]^2 for g and mu functions of x + y;
    the test functions are one-dimensional profiles evaluated at s = x + y.
    """
    if isinstance(scheme, SecondDerivativeOperator):
        op = scheme
    else:
        scheme_id = SchemeId.parse(scheme) if isinstance(scheme, str) else scheme
        if scheme_id.variant is Variant.NISHIKAWA:
            raise UnsupportedSchemeError("alpha-damping has no mixed-term discretisation")
        op = operator_for(scheme_id, filter_penalty=filter_penalty)
    errors = []
    for n in grids:
        x = _nodes(n, op.halo)
        s = x[:, None] + x[None, :]
        phi = Field2D(function(s), 1.0 / n, 1.0 / n, halo=op.halo)
        result = mixed_d2(phi, viscosity(s), op, outer_axis=0, inner_axis=1).values
        interior = s[op.halo:-op.halo, op.halo:-op.halo]
        err = float(np.mean(np.abs(result - exact(interior))))
        logger.debug("%s mixed N=%d L1=%.4e", op.scheme.name, n, err)
        errors.append(err)
    name = op.scheme.name if filter_penalty else f"{op.scheme.name} (no filter penalty)"
    return ConvergenceStudy(name, TermKind.MIXED.value, list(grids), errors)


@dataclass
class DiffusionResult:
    x: np.ndarray
    f: np.ndarray
    times: List[float] = field(default_factory=list)
    maxima: List[float] = field(default_factory=list)

    @property
    def peak(self) -> float:
        """MAX(f) at the final time"""
        return float(np.max(self.f))

    def rows(self):
        return zip(self.times, self.maxima)


def diffusion_operator(case: DiffusionCase) -> SecondDerivativeOperator:
    scheme = SchemeId.parse(case.scheme)
    if scheme.variant is Variant.NISHIKAWA:
        return AlphaDampingOperator(alpha=case.alpha, interface="average")
    return operator_for(scheme)


def run_diffusion(case: Optional[DiffusionCase] = None, progress: Optional[bool] = None) -> DiffusionResult:
    """
    df/dt = d/dx(nu df/dx) on the periodic unit interval with
    nu = nu_mean + nu_amp cos(w pi x) and f0 = sin(w pi x), marched with RK3.
    """
    case = case or DiffusionCase()
    progress = Config.SHOW_PROGRESS if progress is None else progress
    op = diffusion_operator(case)
    if case.n < 2 * op.halo + 1:
        raise FieldShapeError(f"{case.n} nodes are too few for {op.scheme.name}")
    dx = 1.0 / case.n
    x = np.arange(case.n) * dx
    nu = case.nu_mean + case.nu_amp * np.cos(case.wavenumber * math.pi * x)
    nu_ext = ghost_fill(nu, op.halo, Periodic())
    f = np.sin(case.wavenumber * math.pi * x)

    def residual(values: np.ndarray) -> np.ndarray:
        return op.straight(ghost_fill(values, op.halo, Periodic()), nu_ext, dx, 0, op.halo)

    full_steps = int(math.floor(case.t_end / case.dt + 1e-9))
    remainder = case.t_end - full_steps * case.dt
    steps = [case.dt] * full_steps + ([remainder] if remainder > 1e-12 * case.dt else [])
    limit = case.blowup * max(float(np.max(np.abs(f))), 1e-300)

    result = DiffusionResult(x, f, [0.0], [float(np.max(f))])
    t = 0.0
    for n, dt in enumerate(tqdm(steps, desc=f"diffusion {op.scheme.name}", disable=not progress), start=1):
        f = rk3_step(f, residual, dt, step=n)
        t += dt
        peak = float(np.max(np.abs(f)))
        if not math.isfinite(peak) or peak > limit:
            raise NumericalInstabilityError(
                f"{op.scheme.name} diffusion blew up at t={t:.6g} (max |f| = {peak:.3e})", step=n
            )
        result.times.append(t)
        result.maxima.append(float(np.max(f)))
    result.f = f
    logger.info("%s diffusion N=%d reached t=%.6g, MAX(f)=%.6f", op.scheme.name, case.n, t, result.peak)
    return result
