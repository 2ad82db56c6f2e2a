"""
Three-stage TVD Runge-Kutta marching and the explicit time-step policy
"""
import logging
import math
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from tqdm import tqdm

from config import Config, TimeStepPolicy
from .coeffs import SchemeId, Variant
from .errors import FieldShapeError, NumericalInstabilityError
from .spectral import sample_curve, symbol_straight

logger = logging.getLogger(__name__)

State = TypeVar("State")
Residual = Callable[[np.ndarray], np.ndarray]


def _check_finite(tendency: np.ndarray, stage: int, step: Optional[int]) -> None:
    if not np.all(np.isfinite(tendency)):
        bad = np.argwhere(~np.isfinite(tendency))
        location = tuple(int(i) for i in bad[0]) if bad.size else None
        raise NumericalInstabilityError(
            f"non-finite tendency in RK stage {stage}", step=step, location=location
        )


def rk3_step(state: np.ndarray, residual: Residual, dt: float, step: Optional[int] = None) -> np.ndarray:
    """One TVD RK3 step; raises on a non-finite tendency"""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    r0 = residual(state)
    _check_finite(r0, 1, step)
    u1 = state + dt * r0
    r1 = residual(u1)
    _check_finite(r1, 2, step)
    u2 = 0.75 * state + 0.25 * u1 + 0.25 * dt * r1
    r2 = residual(u2)
    _check_finite(r2, 3, step)
    return state / 3.0 + (2.0 / 3.0) * u2 + (2.0 / 3.0) * dt * r2


def march(state: np.ndarray, residual: Residual, dt: float, steps: int,
          callback: Optional[Callable[[int, np.ndarray], None]] = None,
          blowup: Optional[float] = None, progress: Optional[bool] = None,
          stepper: Callable[..., np.ndarray] = rk3_step) -> np.ndarray:
    """
    Fixed-step marching loop. Aborts when the state leaves `blowup` times its
    initial magnitude or becomes non-finite.
    """
    blowup = Config.BLOWUP_FACTOR if blowup is None else blowup
    progress = Config.SHOW_PROGRESS if progress is None else progress
    limit = blowup * max(float(np.max(np.abs(state))), 1e-300)
    for n in tqdm(range(1, steps + 1), desc="marching", disable=not progress):
        state = stepper(state, residual, dt, step=n)
        peak = float(np.max(np.abs(state)))
        if not math.isfinite(peak) or peak > limit:
            raise NumericalInstabilityError(f"solution blew up (max |U| = {peak:.3e})", step=n)
        if callback is not None:
            callback(n, state)
    return state


def forward_euler_step(state: np.ndarray, residual: Residual, dt: float, step: Optional[int] = None) -> np.ndarray:
    tendency = residual(state)
    _check_finite(tendency, 1, step)
    return state + dt * tendency


@lru_cache(maxsize=32)
def amplification_peak(scheme: SchemeId, samples: Optional[int] = None) -> Tuple[float, float]:
    """
    (D, k) with D = max |k*| / 2 over [0, pi]: forward Euler is stable for
    dt <= dx^2 / (D mu).
    """
    curve = sample_curve(scheme, samples=samples)
    i = int(np.argmax(np.abs(curve.kstar)))
    return float(abs(curve.kstar[i]) / 2.0), float(curve.k[i])


def amplification_bound(scheme: Union[SchemeId, str]) -> float:
    if isinstance(scheme, str):
        scheme = SchemeId.parse(scheme)
    return amplification_peak(scheme)[0]


def von_neumann_symbol(scheme: Union[SchemeId, str], ratio: float, k: Union[float, np.ndarray]) -> np.ndarray:
    """Forward Euler amplification factor 1 + (mu dt / dx^2) k*(k)"""
    return 1.0 + ratio * symbol_straight(scheme, k)


_DEFAULT_SCHEME = SchemeId(4, Variant.OPTI)


def stable_dt(spacings: Sequence[float], velocities: Sequence[Union[float, np.ndarray]],
              sound_speed: Union[float, np.ndarray], mu: Union[float, np.ndarray],
              policy: Optional[TimeStepPolicy] = None, scheme: Optional[SchemeId] = None) -> float:
    """
    CFL times the smaller of the convective limit dx / (|u| + c) and the
    viscous limit dx^2 / (D mu), each minimised over cells and directions.
    `mu` is the effective diffusivity (already divided by Re).
    """
    policy = policy or TimeStepPolicy()
    if policy.fixed_dt is not None:
        return policy.fixed_dt
    if len(velocities) != len(spacings):
        raise FieldShapeError(f"{len(spacings)} spacings but {len(velocities)} velocity components")
    if any(not h > 0 for h in spacings):
        raise ValueError(f"grid spacings must be positive, got {tuple(spacings)}")

    damping = policy.damping or amplification_bound(scheme or _DEFAULT_SCHEME)
    mu_max = float(np.max(mu))
    c = np.asarray(sound_speed, dtype=float)

    limit = math.inf
    for h, u in zip(spacings, velocities):
        speed = float(np.max(np.abs(np.asarray(u, dtype=float)) + c))
        if speed > 0:
            limit = min(limit, h / speed)
        if mu_max > 0:
            limit = min(limit, h * h / (damping * mu_max))
    if math.isinf(limit):
        raise ValueError("no convective or viscous scale to bound the time step")
    return policy.cfl * limit
