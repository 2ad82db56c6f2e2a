"""
Two-dimensional compressible Navier-Stokes solver on a uniform grid.

Conserved state layout is (4, nx, ny) = (rho, rho u, rho v, rho E); axis 1 is
x and axis 2 is y. Nondimensionalisation: T = gamma M^2 p / rho,
kappa = mu / (M^2 (gamma - 1) Pr), viscous fluxes scaled by 1/Re.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from config import Config, FilterPolicy, TimeStepPolicy
from .coeffs import SchemeId, central_first_derivative
from .errors import StateValidityError, UnsupportedSchemeError
from .operators import (
    FillPolicy,
    Neumann,
    Periodic,
    SecondDerivativeOperator,
    Dirichlet,
    _window,
    ghost_fill,
    operator_for,
)
from .timeint import amplification_bound, rk3_step, stable_dt

logger = logging.getLogger(__name__)

# (-1, 6, -15, 20, -15, 6, -1) / 64: zero at k = 0, unity at k = pi
FILTER_STENCIL = tuple(
    (m, w / 64.0) for m, w in zip(range(-3, 4), (-1.0, 6.0, -15.0, 20.0, -15.0, 6.0, -1.0))
)

WENO_EPS = 1e-6


@dataclass(frozen=True)
class FlowParameters:
    re: float
    mach: float
    gamma: float = Config.GAMMA
    prandtl: float = Config.PRANDTL


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    dx: float
    dy: float

    @property
    def spacings(self) -> Tuple[float, float]:
        return self.dx, self.dy

    def centres(self) -> Tuple[np.ndarray, np.ndarray]:
        """Node coordinates x_i = i dx, y_l = l dy"""
        x = np.arange(self.nx) * self.dx
        y = np.arange(self.ny) * self.dy
        return np.meshgrid(x, y, indexing="ij")


@dataclass(frozen=True)
class Boundaries:
    x: FillPolicy = field(default_factory=Periodic)
    y: FillPolicy = field(default_factory=Periodic)

    def fill(self, a: np.ndarray, width: int, first_axis: int = 0) -> np.ndarray:
        a = ghost_fill(a, width, self.x, first_axis)
        return ghost_fill(a, width, self.y, first_axis + 1)

    def fill_even(self, a: np.ndarray, width: int, first_axis: int = 0) -> np.ndarray:
        """Positive coefficients (viscosity, density) never take odd reflections"""
        x = Neumann() if isinstance(self.x, Dirichlet) else self.x
        y = Neumann() if isinstance(self.y, Dirichlet) else self.y
        return Boundaries(x, y).fill(a, width, first_axis)


@dataclass
class CnsState:
    u: np.ndarray
    grid: Grid
    params: FlowParameters
    t: float = 0.0

    @classmethod
    def from_primitive(cls, rho, vel_x, vel_y, p, grid: Grid, params: FlowParameters, t: float = 0.0) -> "CnsState":
        rho = np.asarray(rho, dtype=float)
        shape = (grid.nx, grid.ny)
        rho, vel_x, vel_y, p = (np.broadcast_to(np.asarray(q, dtype=float), shape) for q in (rho, vel_x, vel_y, p))
        energy = p / (params.gamma - 1.0) + 0.5 * rho * (vel_x ** 2 + vel_y ** 2)
        return cls(np.stack([rho, rho * vel_x, rho * vel_y, energy]).astype(float), grid, params, t)

    @property
    def rho(self) -> np.ndarray:
        return self.u[0]

    @property
    def velocity(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.u[1] / self.u[0], self.u[2] / self.u[0]

    @property
    def pressure(self) -> np.ndarray:
        return pressure_of(self.u, self.params.gamma)

    @property
    def temperature(self) -> np.ndarray:
        return self.params.gamma * self.params.mach ** 2 * self.pressure / self.rho

    @property
    def sound_speed(self) -> np.ndarray:
        return np.sqrt(self.params.gamma * self.pressure / self.rho)

    def validate(self, step: Optional[int] = None) -> None:
        check_state(self.u, self.params.gamma, step)


def pressure_of(u: np.ndarray, gamma: float) -> np.ndarray:
    return (gamma - 1.0) * (u[3] - 0.5 * (u[1] ** 2 + u[2] ** 2) / u[0])


def check_state(u: np.ndarray, gamma: float, step: Optional[int] = None) -> None:
    if not np.all(np.isfinite(u)):
        bad = np.argwhere(~np.isfinite(u))[0]
        raise StateValidityError("non-finite conserved variables", step=step, location=tuple(int(i) for i in bad))
    rho = u[0]
    if np.any(rho <= 0):
        bad = np.argwhere(rho <= 0)[0]
        raise StateValidityError("non-positive density", step=step, location=tuple(int(i) for i in bad))
    p = pressure_of(u, gamma)
    if np.any(p <= 0):
        bad = np.argwhere(p <= 0)[0]
        raise StateValidityError("non-positive pressure", step=step, location=tuple(int(i) for i in bad))


class ViscosityLaw(str, Enum):
    CONSTANT = "constant"
    SUTHERLAND = "sutherland"


@dataclass
class ViscousModel:
    scheme: SchemeId
    law: ViscosityLaw = ViscosityLaw.CONSTANT
    # S* = 110.4 K / T_ref with T_ref = 293 K
    sutherland_ratio: float = 110.4 / 293.0
    filter_penalty: bool = True

    @cached_property
    def operator(self) -> SecondDerivativeOperator:
        return operator_for(self.scheme, filter_penalty=self.filter_penalty)

    def viscosity(self, temperature: np.ndarray) -> np.ndarray:
        if self.law is ViscosityLaw.CONSTANT:
            return np.ones_like(temperature)
        s = self.sutherland_ratio
        return temperature ** 1.5 * (1.0 + s) / (temperature + s)

    def conductivity(self, mu: np.ndarray, params: FlowParameters) -> np.ndarray:
        return mu / (params.mach ** 2 * (params.gamma - 1.0) * params.prandtl)


def viscous_residual(state: CnsState, model: ViscousModel, boundaries: Optional[Boundaries] = None) -> np.ndarray:
    """
    Divergence of the viscous fluxes divided by Re. Every stress and work term
    is written as a straight or mixed second derivative with an effective
    diffusivity (e.g. mu u for u tau_xx) so one operator call covers it.
    """
    boundaries = boundaries or Boundaries()
    return _viscous_tendency(state.u, state.grid, state.params, model, boundaries)


def _viscous_tendency(u: np.ndarray, grid: Grid, params: FlowParameters, model: ViscousModel,
                      boundaries: Boundaries) -> np.ndarray:
    op = model.operator
    pad = op.halo
    rho = u[0]
    vx, vy = u[1] / rho, u[2] / rho
    temp = params.gamma * params.mach ** 2 * pressure_of(u, params.gamma) / rho
    mu = model.viscosity(temp)
    kappa = model.conductivity(mu, params)

    vx_e = boundaries.fill(vx, pad)
    vy_e = boundaries.fill(vy, pad)
    temp_e = boundaries.fill_even(temp, pad)
    mu_e = boundaries.fill_even(mu, pad)
    kappa_e = boundaries.fill_even(kappa, pad)
    dx, dy = grid.spacings

    def sx(phi, diff):
        return op.straight(phi, diff, dx, 0, pad)

    def sy(phi, diff):
        return op.straight(phi, diff, dy, 1, pad)

    def mxy(phi, diff):
        return op.mixed(phi, diff, dx, dy, 0, 1, pad)

    def myx(phi, diff):
        return op.mixed(phi, diff, dy, dx, 1, 0, pad)

    four_thirds, two_thirds = 4.0 / 3.0, 2.0 / 3.0
    mom_x = sx(vx_e, four_thirds * mu_e) + mxy(vy_e, -two_thirds * mu_e) + sy(vx_e, mu_e) + myx(vy_e, mu_e)
    mom_y = sx(vy_e, mu_e) + mxy(vx_e, mu_e) + sy(vy_e, four_thirds * mu_e) + myx(vx_e, -two_thirds * mu_e)

    mu_u, mu_v = mu_e * vx_e, mu_e * vy_e
    energy = (
        sx(vx_e, four_thirds * mu_u) + mxy(vy_e, -two_thirds * mu_u) + mxy(vx_e, mu_v) + sx(vy_e, mu_v)
        + sy(vx_e, mu_u) + myx(vy_e, mu_u) + sy(vy_e, four_thirds * mu_v) + myx(vx_e, -two_thirds * mu_v)
        + sx(temp_e, kappa_e) + sy(temp_e, kappa_e)
    )
    out = np.zeros_like(u)
    out[1], out[2], out[3] = mom_x, mom_y, energy
    return out / params.re


def _fluxes(w: np.ndarray, gamma: float, axis: int) -> np.ndarray:
    """Inviscid flux along x (axis 0) or y (axis 1) from conserved variables"""
    rho = w[0]
    vx, vy = w[1] / rho, w[2] / rho
    p = pressure_of(w, gamma)
    normal = vx if axis == 0 else vy
    flux = np.empty_like(w)
    flux[0] = w[0] * normal
    flux[1] = w[1] * normal + (p if axis == 0 else 0.0)
    flux[2] = w[2] * normal + (p if axis == 1 else 0.0)
    flux[3] = (w[3] + p) * normal
    return flux


def _central_derivative(a: np.ndarray, pad: int, axis: int, spacing: float, g: Tuple[float, ...]) -> np.ndarray:
    """Nodal central derivative of a 2D array padded by `pad` on both axes"""
    out = None
    for p, w in enumerate(g, start=1):
        term = w * (_window(a, pad, {axis: p}) - _window(a, pad, {axis: -p}))
        out = term if out is None else out + term
    return out / spacing


def _padded_state(u: np.ndarray, boundaries: Boundaries, width: int) -> np.ndarray:
    return boundaries.fill(u, width, first_axis=1)


def inviscid_residual_central(state: CnsState, boundaries: Optional[Boundaries] = None) -> np.ndarray:
    """-(dF/dx + dG/dy) with the seven-point sixth-order central derivative"""
    boundaries = boundaries or Boundaries()
    return _central_tendency(state.u, state.grid, state.params.gamma, boundaries)


_G6 = tuple(float(g) for g in central_first_derivative(6))


def _central_tendency(u: np.ndarray, grid: Grid, gamma: float, boundaries: Boundaries) -> np.ndarray:
    pad = len(_G6)
    w = _padded_state(u, boundaries, pad)
    out = np.zeros_like(u)
    for axis, spacing in ((0, grid.dx), (1, grid.dy)):
        flux = _fluxes(w, gamma, axis)
        # leading axis of the stack is the variable index; shift spatial axes only
        derivative = np.stack([_central_derivative(flux[q], pad, axis, spacing, _G6) for q in range(4)])
        out -= derivative
    return out


def apply_filter(u: np.ndarray, policy: FilterPolicy, boundaries: Optional[Boundaries] = None) -> np.ndarray:
    """Explicit sixth-order low-pass filter on the conserved variables, one axis at a time"""
    boundaries = boundaries or Boundaries()
    sigma = policy.strength
    out = u.copy()
    for axis, bc in ((1, boundaries.x), (2, boundaries.y)):
        padded = ghost_fill(out, 3, bc, axis)
        correction = np.zeros_like(out)
        n = out.shape[axis]
        for m, d in FILTER_STENCIL:
            index = [slice(None)] * out.ndim
            index[axis] = slice(3 + m, 3 + m + n)
            correction += d * padded[tuple(index)]
        out = out - sigma * correction
    return out


# ---------------------------------------------------------------------------
# WENO5 + HLL
# ---------------------------------------------------------------------------

def weno5_left(q0, q1, q2, q3, q4):
    """Left-biased fifth-order WENO value at the face between q2 and q3"""
    p0 = (2.0 * q0 - 7.0 * q1 + 11.0 * q2) / 6.0
    p1 = (-q1 + 5.0 * q2 + 2.0 * q3) / 6.0
    p2 = (2.0 * q2 + 5.0 * q3 - q4) / 6.0
    b0 = 13.0 / 12.0 * (q0 - 2.0 * q1 + q2) ** 2 + 0.25 * (q0 - 4.0 * q1 + 3.0 * q2) ** 2
    b1 = 13.0 / 12.0 * (q1 - 2.0 * q2 + q3) ** 2 + 0.25 * (q1 - q3) ** 2
    b2 = 13.0 / 12.0 * (q2 - 2.0 * q3 + q4) ** 2 + 0.25 * (3.0 * q2 - 4.0 * q3 + q4) ** 2
    a0 = 0.1 / (WENO_EPS + b0) ** 2
    a1 = 0.6 / (WENO_EPS + b1) ** 2
    a2 = 0.3 / (WENO_EPS + b2) ** 2
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)


def _primitive(w: np.ndarray, gamma: float) -> np.ndarray:
    rho = w[0]
    return np.stack([rho, w[1] / rho, w[2] / rho, pressure_of(w, gamma)])


def _conserved(prim: np.ndarray, gamma: float) -> np.ndarray:
    rho, vx, vy, p = prim
    return np.stack([rho, rho * vx, rho * vy, p / (gamma - 1.0) + 0.5 * rho * (vx ** 2 + vy ** 2)])


def hll_flux(left: np.ndarray, right: np.ndarray, gamma: float, axis: int) -> np.ndarray:
    """HLL flux from primitive face states with Davis wave-speed estimates"""
    ul, ur = _conserved(left, gamma), _conserved(right, gamma)
    fl, fr = _fluxes(ul, gamma, axis), _fluxes(ur, gamma, axis)
    normal_l, normal_r = left[1 + axis], right[1 + axis]
    cl = np.sqrt(gamma * left[3] / left[0])
    cr = np.sqrt(gamma * right[3] / right[0])
    s_left = np.minimum(normal_l - cl, normal_r - cr)
    s_right = np.maximum(normal_l + cl, normal_r + cr)
    span = np.where(s_right - s_left > 0, s_right - s_left, 1.0)
    middle = (s_right * fl - s_left * fr + s_left * s_right * (ur - ul)) / span
    return np.where(s_left >= 0, fl, np.where(s_right <= 0, fr, middle))


@dataclass
class WenoStatistics:
    fallbacks: int = 0


def inviscid_residual_weno5_hll(state: CnsState, boundaries: Optional[Boundaries] = None,
                                stats: Optional[WenoStatistics] = None) -> np.ndarray:
    boundaries = boundaries or Boundaries()
    return _weno_tendency(state.u, state.grid, state.params.gamma, boundaries, stats)


def _weno_tendency(u: np.ndarray, grid: Grid, gamma: float, boundaries: Boundaries,
                   stats: Optional[WenoStatistics] = None) -> np.ndarray:
    pad = 3
    prim = _primitive(_padded_state(u, boundaries, pad), gamma)
    out = np.zeros_like(u)
    for axis, spacing in ((0, grid.dx), (1, grid.dy)):
        other = 1 - axis
        n = u.shape[1 + axis]

        def cells(offset: int) -> np.ndarray:
            """Cells I + offset for faces I + 1/2, I = pad-1 .. pad+n-1, interior in the other axis"""
            index = [slice(None)] * 3
            index[1 + axis] = slice(pad - 1 + offset, pad + n + offset)
            index[1 + other] = slice(pad, prim.shape[1 + other] - pad)
            return prim[tuple(index)]

        left = weno5_left(cells(-2), cells(-1), cells(0), cells(1), cells(2))
        right = weno5_left(cells(3), cells(2), cells(1), cells(0), cells(-1))
        bad = (left[0] <= 0) | (left[3] <= 0) | (right[0] <= 0) | (right[3] <= 0)
        if np.any(bad):
            left = np.where(bad, cells(0), left)
            right = np.where(bad, cells(1), right)
            if stats is not None:
                stats.fallbacks += int(np.count_nonzero(bad))
        flux = hll_flux(left, right, gamma, axis)
        hi = [slice(None)] * 3
        lo = [slice(None)] * 3
        hi[1 + axis] = slice(1, n + 1)
        lo[1 + axis] = slice(0, n)
        out -= (flux[tuple(hi)] - flux[tuple(lo)]) / spacing
    return out


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

class CnsSolver:
    """RK3 time marching of the full residual with optional periodic filtering"""

    INVISCID = ("central", "weno5", "none")

    def __init__(self, grid: Grid, params: FlowParameters, model: Optional[ViscousModel],
                 inviscid: str = "central", boundaries: Optional[Boundaries] = None,
                 filter_policy: Optional[FilterPolicy] = None):
        if inviscid not in self.INVISCID:
            raise UnsupportedSchemeError(f"Unknown inviscid discretisation {inviscid!r}")
        self.grid = grid
        self.params = params
        self.model = model
        self.inviscid = inviscid
        self.boundaries = boundaries or Boundaries()
        self.filter_policy = filter_policy or FilterPolicy()
        self.stats = WenoStatistics()
        self.steps = 0

    def residual(self, u: np.ndarray) -> np.ndarray:
        check_state(u, self.params.gamma, self.steps)
        if self.inviscid == "central":
            out = _central_tendency(u, self.grid, self.params.gamma, self.boundaries)
        elif self.inviscid == "weno5":
            out = _weno_tendency(u, self.grid, self.params.gamma, self.boundaries, self.stats)
        else:
            out = np.zeros_like(u)
        if self.model is not None:
            out = out + _viscous_tendency(u, self.grid, self.params, self.model, self.boundaries)
        return out

    def time_step(self, state: CnsState, cfl: float) -> float:
        vx, vy = state.velocity
        diffusivity = 0.0
        if self.model is not None:
            mu = self.model.viscosity(state.temperature)
            diffusivity = max(4.0 / 3.0, self.params.gamma / self.params.prandtl) * mu / (state.rho * self.params.re)
        damping = amplification_bound(self.model.scheme) if self.model is not None else None
        policy = TimeStepPolicy(cfl=cfl, damping=damping)
        return stable_dt(self.grid.spacings, (vx, vy), state.sound_speed, diffusivity, policy)

    def step(self, state: CnsState, dt: float) -> CnsState:
        u = rk3_step(state.u, self.residual, dt, step=self.steps + 1)
        self.steps += 1
        if self.filter_policy.due(self.steps):
            u = apply_filter(u, self.filter_policy, self.boundaries)
        check_state(u, self.params.gamma, self.steps)
        return CnsState(u, state.grid, state.params, state.t + dt)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def kinetic_energy(state: CnsState) -> float:
    """Domain-averaged kinetic energy 1/2 rho |u|^2"""
    vx, vy = state.velocity
    return float(np.mean(0.5 * state.rho * (vx ** 2 + vy ** 2)))


def vorticity(state: CnsState, boundaries: Optional[Boundaries] = None) -> np.ndarray:
    boundaries = boundaries or Boundaries()
    vx, vy = state.velocity
    pad = len(_G6)
    dvdx = _central_derivative(boundaries.fill(vy, pad), pad, 0, state.grid.dx, _G6)
    dudy = _central_derivative(boundaries.fill(vx, pad), pad, 1, state.grid.dy, _G6)
    return dvdx - dudy


def enstrophy(state: CnsState, boundaries: Optional[Boundaries] = None) -> float:
    return float(np.mean(vorticity(state, boundaries) ** 2))
