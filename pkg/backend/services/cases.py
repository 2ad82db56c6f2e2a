"""
Flow benchmarks for the viscous schemes: doubly periodic shear layer,
Kelvin-Helmholtz instability and the odd-even decoupling shock test
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from config import CaseConfig, Config, FilterPolicy
from .cns2d import (
    Boundaries,
    CnsSolver,
    CnsState,
    FlowParameters,
    Grid,
    ViscousModel,
    enstrophy,
    kinetic_energy,
    vorticity,
)
from .coeffs import SchemeId
from .errors import NumericalInstabilityError
from .operators import Extrapolate, Periodic

logger = logging.getLogger(__name__)


def rankine_hugoniot(mach: float, gamma: float) -> Tuple[float, float, float, float]:
    """Post-shock (rho, u, v, p) behind a shock moving into [gamma, 0, 0, 1]"""
    m2 = mach * mach
    rho = gamma * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    u = 2.0 * (m2 - 1.0) / ((gamma + 1.0) * mach)
    p = (2.0 * gamma * m2 - (gamma - 1.0)) / (gamma + 1.0)
    return rho, u, 0.0, p


def _grid(cfg: CaseConfig) -> Grid:
    if cfg.case == "quirk":
        return Grid(cfg.nx, cfg.ny, 1.0, 1.0)
    return Grid(cfg.nx, cfg.ny, 1.0 / cfg.nx, 1.0 / cfg.ny)


def _params(cfg: CaseConfig) -> FlowParameters:
    return FlowParameters(re=cfg.re, mach=cfg.mach, gamma=cfg.gamma, prandtl=cfg.prandtl)


def boundaries_for(cfg: CaseConfig) -> Boundaries:
    if cfg.case == "quirk":
        return Boundaries(x=Extrapolate(0), y=Periodic())
    return Boundaries()


def initial_dpsl(cfg: CaseConfig) -> CnsState:
    """Thin tanh shear layers at y = 1/4 and 3/4 with a sinusoidal cross-stream kick"""
    grid, params = _grid(cfg), _params(cfg)
    x, y = grid.centres()
    vel_x = np.where(y <= 0.5, np.tanh(cfg.shear * (y - 0.25)), np.tanh(cfg.shear * (0.75 - y)))
    vel_y = cfg.perturbation * np.sin(2.0 * math.pi * x)
    p = 1.0 / (params.gamma * params.mach ** 2)
    return CnsState.from_primitive(1.0, vel_x, vel_y, p, grid, params)


def initial_khi(cfg: CaseConfig) -> CnsState:
    grid, params = _grid(cfg), _params(cfg)
    x, y = grid.centres()
    inside = (y >= 0.25) & (y <= 0.75)
    rho = np.where(inside, 2.0, 1.0)
    vel_x = np.where(inside, 0.5, -0.5)
    sigma = cfg.shear
    vel_y = cfg.perturbation * np.sin(4.0 * math.pi * x) * (
        np.exp(-((y - 0.75) ** 2) / (2.0 * sigma ** 2)) + np.exp(-((y - 0.25) ** 2) / (2.0 * sigma ** 2))
    )
    return CnsState.from_primitive(rho, vel_x, vel_y, 2.5, grid, params)


def initial_quirk(cfg: CaseConfig) -> CnsState:
    """
    Shock at mid-domain moving right into [gamma, 0, 0, 1].

    The centreline row and its two neighbours carry a relative density seed
    (-1)^i * (-1/2, 1, -1/2) * cfg.perturbation. It is odd-even along x and
    peaks at the grid cutoff across y, leaving the row-mean density
    untouched. It stands in for the (-1)^i displacement of the centreline
    nodes that uniform-grid operators cannot represent.
    """
    grid, params = _grid(cfg), _params(cfg)
    x, _ = grid.centres()
    post = rankine_hugoniot(cfg.shock_mach, params.gamma)
    behind = x < 0.5 * grid.nx * grid.dx
    rho = np.where(behind, post[0], params.gamma)
    vel_x = np.where(behind, post[1], 0.0)
    p = np.where(behind, post[3], 1.0)
    sign = np.where(np.arange(grid.nx) % 2 == 0, 1.0, -1.0)
    mid = grid.ny // 2
    for offset, weight in ((-1, -0.5), (0, 1.0), (1, -0.5)):
        rho[:, mid + offset] *= 1.0 + weight * sign * cfg.perturbation
    return CnsState.from_primitive(rho, vel_x, 0.0, p, grid, params)


INITIAL_CONDITIONS: Dict[str, Callable[[CaseConfig], CnsState]] = {
    "dpsl": initial_dpsl,
    "khi": initial_khi,
    "quirk": initial_quirk,
}


@dataclass
class Diagnostics:
    times: List[float] = field(default_factory=list)
    kinetic_energy: List[float] = field(default_factory=list)
    enstrophy: List[float] = field(default_factory=list)

    def record(self, state: CnsState, boundaries: Boundaries) -> None:
        self.times.append(state.t)
        self.kinetic_energy.append(kinetic_energy(state))
        self.enstrophy.append(enstrophy(state, boundaries))

    @property
    def dissipation_rate(self) -> np.ndarray:
        """-d(KE)/dt by second-order differences on the recorded times"""
        t = np.asarray(self.times)
        ke = np.asarray(self.kinetic_energy)
        if t.size < 3:
            return np.zeros_like(t)
        return -np.gradient(ke, t)

    def rows(self):
        rate = self.dissipation_rate
        for i, t in enumerate(self.times):
            yield t, self.kinetic_energy[i], float(rate[i]), self.enstrophy[i]


@dataclass
class CaseResult:
    case: str
    scheme: str
    status: str
    steps: int
    state: CnsState
    diagnostics: Diagnostics
    snapshots: List[CnsState] = field(default_factory=list, repr=False)
    failure: Optional[dict] = None
    weno_fallbacks: int = 0

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def summary(self) -> dict:
        out = {
            "case": self.case,
            "scheme": self.scheme,
            "status": self.status,
            "steps": self.steps,
            "time": self.state.t,
            "weno_fallbacks": self.weno_fallbacks,
            "failure": self.failure,
        }
        if self.case == "quirk":
            out["oscillation"] = oscillation_metric(self.state, self.state.params.gamma)
        if self.case == "dpsl":
            out["braid_enstrophy"] = braid_metric(self.state)
        return out


def _scheme(scheme: Union[SchemeId, str, None]) -> Optional[SchemeId]:
    if scheme is None or isinstance(scheme, SchemeId):
        return scheme
    return SchemeId.parse(scheme)


def run_case(cfg: CaseConfig, scheme: Union[SchemeId, str, None], filter_policy: Optional[FilterPolicy] = None,
             progress: Optional[bool] = None, record_every: int = 1) -> CaseResult:
    """
    March a benchmark to t_end with RK3. Blow-up or a non-physical state ends
    the run with status "blown_up"; hitting max_steps ends it with "step_cap".
    """
    progress = Config.SHOW_PROGRESS if progress is None else progress
    scheme_id = _scheme(scheme)
    model = ViscousModel(scheme_id) if cfg.viscous and scheme_id is not None else None
    filter_policy = cfg.resolve_filter(filter_policy)
    boundaries = boundaries_for(cfg)
    solver = CnsSolver(_grid(cfg), _params(cfg), model, cfg.inviscid, boundaries, filter_policy)
    state = INITIAL_CONDITIONS[cfg.case](cfg)
    state.validate()
    name = scheme_id.name if scheme_id is not None else "inviscid"

    diagnostics = Diagnostics()
    diagnostics.record(state, boundaries)
    snapshots: List[CnsState] = []
    status, failure = "completed", None
    bar = tqdm(total=cfg.t_end, desc=f"{cfg.case} {name}", disable=not progress)
    try:
        while state.t < cfg.t_end * (1.0 - 1e-12):
            if solver.steps >= cfg.max_steps:
                status = "step_cap"
                break
            dt = cfg.dt if cfg.dt is not None else solver.time_step(state, cfg.cfl)
            dt = min(dt, cfg.t_end - state.t)
            state = solver.step(state, dt)
            bar.update(dt)
            if solver.steps % record_every == 0:
                diagnostics.record(state, boundaries)
            if cfg.snapshot_every and solver.steps % cfg.snapshot_every == 0:
                snapshots.append(state)
    except NumericalInstabilityError as e:
        status, failure = "blown_up", e.as_record()
        logger.warning("%s with %s blew up at step %s: %s", cfg.case, name, e.step, e)
    finally:
        bar.close()

    if status == "completed" and diagnostics.times[-1] != state.t:
        diagnostics.record(state, boundaries)
    logger.info("%s with %s finished: %s after %d steps (t=%.6g)", cfg.case, name, status, solver.steps, state.t)
    return CaseResult(cfg.case, name, status, solver.steps, state, diagnostics, snapshots, failure,
                      solver.stats.fallbacks)


@dataclass
class ThetaScan:
    scheme: str
    outcomes: Dict[int, bool]
    maximal_stable: Optional[int]

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "maximal_stable_theta": self.maximal_stable,
            "outcomes": {str(k): v for k, v in sorted(self.outcomes.items())},
        }


def theta_stability_scan(cfg: CaseConfig, scheme: Union[SchemeId, str], theta_range: Tuple[int, int] = (1, 400),
                         strength: Optional[float] = None, progress: Optional[bool] = None) -> ThetaScan:
    """
    Largest filter cycle that still reaches t_end, by bisection over
    theta_range. Stability is assumed monotone in theta.
    """
    lo, hi = theta_range
    if not 1 <= lo <= hi:
        raise ValueError(f"invalid theta range {theta_range}")
    scheme_id = _scheme(scheme)
    outcomes: Dict[int, bool] = {}

    def stable(theta: int) -> bool:
        if theta not in outcomes:
            policy = FilterPolicy(theta=theta, **({"strength": strength} if strength else {}))
            outcomes[theta] = run_case(cfg, scheme_id, policy, progress).status != "blown_up"
            logger.info("theta=%d with %s: %s", theta, scheme_id.name, "stable" if outcomes[theta] else "unstable")
        return outcomes[theta]

    if not stable(lo):
        return ThetaScan(scheme_id.name, outcomes, None)
    if stable(hi):
        return ThetaScan(scheme_id.name, outcomes, hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return ThetaScan(scheme_id.name, outcomes, lo)


def oscillation_metric(state: CnsState, gamma: float, margin: int = 10) -> float:
    """
    Transverse saw-tooth behind the shock: max |rho - mean of its two y
    neighbours| over the post-shock columns, normalised by the density jump.
    Rows wrap periodically; the shock is located on the row-mean profile.
    """
    rho = state.rho
    profile = rho.mean(axis=1)
    shock = int(np.argmax(np.abs(np.diff(profile))))
    stop = shock - margin
    jump = float(np.max(profile) - gamma)
    if stop <= margin or jump <= 0:
        return 0.0
    block = rho[margin:stop]
    neighbours = 0.5 * (np.roll(block, 1, axis=1) + np.roll(block, -1, axis=1))
    return float(np.max(np.abs(block - neighbours)) / jump)


def braid_metric(state: CnsState, width: float = 0.15) -> float:
    """Share of the enstrophy found in the braid columns around x = 0"""
    omega2 = vorticity(state) ** 2
    x, _ = state.grid.centres()
    distance = np.minimum(x, 1.0 - x)
    total = float(np.sum(omega2))
    if total == 0:
        return 0.0
    return float(np.sum(omega2[distance < width]) / total)
