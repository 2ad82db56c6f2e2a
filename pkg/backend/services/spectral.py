"""
Modified-wavenumber analysis of the viscous operators
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping, Optional, Tuple, Union

import numpy as np

from config import Config
from .coeffs import SchemeId, TermKind
from .errors import FieldShapeError
from .operators import SecondDerivativeOperator, operator_for

logger = logging.getLogger(__name__)

SymbolFn = Callable[[np.ndarray], np.ndarray]


class CurveKind(str, Enum):
    STRAIGHT = "straight"
    MIXED = "mixed"


@dataclass
class SpectralCurve:
    k: np.ndarray
    kstar: np.ndarray
    scheme: Optional[SchemeId] = None
    kind: CurveKind = CurveKind.STRAIGHT
    # exact evaluator for off-sample wavenumbers
    symbol: Optional[SymbolFn] = field(default=None, repr=False)

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=float)
        self.kstar = np.asarray(self.kstar, dtype=float)
        if self.k.shape != self.kstar.shape:
            raise FieldShapeError("wavenumber and symbol samples differ in length")

    def __len__(self) -> int:
        return int(self.k.size)

    def at(self, k: Union[float, np.ndarray]) -> np.ndarray:
        if self.symbol is not None:
            return self.symbol(np.atleast_1d(np.asarray(k, dtype=float)))
        return np.interp(k, self.k, self.kstar)

    @property
    def exact(self) -> np.ndarray:
        return -self.k ** 2


@dataclass
class SpectralReport:
    resolving_efficiency: float
    tolerance: float
    spectral_viscosity_at_cutoff: float
    overdissipation: float
    overdissipation_k: float
    curve: SpectralCurve = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "scheme": self.curve.scheme.slug if self.curve.scheme else None,
            "kind": self.curve.kind.value,
            "resolving_efficiency": self.resolving_efficiency,
            "tolerance": self.tolerance,
            "spectral_viscosity_at_cutoff": self.spectral_viscosity_at_cutoff,
            "overdissipation": self.overdissipation,
            "overdissipation_k": self.overdissipation_k,
        }


def symbol_from_weights(weights: Mapping[int, Union[Fraction, float]], k: Union[float, np.ndarray]) -> np.ndarray:
    """Real part of sum_p w_p exp(i p k) for unit-spacing nodal weights"""
    k = np.asarray(k, dtype=float)
    out = np.zeros_like(k)
    for p, w in weights.items():
        out = out + float(w) * np.cos(p * k)
    return out


def _sample_operator(op: SecondDerivativeOperator, kind: CurveKind, k: np.ndarray,
                     imaginary: bool = False) -> np.ndarray:
    """
    Apply the operator to a Fourier mode around a single node with unit
    spacing and unit viscosity. The leading axis batches wavenumbers; its
    ghost rows are discarded.
    """
    pad = op.halo
    width = 2 * pad + 1
    kk = np.concatenate([np.full(pad, k[0]), k, np.full(pad, k[-1])])
    p = np.arange(-pad, pad + 1, dtype=float)
    wave = np.sin if imaginary else np.cos
    if kind is CurveKind.STRAIGHT:
        phi = wave(kk[:, None] * p[None, :])
        out = op.straight(phi, np.ones_like(phi), 1.0, axis=1, pad=pad)
    else:
        phase = p[:, None] + p[None, :]
        phi = wave(kk[:, None, None] * phase[None, :, :])
        out = op.mixed(phi, np.ones_like(phi), 1.0, 1.0, outer_axis=1, inner_axis=2, pad=pad)
    return out.reshape(len(k))


def _as_operator(scheme: Union[SchemeId, str, SecondDerivativeOperator],
                 filter_penalty: bool = True) -> SecondDerivativeOperator:
    if isinstance(scheme, SecondDerivativeOperator):
        return scheme
    if isinstance(scheme, str):
        scheme = SchemeId.parse(scheme)
    return operator_for(scheme, filter_penalty=filter_penalty)


def symbol_straight(scheme: Union[SchemeId, str, SecondDerivativeOperator],
                    k: Union[float, np.ndarray]) -> np.ndarray:
    """k*_xx of a straight operator (constant viscosity, unit spacing)"""
    op = _as_operator(scheme)
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    return _sample_operator(op, CurveKind.STRAIGHT, k_arr)


def symbol_mixed(scheme: Union[SchemeId, str, SecondDerivativeOperator],
                 k: Union[float, np.ndarray], filter_penalty: bool = True) -> np.ndarray:
    """k*_xy along the diagonal mode exp(ik(x+y))"""
    op = _as_operator(scheme, filter_penalty)
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    return _sample_operator(op, CurveKind.MIXED, k_arr)


def symbol_imaginary(scheme: Union[SchemeId, str, SecondDerivativeOperator], k: Union[float, np.ndarray],
                     kind: CurveKind = CurveKind.STRAIGHT) -> np.ndarray:
    """Imaginary part of the symbol; vanishes for central schemes"""
    op = _as_operator(scheme)
    return _sample_operator(op, CurveKind(kind), np.atleast_1d(np.asarray(k, dtype=float)), imaginary=True)


def sample_curve(scheme: Union[SchemeId, str, SecondDerivativeOperator],
                 kind: Union[CurveKind, str] = CurveKind.STRAIGHT,
                 samples: Optional[int] = None, filter_penalty: bool = True) -> SpectralCurve:
    kind = CurveKind(kind)
    samples = samples or Config.SPECTRAL_SAMPLES
    if samples < 2:
        raise FieldShapeError(f"need at least two wavenumber samples, got {samples}")
    op = _as_operator(scheme, filter_penalty)
    k = np.linspace(0.0, math.pi, samples)

    def symbol(values: np.ndarray) -> np.ndarray:
        return _sample_operator(op, kind, values)

    kstar = symbol(k)
    kstar[0] = 0.0
    logger.debug("sampled %s %s symbol on %d wavenumbers", op.scheme.name, kind.value, samples)
    curve_scheme = op.scheme.with_term(TermKind.MIXED) if kind is CurveKind.MIXED else op.scheme
    return SpectralCurve(k, kstar, curve_scheme, kind, symbol)


def curve_from_weights(weights: Mapping[int, Union[Fraction, float]], samples: Optional[int] = None,
                       scheme: Optional[SchemeId] = None) -> SpectralCurve:
    samples = samples or Config.SPECTRAL_SAMPLES
    k = np.linspace(0.0, math.pi, samples)
    float_weights = {p: float(w) for p, w in weights.items()}

    def symbol(values: np.ndarray) -> np.ndarray:
        return symbol_from_weights(float_weights, values)

    return SpectralCurve(k, symbol(k), scheme, CurveKind.STRAIGHT, symbol)


def _relative_deviation(k: np.ndarray, kstar: np.ndarray) -> np.ndarray:
    dev = np.zeros_like(k)
    nonzero = k > 0
    dev[nonzero] = np.abs(kstar[nonzero] + k[nonzero] ** 2) / k[nonzero] ** 2
    return dev


def resolving_efficiency(curve: SpectralCurve, eps: Optional[float] = None, slack: Optional[float] = None,
                         tol: Optional[float] = None) -> float:
    """Fraction of [0, pi] before the relative symbol error first reaches eps"""
    if len(curve) == 0:
        raise FieldShapeError("cannot measure the resolving efficiency of an empty curve")
    eps = Config.RESOLVING_TOLERANCE if eps is None else eps
    slack = Config.THRESHOLD_SLACK if slack is None else slack
    tol = Config.BISECTION_TOL if tol is None else tol
    if eps <= 0:
        raise ValueError(f"tolerance must be positive, got {eps}")
    threshold = eps + slack

    dev = _relative_deviation(curve.k, curve.kstar)
    hits = np.nonzero(dev >= threshold)[0]
    if hits.size == 0:
        return float(curve.k[-1] / math.pi)
    i = int(hits[0])
    if i == 0 or curve.symbol is None:
        return float(curve.k[i] / math.pi)

    lo, hi = float(curve.k[i - 1]), float(curve.k[i])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        value = curve.at(mid)
        if _relative_deviation(np.array([mid]), np.asarray(value, dtype=float))[0] >= threshold:
            hi = mid
        else:
            lo = mid
    return hi / math.pi


def overdissipation_peak(curve: SpectralCurve) -> Tuple[float, float]:
    """Largest ratio k*/(-k^2) and where it occurs"""
    nonzero = curve.k > 0
    if not np.any(nonzero):
        raise FieldShapeError("curve has no positive wavenumbers")
    ratio = curve.kstar[nonzero] / (-curve.k[nonzero] ** 2)
    i = int(np.argmax(ratio))
    return float(ratio[i]), float(curve.k[nonzero][i])


def is_overdissipative(curve: SpectralCurve, factor: Optional[float] = None, slack: Optional[float] = None) -> bool:
    factor = Config.OVERDISSIPATION_FACTOR if factor is None else factor
    slack = Config.THRESHOLD_SLACK if slack is None else slack
    ratio, _ = overdissipation_peak(curve)
    return ratio > factor + slack


def spectral_viscosity(curve: SpectralCurve, nu: float, k: float, limit: bool = False) -> float:
    """Correction viscosity -nu (k* + k^2) / k^2 equivalent to the scheme error"""
    if k <= 0:
        if limit and k == 0:
            return 0.0
        raise ValueError(f"spectral viscosity needs k > 0, got {k}")
    kstar = float(np.asarray(curve.at(k)).reshape(-1)[0])
    return -nu * (kstar + k * k) / (k * k)


def equivalent_reynolds(curve: SpectralCurve, length: float, velocity: float, nu: float, k: float) -> float:
    """L u / (nu + nu''_s); infinite where the scheme does not see the mode"""
    if not 0 < k <= math.pi + 1e-12:
        raise ValueError(f"wavenumber must lie in (0, pi], got {k}")
    kstar = float(np.asarray(curve.at(k)).reshape(-1)[0])
    if abs(kstar) < 1e-12:
        return math.inf
    return -length * velocity * k * k / (nu * kstar)


def scheme_report(scheme: Union[SchemeId, str, SecondDerivativeOperator],
                  kind: Union[CurveKind, str] = CurveKind.STRAIGHT, eps: Optional[float] = None,
                  samples: Optional[int] = None, filter_penalty: bool = True) -> SpectralReport:
    curve = sample_curve(scheme, kind, samples, filter_penalty)
    eps = Config.RESOLVING_TOLERANCE if eps is None else eps
    peak, peak_k = overdissipation_peak(curve)
    return SpectralReport(
        resolving_efficiency=resolving_efficiency(curve, eps),
        tolerance=eps,
        spectral_viscosity_at_cutoff=spectral_viscosity(curve, 1.0, math.pi),
        overdissipation=peak,
        overdissipation_k=peak_k,
        curve=curve,
    )


def spectra_rows(curve: SpectralCurve, nu: float = 1.0):
    """(k, exact, scheme, spectral viscosity) rows for CSV export"""
    for k, kstar in zip(curve.k, curve.kstar):
        visc = 0.0 if k == 0 else -nu * (kstar + k * k) / (k * k)
        yield float(k), float(-k * k), float(kstar), float(visc)
