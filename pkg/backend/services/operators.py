"""
Nonlinear straight and mixed second-derivative operators on uniform grids.

Every operator works on arrays that already carry `pad` ghost layers on every
axis and returns the interior block. `straight_d2` / `mixed_d2` wrap that core
with ghost filling for Field1D / Field2D inputs.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .coeffs import (
    SchemeCoefficients,
    SchemeId,
    TermKind,
    Variant,
    as_fraction,
    catalog,
    central_first_derivative,
)
from .errors import FieldShapeError, UnsupportedSchemeError

logger = logging.getLogger(__name__)

Weights = Tuple[Tuple[int, float], ...]


# ---------------------------------------------------------------------------
# Ghost cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Periodic:
    pass


@dataclass(frozen=True)
class Dirichlet:
    """Odd reflection about the boundary face value"""
    value: float = 0.0


@dataclass(frozen=True)
class Neumann:
    """Even reflection about the boundary face"""


@dataclass(frozen=True)
class Extrapolate:
    """Polynomial extrapolation through the first order+1 nodes; 0 copies the edge"""
    order: int = 0


FillPolicy = Union[Periodic, Dirichlet, Neumann, Extrapolate]


def _extrapolation_weights(order: int, distance: int) -> np.ndarray:
    """Lagrange weights on nodes 0..order evaluated at -distance"""
    nodes = np.arange(order + 1, dtype=float)
    x = -float(distance)
    weights = np.ones(order + 1)
    for i in range(order + 1):
        for m in range(order + 1):
            if m != i:
                weights[i] *= (x - nodes[m]) / (nodes[i] - nodes[m])
    return weights


def ghost_fill(values: np.ndarray, width: int, policy: FillPolicy, axis: int = 0) -> np.ndarray:
    """Extend `values` by `width` ghost layers on both ends of `axis`"""
    values = np.asarray(values, dtype=float)
    if width < 0:
        raise FieldShapeError(f"ghost width must be non-negative, got {width}")
    if width == 0:
        return values.copy()
    n = values.shape[axis]
    pad = [(0, 0)] * values.ndim
    pad[axis] = (width, width)

    if isinstance(policy, Periodic):
        if n < width:
            raise FieldShapeError(f"periodic fill of width {width} needs at least {width} nodes, got {n}")
        return np.pad(values, pad, mode="wrap")
    if isinstance(policy, Neumann):
        return np.pad(values, pad, mode="symmetric")
    if isinstance(policy, Dirichlet):
        out = np.pad(values, pad, mode="symmetric")
        lo = [slice(None)] * values.ndim
        hi = [slice(None)] * values.ndim
        lo[axis] = slice(0, width)
        hi[axis] = slice(n + width, n + 2 * width)
        out[tuple(lo)] = 2.0 * policy.value - out[tuple(lo)]
        out[tuple(hi)] = 2.0 * policy.value - out[tuple(hi)]
        return out
    if isinstance(policy, Extrapolate):
        if policy.order == 0:
            return np.pad(values, pad, mode="edge")
        if n < policy.order + 1:
            raise FieldShapeError(f"order-{policy.order} extrapolation needs {policy.order + 1} nodes, got {n}")
        out = np.pad(values, pad, mode="edge")
        moved = np.moveaxis(out, axis, 0)
        head = np.moveaxis(values, axis, 0)[: policy.order + 1]
        tail = np.moveaxis(values, axis, 0)[::-1][: policy.order + 1]
        for k in range(1, width + 1):
            w = _extrapolation_weights(policy.order, k)
            moved[width - k] = np.tensordot(w, head, axes=1)
            moved[n + width - 1 + k] = np.tensordot(w, tail, axes=1)
        return out
    raise UnsupportedSchemeError(f"Unknown ghost fill policy: {policy!r}")


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

@dataclass
class Field1D:
    values: np.ndarray
    dx: float
    boundary: FillPolicy = field(default_factory=Periodic)
    # ghost layers already present in `values`
    halo: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise FieldShapeError(f"Field1D expects a 1D array, got shape {self.values.shape}")
        if not self.dx > 0:
            raise FieldShapeError(f"grid spacing must be positive, got {self.dx}")

    @property
    def spacings(self) -> Tuple[float, ...]:
        return (self.dx,)

    @property
    def boundaries(self) -> Tuple[FillPolicy, ...]:
        return (self.boundary,)

    def interior(self) -> np.ndarray:
        return _trim(self.values, self.halo)


@dataclass
class Field2D:
    values: np.ndarray
    dx: float
    dy: float
    boundary_x: FillPolicy = field(default_factory=Periodic)
    boundary_y: FillPolicy = field(default_factory=Periodic)
    halo: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise FieldShapeError(f"Field2D expects a 2D array, got shape {self.values.shape}")
        if not (self.dx > 0 and self.dy > 0):
            raise FieldShapeError(f"grid spacings must be positive, got ({self.dx}, {self.dy})")

    @property
    def spacings(self) -> Tuple[float, ...]:
        return (self.dx, self.dy)

    @property
    def boundaries(self) -> Tuple[FillPolicy, ...]:
        return (self.boundary_x, self.boundary_y)

    def interior(self) -> np.ndarray:
        return _trim(self.values, self.halo)


AnyField = Union[Field1D, Field2D]


def _trim(a: np.ndarray, width: int) -> np.ndarray:
    if width == 0:
        return a
    return a[tuple(slice(width, s - width) for s in a.shape)]


def _window(a: np.ndarray, pad: int, shifts: Optional[Dict[int, int]] = None) -> np.ndarray:
    """Interior block of a padded array, displaced by `shifts` along chosen axes"""
    shifts = shifts or {}
    index = []
    for axis, size in enumerate(a.shape):
        s = shifts.get(axis, 0)
        index.append(slice(pad + s, size - pad + s))
    return a[tuple(index)]


def _floats(offsets: Sequence[int], weights: Sequence[Fraction]) -> Weights:
    return tuple((p, float(w)) for p, w in zip(offsets, weights) if w)


def _apply(a: np.ndarray, pad: int, axis: int, weights: Weights) -> np.ndarray:
    out = None
    for p, w in weights:
        term = w * _window(a, pad, {axis: p})
        out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

class SecondDerivativeOperator:
    """Common interface of the viscous operators"""

    scheme: SchemeId
    halo: int

    def straight(self, phi: np.ndarray, mu: np.ndarray, dx: float, axis: int, pad: int) -> np.ndarray:
        raise NotImplementedError

    def mixed(self, phi: np.ndarray, mu: np.ndarray, d_outer: float, d_inner: float,
              outer_axis: int, inner_axis: int, pad: int) -> np.ndarray:
        raise NotImplementedError

    def _check_pad(self, phi: np.ndarray, mu: np.ndarray, pad: int) -> None:
        if pad < self.halo:
            raise FieldShapeError(f"{self.scheme.name} needs {self.halo} ghost layers, got {pad}")
        if np.shape(mu) != np.shape(phi):
            raise FieldShapeError(f"viscosity shape {np.shape(mu)} does not match field shape {np.shape(phi)}")
        if any(size <= 2 * pad for size in phi.shape):
            raise FieldShapeError(f"padded shape {phi.shape} leaves no interior for {pad} ghost layers")


def _inner_gradient(phi: np.ndarray, g: Sequence[float], d_inner: float, axis: int) -> np.ndarray:
    """Nodal central derivative along `axis`; the outermost len(g) layers stay zero"""
    reach = len(g)
    out = np.zeros_like(phi)
    n = phi.shape[axis]
    target = [slice(None)] * phi.ndim
    target[axis] = slice(reach, n - reach)
    acc = None
    for p, w in enumerate(g, start=1):
        fwd = [slice(None)] * phi.ndim
        bwd = [slice(None)] * phi.ndim
        fwd[axis] = slice(reach + p, n - reach + p)
        bwd[axis] = slice(reach - p, n - reach - p)
        term = w * (phi[tuple(fwd)] - phi[tuple(bwd)])
        acc = term if acc is None else acc + term
    out[tuple(target)] = acc / d_inner
    return out


class MidpointOperator(SecondDerivativeOperator):
    """
    Conservative midpoint schemes (Base and Opti).

    Straight terms take midpoint derivatives from the scheme stencils; mixed
    terms interpolate nodal inner derivatives to the midpoints, adding the
    filter penalty on phi for Opti schemes. The viscosity is interpolated to
    the midpoints with the interpolation weights alone.
    """

    def __init__(self, scheme: SchemeId, straight_coeffs: Optional[SchemeCoefficients] = None,
                 filter_penalty: bool = True):
        if scheme.variant not in (Variant.BASE, Variant.OPTI):
            raise UnsupportedSchemeError(f"{scheme.name} is not a midpoint scheme")
        self.scheme = scheme
        self.filter_penalty = filter_penalty
        self._straight = straight_coeffs or catalog(scheme.with_term(TermKind.STRAIGHT))
        self._mixed = catalog(scheme.with_term(TermKind.MIXED))
        self.halo = max(self._straight.halo, self._mixed.halo)
        self._straight_levels = self._levels(self._straight, use_stencils=True)
        self._mixed_levels = self._levels(self._mixed, use_stencils=False)
        self._nodal = tuple(float(g) for g in self._mixed.nodal_derivative)

    def _levels(self, coeffs: SchemeCoefficients, use_stencils: bool) -> List[dict]:
        levels = []
        for loc, factor in coeffs.outer.factors():
            level = {"factor": float(factor)}
            for side, signed in (("plus", loc), ("minus", -loc)):
                rule = coeffs.interpolation_at(signed)
                level[f"{side}_interp"] = _floats(rule.offsets, rule.interp_weights)
                if use_stencils:
                    stencil = coeffs.stencil_at(signed)
                    level[f"{side}_deriv"] = _floats(stencil.offsets, stencil.weights)
                elif self.filter_penalty:
                    level[f"{side}_filter"] = _floats(rule.offsets, rule.filter_weights)
                else:
                    level[f"{side}_filter"] = ()
            levels.append(level)
        return levels

    def straight(self, phi, mu, dx, axis=0, pad=None):
        pad = self.halo if pad is None else pad
        self._check_pad(phi, mu, pad)
        out = np.zeros(tuple(s - 2 * pad for s in phi.shape))
        for level in self._straight_levels:
            flux_plus = _apply(mu, pad, axis, level["plus_interp"]) * _apply(phi, pad, axis, level["plus_deriv"])
            flux_minus = _apply(mu, pad, axis, level["minus_interp"]) * _apply(phi, pad, axis, level["minus_deriv"])
            out += level["factor"] * (flux_plus - flux_minus)
        return out / (dx * dx)

    def mixed(self, phi, mu, d_outer, d_inner, outer_axis=0, inner_axis=1, pad=None):
        pad = self.halo if pad is None else pad
        if outer_axis == inner_axis:
            raise UnsupportedSchemeError("mixed derivative needs two distinct axes")
        self._check_pad(phi, mu, pad)
        grad = _inner_gradient(phi, self._nodal, d_inner, inner_axis)
        out = np.zeros(tuple(s - 2 * pad for s in phi.shape))
        for level in self._mixed_levels:
            fluxes = []
            for side in ("plus", "minus"):
                inner = _apply(grad, pad, outer_axis, level[f"{side}_interp"])
                if level[f"{side}_filter"]:
                    inner = inner + _apply(phi, pad, outer_axis, level[f"{side}_filter"]) / d_outer
                fluxes.append(_apply(mu, pad, outer_axis, level[f"{side}_interp"]) * inner)
            out += level["factor"] * (fluxes[0] - fluxes[1])
        return out / d_outer


class SuccessiveOperator(SecondDerivativeOperator):
    """Two successive nodal central first derivatives"""

    def __init__(self, order: int):
        self.scheme = SchemeId(order, Variant.VISBAL)
        self._g = tuple(float(g) for g in central_first_derivative(order))
        self.halo = 2 * len(self._g)

    def _derivative(self, a: np.ndarray, pad: int, axis: int, spacing: float) -> np.ndarray:
        out = None
        for p, w in enumerate(self._g, start=1):
            term = w * (_window(a, pad, {axis: p}) - _window(a, pad, {axis: -p}))
            out = term if out is None else out + term
        return out / spacing

    def straight(self, phi, mu, dx, axis=0, pad=None):
        pad = self.halo if pad is None else pad
        self._check_pad(phi, mu, pad)
        flux = mu * _inner_gradient(phi, self._g, dx, axis)
        return self._derivative(flux, pad, axis, dx)

    def mixed(self, phi, mu, d_outer, d_inner, outer_axis=0, inner_axis=1, pad=None):
        pad = self.halo if pad is None else pad
        if outer_axis == inner_axis:
            raise UnsupportedSchemeError("mixed derivative needs two distinct axes")
        self._check_pad(phi, mu, pad)
        flux = mu * _inner_gradient(phi, self._g, d_inner, inner_axis)
        return self._derivative(flux, pad, outer_axis, d_outer)


class AlphaDampingOperator(SecondDerivativeOperator):
    """
    Alpha-damping flux: averaged nodal gradients plus a jump penalty
    (alpha/2)(phi_R - phi_L)/dx on the reconstructed interface states.
    alpha = 8/3 gives a fourth-order scheme for constant viscosity.
    """

    INTERFACE_RULES = ("average", "fourth_order")

    def __init__(self, alpha: float = 8.0 / 3.0, interface: str = "average"):
        if interface not in self.INTERFACE_RULES:
            raise UnsupportedSchemeError(f"Unknown interface viscosity rule {interface!r}")
        self.scheme = SchemeId(4, Variant.NISHIKAWA)
        self.alpha = float(alpha)
        self.interface = interface
        self.halo = 2

    def _interface_mu(self, mu: np.ndarray, pad: int, axis: int, right: bool) -> np.ndarray:
        s = 0 if right else -1
        if self.interface == "average":
            return 0.5 * (_window(mu, pad, {axis: s}) + _window(mu, pad, {axis: s + 1}))
        return (9.0 / 16.0) * (_window(mu, pad, {axis: s}) + _window(mu, pad, {axis: s + 1})) \
            - (1.0 / 16.0) * (_window(mu, pad, {axis: s - 1}) + _window(mu, pad, {axis: s + 2}))

    def _flux(self, phi: np.ndarray, pad: int, axis: int, dx: float, s: int) -> np.ndarray:
        """Unscaled interface flux at j + s + 1/2"""
        left = _window(phi, pad, {axis: s})
        right = _window(phi, pad, {axis: s + 1})
        g_left = 0.5 * (right - _window(phi, pad, {axis: s - 1})) / dx
        g_right = 0.5 * (_window(phi, pad, {axis: s + 2}) - left) / dx
        phi_l = left + 0.5 * dx * g_left
        phi_r = right - 0.5 * dx * g_right
        return 0.5 * (g_left + g_right) + 0.5 * self.alpha * (phi_r - phi_l) / dx

    def straight(self, phi, mu, dx, axis=0, pad=None):
        pad = self.halo if pad is None else pad
        self._check_pad(phi, mu, pad)
        plus = self._interface_mu(mu, pad, axis, right=True) * self._flux(phi, pad, axis, dx, 0)
        minus = self._interface_mu(mu, pad, axis, right=False) * self._flux(phi, pad, axis, dx, -1)
        return (plus - minus) / dx

    def mixed(self, *args, **kwargs):
        raise UnsupportedSchemeError("alpha-damping is only defined for straight terms")


def operator_for(scheme: Union[SchemeId, str], filter_penalty: bool = True, alpha: float = 8.0 / 3.0,
                 interface: str = "fourth_order") -> SecondDerivativeOperator:
    """Operator instance for any scheme name or id"""
    if isinstance(scheme, str):
        scheme = SchemeId.parse(scheme)
    if scheme.variant is Variant.VISBAL:
        return SuccessiveOperator(scheme.order)
    if scheme.variant is Variant.NISHIKAWA:
        return AlphaDampingOperator(alpha=alpha, interface=interface)
    return MidpointOperator(scheme, filter_penalty=filter_penalty)


# ---------------------------------------------------------------------------
# Field-level entry points
# ---------------------------------------------------------------------------

def _viscosity(mu: Union[float, np.ndarray], shape: Tuple[int, ...]) -> np.ndarray:
    mu_arr = np.asarray(mu, dtype=float)
    if mu_arr.ndim == 0:
        return np.full(shape, float(mu_arr))
    if mu_arr.shape != shape:
        raise FieldShapeError(f"viscosity shape {mu_arr.shape} does not match field shape {shape}")
    return mu_arr


def _extend(phi: AnyField, mu: np.ndarray, pad: int) -> Tuple[np.ndarray, np.ndarray]:
    if phi.halo:
        if phi.halo < pad:
            raise FieldShapeError(f"field carries {phi.halo} ghost layers, operator needs {pad}")
        excess = phi.halo - pad
        return _trim(phi.values, excess), _trim(mu, excess)
    values, visc = phi.values, mu
    for axis, policy in enumerate(phi.boundaries):
        if not isinstance(policy, Periodic) and values.shape[axis] < pad:
            raise FieldShapeError(f"axis {axis} has {values.shape[axis]} nodes, stencil needs {pad}")
        values = ghost_fill(values, pad, policy, axis)
        # viscosity is a positive coefficient; odd reflection would flip its sign
        visc = ghost_fill(visc, pad, Neumann() if isinstance(policy, Dirichlet) else policy, axis)
    return values, visc


def _rewrap(template: AnyField, values: np.ndarray) -> AnyField:
    if isinstance(template, Field1D):
        return Field1D(values, template.dx, template.boundary)
    return Field2D(values, template.dx, template.dy, template.boundary_x, template.boundary_y)


def _resolve(scheme: Union[SchemeId, str, SecondDerivativeOperator], filter_penalty: bool = True
             ) -> SecondDerivativeOperator:
    if isinstance(scheme, SecondDerivativeOperator):
        return scheme
    return operator_for(scheme, filter_penalty=filter_penalty)


def straight_d2(phi: AnyField, mu: Union[float, np.ndarray],
                scheme: Union[SchemeId, str, SecondDerivativeOperator], axis: int = 0) -> AnyField:
    """Discrete d/dx(mu d(phi)/dx) along `axis`"""
    op = _resolve(scheme)
    if isinstance(scheme, SchemeId) and scheme.term is not TermKind.STRAIGHT:
        raise UnsupportedSchemeError(f"{scheme} is not a straight-term scheme")
    if axis >= phi.values.ndim:
        raise FieldShapeError(f"axis {axis} out of range for a {phi.values.ndim}D field")
    mu_arr = _viscosity(mu, phi.values.shape)
    values, visc = _extend(phi, mu_arr, op.halo)
    out = op.straight(values, visc, phi.spacings[axis], axis, op.halo)
    return _rewrap(phi, out)


def mixed_d2(phi: Field2D, mu: Union[float, np.ndarray],
             scheme: Union[SchemeId, str, SecondDerivativeOperator],
             outer_axis: int = 0, inner_axis: int = 1, filter_penalty: bool = True) -> Field2D:
    """Discrete d/d(outer)(mu d(phi)/d(inner))"""
    if not isinstance(phi, Field2D):
        raise FieldShapeError("mixed derivatives need a Field2D")
    if isinstance(scheme, SchemeId) and scheme.term is not TermKind.MIXED:
        raise UnsupportedSchemeError(f"{scheme} is not a mixed-term scheme")
    op = _resolve(scheme, filter_penalty=filter_penalty)
    mu_arr = _viscosity(mu, phi.values.shape)
    values, visc = _extend(phi, mu_arr, op.halo)
    out = op.mixed(values, visc, phi.spacings[outer_axis], phi.spacings[inner_axis],
                   outer_axis, inner_axis, op.halo)
    return _rewrap(phi, out)


def visbal_successive_d2(phi: Field1D, mu: Union[float, np.ndarray], order: int) -> Field1D:
    return straight_d2(phi, mu, SuccessiveOperator(order))


def nishikawa_alpha_d2(phi: Field1D, nu: float, alpha: Union[float, Fraction] = Fraction(8, 3),
                       interface: str = "average") -> AnyField:
    return straight_d2(phi, nu, AlphaDampingOperator(float(as_fraction(alpha)), interface))
