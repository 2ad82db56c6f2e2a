"""
Scheme identities and exact rational coefficients for the midpoint-based
fourth and sixth order second-derivative schemes (ME4/ME6, Base and Opti),
plus the Taylor-series derivation of the optimisable coefficient families.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import UnsupportedSchemeError

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int, str, float]

HALF = Fraction(1, 2)


class Variant(str, Enum):
    BASE = "base"
    OPTI = "opti"
    VISBAL = "visbal"
    NISHIKAWA = "nishikawa"


class TermKind(str, Enum):
    STRAIGHT = "straight"
    MIXED = "mixed"


def as_fraction(value: Rational) -> Fraction:
    """Exact conversion; floats go through their shortest repr so 0.01 -> 1/100"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a rational value")
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class SchemeId:
    order: int
    variant: Variant
    term: TermKind = TermKind.STRAIGHT

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "term", TermKind(self.term))
        if self.order not in (4, 6):
            raise UnsupportedSchemeError(f"Scheme order must be 4 or 6, got {self.order}")
        if self.variant is Variant.NISHIKAWA and (self.order != 4 or self.term is not TermKind.STRAIGHT):
            raise UnsupportedSchemeError("Nishikawa alpha-damping is only defined for order 4 straight terms")

    @property
    def name(self) -> str:
        if self.variant is Variant.VISBAL:
            return f"Visbal-E{self.order}"
        if self.variant is Variant.NISHIKAWA:
            return "Nishikawa-4"
        return f"ME{self.order}-{self.variant.value.capitalize()}"

    @property
    def slug(self) -> str:
        return self.name.lower()

    def with_term(self, term: Union[TermKind, str]) -> "SchemeId":
        return SchemeId(self.order, self.variant, TermKind(term))

    @classmethod
    def parse(cls, text: str, term: Union[TermKind, str] = TermKind.STRAIGHT) -> "SchemeId":
        """Accepts names like 'me4-opti', 'ME6-Base', 'visbal-e4', 'nishikawa'"""
        key = text.strip().lower().replace("_", "-")
        if key in ("nishikawa", "nishikawa-4", "nishikawa4"):
            return cls(4, Variant.NISHIKAWA, TermKind(term))
        if key.startswith("visbal"):
            digits = key.replace("visbal", "").replace("-", "").replace("e", "")
            if digits in ("4", "6"):
                return cls(int(digits), Variant.VISBAL, TermKind(term))
        if key.startswith("me") and "-" in key:
            head, tail = key.split("-", 1)
            if head[2:] in ("4", "6") and tail in (Variant.BASE.value, Variant.OPTI.value):
                return cls(int(head[2:]), Variant(tail), TermKind(term))
        raise UnsupportedSchemeError(f"Unknown scheme name: {text!r}")

    def __str__(self) -> str:
        return f"{self.name} ({self.term.value})"


@dataclass(frozen=True)
class OuterWeights:
    a_star: Fraction
    b_star: Fraction
    c_star: Fraction

    def factors(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        """(location, weight / (2*location)) for each non-zero flux-difference level"""
        levels = []
        for m, weight in enumerate((self.a_star, self.b_star, self.c_star), start=1):
            if weight:
                levels.append((Fraction(2 * m - 1, 2), weight / (2 * m - 1)))
        return tuple(levels)


@dataclass(frozen=True)
class MidpointStencil:
    """First-derivative weights (per grid spacing) at node j + location"""
    location: Fraction
    offsets: Tuple[int, ...]
    weights: Tuple[Fraction, ...]
    leading_error: Optional[Fraction]
    formal_order: int

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(zip(self.offsets, self.weights))

    def moment(self, q: int) -> Fraction:
        """Sum of w_p * s**q / q! with s measured from the midpoint"""
        return sum(
            (w * (p - self.location) ** q for p, w in zip(self.offsets, self.weights)),
            Fraction(0),
        ) / factorial(q)

    def mirrored(self) -> "MidpointStencil":
        return MidpointStencil(
            location=-self.location,
            offsets=tuple(-p for p in reversed(self.offsets)),
            weights=tuple(-w for w in reversed(self.weights)),
            leading_error=self.leading_error,
            formal_order=self.formal_order,
        )

    @property
    def reach(self) -> int:
        return max(abs(p) for p, w in zip(self.offsets, self.weights) if w)


@dataclass(frozen=True)
class InterpolationRule:
    """Midpoint interpolation weights plus the mixed-term filter penalty weights"""
    location: Fraction
    offsets: Tuple[int, ...]
    interp_weights: Tuple[Fraction, ...]
    filter_weights: Tuple[Fraction, ...]

    def mirrored(self) -> "InterpolationRule":
        return InterpolationRule(
            location=-self.location,
            offsets=tuple(-p for p in reversed(self.offsets)),
            interp_weights=tuple(reversed(self.interp_weights)),
            filter_weights=tuple(-w for w in reversed(self.filter_weights)),
        )

    @property
    def has_filter(self) -> bool:
        return any(self.filter_weights)

    @property
    def reach(self) -> int:
        used = [p for p, c, f in zip(self.offsets, self.interp_weights, self.filter_weights) if c or f]
        return max(abs(p) for p in used)


@dataclass(frozen=True)
class SchemeCoefficients:
    """Everything needed to assemble one scheme; negative locations follow the mirror rule"""
    scheme: SchemeId
    outer: OuterWeights
    stencils: Tuple[MidpointStencil, ...]
    interpolation: Tuple[InterpolationRule, ...]
    nodal_derivative: Tuple[Fraction, ...] = ()

    @property
    def locations(self) -> Tuple[Fraction, ...]:
        return tuple(loc for loc, _ in self.outer.factors())

    def stencil_at(self, location: Rational) -> MidpointStencil:
        loc = as_fraction(location)
        for stencil in self.stencils:
            if stencil.location == abs(loc):
                return stencil if loc > 0 else stencil.mirrored()
        raise UnsupportedSchemeError(f"{self.scheme.name} has no midpoint stencil at {loc}")

    def interpolation_at(self, location: Rational) -> InterpolationRule:
        loc = as_fraction(location)
        for rule in self.interpolation:
            if rule.location == abs(loc):
                return rule if loc > 0 else rule.mirrored()
        raise UnsupportedSchemeError(f"{self.scheme.name} has no interpolation rule at {loc}")

    @property
    def halo(self) -> int:
        """Ghost width needed on each side of the operated axis"""
        reaches = [s.reach for s in self.stencils] + [r.reach for r in self.interpolation]
        reaches.append(len(self.nodal_derivative))
        return max(reaches)


def _row(text: str) -> Tuple[Fraction, ...]:
    return tuple(Fraction(item) for item in text.split())


def outer_weights(order: int) -> OuterWeights:
    if order == 4:
        return OuterWeights(Fraction(9, 8), Fraction(-1, 8), Fraction(0))
    if order == 6:
        return OuterWeights(Fraction(75, 64), Fraction(-25, 128), Fraction(3, 128))
    raise UnsupportedSchemeError(f"Outer weights are defined for orders 4 and 6, got {order}")


def _valid_locations(order: int) -> Tuple[Fraction, ...]:
    return tuple(loc for loc, _ in outer_weights(order).factors())


def _check_location(order: int, location: Rational) -> Fraction:
    loc = as_fraction(location)
    if abs(loc) not in _valid_locations(order):
        raise UnsupportedSchemeError(
            f"Location {loc} is not a midpoint of the order-{order} scheme "
            f"(expected ±{', ±'.join(str(v) for v in _valid_locations(order))})"
        )
    return loc


def central_first_derivative(order: int) -> Tuple[Fraction, ...]:
    """Antisymmetric nodal weights g_1..g_r: d/dx ~ sum g_p (f[j+p] - f[j-p]) / dx"""
    if order == 4:
        return (Fraction(2, 3), Fraction(-1, 12))
    if order == 6:
        return (Fraction(3, 4), Fraction(-3, 20), Fraction(1, 60))
    raise UnsupportedSchemeError(f"Central first derivative is defined for orders 4 and 6, got {order}")


# Offset between the tabulated leading-error datum and the Taylor-pinned coefficient.
_ERROR_DATUM = {
    (4, Fraction(1, 2)): Fraction(2, 3125),
    (4, Fraction(3, 2)): Fraction(31, 10000),
}


def leading_error_datum(order: int, location: Rational) -> Fraction:
    loc = abs(_check_location(order, location))
    return _ERROR_DATUM.get((order, loc), Fraction(0))


def _solve_exact(matrix: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Gauss-Jordan elimination in rational arithmetic"""
    size = len(rhs)
    aug = [list(row) + [value] for row, value in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise ArithmeticError("singular Taylor system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        lead = aug[col][col]
        aug[col] = [v / lead for v in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [aug[r][size] for r in range(size)]


@lru_cache(maxsize=4096)
def _family(order: int, location: Fraction, psi: Fraction) -> MidpointStencil:
    half_width = 3 if order == 4 else 4
    offsets = tuple(range(-half_width, half_width + 1))
    formal_order = 2 * half_width - 1
    pinned = formal_order + 1
    t = psi - leading_error_datum(order, location)

    matrix: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for m in range(formal_order + 1):
        matrix.append([Fraction(p - location) ** m / factorial(m) for p in offsets])
        rhs.append(Fraction(1) if m == 1 else Fraction(0))
    matrix.append([Fraction(p - location) ** pinned / factorial(pinned) for p in offsets])
    rhs.append(-t)

    weights = tuple(_solve_exact(matrix, rhs))
    return MidpointStencil(location, offsets, weights, psi, formal_order)


def derive_midpoint_family(order: int, location: Rational, leading_error: Rational) -> MidpointStencil:
    """
    Midpoint first-derivative stencil of the optimisable family.

    Matches the Taylor moments 0..formal_order of d/dx at j + location on the
    full stencil (7 points for order 4, 9 for order 6) and pins the next
    moment to the leading-error coefficient. Negative locations are the mirror
    image with negated weights.
    """
    if order not in (4, 6):
        raise UnsupportedSchemeError(f"Coefficient families exist for orders 4 and 6, got {order}")
    loc = _check_location(order, location)
    psi = as_fraction(leading_error)
    stencil = _family(order, abs(loc), psi)
    return stencil if loc > 0 else stencil.mirrored()


def baseline_midpoint(order: int, location: Rational) -> MidpointStencil:
    """Sliding central midpoint derivative reusing the outer weights"""
    loc = _check_location(order, location)
    outer = outer_weights(order)
    shift = int(abs(loc) - HALF)
    weights: Dict[int, Fraction] = {}
    for m, coeff in enumerate((outer.a_star, outer.b_star, outer.c_star), start=1):
        if not coeff:
            continue
        scaled = coeff / (2 * m - 1)
        right, left = m + shift, 1 - m + shift
        weights[right] = weights.get(right, Fraction(0)) + scaled
        weights[left] = weights.get(left, Fraction(0)) - scaled
    offsets = tuple(sorted(weights))
    stencil = MidpointStencil(abs(loc), offsets, tuple(weights[p] for p in offsets), None, order)
    return stencil if loc > 0 else stencil.mirrored()


def base_interpolation(order: int, location: Rational) -> InterpolationRule:
    """Standard central midpoint interpolation, slid to the requested location"""
    loc = _check_location(order, location)
    if order == 4:
        pairs = ((0, 1, Fraction(9, 16)), (-1, 2, Fraction(-1, 16)))
    else:
        pairs = ((0, 1, Fraction(75, 128)), (-1, 2, Fraction(-25, 256)), (-2, 3, Fraction(3, 256)))
    shift = int(abs(loc) - HALF)
    weights: Dict[int, Fraction] = {}
    for left, right, coeff in pairs:
        weights[left + shift] = coeff
        weights[right + shift] = coeff
    offsets = tuple(sorted(weights))
    rule = InterpolationRule(
        location=abs(loc),
        offsets=offsets,
        interp_weights=tuple(weights[p] for p in offsets),
        filter_weights=tuple(Fraction(0) for _ in offsets),
    )
    return rule if loc > 0 else rule.mirrored()


# Optimised leading-error coefficients (psi for order 4, theta for order 6).
OPTIMAL_LEADING_ERRORS = {
    4: (Fraction(-1, 100), Fraction(0)),
    6: (Fraction(3, 1250), Fraction(-1, 1250), Fraction(3, 625)),
}

_OPTI_STRAIGHT = {
    4: (
        _row("133/12500 -27411/400000 53929/240000 -55387/40000 53259/40000 -154733/1200000 6131/400000"),
        _row("623/80000 -4113/80000 561/4000 -3863/24000 -15381/16000 84387/80000 -3503/120000"),
    ),
    6: (
        _row("-3/1250 89141/4480000 -49133/640000 411173/1920000 -174629/128000 851641/640000 "
             "-282149/1920000 18413/640000 -13877/4480000"),
        _row("459/4480000 -547/4480000 -1289/640000 2703/640000 18379/384000 -738047/640000 "
             "742461/640000 -820391/13440000 9167/2240000"),
        # Last entry corrected to -400637/13440000 (zero-sum and Taylor consistent).
        _row("-3377/2240000 36157/4480000 -6141/640000 -20593/640000 16367/128000 -296029/1920000 "
             "-618391/640000 4737907/4480000 -400637/13440000"),
    ),
}

_OPTI_INTERP = {
    4: (
        _row("-83/384000 1473/64000 -21363/128000 72409/96000 49497/128000 1129/64000 -5567/384000"),
        _row("811/128000 -3151/64000 4469/25600 -2529/6400 4661/5120 23977/64000 -2753/128000"),
    ),
    6: (
        _row("-661/819200 263/512000 31573/1024000 -91107/512000 302761/409600 43093/102400 "
             "6429/1024000 -12349/512000 21511/4096000"),
        _row("-7673/4096000 9179/512000 -15959/204800 106337/512000 -165879/409600 456421/512000 "
             "408037/1024000 -3357/102400 8279/4096000"),
        _row("8279/4096000 -10273/512000 92869/1024000 -126827/512000 37877/81920 -337743/512000 "
             "1086701/1024000 166763/512000 -59769/4096000"),
    ),
}

_OPTI_FILTER = {
    4: (
        _row("1/20 -3/10 3/4 -1 3/4 -3/10 1/20"),
        _row("-1/2000 3/1000 -3/400 1/100 -3/400 3/1000 -1/2000"),
    ),
    6: (
        _row("-13/1000 13/125 -91/250 91/125 -91/100 91/125 -91/250 13/125 -13/1000"),
        _row("-1/2000 1/250 -7/500 7/250 -7/200 7/250 -7/500 1/250 -1/2000"),
        _row("-1/2000 1/250 -7/500 7/250 -7/200 7/250 -7/500 1/250 -1/2000"),
    ),
}


def _opti_offsets(order: int) -> Tuple[int, ...]:
    half_width = 3 if order == 4 else 4
    return tuple(range(-half_width, half_width + 1))


def _opti_interpolation(order: int, with_filter: bool) -> Tuple[InterpolationRule, ...]:
    offsets = _opti_offsets(order)
    rules = []
    for loc, interp, filt in zip(_valid_locations(order), _OPTI_INTERP[order], _OPTI_FILTER[order]):
        rules.append(InterpolationRule(
            location=loc,
            offsets=offsets,
            interp_weights=interp,
            filter_weights=filt if with_filter else tuple(Fraction(0) for _ in offsets),
        ))
    return tuple(rules)


def catalog(scheme: SchemeId) -> SchemeCoefficients:
    """Hard-coded coefficient set of a midpoint scheme"""
    if scheme.variant not in (Variant.BASE, Variant.OPTI):
        raise UnsupportedSchemeError(
            f"{scheme.name} is a reference scheme without midpoint coefficients; "
            f"use central_first_derivative({scheme.order})"
        )
    order = scheme.order
    outer = outer_weights(order)
    locations = _valid_locations(order)
    mixed = scheme.term is TermKind.MIXED

    if scheme.variant is Variant.BASE:
        stencils = () if mixed else tuple(baseline_midpoint(order, loc) for loc in locations)
        interpolation = tuple(base_interpolation(order, loc) for loc in locations)
    else:
        offsets = _opti_offsets(order)
        if mixed:
            stencils = ()
        else:
            stencils = tuple(
                MidpointStencil(loc, offsets, weights, psi, len(offsets) - 2)
                for loc, weights, psi in zip(locations, _OPTI_STRAIGHT[order], OPTIMAL_LEADING_ERRORS[order])
            )
        interpolation = _opti_interpolation(order, with_filter=mixed)

    nodal = central_first_derivative(order) if mixed else ()
    return SchemeCoefficients(scheme, outer, stencils, interpolation, nodal)


def parametric_coefficients(order: int, leading_errors: Sequence[Rational]) -> SchemeCoefficients:
    """Straight-term coefficient set of an arbitrary family member"""
    locations = _valid_locations(order)
    if len(leading_errors) != len(locations):
        raise UnsupportedSchemeError(
            f"Order {order} family takes {len(locations)} leading-error coefficients, got {len(leading_errors)}"
        )
    stencils = tuple(derive_midpoint_family(order, loc, psi) for loc, psi in zip(locations, leading_errors))
    return SchemeCoefficients(
        SchemeId(order, Variant.OPTI, TermKind.STRAIGHT),
        outer_weights(order),
        stencils,
        _opti_interpolation(order, with_filter=False),
    )


def _convolve(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for p, wa in a.items():
        for q, wb in b.items():
            out[p + q] = out.get(p + q, Fraction(0)) + wa * wb
    return out


def _antisymmetric(weights: Iterable[Fraction]) -> Dict[int, Fraction]:
    full: Dict[int, Fraction] = {}
    for p, g in enumerate(weights, start=1):
        full[p] = g
        full[-p] = -g
    return full


def nishikawa_weights(alpha: Rational = Fraction(8, 3)) -> Dict[int, Fraction]:
    a = as_fraction(alpha)
    return {
        -2: (1 - a / 2) / 4,
        -1: a / 2,
        0: -a - (1 - a / 2) / 2,
        1: a / 2,
        2: (1 - a / 2) / 4,
    }


def assembled_weights(scheme: Union[SchemeId, SchemeCoefficients]) -> Dict[int, Fraction]:
    """Constant-coefficient second-derivative weights on a unit grid"""
    if isinstance(scheme, SchemeId):
        if scheme.term is not TermKind.STRAIGHT:
            raise UnsupportedSchemeError("Assembled nodal weights exist only for straight terms")
        if scheme.variant is Variant.VISBAL:
            g = _antisymmetric(central_first_derivative(scheme.order))
            return {p: w for p, w in sorted(_convolve(g, g).items()) if w}
        if scheme.variant is Variant.NISHIKAWA:
            return nishikawa_weights()
        coeffs = catalog(scheme)
    else:
        coeffs = scheme

    weights: Dict[int, Fraction] = {}
    for loc, factor in coeffs.outer.factors():
        for sign, stencil in ((1, coeffs.stencil_at(loc)), (-1, coeffs.stencil_at(-loc))):
            for p, w in zip(stencil.offsets, stencil.weights):
                weights[p] = weights.get(p, Fraction(0)) + sign * factor * w
    return {p: w for p, w in sorted(weights.items()) if w}


def family_combination(order: int, leading_errors: Sequence[Rational]) -> Fraction:
    """The only combination of leading-error coefficients the assembled scheme depends on"""
    locations = _valid_locations(order)
    pinned = [as_fraction(psi) - leading_error_datum(order, loc) for loc, psi in zip(locations, leading_errors)]
    if order == 4:
        return 27 * pinned[0] - pinned[1]
    return 2250 * pinned[0] - 125 * pinned[1] + 9 * pinned[2]


def baseline_equivalent_psi(order: int = 4) -> Tuple[Fraction, Fraction]:
    """(psi_1/2, 0) whose assembled weights coincide with ME4-Base"""
    if order != 4:
        raise UnsupportedSchemeError("Only the order-4 Base scheme lies inside the optimisable family")
    target = assembled_weights(SchemeId(4, Variant.BASE))[3]
    at_zero = assembled_weights(parametric_coefficients(4, (0, 0))).get(3, Fraction(0))
    at_one = assembled_weights(parametric_coefficients(4, (1, 0))).get(3, Fraction(0))
    psi_half = (target - at_zero) / (at_one - at_zero)
    return psi_half, Fraction(0)


def stencil_record(scheme: SchemeId, stencil: MidpointStencil) -> dict:
    return {
        "scheme": scheme.slug,
        "location": str(stencil.location),
        "offsets": list(stencil.offsets),
        "numerators": [w.numerator for w in stencil.weights],
        "denominators": [w.denominator for w in stencil.weights],
    }


def interpolation_record(scheme: SchemeId, rule: InterpolationRule) -> dict:
    return {
        "scheme": scheme.slug,
        "location": str(rule.location),
        "offsets": list(rule.offsets),
        "numerators": [w.numerator for w in rule.interp_weights],
        "denominators": [w.denominator for w in rule.interp_weights],
        "filter_numerators": [w.numerator for w in rule.filter_weights],
        "filter_denominators": [w.denominator for w in rule.filter_weights],
    }


def coefficient_dump(scheme: SchemeId) -> List[dict]:
    """JSON-ready records of every stencil and interpolation row of a scheme"""
    if scheme.variant in (Variant.VISBAL, Variant.NISHIKAWA):
        weights = (
            nishikawa_weights() if scheme.variant is Variant.NISHIKAWA
            else _antisymmetric(central_first_derivative(scheme.order))
        )
        offsets = sorted(weights)
        return [{
            "scheme": scheme.slug,
            "location": "0",
            "offsets": offsets,
            "numerators": [weights[p].numerator for p in offsets],
            "denominators": [weights[p].denominator for p in offsets],
        }]
    coeffs = catalog(scheme)
    records = []
    for loc in coeffs.locations:
        for signed in (loc, -loc):
            if coeffs.stencils:
                records.append(stencil_record(scheme, coeffs.stencil_at(signed)))
            records.append(interpolation_record(scheme, coeffs.interpolation_at(signed)))
    logger.debug("dumped %d coefficient records for %s", len(records), scheme)
    return records
