"""Lower bounds for quadrature rules with nonnegative weights.

Every bound comes from a majorant family s_y: nonnegative functions with
s_y(y) = h1(y) whose norms and integrals stay uniformly below those of h1.
The resulting constant C~ = min(||h1|| / alpha, I(h1) / beta) exceeds 1 and
drives the exponential growth of the information complexity.
"""

import logging
import math
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, model_validator

from .config import GRID_POINTS
from .errors import ParameterError, PropertyViolation, UnsupportedError
from .models import Certificate, SpaceKind, Theorem, conjugate_exponent
from .numerics import integrate_piecewise, maximize_1d
from .spaces import RELATIVE, require_decomposable

logger = logging.getLogger(__name__)

STRICT_SLACK = 1e-10
_CHECK_POINTS = 101


class SplineFamily(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    evaluate: Callable[[float, float], float]
    norm_of: Callable[[float], float]
    integral_of: Callable[[float], float]
    h1_at: Callable[[float], float]
    domain: tuple[float, float]
    norm_h1: float
    I_h1: float

    def check(self, n_points=_CHECK_POINTS):
        """Nonnegativity and interpolation at y, both on a grid."""
        grid = np.linspace(*self.domain, n_points)
        for y in grid:
            if abs(self.evaluate(y, y) - self.h1_at(y)) > 1e-10:
                raise PropertyViolation("interpolation", f"{self.name}: s_y(y) != h1(y) at y={y}")
            low = min(self.evaluate(y, x) for x in grid)
            if low < 0:
                raise PropertyViolation("nonnegativity", f"{self.name}: s_y takes the value {low} for y={y}")


class PositiveConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float
    norm_h1: float
    I_h1: float
    c_tilde: float
    details: dict[str, float] = {}

    @model_validator(mode="after")
    def _check(self):
        if not self.alpha < self.norm_h1 - STRICT_SLACK:
            raise ValueError(f"alpha={self.alpha} is not below ||h1||={self.norm_h1}")
        if not self.beta < self.I_h1 - STRICT_SLACK:
            raise ValueError(f"beta={self.beta} is not below I(h1)={self.I_h1}")
        expected = min(self.norm_h1 / self.alpha, self.I_h1 / self.beta)
        if abs(self.c_tilde - expected) > 1e-12 * expected or not self.c_tilde > 1:
            raise ValueError(f"c_tilde={self.c_tilde} must equal min(||h1||/alpha, I(h1)/beta) > 1")
        return self


def _constants(alpha, beta, norm_h1, I_h1, name, **details):
    if not alpha < norm_h1 - STRICT_SLACK or not beta < I_h1 - STRICT_SLACK:
        raise PropertyViolation(
            "majorant family",
            f"{name} is not a valid majorant family: alpha={alpha:.12g} vs ||h1||={norm_h1:.12g}, "
            f"beta={beta:.12g} vs I(h1)={I_h1:.12g}",
        )
    c_tilde = min(norm_h1 / alpha, I_h1 / beta)
    return PositiveConstants(alpha=alpha, beta=beta, norm_h1=norm_h1, I_h1=I_h1, c_tilde=c_tilde, details=details)


def constants_from_family(fam, grid_points=GRID_POINTS):
    fam.check()
    lo, hi = fam.domain
    alpha = maximize_1d(fam.norm_of, lo, hi, grid_points=grid_points).value
    beta = maximize_1d(fam.integral_of, lo, hi, grid_points=grid_points).value
    logger.debug("%s: alpha=%.12g beta=%.12g", fam.name, alpha, beta)
    return _constants(alpha, beta, fam.norm_h1, fam.I_h1, fam.name)


# --- Polynomials of degree <= 2 ---

def _require_finite_q(q):
    if math.isinf(q):
        raise UnsupportedError("positive-rule bounds are only available for q < inf")
    if not q > 1:
        raise ParameterError(f"q must lie in (1, inf), got {q}")


def p2_norm(poly, q):
    """(sum_k ||D^k poly||_q^q)^(1/q) over [0,1] for a polynomial of degree <= 2."""
    _require_finite_q(q)
    total = 0.0
    for k in range(3):
        term = poly.deriv(k) if k else poly
        roots = [float(z.real) for z in np.atleast_1d(term.roots()) if abs(z.imag) < 1e-14 and 0 < z.real < 1]
        total += integrate_piecewise(lambda x, term=term: abs(term(x)) ** q, [0.0, *roots, 1.0], RELATIVE)
    return total ** (1.0 / q)


def p2_norm_bound(c, q):
    """Upper bound on ||1 - c(y - .)^2|| valid for every y."""
    _require_finite_q(q)
    return (1.0 - c / 12.0 + (2.0 * c) ** q * (q + 2.0) / (q + 1.0)) ** (1.0 / q)


def p2_ctilde_at(c, q):
    return 1.0 / p2_norm_bound(c, q)


def p2_family(c, q, norm="quadrature"):
    if not 0 < c < 0.5:
        raise ParameterError(f"c must lie in (0, 1/2), got {c}")
    _require_finite_q(q)
    if norm not in ("quadrature", "bound"):
        raise ParameterError(f"norm must be 'quadrature' or 'bound', got {norm!r}")

    def polynomial(y):
        return Polynomial([1.0 - c * y * y, 2.0 * c * y, -c])

    if norm == "bound":
        bound = p2_norm_bound(c, q)

        def norm_of(_y):
            return bound
    else:
        def norm_of(y):
            return p2_norm(polynomial(y), q)

    return SplineFamily(
        name=f"P2 majorant c={c} q={q}",
        evaluate=lambda y, x: 1.0 - c * (y - x) ** 2,
        norm_of=norm_of,
        integral_of=lambda y: 1.0 - c * (y * y - y + 1.0 / 3.0),
        h1_at=lambda _y: 1.0,
        domain=(0.0, 1.0),
        norm_h1=1.0,
        I_h1=1.0,
    )


def p2_constants(q):
    """Constants at the c maximizing 1/p2_norm_bound(c, q), from the closed forms."""
    _require_finite_q(q)
    log_u = (-math.log(12.0) - q * math.log(2.0) + math.log(q + 1.0) - math.log(q + 2.0)) / (q - 1.0)
    u_q = math.exp(log_u)
    c_star = math.exp(log_u - math.log(q) / (q - 1.0))
    bound = 1.0 - c_star / 12.0 + math.exp(q * math.log(2.0 * c_star)) * (q + 2.0) / (q + 1.0)
    return _constants(
        bound ** (1.0 / q),
        1.0 - c_star / 12.0,
        1.0,
        1.0,
        f"P2 majorant q={q}",
        u_q=u_q,
        c_star=c_star,
    )


# --- Decomposition route ---

def _grid_min(fn, domain, n_points=1001):
    return min(fn(x) for x in np.linspace(*domain, n_points))


def dp_plus_constants(dec, q):
    require_decomposable(dec)
    _require_finite_q(q)
    if abs(q - dec.q) > 1e-12:
        raise ParameterError(f"q={q} does not match the decomposition's q={dec.q}")
    if dec.norm_fn is None or dec.d_part0 is None:
        raise UnsupportedError(f"{dec.label} carries no norm evaluator")
    for name, part in (("smooth", dec.h1_smooth), ("part0", dec.h1_part0), ("part1", dec.h1_part1)):
        low = _grid_min(part, dec.domain)
        if low < 0:
            raise PropertyViolation("DP1+", f"{name} takes the negative value {low}")
    if not (dec.I0 > 0 and dec.I1 > 0):
        raise PropertyViolation("DP3+", f"part integrals must be positive, got I0={dec.I0}, I1={dec.I1}")

    def side(part, d_part):
        return dec.norm_fn(lambda x: dec.h1_smooth(x) + part(x), lambda x: dec.d_smooth(x) + d_part(x))

    norm0 = side(dec.h1_part0, dec.d_part0)
    norm1 = side(dec.h1_part1, dec.d_part1)
    alpha = max(norm0, norm1)
    if not alpha < dec.norm_h1:
        raise PropertyViolation("DP4+", f"max side norm {alpha} is not below ||h1||={dec.norm_h1}")
    beta = dec.alpha1 + max(dec.I0, dec.I1)
    return _constants(alpha, beta, dec.norm_h1, dec.I_h1, dec.label, norm_part0=norm0, norm_part1=norm1)


def dp_plus_family(dec):
    """s_y = smooth part plus the part on y's side of the decomposition point."""
    consts = dp_plus_constants(dec, dec.q)
    a = dec.a
    norm0, norm1 = consts.details["norm_part0"], consts.details["norm_part1"]

    def evaluate(y, x):
        part = dec.h1_part0 if y <= a else dec.h1_part1
        return dec.h1_smooth(x) + part(x)

    return SplineFamily(
        name=f"DP+ majorant of {dec.label}",
        evaluate=evaluate,
        norm_of=lambda y: norm0 if y <= a else norm1,
        integral_of=lambda y: dec.alpha1 + (dec.I0 if y <= a else dec.I1),
        h1_at=dec.h1,
        domain=dec.domain,
        norm_h1=dec.norm_h1,
        I_h1=dec.I_h1,
    )


def w1_closed_form_cp(p, a):
    q = conjugate_exponent(p)
    _require_finite_q(q)
    if not 0 < a < 1:
        raise ParameterError(f"a must lie in (0, 1), got {a}")
    left, right = a ** (p + 1), (1.0 - a) ** (p + 1)
    return ((p + 1 + left + right) / (p + 1 + max(left, right))) ** (1.0 / q)


def w1_chord_family(spec):
    """Piecewise linear majorants: flat at h1(y) out to y, then the chord down to 1 at a."""
    if spec.kind != SpaceKind.NO_ANCHOR_SOBOLEV:
        raise ParameterError("the chord family is defined for no-anchor-sobolev spaces")
    p, q, a = spec.p, spec.q, spec.a
    _require_finite_q(q)

    def lift(y):
        if y < a:
            return (a**p - y**p) / p
        return ((1.0 - a) ** p - (1.0 - y) ** p) / p

    def evaluate(y, x):
        D = lift(y)
        if y < a:
            if x < y:
                return 1.0 + D
            return 1.0 + D * (a - x) / (a - y) if x < a else 1.0
        if x > y:
            return 1.0 + D
        return 1.0 + D * (x - a) / (y - a) if x > a else 1.0

    def norm_of(y):
        width = abs(a - y)
        if width == 0:
            return 1.0
        return (1.0 + lift(y) ** q * width ** (1.0 - q)) ** (1.0 / q)

    def integral_of(y):
        D = lift(y)
        flat = y if y < a else 1.0 - y
        return 1.0 + flat * D + abs(a - y) * D / 2.0

    spread = (a ** (p + 1) + (1.0 - a) ** (p + 1)) / (p + 1)
    return SplineFamily(
        name=f"chord majorant a={a} q={q}",
        evaluate=evaluate,
        norm_of=norm_of,
        integral_of=integral_of,
        h1_at=lambda y: 1.0 + lift(y),
        domain=(0.0, 1.0),
        norm_h1=(1.0 + spread) ** (1.0 / q),
        I_h1=1.0 + spread,
    )


def positive_rule_bound(consts, N, d):
    """Lower bound for every rule with N nodes and nonnegative weights."""
    if N < 0 or d < 1:
        raise ParameterError(f"need N >= 0 and d >= 1, got N={N}, d={d}")
    if N == 0:
        normalized = 0.5
    else:
        log_n = math.log(N)
        spent = math.exp(min(log_n + d * math.log(consts.beta / consts.I_h1), 700.0))
        crowd = math.exp(min(log_n + d * math.log(consts.alpha / consts.norm_h1), 700.0))
        normalized = max(0.0, 1.0 - spent) / (2.0 * max(1.0, crowd))
    initial = (consts.I_h1 / consts.norm_h1) ** d
    return Certificate(
        theorem=Theorem.THM5,
        bound_normalized=normalized,
        initial_error=initial,
        bound_absolute=normalized * initial,
        n_nodes=N,
        d=d,
        constants_used={"alpha": consts.alpha, "beta": consts.beta, "c_tilde": consts.c_tilde},
    )
