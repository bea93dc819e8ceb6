"""Univariate spaces on [0,1]: worst-case functions, their decompositions and norms."""

import logging
import math

import numpy as np

from .config import SUP_GRID_POINTS
from .errors import NoDecomposablePartError, ParameterError, PropertyViolation, UnsupportedError
from .models import QuadSettings, SpaceKind, SpaceSpec, WcDecomposition
from .numerics import DEFAULT_SETTINGS, integrate, integrate_piecewise, maximize_1d

logger = logging.getLogger(__name__)

# Relative-accuracy quadrature for constants that can be many orders below 1
RELATIVE = QuadSettings(abs_tol=1e-300, rel_tol=1e-11)

FD_STEP = 1e-4


def _zero(_x):
    return 0.0


def _one(_x):
    return 1.0


def lq_norm(deriv, breakpoints, q, settings=RELATIVE):
    """L_q norm over the union of the pieces; sup norm when q is infinite."""
    pieces = list(zip(breakpoints[:-1], breakpoints[1:]))
    if math.isinf(q):
        return max(
            maximize_1d(lambda x: abs(deriv(x)), lo, hi, grid_points=SUP_GRID_POINTS).value
            for lo, hi in pieces
            if hi > lo
        )
    total = integrate_piecewise(lambda x: abs(deriv(x)) ** q, breakpoints, settings)
    return total ** (1.0 / q)


# --- Anchored Sobolev space W^r_{a,q}[0,1] ---

def _falling_products(r, p):
    """prod_{i=j}^{r-1} (rp - i) for j = 0..r-1."""
    rp = r * p
    return [math.prod(rp - i for i in range(j, r)) for j in range(r)]


def _anchored_parts(r, p, a):
    c0 = (-1) ** (r + 1) / math.factorial(r) ** (p - 1)
    rp = r * p
    prods = _falling_products(r, p)
    b = 1.0 - a

    def part0(t):
        if t > a:
            return 0.0
        s = (a**rp - t**rp) / prods[0]
        for j in range(1, r):
            s += (t - a) ** j * a ** (rp - j) / (math.factorial(j) * prods[j])
        return c0 * s

    def part1(t):
        if t < a:
            return 0.0
        s = (b**rp - (1.0 - t) ** rp) / prods[0]
        for j in range(1, r):
            s += (t - a) ** j * b ** (rp - j) * (-1) ** j / (math.factorial(j) * prods[j])
        return c0 * s

    scale = math.factorial(r) ** (p - 1)
    power = r * (p - 1)
    sign = (-1) ** r

    def d_part0(t):
        return sign * t**power / scale if t < a else 0.0

    def d_part1(t):
        return (1.0 - t) ** power / scale if t >= a else 0.0

    return part0, part1, d_part0, d_part1


def h1_derivative(spec):
    """Analytic r-th derivative of the anchored worst-case function."""
    if spec.kind != SpaceKind.ANCHORED_SOBOLEV:
        raise ParameterError("h1_derivative is defined for anchored-sobolev spaces")
    _, _, d0, d1 = _anchored_parts(spec.r, spec.p, spec.a)
    return lambda t: d0(t) + d1(t)


def closed_form_part_integrals(spec):
    """Integrals of both parts from the nested-product closed form (any r)."""
    if spec.kind != SpaceKind.ANCHORED_SOBOLEV:
        raise ParameterError("closed_form_part_integrals is defined for anchored-sobolev spaces")
    r, p, a = spec.r, spec.p, spec.a
    rp = r * p
    prods = _falling_products(r, p)
    bracket = rp / (rp + 1.0)
    for j in range(1, r):
        bracket += (-1) ** j * math.prod(rp - i for i in range(j)) / math.factorial(j + 1)
    c0 = (-1) ** (r + 1) / math.factorial(r) ** (p - 1)
    factor = c0 * bracket / prods[0]
    return factor * a ** (rp + 1), factor * (1.0 - a) ** (rp + 1)


def inv_alpha_closed_form(spec):
    if spec.kind != SpaceKind.ANCHORED_SOBOLEV:
        raise ParameterError("inv_alpha_closed_form needs an anchored-sobolev space")
    m = max(spec.a, 1.0 - spec.a)
    return 1.0 + (1.0 / m - 1.0) ** (spec.r * spec.p + 1)


def _anchored(spec):
    r, p, q, a = spec.r, spec.p, spec.q, spec.a
    part0, part1, d0, d1 = _anchored_parts(r, p, a)
    knots = [0.0, a, 1.0]

    def norm_fn(_value, deriv):
        return lq_norm(deriv, knots, q)

    if r == 1:
        I0 = a ** (p + 1) / (p + 1)
        I1 = (1.0 - a) ** (p + 1) / (p + 1)
    else:
        I0 = integrate(part0, 0.0, a, RELATIVE)
        I1 = integrate(part1, a, 1.0, RELATIVE)
    if not (I0 > 0 and I1 > 0):
        raise PropertyViolation("D3", f"part integrals must be positive, got I0={I0}, I1={I1}")

    norm_h1 = norm_fn(None, lambda t: d0(t) + d1(t))
    return WcDecomposition(
        label=f"W^{r}_(a={a},q={q})",
        r=r,
        q=q,
        p=p,
        a=a,
        domain=(0.0, 1.0),
        decomposable=True,
        has_smooth=False,
        h1=lambda t: part0(t) + part1(t),
        h1_part0=part0,
        h1_part1=part1,
        h1_smooth=_zero,
        d_part0=d0,
        d_part1=d1,
        d_smooth=_zero,
        norm_fn=norm_fn,
        I0=I0,
        I1=I1,
        I_smooth=0.0,
        norm_h1=norm_h1,
        alpha=max(I0, I1) / (I0 + I1),
        alpha1=0.0,
        alpha2=I0 + I1,
        alpha3=math.inf,
        initial_error_1d=(I0 + I1) / norm_h1,
    )


# --- W^1_q[0,1] without anchor ---

def _no_anchor(spec):
    p, q, a = spec.p, spec.q, spec.a
    if math.isinf(q):
        raise UnsupportedError("no-anchor-sobolev is only defined here for q < inf")
    part0, part1, d0, d1 = _anchored_parts(1, p, a)
    knots = [0.0, a, 1.0]

    def norm_fn(value, deriv):
        return (abs(value(a)) ** q + lq_norm(deriv, knots, q) ** q) ** (1.0 / q)

    I0 = a ** (p + 1) / (p + 1)
    I1 = (1.0 - a) ** (p + 1) / (p + 1)
    norm_h1 = (1.0 + I0 + I1) ** (1.0 / q)
    return WcDecomposition(
        label=f"W^1_(q={q}) split at {a}",
        r=1,
        q=q,
        p=p,
        a=a,
        domain=(0.0, 1.0),
        decomposable=True,
        has_smooth=True,
        h1=lambda t: 1.0 + part0(t) + part1(t),
        h1_part0=part0,
        h1_part1=part1,
        h1_smooth=_one,
        d_part0=d0,
        d_part1=d1,
        d_smooth=_zero,
        norm_fn=norm_fn,
        I0=I0,
        I1=I1,
        I_smooth=1.0,
        norm_h1=norm_h1,
        alpha=max(I0, I1) / (I0 + I1),
        alpha1=1.0,
        alpha2=I0 + I1,
        alpha3=I0 + I1,
        initial_error_1d=(1.0 + I0 + I1) / norm_h1,
    )


# --- Polynomials of degree <= 2 ---

def _poly2(spec):
    return WcDecomposition(
        label=f"P2 (q={spec.q})",
        r=spec.r,
        q=spec.q,
        p=spec.p,
        a=spec.a,
        domain=(0.0, 1.0),
        decomposable=False,
        has_smooth=True,
        h1=_one,
        h1_part0=_zero,
        h1_part1=_zero,
        h1_smooth=_one,
        I0=0.0,
        I1=0.0,
        I_smooth=1.0,
        norm_h1=1.0,
        alpha=math.nan,
        alpha1=1.0,
        alpha2=0.0,
        alpha3=0.0,
        initial_error_1d=1.0,
    )


_BUILDERS = {
    SpaceKind.ANCHORED_SOBOLEV: _anchored,
    SpaceKind.NO_ANCHOR_SOBOLEV: _no_anchor,
    SpaceKind.POLY2: _poly2,
}


def worst_case_function(spec):
    dec = _BUILDERS[spec.kind](spec)
    logger.debug("%s: I0=%.6g I1=%.6g norm=%.6g e(0,1)=%.6g", dec.label, dec.I0, dec.I1, dec.norm_h1, dec.initial_error_1d)
    return dec


def require_decomposable(dec):
    if not dec.decomposable:
        raise NoDecomposablePartError(f"{dec.label} has no decomposable part")
    return dec


def initial_error(spec, d):
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return worst_case_function(spec).initial_error_1d ** d


# --- q-property check ---

def _divided_difference(fn, x, k, lo, hi, step):
    if k == 0:
        return fn(x)
    idx = np.arange(k + 1)
    if x - k * step / 2 >= lo and x + k * step / 2 <= hi:
        offsets = (idx - k / 2) * step
    elif x + k * step <= hi:
        offsets = idx * step
    else:
        offsets = (idx - k) * step
    total = math.fsum((-1) ** (k - i) * math.comb(k, i) * fn(x + offsets[i]) for i in range(k + 1))
    return total / step**k


def _power_sum(fn, pieces, q, k, settings):
    """||D^k fn||_q^q (or the sup for q = inf), piece by piece with in-piece stencils."""
    parts = []
    for lo, hi in pieces:
        step = min(FD_STEP, (hi - lo) / (2 * k + 2)) if k else 0.0

        def deriv(x, lo=lo, hi=hi, step=step):
            return abs(_divided_difference(fn, x, k, lo, hi, step))

        if math.isinf(q):
            parts.append(maximize_1d(deriv, lo, hi).value)
        else:
            parts.append(integrate(lambda x: deriv(x) ** q, lo, hi, settings))
    if math.isinf(q):
        return max(parts, default=0.0)
    return math.fsum(parts)


def check_q_property(f, g, supp_f, supp_g, q, deriv_order=0, settings=None):
    """Defect of the q-property for disjointly supported f and g.

    Returns | ||f+g||^q - ||f||^q - ||g||^q | for finite q, and
    | ||f+g|| - max(||f||, ||g||) | for q = inf, where ||.|| is the L_q norm of
    the deriv_order-th derivative.
    """
    settings = settings or DEFAULT_SETTINGS
    overlap = min(supp_f[1], supp_g[1]) - max(supp_f[0], supp_g[0])
    if overlap > 0:
        raise ParameterError(f"supports {supp_f} and {supp_g} overlap")
    knots = sorted({float(x) for x in (*supp_f, *supp_g)})
    pieces = [(lo, hi) for lo, hi in zip(knots[:-1], knots[1:]) if hi > lo]

    both = _power_sum(lambda x: f(x) + g(x), pieces, q, deriv_order, settings)
    only_f = _power_sum(f, pieces, q, deriv_order, settings)
    only_g = _power_sum(g, pieces, q, deriv_order, settings)
    if math.isinf(q):
        return abs(both - max(only_f, only_g))
    return abs(both - only_f - only_g)
