"""One-dimensional quadrature and maximization shared by every other module."""

import logging
import math

import numpy as np
from scipy import integrate as sp_integrate

from .config import GRID_POINTS, REFINE_TOL
from .errors import ParameterError, QuadratureError
from .models import MaxResult, QuadSettings

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS = QuadSettings()

# QUADPACK reports an exhausted subdivision budget only through its message
_LIMIT_MESSAGE = "maximum number of subdivisions"
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def integrate(f, lo, hi, settings=None, points=None):
    """Adaptive Gauss-Kronrod quadrature of f over [lo, hi].

    Infinite limits are passed through to QUADPACK. ``points`` are interior
    kinks the integrator should split at (finite intervals only).
    """
    settings = settings or DEFAULT_SETTINGS
    if lo > hi:
        raise ParameterError(f"integrate needs lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    kwargs = {}
    if points is not None and math.isfinite(lo) and math.isfinite(hi):
        inner = sorted({float(x) for x in points if lo < x < hi})
        if inner:
            kwargs["points"] = inner
    out = sp_integrate.quad(
        f,
        lo,
        hi,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        full_output=1,
        **kwargs,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        message = str(out[3])
        if _LIMIT_MESSAGE in message:
            raise QuadratureError(f"subdivision budget exhausted on [{lo}, {hi}]", value, abserr)
        # QUADPACK also flags roundoff or divergence when the residual still meets the tolerance
        tolerance = max(settings.abs_tol, settings.rel_tol * abs(value))
        level = logging.DEBUG if abserr <= tolerance else logging.WARNING
        logger.log(level, "quad on [%s, %s]: %s (residual %.3g)", lo, hi, message, abserr)
    return float(value)


def integrate_piecewise(f, breakpoints, settings=None):
    """Sum of integrate over consecutive breakpoints; kinks sit on piece boundaries."""
    knots = sorted(float(b) for b in breakpoints)
    if len(knots) < 2:
        return 0.0
    return math.fsum(integrate(f, lo, hi, settings) for lo, hi in zip(knots[:-1], knots[1:]))


def integrate_real_line(f, settings=None, points=None):
    """Integral over the real line truncated to [-T, T] with T = settings.tail_cutoff."""
    settings = settings or DEFAULT_SETTINGS
    cutoff = settings.tail_cutoff
    return integrate(f, -cutoff, cutoff, settings, points=points)


def maximize_1d(f, lo, hi, grid_points=GRID_POINTS, refine_tol=REFINE_TOL):
    """Grid scan followed by golden-section refinement of the best grid cell.

    The result is never worse than the best grid sample. Global only when the
    maximizing cell is resolved by the grid.
    """
    if not hi > lo:
        raise ParameterError(f"maximize_1d needs hi > lo, got [{lo}, {hi}]")
    if grid_points < 3:
        raise ParameterError("maximize_1d needs at least 3 grid points")
    if not refine_tol > 0:
        raise ParameterError("refine_tol must be positive")

    ys = np.linspace(lo, hi, grid_points)
    values = np.fromiter((f(y) for y in ys), dtype=float, count=grid_points)
    best = int(np.argmax(values))
    best_y, best_value = float(ys[best]), float(values[best])

    left = float(ys[max(best - 1, 0)])
    right = float(ys[min(best + 1, grid_points - 1)])
    x1 = right - _GOLDEN * (right - left)
    x2 = left + _GOLDEN * (right - left)
    f1, f2 = f(x1), f(x2)
    while right - left > refine_tol:
        if f1 >= f2:
            right, x2, f2 = x2, x1, f1
            x1 = right - _GOLDEN * (right - left)
            f1 = f(x1)
        else:
            left, x1, f1 = x1, x2, f2
            x2 = left + _GOLDEN * (right - left)
            f2 = f(x2)
        if right - left <= 4 * np.finfo(float).eps * max(1.0, abs(left)):
            break

    refined_y, refined_value = (x1, f1) if f1 >= f2 else (x2, f2)
    if refined_value > best_value:
        best_y, best_value = float(refined_y), float(refined_value)
    return MaxResult(argmax=best_y, value=best_value, bracket_width=max(right - left, 0.0))
