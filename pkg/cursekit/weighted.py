"""psi-weighted integration over the real line with a symmetric density.

The worst-case function is the r-fold integral from 0 to |t| of
Psi_r(y)^(p-1), where Psi_r(t) = int_t^inf (x - t)^(r-1)/(r-1)! psi(x) dx.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .config import STABILITY_RTOL, TAIL_CUTOFF, WEIGHTED_GRID_POINTS
from .errors import DivergenceError
from .models import QuadSettings, WcDecomposition, conjugate_exponent
from .numerics import integrate

logger = logging.getLogger(__name__)

_KERNEL_SETTINGS = QuadSettings(abs_tol=1e-14, rel_tol=1e-12)


class WeightedSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r: int = Field(1, ge=1)
    q: float
    p: float
    density: Callable
    density_name: str = "custom"
    support_radius: Optional[float] = Field(None, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _fill_conjugate(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            if data.get("p") is None and data.get("q") is not None:
                data["p"] = conjugate_exponent(float(data["q"]))
            elif data.get("q") is None and data.get("p") is not None:
                data["q"] = conjugate_exponent(float(data["p"]))
        return data

    @model_validator(mode="after")
    def _check_density(self):
        if not (self.q > 1 and self.p >= 1):
            raise ValueError(f"need q in (1, inf] and p >= 1, got q={self.q}, p={self.p}")
        grid = np.linspace(0.0, self.cutoff, 257)
        for x in grid:
            if abs(self.density(x) - self.density(-x)) > 1e-12:
                raise ValueError(f"density is not symmetric at x={x}")
        if self.support_radius is None:
            mass = integrate(self.density, -math.inf, math.inf)
        else:
            mass = integrate(self.density, -self.support_radius, self.support_radius)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"density integrates to {mass}, not 1")
        return self

    @property
    def cutoff(self):
        if self.support_radius is None:
            return TAIL_CUTOFF
        return min(TAIL_CUTOFF, self.support_radius)


def standard_normal(r=1, q=None, p=None):
    return WeightedSpec(r=r, q=q, p=p, density=norm.pdf, density_name="std-normal")


def _density_on(spec, ts):
    values = np.asarray(spec.density(ts), dtype=float)
    if values.shape != ts.shape:
        values = np.vectorize(spec.density, otypes=[float])(ts)
    return values


def psi_kernel(spec, t, cutoff=None):
    cutoff = spec.cutoff if cutoff is None else cutoff
    x0 = abs(t)
    if x0 >= cutoff:
        value = 0.0
    else:
        r = spec.r
        scale = math.factorial(r - 1)
        value = integrate(lambda x: (x - x0) ** (r - 1) / scale * spec.density(x), x0, cutoff, _KERNEL_SETTINGS)
    return value if t >= 0 else (-1) ** spec.r * value


class _NestedGrid:
    """Psi_r and h1 tabulated on [0, T]; immutable once built."""

    def __init__(self, spec, cutoff, n_points=WEIGHTED_GRID_POINTS):
        self.cutoff = cutoff
        self.ts = np.linspace(0.0, cutoff, n_points)
        self.step = self.ts[1] - self.ts[0]
        self.density = _density_on(spec, self.ts)

        # Psi_k(t) = int_t^T Psi_{k-1}, starting from Psi_0 = psi
        psi = self.density
        for _ in range(spec.r):
            psi = cumulative_simpson(psi[::-1], dx=self.step, initial=0.0)[::-1]
            psi = np.clip(psi, 0.0, None)
        self.psi_r = psi

        layer = np.ones_like(psi) if spec.p == 1 else psi ** (spec.p - 1)
        self.top = layer
        for _ in range(spec.r):
            layer = cumulative_simpson(layer, dx=self.step, initial=0.0)
        self.h1 = layer
        self._h1 = PchipInterpolator(self.ts, self.h1, extrapolate=True)
        self._top = PchipInterpolator(self.ts, self.top, extrapolate=True)

    def h1_at(self, t):
        return float(self._h1(abs(t)))

    def top_at(self, t):
        return float(self._top(abs(t)))

    def half_integral(self):
        """int_0^T h1 psi."""
        return float(simpson(self.h1 * self.density, dx=self.step))


def _condition_value(spec, grid):
    return math.factorial(spec.r - 1) ** (spec.p - 1) * grid.half_integral()


def check_condition(spec, _grids=None):
    """Truncated value of the finiteness condition; raises when unstable under T -> 2T."""
    short, wide = _grids or (_NestedGrid(spec, spec.cutoff), _NestedGrid(spec, _wide_cutoff(spec)))
    value = _condition_value(spec, short)
    doubled = _condition_value(spec, wide)
    if not (math.isfinite(value) and math.isfinite(doubled)):
        raise DivergenceError(f"finiteness condition for psi={spec.density_name} evaluates to a non-finite value")
    drift = abs(doubled - value) / max(abs(value), np.finfo(float).tiny)
    if drift > STABILITY_RTOL:
        raise DivergenceError(
            f"finiteness condition for psi={spec.density_name}, r={spec.r}, p={spec.p} fails: "
            f"value {value:.6g} at T={short.cutoff} vs {doubled:.6g} at T={wide.cutoff}"
        )
    return value


def _wide_cutoff(spec):
    if spec.support_radius is not None:
        return spec.cutoff
    return 2 * spec.cutoff


def worst_case_function_weighted(spec):
    grid = _NestedGrid(spec, spec.cutoff)
    check_condition(spec, (grid, _NestedGrid(spec, _wide_cutoff(spec))))

    r, p, q = spec.r, spec.p, spec.q
    half = grid.half_integral()

    def h1(t):
        return grid.h1_at(t)

    def part0(t):
        return grid.h1_at(t) if t <= 0 else 0.0

    def part1(t):
        return grid.h1_at(t) if t >= 0 else 0.0

    def d_h1(t):
        # sign-adjusted Psi_r(t)^(p-1); odd r flips the sign on the left
        value = grid.top_at(t)
        return -value if (t < 0 and r % 2) else value

    def d_part0(t):
        return d_h1(t) if t < 0 else 0.0

    def d_part1(t):
        return d_h1(t) if t >= 0 else 0.0

    if math.isinf(q):
        norm_h1 = 1.0
    else:
        norm_h1 = (2.0 * float(simpson(grid.psi_r**p, dx=grid.step))) ** (1.0 / q)

    def norm_fn(_value, deriv):
        cutoff = grid.cutoff
        if math.isinf(q):
            return float(np.max(np.abs([deriv(t) for t in np.linspace(-cutoff, cutoff, 2 * len(grid.ts) - 1)])))
        return integrate(lambda t: abs(deriv(t)) ** q, -cutoff, cutoff, points=[0.0]) ** (1.0 / q)

    logger.debug("weighted %s r=%d p=%s: I(h1)=%.6g ||h1||=%.6g", spec.density_name, r, p, 2 * half, norm_h1)
    return WcDecomposition(
        label=f"weighted {spec.density_name} r={r} q={q}",
        r=r,
        q=q,
        p=p,
        a=0.0,
        domain=(-grid.cutoff, grid.cutoff),
        decomposable=True,
        has_smooth=False,
        h1=h1,
        h1_part0=part0,
        h1_part1=part1,
        h1_smooth=lambda _t: 0.0,
        d_part0=d_part0,
        d_part1=d_part1,
        d_smooth=lambda _t: 0.0,
        norm_fn=norm_fn,
        I0=half,
        I1=half,
        I_smooth=0.0,
        norm_h1=norm_h1,
        alpha=0.5,
        alpha1=0.0,
        alpha2=2.0 * half,
        alpha3=math.inf,
        initial_error_1d=2.0 * half / norm_h1,
    )
