"""L_p discrepancies anchored at a and quadrant discrepancies at a, plain and generalized.

Anchored test boxes are J(t) = prod [min(t_j,a), max(t_j,a)); quadrant test sets
are Q(t) = prod Q(t_j) with Q(t) = [0,t) for t < a and [t,1) otherwise.
"""

import itertools
import logging
import math
from functools import reduce

import numpy as np

from .config import CELL_BUDGET, MC_CHUNK
from .errors import BudgetExceededError, ParameterError, QuadratureError, UnsupportedError
from .models import (
    Backend,
    DiscrepancyKind,
    DiscrepancyResult,
    DiscrepancySettings,
    Family,
    SpaceKind,
)
from .numerics import integrate
from .pointsets import anchor_transform, splitmix64_uniforms
from .workers import run_ordered

logger = logging.getLogger(__name__)

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


# --- one-dimensional building blocks ---

def _inside(family, a, y, t):
    """Membership of coordinates y in the 1-D test set at t (broadcasting)."""
    if family == Family.ANCHORED:
        return (y >= np.minimum(t, a)) & (y < np.maximum(t, a))
    return np.where(t < a, y < t, y >= t)


def _volume(family, a, t):
    if family == Family.ANCHORED:
        return np.abs(t - a)
    return np.where(t < a, t, 1.0 - t)


def _local_values(family, a, nodes, ts):
    """Local discrepancy at every row of ts (shape (M, d)) for the node matrix (N, d)."""
    n_nodes = nodes.shape[0]
    inside = np.ones((ts.shape[0], n_nodes), dtype=bool)
    volume = np.ones(ts.shape[0])
    for j in range(nodes.shape[1]):
        inside &= _inside(family, a, nodes[None, :, j], ts[:, j, None])
        volume *= _volume(family, a, ts[:, j])
    counted = inside.sum(axis=1) / n_nodes if n_nodes else np.zeros(ts.shape[0])
    return counted - volume


def local_discrepancy(kind, ps, t):
    if kind.generalized:
        raise ParameterError("local_discrepancy is defined for the non-generalized kinds")
    t = np.asarray(t, dtype=float).reshape(1, ps.d)
    return float(_local_values(kind.family, kind.a, ps.nodes, t)[0])


# --- closed form for p = 2 ---

def _cross_kernel(family, a, y):
    """Per-coordinate b(y), shape (N, d)."""
    if family == Family.ANCHORED:
        return np.where(y < a, a * y - y**2 / 2, ((1 - a) ** 2 - (y - a) ** 2) / 2)
    return (a**2 - np.minimum(y, a) ** 2) / 2 + np.where(y >= a, ((1 - a) ** 2 - (1 - y) ** 2) / 2, 0.0)


def _pair_kernel(family, a, yk, yl):
    """Per-coordinate c(y, y') for rows yk (B, 1, d) against yl (1, N, d)."""
    if family == Family.ANCHORED:
        low = (yk < a) & (yl < a)
        high = (yk >= a) & (yl >= a)
        return np.where(low, np.minimum(yk, yl), np.where(high, 1 - np.maximum(yk, yl), 0.0))
    return np.maximum(0.0, a - np.maximum(yk, yl)) + np.maximum(0.0, np.minimum(yk, yl) - a)


def closed_form_l2_squared(nodes, a, anchored=True, generalized=False):
    """Squared L2 discrepancy; the generalized sum over subsets factorizes as prod(1 + .)."""
    family = Family.ANCHORED if anchored else Family.QUADRANT
    n_nodes, d = nodes.shape
    m2 = (a**3 + (1 - a) ** 3) / 3
    shift = 1.0 if generalized else 0.0
    initial = (shift + m2) ** d
    if n_nodes == 0:
        return initial
    cross = np.prod(shift + _cross_kernel(family, a, nodes), axis=1).sum()
    rows = max(1, CELL_BUDGET // (n_nodes * d))
    pairs = math.fsum(
        np.prod(shift + _pair_kernel(family, a, nodes[start:start + rows, None, :], nodes[None, :, :]), axis=2).sum()
        for start in range(0, n_nodes, rows)
    )
    return max(0.0, initial - 2.0 / n_nodes * cross + pairs / n_nodes**2)


# --- exact box decomposition ---

def _axis_cells(family, a, coords):
    knots = np.unique(np.concatenate(([0.0, a, 1.0], coords)))
    lo, hi = knots[:-1], knots[1:]
    right = lo >= a
    if family == Family.ANCHORED:
        alpha, beta = np.where(right, -a, a), np.where(right, 1.0, -1.0)
    else:
        alpha, beta = np.where(right, 1.0, 0.0), np.where(right, -1.0, 1.0)
    return {
        "lo": lo,
        "hi": hi,
        "mid": (lo + hi) / 2,
        "alpha": alpha,
        "beta": beta,
        "v_lo": alpha + beta * lo,
        "v_hi": alpha + beta * hi,
    }


def _moment(cell, k):
    """int over each cell of v(t)^k for the linear volume factor v."""
    return (cell["v_hi"] ** (k + 1) - cell["v_lo"] ** (k + 1)) / ((k + 1) * cell["beta"])


def _outer(vectors):
    return reduce(np.multiply.outer, vectors)


def _abs_power_linear(s, scale, lo, hi, alpha, beta, p):
    """int_lo^hi |s - scale*(alpha + beta*t)|^p dt."""
    w_lo = scale * (alpha + beta * lo)
    w_hi = scale * (alpha + beta * hi)
    if abs(w_hi - w_lo) <= 1e-9 * max(abs(s), abs(w_lo), abs(w_hi), 1e-300):
        x = (hi - lo) / 2 * _GAUSS_NODES + (hi + lo) / 2
        w = scale * (alpha + beta * x)
        return (hi - lo) / 2 * float(np.dot(_GAUSS_WEIGHTS, np.abs(s - w) ** p))

    def antiderivative(w):
        return -math.copysign(1.0, s - w) * abs(s - w) ** (p + 1) / (p + 1)

    return (antiderivative(w_hi) - antiderivative(w_lo)) / (scale * beta)


def _capped_integrate(f, lo, hi, settings):
    try:
        return integrate(f, lo, hi, settings)
    except QuadratureError as e:
        logger.warning("box quadrature hit its subdivision cap; using best estimate: %s", e.detail)
        return e.best


def _box_numeric(s, cells, p, settings):
    last = len(cells) - 1

    def level(j, scale):
        lo, hi, alpha, beta = cells[j]
        if j == last:
            return _abs_power_linear(s, scale, lo, hi, alpha, beta, p)
        return _capped_integrate(lambda t: level(j + 1, scale * (alpha + beta * t)), lo, hi, settings)

    return level(0, 1.0)


def _cell_ranges(family, a, coords, mid):
    """Per node, the half-open range [start, stop) of axis cells whose test set contains it.

    Cells left of the anchor come first; a node is never counted on both sides.
    """
    n_cells = len(mid)
    split = int(np.searchsorted(mid, a))
    rank = np.searchsorted(mid, coords, side="right")
    left = coords < a
    if family == Family.ANCHORED:
        start = np.where(left, 0, np.maximum(rank, split))
        stop = np.where(left, np.minimum(rank, split), n_cells)
    else:
        start = np.where(left, rank, split)
        stop = np.where(left, split, rank)
    return start, np.maximum(stop, start)


def _box_counts(family, a, nodes, cells):
    """Number of nodes in the test set at every box midpoint.

    Each node covers a product of cell ranges; the ranges go into a difference
    array and a cumulative sum per axis recovers the counts, so memory stays
    proportional to the number of boxes.
    """
    shape = tuple(len(c["mid"]) for c in cells)
    if nodes.shape[0] == 0:
        return np.zeros(shape, dtype=np.int64)
    ranges = [_cell_ranges(family, a, nodes[:, j], c["mid"]) for j, c in enumerate(cells)]
    covers = np.logical_and.reduce([stop > start for start, stop in ranges])
    ranges = [(start[covers], stop[covers]) for start, stop in ranges]
    diff = np.zeros(tuple(m + 1 for m in shape), dtype=np.int64)
    for corner in itertools.product((0, 1), repeat=len(cells)):
        index = tuple(rng[side] for rng, side in zip(ranges, corner))
        np.add.at(diff, index, -1 if sum(corner) % 2 else 1)
    for axis in range(len(cells)):
        diff = np.cumsum(diff, axis=axis)
    return diff[tuple(slice(0, m) for m in shape)]


def _box_power_sum(family, a, nodes, p, settings):
    """int over [0,1]^d of |local discrepancy|^p for one projection."""
    n_nodes, d = nodes.shape
    cells = [_axis_cells(family, a, nodes[:, j]) for j in range(d)]
    n_boxes = math.prod(len(c["lo"]) for c in cells)
    if n_boxes > settings.box_budget:
        raise BudgetExceededError(f"{n_boxes} boxes exceed the budget of {settings.box_budget}")

    counts = _box_counts(family, a, nodes, cells)
    share = counts / n_nodes if n_nodes else np.zeros(counts.shape)

    v_min = _outer([np.minimum(c["v_lo"], c["v_hi"]) for c in cells])
    v_max = _outer([np.maximum(c["v_lo"], c["v_hi"]) for c in cells])

    values = np.full(share.shape, np.nan)
    empty = share == 0
    if np.any(empty):
        values[empty] = _outer([_moment(c, p) for c in cells])[empty]

    integer_p = float(p).is_integer()
    if integer_p:
        k_max = int(p)
        above = share >= v_max
        exact = ~empty & ((k_max % 2 == 0) | above | (share <= v_min))
        if np.any(exact):
            expansion = np.zeros(share.shape)
            for k in range(k_max + 1):
                expansion += math.comb(k_max, k) * share ** (k_max - k) * (-1) ** k * _outer([_moment(c, k) for c in cells])
            sign = np.where(above, 1.0, (-1.0) ** k_max)
            values[exact] = (sign * expansion)[exact]

    pending = np.argwhere(np.isnan(values))
    if len(pending):
        logger.debug("box-exact: %d of %d boxes need nested quadrature", len(pending), values.size)
    for idx in pending:
        box = [
            (cell["lo"][i], cell["hi"][i], cell["alpha"][i], cell["beta"][i])
            for cell, i in zip(cells, idx)
        ]
        values[tuple(idx)] = _box_numeric(float(share[tuple(idx)]), box, p, settings.box_quad)
    return math.fsum(np.maximum(values, 0.0).ravel())


def _subsets(d):
    for size in range(1, d + 1):
        yield from itertools.combinations(range(d), size)


def _empty_term(n_nodes):
    return 0.0 if n_nodes else 1.0


def _box_exact(kind, nodes, settings):
    if not kind.generalized:
        total = _box_power_sum(kind.family, kind.a, nodes, kind.p, settings)
    else:
        parts = run_ordered(
            lambda u: _box_power_sum(kind.family, kind.a, nodes[:, list(u)], kind.p, settings),
            _subsets(nodes.shape[1]),
        )
        total = math.fsum([_empty_term(nodes.shape[0]), *parts])
    return DiscrepancyResult(value=total ** (1.0 / kind.p), backend=Backend.BOX_EXACT)


# --- Monte Carlo ---

def _monte_carlo(kind, nodes, settings):
    if settings.seed is None:
        raise ParameterError("the monte-carlo backend needs an explicit seed")
    n_nodes, d = nodes.shape
    subsets = list(_subsets(d)) if kind.generalized else [tuple(range(d))]
    base = _empty_term(n_nodes) if kind.generalized else 0.0
    chunk_size = max(1, min(MC_CHUNK, CELL_BUDGET // max(n_nodes * d, 1)))
    samples = []
    for start in range(0, settings.n_samples, chunk_size):
        m = min(chunk_size, settings.n_samples - start)
        ts = splitmix64_uniforms(settings.seed, m * d, offset=start * d).reshape(m, d)
        inside = [_inside(kind.family, kind.a, nodes[None, :, j], ts[:, j, None]) for j in range(d)]
        volume = [_volume(kind.family, kind.a, ts[:, j]) for j in range(d)]
        chunk = np.full(m, base)
        for u in subsets:
            hit = np.logical_and.reduce([inside[j] for j in u]) if n_nodes else None
            share = hit.sum(axis=1) / n_nodes if n_nodes else 0.0
            local = share - np.prod([volume[j] for j in u], axis=0)
            chunk += np.abs(local) ** kind.p
        samples.append(chunk)
    values = np.concatenate(samples)
    mean = float(np.mean(values))
    value = mean ** (1.0 / kind.p)
    if mean > 0:
        spread = float(np.std(values, ddof=1)) / math.sqrt(values.size)
        stderr = value / (kind.p * mean) * spread
    else:
        stderr = 0.0
    return DiscrepancyResult(value=value, backend=Backend.MONTE_CARLO, stderr=stderr, n_samples=values.size)


# --- public entry points ---

def initial_discrepancy(kind, d):
    """Discrepancy of the empty set in closed form."""
    base = (kind.a ** (kind.p + 1) + (1 - kind.a) ** (kind.p + 1)) / (kind.p + 1)
    if kind.generalized:
        base += 1.0
    return base ** (d / kind.p)


def discrepancy(kind, ps, backend=Backend.CLOSED_FORM_P2, settings=None):
    settings = settings or DiscrepancySettings()
    backend = Backend(backend)
    if ps.weights is not None:
        logger.warning("discrepancy uses equal weights 1/N; the point set's weights are ignored")
    nodes = ps.nodes
    if backend == Backend.CLOSED_FORM_P2:
        if kind.p != 2:
            raise ParameterError(f"closed-form-p2 needs p = 2, got p = {kind.p}")
        squared = closed_form_l2_squared(nodes, kind.a, kind.family == Family.ANCHORED, kind.generalized)
        return DiscrepancyResult(value=math.sqrt(squared), backend=backend)
    if kind.generalized and ps.d > settings.d_max:
        raise BudgetExceededError(f"generalized discrepancy limited to d <= {settings.d_max}, got d = {ps.d}")
    if backend == Backend.BOX_EXACT:
        return _box_exact(kind, nodes, settings)
    return _monte_carlo(kind, nodes, settings)


def qmc_worst_case_error(spec, ps, backend=None, family=Family.ANCHORED, settings=None):
    """Worst-case error of the equal-weight rule on ps, via the matching discrepancy."""
    if spec.r != 1:
        raise UnsupportedError(f"QMC error identity needs r = 1, got r = {spec.r}")
    if spec.kind == SpaceKind.POLY2:
        raise UnsupportedError("no discrepancy identity for the P2 space")
    family = Family(family)
    kind = DiscrepancyKind(
        family=family,
        generalized=spec.kind == SpaceKind.NO_ANCHOR_SOBOLEV,
        p=spec.p,
        a=spec.a,
    )
    if backend is None:
        backend = Backend.CLOSED_FORM_P2 if kind.p == 2 else Backend.BOX_EXACT
    points = anchor_transform(ps, spec.a) if family == Family.ANCHORED else ps
    return discrepancy(kind, points, backend, settings)
