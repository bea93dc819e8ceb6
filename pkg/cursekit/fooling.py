"""Fooling-function certificates: lower bounds valid for every rule on a given node set.

A subset u of coordinates names the quadrant whose j-th factor is the low side
(x_j <= a) for j in u and the high side (x_j >= a) otherwise. A node hits every
quadrant containing it; boundary coordinates (x_j == a) hit both sides.
Subsets are packed into integers, bit j set when j is in u.
"""

import logging
import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import binom

from .config import BOUNDARY_BUDGET, BRUTE_FORCE_D_MAX, CERTIFY_D_MAX, CURSE_SAFETY_DELTA, THM3_D_MAX
from .errors import BudgetExceededError, ParameterError, UnsupportedError
from .models import Certificate, Theorem
from .spaces import require_decomposable

logger = logging.getLogger(__name__)


class Side(str, Enum):
    LOW = "low"
    HIGH = "high"
    BOUNDARY = "boundary"


class QuadrantPattern(BaseModel):
    model_config = ConfigDict(frozen=True)

    bits: tuple[Side, ...]

    @property
    def d(self):
        return len(self.bits)


class CurseTheorem(str, Enum):
    THM1 = "1"
    THM3 = "3"
    THM5 = "5"


def pattern_of(node, a):
    bits = []
    for x in node:
        if x < a:
            bits.append(Side.LOW)
        elif x > a:
            bits.append(Side.HIGH)
        else:
            bits.append(Side.BOUNDARY)
    return QuadrantPattern(bits=tuple(bits))


def _hit_masks(nodes, a, budget=BOUNDARY_BUDGET):
    """Deduplicated packed subsets hit by at least one node."""
    low = nodes < a
    boundary = nodes == a
    n_boundary = boundary.sum(axis=1)
    expansion = int(sum(2 ** int(b) for b in n_boundary))
    if expansion > budget:
        raise BudgetExceededError(
            f"boundary nodes expand to {expansion} quadrant patterns (budget {budget}); "
            "perturb nodes lying exactly on the decomposition point"
        )
    hits = set()
    for k in range(nodes.shape[0]):
        base = sum(1 << j for j in np.flatnonzero(low[k]))
        free = [1 << int(j) for j in np.flatnonzero(boundary[k])]
        patterns = [base]
        for bit in free:
            patterns += [m | bit for m in patterns]
        hits.update(patterns)
    return hits


def _log_weights(*values):
    return [math.log(v) for v in values]


def _initial_error(dec, d):
    return dec.initial_error_1d**d


def _certificate(theorem, normalized, dec, ps_n, d, constants, note=""):
    normalized = min(1.0, max(0.0, normalized))
    initial = _initial_error(dec, d)
    return Certificate(
        theorem=theorem,
        bound_normalized=normalized,
        initial_error=initial,
        bound_absolute=normalized * initial,
        n_nodes=ps_n,
        d=d,
        constants_used=constants,
        note=note,
    )


def _require_no_smooth(dec):
    require_decomposable(dec)
    if dec.has_smooth:
        raise UnsupportedError(f"{dec.label} has a smooth part; use the decomposable-part certificate (theorem 3)")
    if not (dec.I0 > 0 and dec.I1 > 0):
        raise UnsupportedError("both part integrals must be positive")


def certify_thm1(dec, ps):
    _require_no_smooth(dec)
    d = ps.d
    if d > CERTIFY_D_MAX:
        raise UnsupportedError(f"certificates are limited to d <= {CERTIFY_D_MAX}")
    constants = {"alpha": dec.alpha, "I0": dec.I0, "I1": dec.I1}
    if ps.n == 0:
        return _certificate(Theorem.THM1_EXACT, 1.0, dec, 0, d, constants)

    hits = _hit_masks(ps.nodes, dec.a)
    per_level = [0] * (d + 1)
    for mask in hits:
        per_level[mask.bit_count()] += 1
    log_w0, log_w1 = _log_weights(dec.I0 / (dec.I0 + dec.I1), dec.I1 / (dec.I0 + dec.I1))
    terms = []
    for k in range(d + 1):
        missing = math.comb(d, k) - per_level[k]
        if missing:
            terms.append(math.exp(math.log(missing) + k * log_w0 + (d - k) * log_w1))
    logger.debug("thm1: %d of %d quadrants hit", len(hits), 2**d)
    return _certificate(Theorem.THM1_EXACT, math.fsum(terms), dec, ps.n, d, constants)


def brute_force_thm1(dec, ps):
    _require_no_smooth(dec)
    d = ps.d
    if d > BRUTE_FORCE_D_MAX:
        raise UnsupportedError(f"brute force enumeration is refused for d > {BRUTE_FORCE_D_MAX}")
    low_ok = ps.nodes <= dec.a
    high_ok = ps.nodes >= dec.a
    total = dec.I0 + dec.I1
    terms = []
    for u in range(2**d):
        in_u = np.array([(u >> j) & 1 for j in range(d)], dtype=bool)
        hit = ps.n > 0 and bool(np.any(np.all(np.where(in_u, low_ok, high_ok), axis=1)))
        if not hit:
            size = int(in_u.sum())
            terms.append(dec.I0**size * dec.I1 ** (d - size) / total**d)
    constants = {"alpha": dec.alpha, "I0": dec.I0, "I1": dec.I1}
    return _certificate(Theorem.THM1_EXACT, math.fsum(terms), dec, ps.n, d, constants)


def closed_form_thm1(alpha, N, d):
    if not 0.5 <= alpha < 1:
        raise ParameterError(f"alpha must lie in [1/2, 1), got {alpha}")
    if N < 0 or d < 1:
        raise ParameterError(f"need N >= 0 and d >= 1, got N={N}, d={d}")
    if N == 0:
        return 1.0
    return max(0.0, 1.0 - math.exp(math.log(N) + d * math.log(alpha)))


def closed_certificate_thm1(dec, n, d):
    _require_no_smooth(dec)
    value = closed_form_thm1(dec.alpha, n, d)
    return _certificate(Theorem.THM1_CLOSED, value, dec, n, d, {"alpha": dec.alpha})


def _require_smooth(dec):
    require_decomposable(dec)
    if not dec.alpha1 > 0:
        raise UnsupportedError(f"{dec.label} has no smooth part with positive integral")
    if not (dec.I0 > 0 and dec.I1 > 0):
        raise UnsupportedError("both part integrals must be positive")


def _thm3_constants(dec):
    return {"alpha": dec.alpha, "alpha1": dec.alpha1, "alpha2": dec.alpha2, "alpha3": dec.alpha3, "I0": dec.I0, "I1": dec.I1}


def _thm3_logs(dec):
    scale = dec.alpha1 + dec.alpha2
    return _log_weights(dec.alpha1 / scale, dec.I0 / scale, dec.I1 / scale)


def _thm3_sum(dec, d, missing):
    """Sum of missing[m][k] * ws^(d-m) * w0^k * w1^(m-k)."""
    log_ws, log_w0, log_w1 = _thm3_logs(dec)
    terms = []
    for m in range(d + 1):
        for k in range(m + 1):
            count = int(missing[m][k])
            if count:
                terms.append(math.exp(math.log(count) + (d - m) * log_ws + k * log_w0 + (m - k) * log_w1))
    return math.fsum(terms)


def certify_thm3(dec, ps):
    _require_smooth(dec)
    d = ps.d
    if d > THM3_D_MAX:
        raise UnsupportedError(f"exact theorem 3 certificates are limited to d <= {THM3_D_MAX}; use closed_form_thm3")
    constants = _thm3_constants(dec)
    if ps.n == 0:
        return _certificate(Theorem.THM3_EXACT, 1.0, dec, 0, d, constants)

    masks = np.array(sorted(_hit_masks(ps.nodes, dec.a)), dtype=np.uint64)
    # hits[m][k]: over all u with |u| = m, distinct restrictions v of popcount k
    hits = np.zeros((d + 1, d + 1), dtype=np.int64)
    block = max(1, (1 << 22) // len(masks))
    for start in range(0, 2**d, block):
        us = np.arange(start, min(start + block, 2**d), dtype=np.uint64)
        sizes = np.bitwise_count(us).astype(np.int64)
        restricted = np.sort(us[:, None] & masks[None, :], axis=1)
        fresh = np.ones(restricted.shape, dtype=bool)
        fresh[:, 1:] = restricted[:, 1:] != restricted[:, :-1]
        levels = np.bitwise_count(restricted).astype(np.int64)
        rows = np.broadcast_to(sizes[:, None], restricted.shape)
        np.add.at(hits, (rows[fresh], levels[fresh]), 1)

    missing = [[math.comb(d, m) * math.comb(m, k) - int(hits[m, k]) for k in range(m + 1)] for m in range(d + 1)]
    return _certificate(Theorem.THM3_EXACT, _thm3_sum(dec, d, missing), dec, ps.n, d, constants)


def brute_force_thm3(dec, ps):
    """Literal enumeration over u and over every v inside u."""
    _require_smooth(dec)
    d = ps.d
    if d > BRUTE_FORCE_D_MAX:
        raise UnsupportedError(f"brute force enumeration is refused for d > {BRUTE_FORCE_D_MAX}")
    low_ok = ps.nodes <= dec.a
    high_ok = ps.nodes >= dec.a
    outer = []
    for u in range(2**d):
        members = [j for j in range(d) if (u >> j) & 1]
        inner = []
        v = u
        while True:
            in_v = [(v >> j) & 1 for j in members]
            hit = False
            if ps.n:
                ok = np.ones(ps.n, dtype=bool)
                for j, flag in zip(members, in_v):
                    ok &= low_ok[:, j] if flag else high_ok[:, j]
                hit = bool(ok.any())
            if not hit:
                size = sum(in_v)
                inner.append(dec.I0**size * dec.I1 ** (len(members) - size))
            if v == 0:
                break
            v = (v - 1) & u
        outer.append(dec.alpha1 ** (d - len(members)) * math.fsum(inner))
    value = math.fsum(outer) / (dec.alpha1 + dec.alpha2) ** d
    return _certificate(Theorem.THM3_EXACT, value, dec, ps.n, d, _thm3_constants(dec))


def closed_form_thm3(alpha, alpha3, N, d, log_n=None):
    """(1+alpha3)^-d * sum_k C(d,k) alpha3^k (1 - N alpha^k)_+, normalized.

    ``log_n`` replaces N when the node count does not fit a float.
    """
    if not 0.5 <= alpha < 1:
        raise ParameterError(f"alpha must lie in [1/2, 1), got {alpha}")
    if not alpha3 > 0:
        raise ParameterError(f"alpha3 must be positive, got {alpha3}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    if log_n is None:
        if N < 0:
            raise ParameterError(f"N must be >= 0, got {N}")
        if N == 0:
            return 1.0
        log_n = math.log(N)
    k = np.arange(d + 1)
    weights = binom.pmf(k, d, alpha3 / (1.0 + alpha3))
    crowd = np.exp(np.minimum(log_n + k * math.log(alpha), 700.0))
    return float(np.sum(weights * np.clip(1.0 - crowd, 0.0, None)))


def closed_certificate_thm3(dec, n, d):
    _require_smooth(dec)
    value = closed_form_thm3(dec.alpha, dec.alpha3, n, d)
    return _certificate(Theorem.THM3_CLOSED, value, dec, n, d, _thm3_constants(dec))


def alpha_tail_ratio(alpha3, c, d):
    share = alpha3 / (1.0 + alpha3)
    if not 0 < c < share:
        raise ParameterError(f"c must lie in (0, {share}), got {c}")
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    return float(binom.cdf(math.floor(c * d), d, share))


def curse_constant_thm3(alpha, alpha3, delta=CURSE_SAFETY_DELTA):
    """Base C of the theorem 3 curse, alpha^(-alpha3/(1+alpha3)) shrunk by (1 - delta)."""
    if not 0 <= delta < 1:
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")
    return alpha ** (-alpha3 / (1.0 + alpha3)) * (1.0 - delta)


def _curse_terms(theorem, constants, eps):
    """(base, factor, rounding) with N(eps, d) >= rounding(base^d * factor)."""
    theorem = CurseTheorem(theorem)
    limit = 0.5 if theorem == CurseTheorem.THM5 else 1.0
    if not 0 < eps < limit:
        raise ParameterError(f"eps must lie in (0, {limit}) for theorem {theorem.value}, got {eps}")
    if theorem == CurseTheorem.THM1:
        base = constants["inv_alpha"] if "inv_alpha" in constants else 1.0 / constants["alpha"]
        return base, 1.0 - eps, math.ceil
    if theorem == CurseTheorem.THM3:
        base = curse_constant_thm3(constants["alpha"], constants["alpha3"], constants.get("delta", CURSE_SAFETY_DELTA))
        return base, 1.0, math.floor
    return constants["c_tilde"], 1.0 - 2.0 * eps, math.ceil


def info_complexity_bound(theorem, constants, eps, d):
    """Lower bound on the number of function values needed to reach eps * e(0,d).

    For theorem 3 the bound is asymptotic: it holds for d beyond an unquantified d0(eps).
    """
    base, factor, rounding = _curse_terms(theorem, constants, eps)
    try:
        value = base**d * factor
    except OverflowError as e:
        raise UnsupportedError(f"bound {base}^{d} exceeds the float range; use the log2 form") from e
    if math.isinf(value):
        raise UnsupportedError(f"bound {base}^{d} exceeds the float range; use the log2 form")
    return int(rounding(value))


def log2_info_complexity_bound(theorem, constants, eps, d):
    base, factor, _ = _curse_terms(theorem, constants, eps)
    return d * math.log2(base) + math.log2(factor)
