"""Node sets: generation, the anchor transform and the plain-text file format.

File format::

    d=<int> n=<int> weighted=<0|1>
    # comment lines start with '#'
    x_1 ... x_d [w]          (n rows, single spaces, 17 significant digits)
"""

import logging
import math
import re
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .config import GRID_MAX_POINTS
from .errors import BudgetExceededError, ParameterError, PointSetParseError
from .models import PointSet

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^d=(\d+) n=(\d+) weighted=([01])$")

# splitmix64 constants
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class GeneratorKind(str, Enum):
    UNIFORM_RANDOM = "uniform-random"
    GRID = "grid"
    RANK1_LATTICE = "rank1-lattice"
    VDC_PRODUCT = "vdc-product"


def splitmix64_uniforms(seed, count, offset=0):
    """Uniforms in [0,1) from the splitmix64 stream.

    Output k (0-based) mixes state_k = seed + (k+1)*0x9E3779B97F4A7C15 (mod 2^64):
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27; z *= 0x94D049BB133111EB;
    z ^= z >> 31; u = (z >> 11) * 2^-53.
    """
    k = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % (1 << 64)) + k * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _grid_side(d, n):
    m = max(1, math.ceil(n ** (1.0 / d)))
    while m > 1 and (m - 1) ** d >= n:
        m -= 1
    while m**d < n:
        m += 1
    return m


def _grid(d, n):
    if n == 0:
        return np.empty((0, d))
    m = _grid_side(d, n)
    if m**d > GRID_MAX_POINTS:
        raise BudgetExceededError(f"a {m}^{d} grid exceeds {GRID_MAX_POINTS} points")
    axis = (np.arange(m) + 0.5) / m
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=1)[:n]


def _lattice(z, n):
    k = np.arange(n)[:, None]
    return np.mod(k * np.asarray(z)[None, :], n) / n


def cbc_generating_vector(d, n):
    """Component-by-component choice of z minimizing the anchored L2 discrepancy at a=1/2."""
    from .discrepancy import closed_form_l2_squared  # circular at import time

    z = [1]
    if n <= 2:
        return z * d
    candidates = [c for c in range(1, n) if math.gcd(c, n) == 1]
    for j in range(1, d):
        scores = [closed_form_l2_squared(_lattice(z + [c], n), 0.5, anchored=True) for c in candidates]
        best = candidates[int(np.argmin(scores))]
        logger.debug("cbc: component %d -> %d (L2^2 %.6g)", j + 1, best, min(scores))
        z.append(best)
    return z


def generate(kind, d, n, seed=0):
    kind = GeneratorKind(kind)
    if d < 1 or n < 0:
        raise ParameterError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    if kind == GeneratorKind.UNIFORM_RANDOM:
        nodes = splitmix64_uniforms(seed, n * d).reshape(n, d)
    elif kind == GeneratorKind.GRID:
        nodes = _grid(d, n)
    elif kind == GeneratorKind.RANK1_LATTICE:
        nodes = _lattice(cbc_generating_vector(d, n), n) if n else np.empty((0, d))
    else:
        nodes = qmc.Halton(d=d, scramble=False).random(n) if n else np.empty((0, d))
    return PointSet(d=d, nodes=nodes)


def anchor_transform(ps, a):
    """Map every coordinate x to (a - x) mod 1."""
    if ps.domain != "cube":
        raise ParameterError("anchor_transform needs a cube point set")
    nodes = np.mod(a - ps.nodes, 1.0)
    nodes[nodes >= 1.0] = 0.0
    return PointSet(d=ps.d, nodes=nodes, weights=ps.weights)


def write(ps, path):
    weighted = ps.weights is not None
    lines = [f"d={ps.d} n={ps.n} weighted={int(weighted)}"]
    for k, row in enumerate(ps.nodes):
        values = list(row) + ([ps.weights[k]] if weighted else [])
        lines.append(" ".join(format(float(v), ".17g") for v in values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read(path, domain="cube"):
    text = Path(path).read_text(encoding="utf-8")
    header = None
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            match = _HEADER.match(line)
            if not match:
                raise PointSetParseError(line_no, f"malformed header {line!r}")
            d, n, weighted = int(match[1]), int(match[2]), match[3] == "1"
            if d < 1:
                raise PointSetParseError(line_no, "d must be >= 1")
            header = (d, n, weighted)
            continue
        d, n, weighted = header
        fields = line.split(" ")
        width = d + 1 if weighted else d
        if len(fields) != width:
            raise PointSetParseError(line_no, f"expected {width} values, found {len(fields)}")
        try:
            values = [float(v) for v in fields]
        except ValueError as e:
            raise PointSetParseError(line_no, str(e)) from e
        if weighted and values[-1] < 0:
            raise PointSetParseError(line_no, f"negative weight {values[-1]}")
        if domain == "cube" and any(not 0.0 <= v < 1.0 for v in values[:d]):
            raise PointSetParseError(line_no, "cube coordinates must lie in [0, 1)")
        rows.append(values)
    if header is None:
        raise PointSetParseError(1, "missing header")
    d, n, weighted = header
    if len(rows) != n:
        raise PointSetParseError(len(text.splitlines()), f"header announces {n} rows, found {len(rows)}")
    data = np.array(rows, dtype=float).reshape(n, d + int(weighted))
    weights = data[:, d] if weighted else None
    return PointSet(d=d, nodes=data[:, :d], weights=weights, domain=domain)
