import math
from enum import Enum
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    ABS_TOL,
    BOX_BUDGET,
    BOX_SUBDIVISIONS,
    GENERALIZED_D_MAX,
    MAX_SUBDIVISIONS,
    MC_SAMPLES,
    REL_TOL,
    TAIL_CUTOFF,
)


def conjugate_exponent(x):
    """Hoelder conjugate: 1/x + 1/y = 1, with 1 <-> inf."""
    if math.isinf(x):
        return 1.0
    if x == 1:
        return math.inf
    return x / (x - 1.0)


# --- Numerics ---

class QuadSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(ABS_TOL, gt=0)
    rel_tol: float = Field(REL_TOL, ge=0)
    max_subdivisions: int = Field(MAX_SUBDIVISIONS, ge=1)
    tail_cutoff: float = Field(TAIL_CUTOFF, gt=0)


class MaxResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    argmax: float
    value: float
    bracket_width: float = Field(ge=0)


# --- Spaces ---

class SpaceKind(str, Enum):
    ANCHORED_SOBOLEV = "anchored-sobolev"
    NO_ANCHOR_SOBOLEV = "no-anchor-sobolev"
    POLY2 = "poly2"


class SpaceSpec(BaseModel):
    """Univariate space over [0,1]. Give either q or p; the other is filled in."""

    model_config = ConfigDict(frozen=True)

    kind: SpaceKind
    r: int = Field(1, ge=1)
    q: float
    p: float
    a: float = Field(0.5, gt=0, lt=1)

    @model_validator(mode="before")
    @classmethod
    def _fill_conjugate(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        q, p = data.get("q"), data.get("p")
        if q is None and p is None:
            raise ValueError("one of q or p is required")
        if p is None:
            data["p"] = conjugate_exponent(float(q))
        elif q is None:
            data["q"] = conjugate_exponent(float(p))
        return data

    @model_validator(mode="after")
    def _check(self):
        if not self.q > 1:
            raise ValueError(f"q must lie in (1, inf], got {self.q}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if math.isinf(self.q) != (self.p == 1):
            raise ValueError("p = 1 exactly when q = inf")
        if not math.isinf(self.q) and abs(1 / self.p + 1 / self.q - 1) > 1e-12:
            raise ValueError(f"p={self.p} and q={self.q} are not conjugate")
        if self.kind == SpaceKind.NO_ANCHOR_SOBOLEV and self.r != 1:
            raise ValueError("no-anchor-sobolev has smoothness r = 1")
        return self


class WcDecomposition(BaseModel):
    """A worst-case function h1 with its parts, integrals and derived constants.

    The d_* evaluators are r-th derivatives of the matching parts; norm_fn maps
    a (value, r-th derivative) pair of evaluators to the space norm.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    label: str
    r: int
    q: float
    p: float
    a: float
    domain: tuple[float, float]
    decomposable: bool
    has_smooth: bool

    h1: Callable[[float], float]
    h1_part0: Callable[[float], float]
    h1_part1: Callable[[float], float]
    h1_smooth: Callable[[float], float]
    d_part0: Optional[Callable[[float], float]] = None
    d_part1: Optional[Callable[[float], float]] = None
    d_smooth: Optional[Callable[[float], float]] = None
    norm_fn: Optional[Callable] = None

    I0: float
    I1: float
    I_smooth: float
    norm_h1: float = Field(gt=0)
    alpha: float
    alpha1: float
    alpha2: float
    alpha3: float
    initial_error_1d: float

    @property
    def I_h1(self):
        return self.I_smooth + self.I0 + self.I1


# --- Point sets ---

class PointSet(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int = Field(ge=1)
    nodes: np.ndarray
    weights: Optional[np.ndarray] = None
    domain: Literal["cube", "real"] = "cube"

    @field_validator("nodes", mode="before")
    @classmethod
    def _as_matrix(cls, value, info):
        d = info.data.get("d")
        arr = np.array(value, dtype=float, copy=True)
        if d is not None and arr.size == 0:
            arr = arr.reshape(0, d)
        if d is not None and arr.ndim == 1 and d == 1:
            arr = arr.reshape(-1, 1)
        arr.setflags(write=False)
        return arr

    @field_validator("weights", mode="before")
    @classmethod
    def _as_vector(cls, value):
        if value is None:
            return None
        arr = np.array(value, dtype=float, copy=True).reshape(-1)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.d:
            raise ValueError(f"nodes must have shape (N, {self.d}), got {self.nodes.shape}")
        if not np.all(np.isfinite(self.nodes)):
            raise ValueError("node coordinates must be finite")
        if self.domain == "cube" and self.nodes.size:
            if self.nodes.min() < 0.0 or self.nodes.max() >= 1.0:
                raise ValueError("cube coordinates must lie in [0, 1)")
        if self.weights is not None:
            if self.weights.shape != (self.nodes.shape[0],):
                raise ValueError("weights must match the number of nodes")
            if np.any(self.weights < 0):
                raise ValueError("weights must be nonnegative")
        return self

    @property
    def n(self):
        return self.nodes.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        if (self.d, self.domain) != (other.d, other.domain):
            return False
        if (self.weights is None) != (other.weights is None):
            return False
        if self.weights is not None and not np.array_equal(self.weights, other.weights):
            return False
        return np.array_equal(self.nodes, other.nodes)

    __hash__ = None


# --- Discrepancy ---

class Family(str, Enum):
    ANCHORED = "anchored"
    QUADRANT = "quadrant"


class Backend(str, Enum):
    CLOSED_FORM_P2 = "closed-form-p2"
    BOX_EXACT = "box-exact"
    MONTE_CARLO = "monte-carlo"


class DiscrepancyKind(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: Family
    generalized: bool = False
    p: float = Field(2.0, ge=1)
    a: float = Field(0.5, gt=0, lt=1)


class DiscrepancySettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(MC_SAMPLES, ge=2)
    seed: Optional[int] = None
    d_max: int = Field(GENERALIZED_D_MAX, ge=1)
    box_budget: int = Field(BOX_BUDGET, ge=1)
    box_quad: QuadSettings = QuadSettings(abs_tol=1e-13, rel_tol=1e-10, max_subdivisions=BOX_SUBDIVISIONS)


class DiscrepancyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    backend: Backend
    stderr: float = Field(0.0, ge=0)
    n_samples: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if self.backend != Backend.MONTE_CARLO and self.stderr != 0:
            raise ValueError("exact backends carry no standard error")
        return self


# --- Certificates ---

class Theorem(str, Enum):
    THM1_EXACT = "thm1-exact"
    THM1_CLOSED = "thm1-closed"
    THM3_EXACT = "thm3-exact"
    THM3_CLOSED = "thm3-closed"
    THM5 = "thm5"


class Certificate(BaseModel):
    """Lower bound on the worst-case error of every admissible rule on the given nodes."""

    model_config = ConfigDict(frozen=True)

    theorem: Theorem
    bound_normalized: float = Field(ge=0, le=1)
    initial_error: float = Field(ge=0)
    bound_absolute: float = Field(ge=0)
    n_nodes: int = Field(ge=0)
    d: int = Field(ge=1)
    constants_used: dict[str, float] = {}
    note: str = ""

    @model_validator(mode="after")
    def _check(self):
        expected = self.bound_normalized * self.initial_error
        if abs(self.bound_absolute - expected) > 1e-12 * max(1.0, expected):
            raise ValueError("bound_absolute must equal bound_normalized * e(0,d)")
        return self
