import tracemalloc

import numpy as np
import pytest
from pydantic import ValidationError

from cursekit.discrepancy import (
    _axis_cells,
    _box_counts,
    _inside,
    closed_form_l2_squared,
    discrepancy,
    initial_discrepancy,
    local_discrepancy,
    qmc_worst_case_error,
)
from cursekit.errors import BudgetExceededError, ParameterError, UnsupportedError
from cursekit.models import (
    Backend,
    DiscrepancyKind,
    DiscrepancyResult,
    DiscrepancySettings,
    Family,
    PointSet,
    SpaceKind,
    SpaceSpec,
)

EXACT = Backend.BOX_EXACT


def empty(d):
    return PointSet(d=d, nodes=np.empty((0, d)))


def initial_formula(p, a, d, generalized=False):
    base = (a ** (p + 1) + (1 - a) ** (p + 1)) / (p + 1)
    return ((1.0 if generalized else 0.0) + base) ** (d / p)


def test_local_discrepancy_examples():
    anchored = DiscrepancyKind(family="anchored", a=0.5)
    quadrant = DiscrepancyKind(family="quadrant", a=0.5)
    assert local_discrepancy(anchored, PointSet(d=1, nodes=[[0.25]]), [0.0]) == pytest.approx(0.5)
    assert local_discrepancy(quadrant, empty(1), [0.3]) == pytest.approx(-0.3)
    assert local_discrepancy(anchored, PointSet(d=2, nodes=[[0.25, 0.25]]), [0.0, 0.0]) == pytest.approx(0.75)
    with pytest.raises(ParameterError):
        local_discrepancy(DiscrepancyKind(family="anchored", generalized=True), empty(1), [0.1])


@pytest.mark.parametrize("family", ["anchored", "quadrant"])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_empty_set_has_initial_value(family, p):
    for a in (0.3, 0.5):
        kind = DiscrepancyKind(family=family, p=p, a=a)
        for d in range(1, 6):
            value = discrepancy(kind, empty(d), EXACT).value
            assert value == pytest.approx(initial_formula(p, a, d), rel=1e-12)
            assert initial_discrepancy(kind, d) == pytest.approx(initial_formula(p, a, d), rel=1e-14)


@pytest.mark.parametrize("family", ["anchored", "quadrant"])
def test_empty_set_generalized(family):
    kind = DiscrepancyKind(family=family, generalized=True, p=2.0, a=0.3)
    for d in range(1, 9):
        expected = initial_formula(2.0, 0.3, d, generalized=True)
        assert discrepancy(kind, empty(d), EXACT).value == pytest.approx(expected, rel=1e-10)
        assert discrepancy(kind, empty(d)).value == pytest.approx(expected, rel=1e-10)


def test_single_node_anchored_l2_by_hand():
    # {1/4, 3/4} at a = 1/2: each quarter contributes 1/192
    ps = PointSet(d=1, nodes=[[0.25], [0.75]])
    assert closed_form_l2_squared(ps.nodes, 0.5) == pytest.approx(1 / 48, abs=1e-15)
    kind = DiscrepancyKind(family="anchored", a=0.5)
    assert discrepancy(kind, ps, EXACT).value ** 2 == pytest.approx(1 / 48, abs=1e-14)


def _instance(rng):
    d = int(rng.integers(1, 4))
    n = int(rng.integers(1, 21))
    return PointSet(d=d, nodes=rng.random((n, d)))


def test_backends_agree():
    rng = np.random.default_rng(2024)
    for k in range(50):
        ps = _instance(rng)
        kind = DiscrepancyKind(family="anchored" if k % 2 else "quadrant", a=0.3 if k % 4 < 2 else 0.5)
        closed = discrepancy(kind, ps, Backend.CLOSED_FORM_P2).value
        exact = discrepancy(kind, ps, EXACT).value
        assert abs(closed - exact) <= 1e-8
        mc = discrepancy(kind, ps, Backend.MONTE_CARLO, DiscrepancySettings(seed=k, n_samples=1_000_000))
        assert mc.stderr > 0
        assert abs(mc.value - exact) <= 4 * mc.stderr


def test_generalized_backends_agree():
    rng = np.random.default_rng(77)
    for k in range(10):
        ps = _instance(rng)
        kind = DiscrepancyKind(family="quadrant" if k % 2 else "anchored", generalized=True, a=0.5)
        closed = discrepancy(kind, ps).value
        assert discrepancy(kind, ps, EXACT).value == pytest.approx(closed, abs=1e-8)


def test_box_exact_non_integer_p_matches_monte_carlo():
    rng = np.random.default_rng(5)
    ps = PointSet(d=2, nodes=rng.random((6, 2)))
    kind = DiscrepancyKind(family="anchored", p=1.5, a=0.5)
    exact = discrepancy(kind, ps, EXACT).value
    mc = discrepancy(kind, ps, Backend.MONTE_CARLO, DiscrepancySettings(seed=3, n_samples=400_000))
    assert abs(mc.value - exact) <= 5 * mc.stderr


def test_odd_p_crossing_boxes():
    ps = PointSet(d=1, nodes=[[0.2], [0.45], [0.9]])
    kind = DiscrepancyKind(family="quadrant", p=1.0, a=0.5)
    # t < 1/2: |#{y < t}/3 - t|, sign changes at t = 1/3
    left = 1 / 50 + 4 / 450 + 49 / 7200 + 23 / 2400
    # t >= 1/2: |#{y >= t}/3 - (1 - t)|, sign changes at t = 2/3
    right = 1 / 72 + 49 / 1800 + 1 / 200
    assert discrepancy(kind, ps, EXACT).value == pytest.approx(left + right, abs=1e-13)


def test_monte_carlo_needs_seed():
    kind = DiscrepancyKind(family="anchored")
    with pytest.raises(ParameterError):
        discrepancy(kind, empty(2), Backend.MONTE_CARLO)


def test_closed_form_needs_p2():
    with pytest.raises(ParameterError):
        discrepancy(DiscrepancyKind(family="anchored", p=3.0), empty(1))


def test_generalized_dimension_cap():
    kind = DiscrepancyKind(family="anchored", generalized=True)
    with pytest.raises(BudgetExceededError):
        discrepancy(kind, empty(20), EXACT)


def test_result_invariants():
    with pytest.raises(ValidationError):
        DiscrepancyResult(value=1.0, backend=Backend.BOX_EXACT, stderr=0.1)
    with pytest.raises(ValidationError):
        DiscrepancyKind(family=Family.ANCHORED, p=0.5)


def test_qmc_worst_case_error():
    spec = SpaceSpec(kind=SpaceKind.ANCHORED_SOBOLEV, q=2.0, a=0.5)
    initial = qmc_worst_case_error(spec, PointSet(d=1, nodes=[[0.5]])).value
    assert initial == pytest.approx(np.sqrt(1 / 12))
    spread = qmc_worst_case_error(spec, PointSet(d=1, nodes=[[0.25], [0.75]])).value
    assert spread == pytest.approx(np.sqrt(1 / 48))
    assert spread < initial


def test_qmc_worst_case_error_refusals():
    ps = PointSet(d=1, nodes=[[0.5]])
    with pytest.raises(UnsupportedError):
        qmc_worst_case_error(SpaceSpec(kind=SpaceKind.ANCHORED_SOBOLEV, r=2, q=2.0), ps)
    with pytest.raises(UnsupportedError):
        qmc_worst_case_error(SpaceSpec(kind=SpaceKind.POLY2, q=2.0), ps)


def test_no_anchor_uses_generalized_discrepancy():
    spec = SpaceSpec(kind=SpaceKind.NO_ANCHOR_SOBOLEV, q=2.0, a=0.5)
    value = qmc_worst_case_error(spec, empty(3)).value
    assert value == pytest.approx((1 + 1 / 12) ** 1.5, rel=1e-12)


def test_nondecreasing_in_p():
    rng = np.random.default_rng(31)
    ps = PointSet(d=2, nodes=rng.random((7, 2)))
    for family in ("anchored", "quadrant"):
        values = [discrepancy(DiscrepancyKind(family=family, p=p, a=0.4), ps, EXACT).value for p in (1.0, 1.5, 2.0, 3.0, 4.0)]
        assert all(x <= y + 1e-8 for x, y in zip(values, values[1:]))


@pytest.mark.parametrize("generalized", [False, True])
def test_coordinate_permutation_invariance(generalized):
    rng = np.random.default_rng(8)
    nodes = rng.random((9, 3))
    for family in ("anchored", "quadrant"):
        kind = DiscrepancyKind(family=family, generalized=generalized, a=0.3)
        base = discrepancy(kind, PointSet(d=3, nodes=nodes)).value
        permuted = discrepancy(kind, PointSet(d=3, nodes=nodes[:, [2, 0, 1]])).value
        assert abs(base - permuted) <= 1e-12
        assert discrepancy(kind, PointSet(d=3, nodes=nodes[:, [1, 2, 0]]), EXACT).value == pytest.approx(base, abs=1e-10)


@pytest.mark.parametrize("family", ["anchored", "quadrant"])
def test_reflection_symmetry(family):
    rng = np.random.default_rng(12)
    nodes = rng.random((8, 2))
    for p, tol in ((2.0, 1e-10), (3.0, 1e-9)):
        value = discrepancy(DiscrepancyKind(family=family, p=p, a=0.3), PointSet(d=2, nodes=nodes), EXACT).value
        mirrored = discrepancy(DiscrepancyKind(family=family, p=p, a=0.7), PointSet(d=2, nodes=1.0 - nodes), EXACT).value
        assert abs(value - mirrored) <= tol


def test_generalized_dominates_plain():
    rng = np.random.default_rng(19)
    for k in range(20):
        ps = _instance(rng)
        for family in ("anchored", "quadrant"):
            plain = discrepancy(DiscrepancyKind(family=family, a=0.5), ps).value
            generalized = discrepancy(DiscrepancyKind(family=family, generalized=True, a=0.5), ps).value
            assert generalized >= plain - 1e-12


@pytest.mark.parametrize("family", ["anchored", "quadrant"])
def test_box_counts_match_direct_membership(family):
    rng = np.random.default_rng(3)
    nodes = rng.random((15, 3))
    nodes[::4, 1] = 0.4
    cells = [_axis_cells(family, 0.4, nodes[:, j]) for j in range(3)]
    mids = np.stack(np.meshgrid(*[c["mid"] for c in cells], indexing="ij"), axis=-1).reshape(-1, 3)
    inside = np.ones((len(mids), 15), dtype=bool)
    for j in range(3):
        inside &= _inside(family, 0.4, nodes[None, :, j], mids[:, j, None])
    expected = inside.sum(axis=1).reshape(tuple(len(c["mid"]) for c in cells))
    assert np.array_equal(_box_counts(family, 0.4, nodes, cells), expected)


def test_box_exact_memory_is_linear_in_nodes():
    ps = PointSet(d=1, nodes=np.random.default_rng(6).random((4000, 1)))
    kind = DiscrepancyKind(family="anchored", a=0.5)
    tracemalloc.start()
    try:
        value = discrepancy(kind, ps, EXACT).value
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    # a dense box-by-node table alone would need 16 MB here
    assert peak < 4_000_000
    assert value == pytest.approx(discrepancy(kind, ps).value, rel=1e-8)
