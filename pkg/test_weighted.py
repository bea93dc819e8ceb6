import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import cauchy, norm

from cursekit.errors import DivergenceError
from cursekit.numerics import integrate
from cursekit.weighted import (
    WeightedSpec,
    check_condition,
    psi_kernel,
    standard_normal,
    worst_case_function_weighted,
)


def uniform_density(x):
    return 0.5 * (np.abs(x) <= 1.0)


@pytest.mark.parametrize("r", [1, 2])
@pytest.mark.parametrize("p", [2.0, 3.0])
def test_standard_normal_decomposition(r, p):
    dec = worst_case_function_weighted(standard_normal(r=r, p=p))
    assert abs(dec.I0 - dec.I1) <= 1e-10
    assert dec.alpha == 0.5
    assert dec.a == 0.0
    for t in np.linspace(0.0, 5.0, 11):
        assert abs(dec.h1(t) - dec.h1(-t)) <= 1e-9
    assert dec.initial_error_1d > 0


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_nested_grid_matches_direct_quadrature(p):
    spec = standard_normal(r=1, p=p)
    dec = worst_case_function_weighted(spec)
    for t in np.linspace(-3.0, 3.0, 21):
        oracle = integrate(lambda y: norm.sf(y) ** (p - 1), 0.0, abs(float(t)))
        assert dec.h1(t) == pytest.approx(oracle, abs=1e-6)


def test_psi_kernel_r1_is_tail_probability():
    spec = standard_normal(r=1, q=2.0)
    assert psi_kernel(spec, 0.7) == pytest.approx(norm.sf(0.7), abs=1e-12)
    assert psi_kernel(spec, -0.7) == pytest.approx(-norm.sf(0.7), abs=1e-12)


def test_condition_finite_for_gaussian():
    assert check_condition(standard_normal(r=2, p=3.0)) > 0


def test_condition_diverges_for_cauchy():
    spec = WeightedSpec(r=2, p=3.0, density=cauchy.pdf, density_name="cauchy")
    with pytest.raises(DivergenceError):
        check_condition(spec)
    with pytest.raises(DivergenceError):
        worst_case_function_weighted(spec)


def test_compact_support_uniform():
    spec = WeightedSpec(r=1, p=2.0, density=uniform_density, density_name="uniform", support_radius=1.0)
    assert spec.cutoff == 1.0
    dec = worst_case_function_weighted(spec)
    # Psi_1(t) = (1 - t)/2, h1(t) = (t - t^2/2)/2, int_0^1 h1/2 = 1/12
    assert dec.I0 == pytest.approx(1 / 12, abs=1e-10)
    assert dec.h1(0.5) == pytest.approx(0.1875, abs=1e-8)


def test_density_validation():
    with pytest.raises(ValidationError):
        WeightedSpec(r=1, p=2.0, density=lambda x: 2 * norm.pdf(x))
    with pytest.raises(ValidationError):
        WeightedSpec(r=1, p=2.0, density=lambda x: norm.pdf(x - 0.5))


@pytest.mark.parametrize("r", [1, 2])
@pytest.mark.parametrize("p", [2.0, 3.0])
def test_h1_nondecreasing_in_abs_t(r, p):
    dec = worst_case_function_weighted(standard_normal(r=r, p=p))
    values = [dec.h1(t) for t in np.linspace(0.0, 8.0, 161)]
    assert all(y >= x - 1e-10 for x, y in zip(values, values[1:]))
    assert dec.h1(-2.5) == pytest.approx(dec.h1(2.5), abs=1e-9)
