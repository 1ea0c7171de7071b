import inspect
import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hiersearch import costmodel
from hiersearch.costmodel import (
    CostParams,
    DomainError,
    NoRootError,
    comm_times,
    expanded_objective,
    fit_scaling_exponent,
    golden_section,
    objective,
    objective_gradient,
    optimal_fanout,
    participation_costs,
    predicted_total_time,
    solve_stationarity,
    stationarity_residual,
)

UNIT = CostParams()


def mp_objective(n, b, p):
    """The objective in 50-digit arithmetic, written from the cost definitions."""
    n, b = mpmath.mpf(n), mpmath.mpf(b)
    c_local = p.kappa1 * n * (b - 1)
    c_global = p.kappa2 * (n / b) * mpmath.log(n / b) ** 2
    t_local = p.kappa3 * b ** mpmath.mpf(p.omega)
    t_global = p.kappa4 * (mpmath.log(n) / mpmath.log(b) - 1)
    return mpmath.log(c_local) + mpmath.log(c_global) + t_local + t_global


def fd_gradient(n, b, p):
    with mpmath.workdps(50):
        h = mpmath.mpf(b) * mpmath.mpf("1e-5")
        return float((mp_objective(n, b + h, p) - mp_objective(n, b - h, p)) / (2 * h))


def test_cost_params_validation():
    with pytest.raises(ValueError):
        CostParams(kappa1=0)
    with pytest.raises(ValueError):
        CostParams(omega=1.5)
    with pytest.raises(ValueError):
        CostParams(omega=-0.1)


def test_participation_cost_examples():
    c_local, c_global = participation_costs(16, 4, UNIT)
    assert c_local == 48
    assert c_global == pytest.approx(4 * math.log(4) ** 2, rel=1e-15)
    assert c_global == pytest.approx(7.6872, abs=1e-4)
    assert participation_costs(16, 2, UNIT)[0] == 16


@pytest.mark.parametrize("n, b", [(16, 1.5), (16, 9), (3, 2), (100, 51)])
def test_domain_errors(n, b):
    with pytest.raises(DomainError):
        objective(n, b, UNIT)


def test_comm_time_examples():
    assert comm_times(16, 4, UNIT) == (1.0, 1.0)
    assert comm_times(16, 4, CostParams(omega=1))[0] == 4
    assert comm_times(2**20, 2**10, CostParams(kappa4=3))[1] == pytest.approx(3.0, rel=1e-14)


def test_objective_example():
    expected = math.log(48) + math.log(4 * math.log(4) ** 2) + 1 + 1
    br = objective(16, 4, UNIT)
    assert br.objective == pytest.approx(expected, rel=1e-15)
    assert br.objective == pytest.approx(7.91076, abs=1e-5)
    assert br.objective == pytest.approx(math.log(br.c_local) + math.log(br.c_global) + br.t_local + br.t_global)


def test_scaling_kappa1_by_e_adds_one():
    a = objective(1000, 7.3, UNIT).objective
    b = objective(1000, 7.3, CostParams(kappa1=math.e)).objective
    assert b - a == pytest.approx(1.0, abs=1e-12)


def test_exact_equals_expanded_form():
    rng = random.Random(0)
    for _ in range(1000):
        n = 2 ** rng.uniform(3, 50)
        b = rng.uniform(2, n / 2)
        p = CostParams(*(rng.uniform(0.1, 5) for _ in range(4)), omega=rng.random())
        x = objective(n, b, p).objective
        assert abs(x - expanded_objective(n, b, p)) <= 1e-12 * abs(x)


def test_objective_matches_high_precision():
    rng = random.Random(1)
    for _ in range(50):
        n = 2 ** rng.uniform(4, 40)
        b = rng.uniform(2, n / 2)
        p = CostParams(omega=rng.random())
        assert objective(n, b, p).objective == pytest.approx(float(mp_objective(n, b, p)), rel=1e-12)


def test_gradient_matches_finite_differences():
    rng = random.Random(2)
    for _ in range(100):
        n = 2 ** rng.uniform(8, 40)
        b = rng.uniform(2.5, n / 4)
        p = CostParams(omega=rng.random())
        g, fd = objective_gradient(n, b, p), fd_gradient(n, b, p)
        assert abs(g - fd) <= 1e-6 * abs(fd)


def test_gradient_omega_zero_has_no_kappa3_term():
    a = objective_gradient(2**20, 7.0, CostParams(kappa3=1.0))
    b = objective_gradient(2**20, 7.0, CostParams(kappa3=50.0))
    assert a == b


def test_gradient_negative_when_global_term_dominates():
    n, b, p = 2.0**40, 3.0, UNIT
    big = p.kappa4 * math.log(n) / (b * math.log(b) ** 2)
    rest = 1 / (b - 1) - 1 / b
    assert big > rest
    assert objective_gradient(n, b, p) < 0


@settings(max_examples=60)
@given(st.floats(8, 40), st.floats(0.01, 0.49), st.floats(0.05, 20))
def test_kappa12_scaling_shifts_value_not_argmin(log2n, frac, lam):
    n = 2.0**log2n
    b = 2 + frac * (n - 4)
    p = CostParams(omega=0.5)
    q = CostParams(kappa1=lam, kappa2=lam, omega=0.5)
    assert objective(n, b, q).objective - objective(n, b, p).objective == pytest.approx(2 * math.log(lam), abs=1e-9)


def test_kappa_scaling_leaves_optimum():
    for lam in (0.1, 3.0, 1e4):
        for omega in (0.3, 1.0):
            a = optimal_fanout(2**24, CostParams(omega=omega))
            b = optimal_fanout(2**24, CostParams(kappa1=lam, omega=omega))
            assert b.b_star == pytest.approx(a.b_star, rel=1e-6)
            assert b.x_star - a.x_star == pytest.approx(math.log(lam), abs=1e-9)


def test_stationarity_residual_at_b_equal_e():
    n = 2**20
    r = stationarity_residual(n, math.e, UNIT)
    assert r == pytest.approx((math.e - 2 / math.log(n / math.e)) - math.log(n), rel=1e-13)


def test_stationarity_residual_large_n_limit():
    b = 5.0
    k4 = 3.0
    ln_n = b * math.log(b) ** 2 / k4
    n = math.exp(ln_n)
    r = stationarity_residual(n, b, CostParams(kappa4=k4))
    assert r == pytest.approx(-2 * math.log(b) ** 2 / math.log(n / b), rel=1e-9)


def test_stationarity_omega_variant_negative_for_tiny_omega():
    p = CostParams(omega=1e-9)
    for b in (2.0, 10.0, 1e3, 2**19):
        assert stationarity_residual(2**20, b, p, "omega") < 0
    with pytest.raises(NoRootError):
        solve_stationarity(2**20, p, "omega")
    with pytest.raises(NoRootError):
        solve_stationarity(2**20, CostParams(omega=0.0), "omega")


def test_solve_stationarity_back_substitution():
    n = math.exp(4 * math.e)
    b = solve_stationarity(n, UNIT)
    assert abs(b * math.log(b) ** 2 - math.log(n)) <= 1e-9 * math.log(n)
    # independent root from mpmath
    ref = mpmath.findroot(lambda x: x * mpmath.log(x) ** 2 - 4 * mpmath.e, 4)
    assert b == pytest.approx(float(ref), rel=1e-9)


def test_solve_stationarity_omega_one_equals_base():
    for n in (2**16, 2**30, 2**50):
        assert solve_stationarity(n, CostParams(omega=1.0), "omega") == solve_stationarity(n, UNIT, "base")


def test_solve_stationarity_monotone():
    ns = [2.0**e for e in range(4, 61)]
    roots = [solve_stationarity(n, UNIT) for n in ns]
    assert all(a < b for a, b in zip(roots, roots[1:]))
    assert solve_stationarity(2**30, CostParams(kappa4=2)) > solve_stationarity(2**30, UNIT)


def test_solve_stationarity_no_root_when_n_too_small():
    with pytest.raises(NoRootError):
        solve_stationarity(16, CostParams(kappa4=100))
    with pytest.raises(DomainError):
        solve_stationarity(8, UNIT)


def test_golden_section_on_quadratic():
    x = golden_section(lambda t: (t - 3.3) ** 2, 0.0, 10.0, rtol=1e-10)
    assert x == pytest.approx(3.3, rel=1e-8)


@pytest.mark.parametrize("n, omega", [(16, 0.0), (2**20, 1.0), (2**30, 0.25), (2**12, 0.6), (1e9, 0.0)])
def test_optimal_fanout_beats_dense_grid(n, omega):
    p = CostParams(omega=omega)
    rep = optimal_fanout(n, p)
    assert 2 <= rep.b_star <= n / 2
    grid = np.clip(np.exp(np.linspace(math.log(2), math.log(n / 2), 5000)), 2, n / 2)
    assert rep.x_star <= min(objective(n, b, p).objective for b in grid) + 1e-12
    if rep.boundary == "interior":
        for s in (1 - 1e-3, 1 + 1e-3):
            assert objective(n, rep.b_star * s, p).objective >= rep.x_star - 1e-12


def test_optimal_fanout_boundary_at_omega_zero():
    rep = optimal_fanout(2**20, UNIT)
    assert rep.boundary == "upper-boundary"
    assert rep.b_star == 2**19


def test_optimal_fanout_interior_agrees_roughly_with_stationarity_root():
    rep = optimal_fanout(2**20, CostParams(omega=1.0))
    root = solve_stationarity(2**20, CostParams(omega=1.0), "omega")
    assert rep.boundary == "interior"
    assert abs(rep.b_star - root) <= 0.25 * root


def test_fit_scaling_exponent_synthetic():
    ns = [2.0**e for e in range(10, 61, 5)]
    eps, icpt, r2 = fit_scaling_exponent(ns, [3 * math.log(n) ** 0.5 for n in ns])
    assert eps == pytest.approx(0.5, abs=1e-12)
    assert icpt == pytest.approx(math.log(3), abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    eps, _, _ = fit_scaling_exponent(ns, [4.0] * len(ns))
    assert eps == 0


def test_fit_scaling_exponent_on_solver_output():
    ns = [2.0**e for e in range(10, 61, 5)]
    eps, _, r2 = fit_scaling_exponent(ns, [solve_stationarity(n, UNIT) for n in ns])
    assert 0 < eps < 1


@pytest.mark.parametrize(
    "ns",
    [[2.0**10] * 10, [2.0**e for e in range(10, 17)], [2.0**e for e in range(10, 20)]],
)
def test_fit_scaling_exponent_rejects_bad_grids(ns):
    with pytest.raises(ValueError):
        fit_scaling_exponent(ns, [3.0] * len(ns))


def test_predicted_total_time_examples():
    assert predicted_total_time(16, UNIT, 4) == 2.0
    # fixed b = 2: k4 log2 n - k4 + k3
    for e in (10, 20, 40):
        assert predicted_total_time(2.0**e, UNIT, 2) == pytest.approx(e - 1 + 1, rel=1e-12)
    n = 2.0**40
    p = CostParams(omega=0.5)
    t_global = predicted_total_time(n, p, n / 2) - p.kappa3 * (n / 2) ** 0.5
    assert t_global == pytest.approx(math.log(n) / math.log(n / 2) - 1, rel=1e-9)
    assert t_global < 0.03


def test_costmodel_never_touches_beta():
    assert "beta" not in inspect.getsource(costmodel)
    assert "beta" not in {f for f in CostParams.__dataclass_fields__}
