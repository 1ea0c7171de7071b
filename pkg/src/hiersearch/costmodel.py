"""Participation costs, communication times and the community-size tradeoff.

For ``n`` individuals split into communities of ``b``::

    c_local  = k1 * n * (b - 1)                 clique upkeep
    c_global = k2 * (n/b) * ln(n/b)^2            inter-community links
    t_local  = k3 * b^omega                      omega=0: constant, omega=1: serial relay
    t_global = k4 * log_b(n/b)
    X        = ln c_local + ln c_global + t_local + t_global

``b`` is a real number here. Logs are natural except for the ``log_b`` in
``t_global``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

GRID_POINTS = 512
INV_PHI = (math.sqrt(5) - 1) / 2


class DomainError(ValueError):
    pass


class NoRootError(ValueError):
    """The stationarity equation has no solution on ``(1, n/2]``."""

    def __init__(self, msg, boundary):
        super().__init__(msg)
        self.boundary = boundary


@dataclass(frozen=True)
class CostParams:
    kappa1: float = 1.0
    kappa2: float = 1.0
    kappa3: float = 1.0
    kappa4: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "kappa3", "kappa4"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if not 0 <= self.omega <= 1:
            raise ValueError(f"omega must lie in [0, 1], got {self.omega!r}")


@dataclass(frozen=True)
class CostBreakdown:
    c_local: float
    c_global: float
    t_local: float
    t_global: float
    objective: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class OptimumReport:
    b_star: float
    x_star: float
    boundary: str  # "interior", "lower-boundary" or "upper-boundary"
    stationarity_residual: float

    def to_dict(self):
        return asdict(self)


def _check_domain(n, b):
    if not n >= 4:
        raise DomainError(f"n must be >= 4, got {n!r}")
    if not 2 <= b <= n / 2:
        raise DomainError(f"b must lie in [2, n/2] = [2, {n / 2:g}], got {b!r}")


def participation_costs(n: float, b: float, p: CostParams) -> tuple[float, float]:
    _check_domain(n, b)
    c_local = p.kappa1 * n * (b - 1)
    c_global = p.kappa2 * (n / b) * math.log(n / b) ** 2
    return c_local, c_global


def comm_times(n: float, b: float, p: CostParams) -> tuple[float, float]:
    _check_domain(n, b)
    t_local = p.kappa3 * b**p.omega
    t_global = p.kappa4 * (math.log(n) / math.log(b) - 1.0)
    return t_local, t_global


def objective(n: float, b: float, p: CostParams) -> CostBreakdown:
    c_local, c_global = participation_costs(n, b, p)
    t_local, t_global = comm_times(n, b, p)
    x = math.log(c_local) + math.log(c_global) + t_local + t_global
    return CostBreakdown(c_local, c_global, t_local, t_global, x)


def objective_value(n: float, b: float, p: CostParams) -> float:
    return objective(n, b, p).objective


def expanded_objective(n: float, b: float, p: CostParams) -> float:
    """X written out term by term, keeping ``ln(b - 1)``."""
    _check_domain(n, b)
    ln_n = math.log(n)
    return (
        math.log(p.kappa1)
        + math.log(p.kappa2)
        + ln_n
        + math.log(b - 1)
        + math.log(n / b)
        + 2 * math.log(math.log(n / b))
        + p.kappa3 * b**p.omega
        + p.kappa4 * (ln_n / math.log(b) - 1)
    )


def objective_gradient(n: float, b: float, p: CostParams) -> float:
    """dX/db of the exact objective."""
    _check_domain(n, b)
    ln_b = math.log(b)
    grad = 1.0 / (b - 1) - 1.0 / b - 2.0 / (b * math.log(n / b))
    grad -= p.kappa4 * math.log(n) / (b * ln_b * ln_b)
    if p.omega != 0:
        grad += p.kappa3 * p.omega * b ** (p.omega - 1)
    return grad


def _g(b, p, variant):
    if variant == "base":
        return b
    if variant == "omega":
        return p.omega * b**p.omega
    raise ValueError(f"unknown variant {variant!r}; expected 'base' or 'omega'")


def stationarity_residual(n: float, b: float, p: CostParams, variant: str = "base") -> float:
    """``(ln b)^2 (g(b) - 2/ln(n/b)) - k4 ln n``, with ``g(b) = b`` or ``omega b^omega``.

    Zero at the first-order optimum as derived with ``ln(b-1)`` folded away.
    """
    _check_domain(n, b)
    ln_b = math.log(b)
    return ln_b * ln_b * (_g(b, p, variant) - 2.0 / math.log(n / b)) - p.kappa4 * math.log(n)


def solve_stationarity(n: float, p: CostParams, variant: str = "base", max_iter: int = 400) -> float:
    """Root of ``g(b) (ln b)^2 = k4 ln n`` on ``(1, n/2]`` by bisection.

    The left side is increasing in ``b``, so the root is unique when it exists.
    Raises :class:`NoRootError` when even ``b = n/2`` leaves the left side short.
    """
    if not n >= 16:
        raise DomainError(f"n must be >= 16, got {n!r}")
    if variant == "omega" and not p.omega > 0:
        raise NoRootError("omega variant has no root for omega = 0: left side is identically 0", "upper-boundary")
    target = p.kappa4 * math.log(n)
    tol = 1e-9 * target

    def f(b):
        lb = math.log(b)
        return _g(b, p, variant) * lb * lb - target

    lo, hi = 1.0, n / 2
    f_hi = f(hi)
    if f_hi < -tol:
        raise NoRootError(
            f"no root of g(b)(ln b)^2 = {target:g} on (1, {hi:g}]: left side reaches only {f_hi + target:g}",
            "upper-boundary",
        )
    if abs(f_hi) <= tol:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol or mid in (lo, hi):
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_section(f, a: float, c: float, rtol: float = 1e-8, max_iter: int = 500) -> float:
    """Minimiser of ``f`` on ``[a, c]``, assuming a single minimum inside."""
    x1 = c - INV_PHI * (c - a)
    x2 = a + INV_PHI * (c - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if c - a <= rtol * 0.5 * (abs(a) + abs(c)):
            break
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - INV_PHI * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (c - a)
            f2 = f(x2)
    return x1 if f1 <= f2 else x2


def optimal_fanout(n: float, p: CostParams, grid_points: int = GRID_POINTS) -> OptimumReport:
    """Minimise the exact X over real ``b`` in ``[2, n/2]``.

    X need not be unimodal on the whole range, so a log-spaced grid picks the
    basin and golden-section search refines it.
    """
    if not n >= 16:
        raise DomainError(f"n must be >= 16, got {n!r}")
    lo, hi = 2.0, n / 2
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), grid_points))
    grid[0], grid[-1] = lo, hi
    xs = np.array([objective_value(n, b, p) for b in grid])
    i = int(np.argmin(xs))
    f = lambda b: objective_value(n, b, p)
    a, c = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    b_star = golden_section(f, a, c)
    x_star = f(b_star)
    if xs[i] < x_star:
        b_star, x_star = float(grid[i]), float(xs[i])
    # the golden search never evaluates the bracket ends; a boundary minimum shows up here
    for edge in (lo, hi):
        if a <= edge <= c:
            fe = f(edge)
            if fe <= x_star:
                b_star, x_star = edge, fe
    if math.isclose(b_star, lo, rel_tol=1e-6):
        boundary = "lower-boundary"
    elif math.isclose(b_star, hi, rel_tol=1e-6):
        boundary = "upper-boundary"
    else:
        boundary = "interior"
    variant = "omega" if p.omega > 0 else "base"
    return OptimumReport(float(b_star), float(x_star), boundary, stationarity_residual(n, b_star, p, variant))


def fit_scaling_exponent(n_grid, b_values) -> tuple[float, float, float]:
    """Least-squares fit ``ln b = epsilon * ln ln n + intercept``.

    Returns ``(epsilon, intercept, r_squared)``. A constant ``b`` gives
    ``epsilon = 0`` and ``r_squared = 1`` (the fit is exact).
    """
    n_grid = np.asarray(n_grid, dtype=float)
    b_values = np.asarray(b_values, dtype=float)
    if n_grid.shape != b_values.shape or n_grid.ndim != 1:
        raise ValueError("n_grid and b_values must be 1-d and equally long")
    if len(n_grid) < 8:
        raise ValueError(f"need at least 8 grid points, got {len(n_grid)}")
    if np.any(n_grid <= math.e) or np.any(b_values <= 0):
        raise ValueError("need n > e and b > 0 so that ln ln n and ln b exist")
    if np.ptp(n_grid) == 0:
        raise ValueError("degenerate grid: all n are equal")
    if n_grid.max() / n_grid.min() < 2.0**30:
        raise ValueError("grid must span at least a factor 2^30 in n")
    x = np.log(np.log(n_grid))
    y = np.log(b_values)
    if np.ptp(y) == 0:
        return 0.0, float(y[0]), 1.0
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


def predicted_total_time(n: float, p: CostParams, b: float) -> float:
    t_local, t_global = comm_times(n, b, p)
    return t_local + t_global
