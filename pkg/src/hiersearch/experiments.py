"""Sweep harness: fixed-fanout baseline, growing-fanout hybrid, beta and omega sweeps.

Every measured row carries the seed it was run with; rerunning a row with
that seed reproduces it exactly, independent of the other rows.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from hiersearch import streams
from hiersearch.costmodel import (
    CostParams,
    fit_scaling_exponent,
    objective,
    optimal_fanout,
    predicted_total_time,
    solve_stationarity,
)
from hiersearch.hierarchy import TreeParams
from hiersearch.netgen import GraphParams, generate
from hiersearch.simulate import RoutingConfig, run_trials

log = logging.getLogger(__name__)

DEFAULT_TRIALS = 2000


@dataclass(frozen=True)
class SweepConfig:
    beta: float = 1.0
    c_k: float = 1.0
    cost: CostParams = field(default_factory=CostParams)
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    routing: RoutingConfig = field(default_factory=RoutingConfig)


@dataclass(frozen=True)
class SweepRecord:
    n: int
    b: int
    h: int
    N: int
    beta: float
    omega: float
    c_k: float
    seed: int
    mean_hops: float
    failure_rate: float
    t_predicted: float
    x_objective: float
    b_star_continuous: float


FIELDS = tuple(f.name for f in fields(SweepRecord))


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    sse: float


@dataclass(frozen=True)
class FitReport:
    model_logn: LinearFit
    model_logn_over_loglogn: LinearFit
    preferred: str  # "logn" or "logn_over_loglogn"

    def to_dict(self):
        return asdict(self)


def row_seed(seed: int, index: int) -> int:
    return streams.derive_seed(seed, streams.SWEEP, index)


def nearest_height(n_target: float, b: int, min_h: int = 2) -> int:
    return max(min_h, int(round(math.log(n_target) / math.log(b))))


def measure_row(tree: TreeParams, cfg: SweepConfig, seed: int, b_star: float | None = None) -> SweepRecord:
    """Generate one graph, route ``cfg.trials`` messages, attach the analytics."""
    n = tree.n
    graph = generate(GraphParams(tree, cfg.beta, cfg.c_k, seed))
    stats = run_trials(graph, cfg.trials, cfg.routing, seed, cfg.cost)
    if b_star is None:
        b_star = optimal_fanout(n, cfg.cost).b_star if n >= 16 else math.nan
    return SweepRecord(
        n=n,
        b=tree.b,
        h=tree.h,
        N=tree.N,
        beta=float(cfg.beta),
        omega=float(cfg.cost.omega),
        c_k=float(cfg.c_k),
        seed=seed,
        mean_hops=stats.mean_hops,
        failure_rate=stats.failure_rate,
        t_predicted=predicted_total_time(n, cfg.cost, tree.b),
        x_objective=objective(n, tree.b, cfg.cost).objective,
        b_star_continuous=b_star,
    )


def _run_jobs(jobs, workers):
    # jobs: list of (tree, cfg, seed, b_star); output order follows input order
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(measure_row, *zip(*jobs)))
    return [measure_row(*job) for job in jobs]


def _tree_or_skip(b, h, target):
    try:
        return TreeParams(b, h)
    except OverflowError:
        warnings.warn(f"skipping target n={target}: b^h = {b}^{h} overflows", RuntimeWarning, stacklevel=3)
        return None


def hybrid_sweep(n_targets, cfg: SweepConfig = SweepConfig(), workers: int = 1) -> list[SweepRecord]:
    """Community size follows the cost optimum: ``b = round(b*)``, ``n`` snapped to ``b^h``."""
    jobs = []
    for i, target in enumerate(n_targets):
        if not target >= 16:
            raise ValueError(f"hybrid targets must be >= 16, got {target!r}")
        b_star = optimal_fanout(target, cfg.cost).b_star
        b = max(2, int(round(b_star)))
        tree = _tree_or_skip(b, nearest_height(target, b), target)
        if tree is not None:
            jobs.append((tree, cfg, row_seed(cfg.seed, i), b_star))
    rows = _run_jobs(jobs, workers)
    counts = [r.N for r in rows]
    if any(a > c for a, c in zip(counts, counts[1:])):
        warnings.warn(f"community count not non-decreasing along hybrid sweep: {counts}", RuntimeWarning, stacklevel=2)
    return rows


def fixed_b_sweep(n_targets, b: int, cfg: SweepConfig = SweepConfig(), workers: int = 1) -> list[SweepRecord]:
    """Kleinberg-style baseline: the fanout never changes."""
    if int(b) != b or b < 2:
        raise ValueError(f"b must be an integer >= 2, got {b!r}")
    jobs = []
    for i, target in enumerate(n_targets):
        tree = _tree_or_skip(int(b), nearest_height(target, b), target)
        if tree is not None:
            jobs.append((tree, cfg, row_seed(cfg.seed, i), None))
    return _run_jobs(jobs, workers)


def beta_sweep(tree: TreeParams, betas, cfg: SweepConfig = SweepConfig(), workers: int = 1) -> list[SweepRecord]:
    """Same tree and seed for every beta, so only the link law changes."""
    seed = row_seed(cfg.seed, 0)
    jobs = [(tree, _with(cfg, beta=float(beta)), seed, None) for beta in betas]
    return _run_jobs(jobs, workers)


def _with(cfg: SweepConfig, **kw) -> SweepConfig:
    d = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    d.update(kw)
    return SweepConfig(**d)


def omega_sweep(n: float, omegas, cost: CostParams = CostParams()) -> list[tuple[float, float, float]]:
    """``(omega, b_star, t_predicted)`` for each omega at fixed ``n``."""
    rows = []
    for w in omegas:
        if not 0 < w <= 1:
            raise ValueError(f"omega must lie in (0, 1], got {w!r}")
        p = CostParams(cost.kappa1, cost.kappa2, cost.kappa3, cost.kappa4, float(w))
        b_star = optimal_fanout(n, p).b_star
        rows.append((float(w), b_star, predicted_total_time(n, p, b_star)))
    return rows


def scaling_fit(n_grid, cost: CostParams = CostParams(), method: str = "stationarity", variant: str = "base"):
    """Fit ``ln b ~ epsilon ln ln n`` with ``b`` from the stationarity root or the optimiser.

    Returns ``(epsilon, intercept, r_squared, b_values)``.
    """
    if method == "stationarity":
        bs = [solve_stationarity(n, cost, variant) for n in n_grid]
    elif method == "optimum":
        bs = [optimal_fanout(n, cost).b_star for n in n_grid]
    else:
        raise ValueError(f"unknown method {method!r}")
    eps, icpt, r2 = fit_scaling_exponent(n_grid, bs)
    return eps, icpt, r2, bs


def time_comparison(n_grid, cost: CostParams = CostParams(), fixed_b: float = 2.0):
    """Analytic total time with the optimal fanout versus a fixed fanout.

    One dict per ``n`` with ``b_star``, ``t_hybrid``, ``t_fixed`` and the
    normalised ``r = t_hybrid * ln ln n / ln n``.
    """
    out = []
    for n in n_grid:
        b_star = optimal_fanout(n, cost).b_star
        t_h = predicted_total_time(n, cost, b_star)
        t_f = predicted_total_time(n, cost, fixed_b)
        ln_n = math.log(n)
        out.append(dict(n=float(n), b_star=b_star, t_hybrid=t_h, t_fixed=t_f, r=t_h * math.log(ln_n) / ln_n))
    return out


def _lstsq(x, y) -> LinearFit:
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return LinearFit(float(coef[0]), float(coef[1]), float(resid @ resid))


def fit_hop_models(records) -> FitReport:
    """Fit mean hops to ``a ln N + c`` and to ``a ln N / ln ln N + c``.

    At desk-scale N the two regressors are nearly proportional, so the
    preferred model is a weak indication only.
    """
    rows = [r for r in records if not math.isnan(_get(r, "mean_hops"))]
    if len(rows) < 5:
        raise ValueError(f"need at least 5 records with measured hops, got {len(rows)}")
    N = np.array([_get(r, "N") for r in rows], dtype=float)
    if np.any(N <= math.e):
        raise ValueError("every record needs N > e so that ln ln N > 0")
    y = np.array([_get(r, "mean_hops") for r in rows], dtype=float)
    ln_n = np.log(N)
    a = _lstsq(ln_n, y)
    b = _lstsq(ln_n / np.log(ln_n), y)
    return FitReport(a, b, "logn" if a.sse <= b.sse else "logn_over_loglogn")


def _get(r, name):
    return r[name] if isinstance(r, dict) else getattr(r, name)


def _timestamp():
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def _cell(v):
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(records, path_or_file, fieldnames=FIELDS) -> None:
    """CSV with a ``# generated ...`` first line, then a header and data rows.

    Only the first line varies between reruns.
    """
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        fh.write(f"# generated {_timestamp()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fieldnames)
        for r in records:
            w.writerow([_cell(_get(r, k)) for k in fieldnames])
    finally:
        if own:
            fh.close()


def write_json(records, path_or_file, fieldnames=FIELDS) -> None:
    doc = {"generated": _timestamp(), "records": [{k: _get(r, k) for k in fieldnames} for r in records]}
    text = json.dumps(doc, indent=1, allow_nan=True) + "\n"
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w") as fh:
            fh.write(text)
    else:
        path_or_file.write(text)


_CASTS = {f.name: (int if f.type in ("int", int) else float) for f in fields(SweepRecord)}


def read_records(path) -> list[SweepRecord]:
    """Load sweep rows written by :func:`write_csv` or :func:`write_json`."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)["records"]
    else:
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        raw = list(csv.DictReader(lines))
    out = []
    for row in raw:
        missing = [k for k in FIELDS if k not in row]
        if missing:
            raise ValueError(f"{path}: record lacks fields {missing}")
        out.append(SweepRecord(**{k: _CASTS[k](row[k]) for k in FIELDS}))
    return out
