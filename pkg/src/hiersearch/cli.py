"""Command-line front end.

    hiersearch generate --b 2 --h 10 --seed 7 --graph-out g.txt
    hiersearch route --graph-in g.txt --src 0 --dst 300
    hiersearch cost --n 16 --b 4
    hiersearch optimize --n 2^20 --omega 1
    hiersearch sweep --kind fixed --b 2 --targets 2^9..2^15 --seed 7 -o sweep.csv
    hiersearch fit --input sweep.csv

Options can also come from ``--config FILE`` (``key = value`` lines or a JSON
object, keys spelled like the long flags with ``_`` or ``-``); flags win.
Exit codes: 0 ok, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from hiersearch import costmodel, experiments, netgen, simulate, streams
from hiersearch.costmodel import CostParams
from hiersearch.hierarchy import TreeParams

log = logging.getLogger("hiersearch")

COMMANDS = ("generate", "route", "cost", "optimize", "sweep", "fit")
SWEEP_KINDS = ("fixed", "hybrid", "beta", "omega", "time")

DEFAULTS = dict(
    beta=1.0,
    c_k=1.0,
    kappa1=1.0,
    kappa2=1.0,
    kappa3=1.0,
    kappa4=1.0,
    omega=0.0,
    trials=experiments.DEFAULT_TRIALS,
    seed=0,
    fallback="random-neighbor",
    format="csv",
    workers=1,
    scaling="stationarity",
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    # tree
    b: int | None = None
    h: int | None = None
    n: float | None = None
    # model
    beta: float = 1.0
    c_k: float = 1.0
    kappa1: float = 1.0
    kappa2: float = 1.0
    kappa3: float = 1.0
    kappa4: float = 1.0
    omega: float = 0.0
    # run
    trials: int = experiments.DEFAULT_TRIALS
    seed: int = 0
    hop_budget: int | None = None
    fallback: str = "random-neighbor"
    per_hop_local: bool = False
    workers: int = 1
    src: int | None = None
    dst: int | None = None
    kind: str | None = None
    targets: list | None = None
    betas: list | None = None
    omegas: list | None = None
    variant: str | None = None
    scaling: str = "stationarity"
    # io
    output: str | None = None
    format: str = "csv"
    graph_in: str | None = None
    graph_out: str | None = None
    trials_out: str | None = None
    input: str | None = None

    @property
    def cost(self) -> CostParams:
        return CostParams(self.kappa1, self.kappa2, self.kappa3, self.kappa4, self.omega)


def parse_number(text) -> float:
    """Accept ``1048576``, ``1e6`` and ``2^20``."""
    if isinstance(text, (int, float)):
        return text
    s = str(text).strip()
    if "^" in s:
        base, exp = s.split("^", 1)
        return float(base) ** float(exp)
    return float(s)


def parse_int(text) -> int:
    x = parse_number(text)
    if x != int(x):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(x)


def parse_list(text) -> list:
    """Comma list of numbers; ``2^a..2^b`` expands to every power in between."""
    if isinstance(text, list):
        return [parse_number(x) for x in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            if "^" not in lo or "^" not in hi:
                raise argparse.ArgumentTypeError(f"ranges must look like 2^a..2^b, got {part!r}")
            base, a = lo.split("^")
            base2, z = hi.split("^")
            if base != base2:
                raise argparse.ArgumentTypeError(f"range endpoints need the same base: {part!r}")
            step = 1
            if ":" in z:
                z, step = z.split(":")
            out.extend(float(base) ** e for e in range(int(a), int(z) + 1, int(step)))
        elif part:
            out.append(parse_number(part))
    return out


def _num_or_int(x):
    return int(x) if float(x).is_integer() and abs(x) < 2**63 else x


_TYPES = {
    "b": parse_number, "h": parse_int, "n": parse_number, "beta": float, "c_k": float,
    "kappa1": float, "kappa2": float, "kappa3": float, "kappa4": float, "omega": float,
    "trials": parse_int, "seed": parse_int, "hop_budget": parse_int, "workers": parse_int,
    "src": parse_int, "dst": parse_int, "targets": parse_list, "betas": parse_list, "omegas": parse_list,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hiersearch", description="Hierarchical community network search and cost model.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file or JSON object; flags override it")
        p.add_argument("-o", "--output", help="write results here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=None)

    def model(p, graph=True, cost=True):
        if graph:
            p.add_argument("--b", type=parse_int, help="fanout / community size")
            p.add_argument("--h", type=parse_int, help="tree height")
            p.add_argument("--beta", type=float)
            p.add_argument("--c-k", dest="c_k", type=float, help="out-degree coefficient")
            p.add_argument("--seed", type=parse_int)
        if cost:
            for k in ("kappa1", "kappa2", "kappa3", "kappa4"):
                p.add_argument(f"--{k}", type=float)
            p.add_argument("--omega", type=float)

    def routing(p):
        p.add_argument("--trials", type=parse_int)
        p.add_argument("--hop-budget", type=parse_int)
        p.add_argument("--fallback", choices=simulate.FALLBACKS)
        p.add_argument("--per-hop-local", action="store_true", default=None)

    p = sub.add_parser("generate", help="build a community graph")
    common(p)
    model(p, cost=False)
    p.add_argument("--graph-out")

    p = sub.add_parser("route", help="greedy routing on a graph")
    common(p)
    model(p)
    routing(p)
    p.add_argument("--graph-in")
    p.add_argument("--src", type=parse_int)
    p.add_argument("--dst", type=parse_int)
    p.add_argument("--trials-out", help="per-trial CSV")

    p = sub.add_parser("cost", help="evaluate costs and objective at (n, b)")
    common(p)
    model(p, graph=False)
    p.add_argument("--n", type=parse_number)
    p.add_argument("--b", type=parse_number)

    p = sub.add_parser("optimize", help="optimal fanout for population n")
    common(p)
    model(p, graph=False)
    p.add_argument("--n", type=parse_number)
    p.add_argument("--variant", choices=("base", "omega"), help="also report the stationarity root")

    p = sub.add_parser("sweep", help="run an experiment sweep")
    common(p)
    model(p)
    routing(p)
    p.add_argument("--kind", choices=SWEEP_KINDS)
    p.add_argument("--targets", type=parse_list, help="n values, e.g. 256,1024 or 2^9..2^15")
    p.add_argument("--betas", type=parse_list)
    p.add_argument("--omegas", type=parse_list)
    p.add_argument("--n", type=parse_number)
    p.add_argument("--workers", type=parse_int)

    p = sub.add_parser("fit", help="fit hop-count models or the fanout scaling exponent")
    common(p)
    model(p, graph=False)
    p.add_argument("--input", help="sweep CSV/JSON to fit hop models to")
    p.add_argument("--scaling", choices=("stationarity", "optimum"), default=None)
    p.add_argument("--variant", choices=("base", "omega"))
    p.add_argument("--targets", type=parse_list)
    return parser


def load_config_file(path) -> dict:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for i, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{i}: expected 'key = value'")
            k, v = line.split("=", 1)
            raw[k.strip()] = v.strip()
    known = {f.name for f in fields(RunConfig)} - {"command"}
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}: unknown config key {k!r}")
        conv = _TYPES.get(key)
        try:
            if key == "per_hop_local":
                v = v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes")
            elif conv is not None:
                v = conv(v)
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise UsageError(f"{path}: bad value for {k!r}: {e}") from None
        out[key] = v
    return out


def parse_config(argv=None) -> RunConfig:
    """argv -> RunConfig, validating every domain constraint.

    Raises UsageError for bad values; argparse itself exits with code 2 on
    malformed flags.
    """
    ns = build_parser().parse_args(argv)
    values = dict(DEFAULTS)
    if getattr(ns, "config", None):
        values.update(load_config_file(ns.config))
    for k, v in vars(ns).items():
        if k in ("config", "verbose") or v is None:
            continue
        values[k] = v
    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in values.items() if k in known})
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    _validate(cfg)
    return cfg


def _require(cfg, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"{cfg.command}: missing required {', '.join(missing)}")


def _validate(cfg: RunConfig) -> None:
    try:
        cfg.cost  # kappa/omega constraints
        simulate.RoutingConfig(cfg.hop_budget, cfg.fallback)
        if cfg.beta < 0:
            raise ValueError(f"beta must be >= 0, got {cfg.beta}")
        if cfg.c_k <= 0:
            raise ValueError(f"c_k must be > 0, got {cfg.c_k}")
        if cfg.trials < 1:
            raise ValueError(f"trials must be >= 1, got {cfg.trials}")
        if not 0 <= cfg.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}")
    except ValueError as e:
        raise UsageError(str(e)) from None
    c = cfg.command
    if c == "generate":
        _require(cfg, "b", "h")
    elif c == "route":
        if cfg.graph_in is None:
            _require(cfg, "b", "h")
        if (cfg.src is None) != (cfg.dst is None):
            raise UsageError("route: give both --src and --dst, or neither to run --trials")
    elif c == "cost":
        _require(cfg, "n", "b")
        if not cfg.n >= 4:
            raise UsageError(f"cost: n must be >= 4, got {cfg.n:g}")
        if not 2 <= cfg.b <= cfg.n / 2:
            raise UsageError(f"cost: b must satisfy 2 <= b <= n/2 = {cfg.n / 2:g}, got {cfg.b:g}")
    elif c == "optimize":
        _require(cfg, "n")
        if not cfg.n >= 16:
            raise UsageError(f"optimize: n must be >= 16, got {cfg.n:g}")
    elif c == "sweep":
        _require(cfg, "kind")
        if cfg.kind == "fixed":
            _require(cfg, "b", "targets")
        elif cfg.kind in ("hybrid", "time"):
            _require(cfg, "targets")
            if min(cfg.targets) < 16:
                raise UsageError(f"sweep {cfg.kind}: every target must be >= 16")
        elif cfg.kind == "beta":
            _require(cfg, "b", "h", "betas")
        elif cfg.kind == "omega":
            _require(cfg, "n", "omegas")
            if any(not 0 < w <= 1 for w in cfg.omegas):
                raise UsageError("sweep omega: every omega must lie in (0, 1]")
    elif c == "fit":
        if cfg.input is None:
            _require(cfg, "targets")
    if cfg.b is not None and cfg.h is not None and c in ("generate", "route", "sweep"):
        try:
            TreeParams(cfg.b, cfg.h)
        except (ValueError, OverflowError) as e:
            raise UsageError(str(e)) from None


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg, obj):
    _emit(cfg, json.dumps(obj, indent=2) + "\n")


def _emit_records(cfg, records, fieldnames):
    buf = io.StringIO()
    if cfg.format == "json":
        experiments.write_json(records, buf, fieldnames)
    else:
        experiments.write_csv(records, buf, fieldnames)
    _emit(cfg, buf.getvalue())


def _graph(cfg: RunConfig) -> netgen.CommunityGraph:
    if cfg.graph_in:
        return netgen.read_graph(cfg.graph_in)
    return netgen.generate(netgen.GraphParams(TreeParams(cfg.b, cfg.h), cfg.beta, cfg.c_k, cfg.seed))


def _sweep_cfg(cfg: RunConfig) -> experiments.SweepConfig:
    return experiments.SweepConfig(
        cfg.beta, cfg.c_k, cfg.cost, cfg.trials, cfg.seed,
        simulate.RoutingConfig(cfg.hop_budget, cfg.fallback, bool(cfg.per_hop_local)),
    )


def _run(cfg: RunConfig) -> None:
    c = cfg.command
    if c == "generate":
        g = _graph(cfg)
        if cfg.graph_out:
            netgen.write_graph(g, cfg.graph_out)
        else:
            _emit(cfg, netgen.format_graph(g))
        log.info("generated N=%d communities, k_target=%d", g.N, g.k_target)
    elif c == "route":
        g = _graph(cfg)
        rc = simulate.RoutingConfig(cfg.hop_budget, cfg.fallback, bool(cfg.per_hop_local))
        if cfg.src is not None:
            rng = streams.stream(cfg.seed, streams.TRIALS, 0)
            out = simulate.greedy_route(g, cfg.src, cfg.dst, rc, rng, cfg.cost)
            _emit(cfg, json.dumps(dict(src=cfg.src, dst=cfg.dst, **asdict(out))) + "\n")
        else:
            recs = simulate.simulate_trials(g, cfg.trials, rc, cfg.seed, cfg.cost)
            if cfg.trials_out:
                simulate.write_trials_csv(recs, cfg.trials_out)
            st = simulate.summarize(recs)
            _emit_json(cfg, dict(asdict(st), ci95=list(st.ci95())))
    elif c == "cost":
        br = costmodel.objective(cfg.n, cfg.b, cfg.cost)
        _emit_json(cfg, dict(n=cfg.n, b=cfg.b, **br.to_dict(), dX_db=costmodel.objective_gradient(cfg.n, cfg.b, cfg.cost)))
    elif c == "optimize":
        rep = costmodel.optimal_fanout(cfg.n, cfg.cost)
        out = dict(n=cfg.n, **rep.to_dict())
        if cfg.variant is not None:
            out["stationarity_root"] = costmodel.solve_stationarity(cfg.n, cfg.cost, cfg.variant)
        _emit_json(cfg, out)
    elif c == "sweep":
        _sweep(cfg)
    elif c == "fit":
        if cfg.input:
            _emit_json(cfg, experiments.fit_hop_models(experiments.read_records(cfg.input)).to_dict())
        else:
            variant = cfg.variant or "base"
            eps, icpt, r2, bs = experiments.scaling_fit(cfg.targets, cfg.cost, cfg.scaling, variant)
            _emit_json(cfg, dict(method=cfg.scaling, variant=variant, epsilon=eps, intercept=icpt,
                                 r_squared=r2, n=list(cfg.targets), b=bs))


def _sweep(cfg: RunConfig) -> None:
    sc = _sweep_cfg(cfg)
    kind = cfg.kind
    if kind == "fixed":
        recs = experiments.fixed_b_sweep([_num_or_int(t) for t in cfg.targets], cfg.b, sc, cfg.workers)
        _emit_records(cfg, recs, experiments.FIELDS)
    elif kind == "hybrid":
        recs = experiments.hybrid_sweep(cfg.targets, sc, cfg.workers)
        _emit_records(cfg, recs, experiments.FIELDS)
    elif kind == "beta":
        recs = experiments.beta_sweep(TreeParams(cfg.b, cfg.h), cfg.betas, sc, cfg.workers)
        _emit_records(cfg, recs, experiments.FIELDS)
    elif kind == "omega":
        rows = [dict(omega=w, b_star=b, t_predicted=t) for w, b, t in experiments.omega_sweep(cfg.n, cfg.omegas, cfg.cost)]
        _emit_records(cfg, rows, ("omega", "b_star", "t_predicted"))
    elif kind == "time":
        rows = experiments.time_comparison(cfg.targets, cfg.cost)
        _emit_records(cfg, rows, ("n", "b_star", "t_hybrid", "t_fixed", "r"))


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except UsageError as e:
        print(f"hiersearch: error: {e}", file=sys.stderr)
        return 2
    try:
        _run(cfg)
    except (OverflowError, costmodel.NoRootError, ArithmeticError) as e:
        print(f"hiersearch: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"hiersearch: error: {e}", file=sys.stderr)
        return 1
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
