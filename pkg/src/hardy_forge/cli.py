"""Command-line entry point: one subcommand per module, JSON reports.

Exit codes: 0 success, 1 numerical failure, 2 bad input (parse errors,
unknown fixtures), 3 resolution node budget exhausted (partial tree written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__, fixtures, growth, hardy, loja
from .blowup import ResolutionError, resolve
from .poly import Polynomial, PolynomialError, format_poly, parse
from .strata import stratify

SCHEMA = "hardy-forge/1"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_DEPTH = {1: 12, 2: 8, 3: 6, 4: 4}


@dataclass
class RunConfig:
    """Everything that determines a report; ``out`` and ``threads`` do not affect its bytes."""

    command: str
    fixture: str | None = None
    poly: str | None = None
    nvars: int | None = None
    fixture_file: str | None = None
    point: str | None = None
    seed: int = 0
    depth: int | None = None
    trials: int | None = None
    eps: float | None = None
    eta_min: float = 0.01
    eta_max: float = 1.0
    sample_budget: int = 64
    max_nodes: int = 512
    options: dict = field(default_factory=dict)
    out: str | None = None
    threads: int | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        return d


class InputError(ValueError):
    pass


def resolve_poly(cfg: RunConfig) -> tuple[Polynomial, tuple[Fraction, ...], str | None]:
    """The polynomial, its distinguished point and the fixture name (if any)."""
    if cfg.poly is not None and cfg.fixture is not None:
        raise InputError("give either --poly or --fixture, not both")
    if cfg.poly is not None:
        P = parse(cfg.poly, cfg.nvars)
        point = (Fraction(0),) * P.nvars
        name = None
    elif cfg.fixture is not None:
        if cfg.fixture_file:
            table = {f.name: f for f in fixtures.load_file(cfg.fixture_file)}
            if cfg.fixture not in table:
                raise InputError(f"fixture {cfg.fixture!r} not in {cfg.fixture_file}")
            fx = table[cfg.fixture]
        else:
            fx = fixtures.get(cfg.fixture)
        P, point, name = fx.poly, tuple(Fraction(v) for v in fx.point), fx.name
    else:
        raise InputError("one of --poly or --fixture is required")
    if cfg.point is not None:
        point = tuple(Fraction(v.strip()) for v in cfg.point.split(","))
        if len(point) != P.nvars:
            raise InputError("--point dimension does not match the polynomial")
    return P, point, name


def envelope(cfg: RunConfig, P: Polynomial | None, result: dict, fixture: str | None = None) -> dict:
    out = {"schema": SCHEMA, "version": __version__, "command": cfg.command, "config": cfg.to_json(),
           "result": result}
    if P is not None:
        out.update({"polynomial": format_poly(P), "nvars": P.nvars, "fixture": fixture})
    return out


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"


# --- commands ----------------------------------------------------------------------

def cmd_stratify(cfg: RunConfig) -> tuple[dict, int]:
    P, _, name = resolve_poly(cfg)
    strat = stratify(P, sample_budget=cfg.sample_budget, seed=cfg.seed)
    return envelope(cfg, P, strat.to_json(), name), EXIT_OK


def cmd_resolve(cfg: RunConfig) -> tuple[dict, int]:
    P, point, name = resolve_poly(cfg)
    tree = resolve(P, point, max_nodes=cfg.max_nodes,
                   stop_at_normal_crossings=bool(cfg.options.get("stop_nc", False)))
    result = tree.to_json()
    result["trace"] = tree.trace()
    return envelope(cfg, P, result, name), EXIT_BUDGET if tree.exhausted else EXIT_OK


def cmd_loja(cfg: RunConfig) -> tuple[dict, int]:
    P, _, name = resolve_poly(cfg)
    r = float(cfg.options.get("box_radius", 1.0))
    box = [(-r, r)] * P.nvars
    kind = cfg.options.get("kind", "gradient")
    result: dict = {"box": [list(b) for b in box]}
    if kind in ("gradient", "both"):
        fit = loja.fit_gradient_exponent(P, box, n_samples=cfg.trials or 2000, seed=cfg.seed)
        result["gradient"] = fit.to_json()
        if P.is_homogeneous() and P.degree() > 1:
            result["conic_bound"] = 1.0 / P.degree()
    if kind in ("distance", "both"):
        n = cfg.options.get("distance_samples", 200)
        result["distance"] = loja.fit_distance_exponent(P, box, n_samples=n, seed=cfg.seed).to_json()
    return envelope(cfg, P, result, name), EXIT_OK


def _budget(P: Polynomial, point) -> dict | None:
    try:
        tree = resolve(P, point, max_nodes=64)
    except ResolutionError:
        return None
    return hardy.derivative_budget(tree)


def cmd_hardy(cfg: RunConfig) -> tuple[dict, int]:
    P, point, name = resolve_poly(cfg)
    n = P.nvars
    opts = cfg.options
    r = float(opts.get("center_radius", 0.5))
    eps_range = (cfg.eps, cfg.eps) if cfg.eps else (1e-4, 1e-3)
    family = hardy.FamilySpec(
        center_box=tuple((float(c) - r, float(c) + r) for c in point),
        radius_range=tuple(opts.get("radius_range", (0.2, 1.0))),
        eps_range=eps_range,
        vanishing=float(opts.get("vanishing", 1.0)),
        h=int(opts.get("h", 1)),
        s=opts.get("s"),
        depth=cfg.depth or DEFAULT_DEPTH[n],
    )
    report = hardy.estimate_constant(P, opts.get("inequality", "GHI1"), family, cfg.trials or 16,
                                     seed=cfg.seed, threads=cfg.threads or 1)
    result = report.to_json()
    result["derivative_budget"] = _budget(P, point)
    return envelope(cfg, P, result, name), EXIT_OK


def cmd_growth(cfg: RunConfig) -> tuple[dict, int]:
    P, _, name = resolve_poly(cfg)
    zname = cfg.options.get("zeta", "const")
    if zname not in growth.ZETAS:
        raise InputError(f"unknown zeta {zname!r}; known: {', '.join(growth.ZETAS)}")
    zeta = growth.ZETAS[zname]()
    prof = growth.build_profile(P, zeta, cfg.eta_min, cfg.eta_max, depth=cfg.depth or 9,
                                ratio_exp=int(cfg.options.get("ratio_exp", growth.GRID_RATIO_EXP)),
                                threads=cfg.threads or 1)
    gaps = [growth.eta_derivative_check(prof, float(e))[2] for e in prof.eta_grid[1:-1]]
    fit = growth.fit_differential_inequality(prof)
    dbl = growth.doubling_check(prof)
    result = {
        "profile": prof.to_json(),
        "identity_gaps": [float(f"{g:.6e}") for g in gaps],
        "max_identity_gap": float(f"{max(gaps):.6e}"),
        "differential_inequality": fit.to_json(),
        "doubling": {
            "ratios": [{"eta": float(f"{p['eta']:.12e}"), "ratio": float(f"{p['ratio']:.12e}")}
                       for p in dbl["pairs"]],
            "c1": float(f"{dbl['c1']:.12e}"),
            "c2": float(f"{dbl['c2']:.12e}"),
            "c1_at_c2_zero": float(f"{dbl['c1_at_c2_zero']:.12e}"),
            "all_hold": dbl["all_hold"],
        },
    }
    return envelope(cfg, P, result, name), EXIT_OK


def cmd_fixtures(cfg: RunConfig) -> tuple[dict, int]:
    table = fixtures.load_file(cfg.fixture_file) if cfg.fixture_file else list(fixtures.FIXTURES.values())
    return envelope(cfg, None, {"fixtures": [f.to_json() for f in table]}), EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], tuple[dict, int]]] = {
    "stratify": cmd_stratify,
    "resolve": cmd_resolve,
    "loja": cmd_loja,
    "hardy": cmd_hardy,
    "growth": cmd_growth,
    "fixtures": cmd_fixtures,
}


# --- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-forge", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, poly=True):
        if poly:
            p.add_argument("--poly", help="polynomial text in x1..xn")
            p.add_argument("--nvars", type=int)
            p.add_argument("--fixture", help="built-in fixture name (or one from --fixture-file)")
        p.add_argument("--fixture-file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="report path (default: stdout)")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: CPU count)")

    p = sub.add_parser("stratify", help="sample the multiplicity strata")
    common(p)
    p.add_argument("--sample-budget", type=int, default=64)

    p = sub.add_parser("resolve", help="blow-up resolution tree at a point")
    common(p)
    p.add_argument("--point", help="comma-separated rationals (default: the fixture point or origin)")
    p.add_argument("--max-nodes", type=int, default=512)
    p.add_argument("--stop-nc", action="store_true", help="stop at normal-crossings nodes")
    p.add_argument("--trace", action="store_true", help="print the text trace to stderr")

    p = sub.add_parser("loja", help="fit Lojasiewicz exponents")
    common(p)
    p.add_argument("--kind", choices=["gradient", "distance", "both"], default="gradient")
    p.add_argument("--trials", type=int, default=None, help="gradient-fit sample count")
    p.add_argument("--distance-samples", type=int, default=200)
    p.add_argument("--box-radius", type=float, default=1.0)

    p = sub.add_parser("hardy", help="empirical Hardy quotient constants")
    common(p)
    p.add_argument("--point", help="center of the trial-center box")
    p.add_argument("--inequality", choices=list(hardy.INEQUALITIES), default="GHI1")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--eps", type=float, default=None, help="fixed tube width (default: log-uniform in [1e-4, 1e-3])")
    p.add_argument("--h", type=int, default=1, help="Sobolev order of the denominator")
    p.add_argument("--s", type=float, default=None, help="exponent for the weighted inequality")
    p.add_argument("--vanishing", type=float, default=1.0)
    p.add_argument("--center-radius", type=float, default=0.5)

    p = sub.add_parser("growth", help="sublevel integral growth profile")
    common(p)
    p.add_argument("--zeta", choices=list(growth.ZETAS), default="const")
    p.add_argument("--eta-min", type=float, default=0.01)
    p.add_argument("--eta-max", type=float, default=1.0)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--ratio-exp", type=int, default=growth.GRID_RATIO_EXP)

    p = sub.add_parser("fixtures", help="list fixtures")
    common(p, poly=False)
    return ap


_OPTION_KEYS = {
    "resolve": ["stop_nc"],
    "loja": ["kind", "distance_samples", "box_radius"],
    "hardy": ["inequality", "h", "s", "vanishing", "center_radius"],
    "growth": ["zeta", "ratio_exp"],
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    v = vars(ns)
    base = {k: v[k] for k in ("fixture", "poly", "nvars", "fixture_file", "point", "seed", "depth", "trials",
                              "eps", "eta_min", "eta_max", "sample_budget", "max_nodes", "out", "threads")
            if v.get(k) is not None}
    options = {k: v[k] for k in _OPTION_KEYS.get(ns.command, []) if v.get(k) is not None}
    cfg = RunConfig(command=ns.command, options=options, **base)
    if cfg.threads is None:
        cfg.threads = os.cpu_count() or 1
    return cfg


def run(cfg: RunConfig) -> tuple[str, int]:
    report, code = COMMANDS[cfg.command](cfg)
    return dumps(report), code


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        text, code = run(cfg)
    except (PolynomialError, InputError, fixtures.FixtureError, OSError, json.JSONDecodeError) as e:
        print(f"hardy-forge: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError, RuntimeError, np.linalg.LinAlgError) as e:
        print(f"hardy-forge: {cfg.command} failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if ns.command == "resolve" and getattr(ns, "trace", False):
        print(json.loads(text)["result"]["trace"], file=sys.stderr)
    if code == EXIT_BUDGET:
        print("hardy-forge: node budget exhausted; partial tree written", file=sys.stderr)
    return code
