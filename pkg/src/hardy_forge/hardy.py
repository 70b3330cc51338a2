"""Hardy factors, inequality quotients and empirical constants.

The quotients are ratios of grid integrals of test functions that vanish on a
tube around V(P).  Left-hand sides are integrated over the cells that survive
tube exclusion; Sobolev denominators are integrated over all cells, so the
reported quotients under-estimate the true ones.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import profiles
from .blowup import ResolutionTree
from .poly import Polynomial
from .quadrature import QuadratureGrid, build_grid, integrate
from .strata import TubeSpec
from .testfunc import Bump1D, LogBump1D, TestFunction

INEQUALITIES = ("GHI1", "GHI2", "weighted", "inhom", "laplacian")
CLASSICAL_TOL = 0.02


class HardyError(ValueError):
    pass


class ZeroDenominator(HardyError):
    pass


@dataclass(frozen=True)
class HardyFactorSpec:
    P: Polynomial
    which: str  # "H1" or "H2"

    @property
    def d(self) -> int:
        return self.P.degree()

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        p = self.P.numeric(x)
        if np.any(p == 0):
            raise HardyError("Hardy factor evaluated on V(P)")
        if self.which == "H1":
            return np.abs(p) ** (-2.0 / self.d)
        if self.which == "H2":
            g = np.stack([q.numeric(x) for q in self.P.gradient()], axis=-1)
            return np.sum(g * g, axis=-1) / p**2
        raise HardyError(f"unknown Hardy factor {self.which!r}")


def hardy_factor(spec: HardyFactorSpec, x) -> float | np.ndarray:
    out = spec(x)
    return float(out) if np.ndim(out) == 0 else out


def _weighted(weight: np.ndarray, val: np.ndarray) -> np.ndarray:
    # 0 * inf -> 0: the weight may blow up only where the test function vanishes
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = weight * val
    return np.where(val == 0, 0.0, out)


def _abs_p(P: Polynomial, x) -> np.ndarray:
    return np.abs(P.numeric(x))


def _ratio(num: float, den: float) -> float:
    if den <= 0 or not np.isfinite(den):
        raise ZeroDenominator("zero denominator: the test function vanishes on the grid")
    return num / den


def sobolev_denominator(f: TestFunction, grid: QuadratureGrid, h: int) -> float:
    return sum(integrate(grid, lambda x, j=j: f.derivative_norm2(x, j), include_excluded=True)
               for j in range(1, h + 1))


def lhs_ghi(P: Polynomial, which: str, f: TestFunction, grid: QuadratureGrid) -> float:
    spec = HardyFactorSpec(P, which)

    def integrand(x):
        v = f.value(x) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            p = P.numeric(x)
            if which == "H1":
                w = np.abs(p) ** (-2.0 / spec.d)
            else:
                g = np.stack([q.numeric(x) for q in P.gradient()], axis=-1)
                w = np.sum(g * g, axis=-1) / p**2
        return _weighted(w, v)

    return integrate(grid, integrand)


def quotient_ghi(P: Polynomial, which: str, f: TestFunction, h: int, grid: QuadratureGrid) -> float:
    """(int H^i f^2) / (sum_{j=1..h} ||nabla^j f||^2)."""
    if h < 1:
        raise HardyError("h must be at least 1")
    which = {"GHI1": "H1", "GHI2": "H2"}.get(which, which)
    return _ratio(lhs_ghi(P, which, f, grid), sobolev_denominator(f, grid, h))


def quotient_weighted(P: Polynomial, s: float, f: TestFunction, grid: QuadratureGrid) -> float:
    """(int |P|^s f^2) / (int |P|^(s + 2/d) |grad f|^2)."""
    d = P.degree()

    def num(x):
        with np.errstate(divide="ignore"):
            w = _abs_p(P, x) ** s
        return _weighted(w, f.value(x) ** 2)

    def den(x):
        with np.errstate(divide="ignore"):
            w = _abs_p(P, x) ** (s + 2.0 / d)
        return _weighted(w, f.derivative_norm2(x, 1))

    return _ratio(integrate(grid, num), integrate(grid, den, include_excluded=True))


def quotient_inhom(P: Polynomial, f: TestFunction, grid: QuadratureGrid) -> float:
    """(int |P|^(-2/d) f^2) / (int f^2 + (1 + |x|^2) |grad f|^2)."""
    d = P.degree()

    def num(x):
        with np.errstate(divide="ignore"):
            w = _abs_p(P, x) ** (-2.0 / d)
        return _weighted(w, f.value(x) ** 2)

    def den(x):
        return f.value(x) ** 2 + (1 + np.sum(x * x, axis=-1)) * f.derivative_norm2(x, 1)

    return _ratio(integrate(grid, num), integrate(grid, den, include_excluded=True))


def quotient_laplacian(P: Polynomial, f: TestFunction, grid: QuadratureGrid) -> float:
    """(int |Delta P / P| f^2) / (int |grad f|^2); exactly 0 for harmonic P."""
    lap = P.laplacian()
    if lap.is_zero():
        num = 0.0
    else:
        def integrand(x):
            with np.errstate(divide="ignore", invalid="ignore"):
                w = np.abs(lap.numeric(x) / P.numeric(x))
            return _weighted(w, f.value(x) ** 2)

        num = integrate(grid, integrand)
    return _ratio(num, integrate(grid, lambda x: f.derivative_norm2(x, 1), include_excluded=True))


def tube_grid(f: TestFunction, depth: int, eps: float | None = None) -> QuadratureGrid:
    """Grid over the test function's support box with the tube {|P| < eps} cut out."""
    return build_grid(f.support_box(), TubeSpec(f.P, eps or f.tube_eps), depth=depth)


# --- one-dimensional checks -------------------------------------------------------

def classical_constant(s: float) -> float:
    if s == -1:
        raise HardyError("s = -1 has no Hardy constant")
    return 4.0 / (s + 1) ** 2


def classical_hardy_check(s: float, f: LogBump1D, depth: int = 12) -> dict:
    """Both sides of int x^s f^2 <= 4/(s+1)^2 int x^(s+2) f'^2, integrated in t = log x."""
    C = classical_constant(s)
    lo, hi = f.t_support()
    grid = build_grid([(lo, hi)], depth=depth)
    beta = f.beta

    def lhs_t(t):
        t = t[..., 0]
        return np.exp((s + 1 + 2 * beta) * t) * f.h(t) ** 2

    def rhs_t(t):
        t = t[..., 0]
        return np.exp((s + 1 + 2 * beta) * t) * (beta * f.h(t) + f.dh(t)) ** 2

    lhs, rhs = integrate(grid, lhs_t), integrate(grid, rhs_t)
    q = _ratio(lhs, rhs)
    return {"s": s, "lhs": lhs, "rhs": rhs, "constant": C, "quotient": q,
            "violation": q > C * (1 + CLASSICAL_TOL)}


def random_log_bump(rng: np.random.Generator) -> LogBump1D:
    k = int(rng.integers(1, 4))
    return LogBump1D(
        beta=float(rng.uniform(-3, 3)),
        mids=tuple(float(v) for v in rng.uniform(-2, 2, k)),
        scales=tuple(float(v) for v in rng.uniform(0.2, 2.0, k)),
        weights=tuple(float(v) for v in rng.uniform(-1, 1, k)),
    )


def classical_trials(s: float, n_trials: int = 200, seed: int = 0, depth: int = 12) -> dict:
    rng = np.random.default_rng(seed)
    qs = []
    for _ in range(n_trials):
        f = random_log_bump(rng)
        try:
            qs.append(classical_hardy_check(s, f, depth)["quotient"])
        except ZeroDenominator:
            continue
    C = classical_constant(s)
    sup = max(qs) if qs else 0.0
    return {"s": s, "constant": C, "quotients": qs, "sup": sup, "violation": sup > C * (1 + CLASSICAL_TOL)}


def near_extremal_family(s: float, widths: Sequence[float] = (1, 2, 4, 8, 16), depth: int = 12) -> list[float]:
    """Quotients for f = x^(-(s+1)/2) b((log x / L)^2) as the log-width L grows."""
    beta = -(s + 1) / 2
    return [classical_hardy_check(s, LogBump1D(beta, (0.0,), (float(L),), (1.0,)), depth)["quotient"]
            for L in widths]


def eghi_oracle_bound(ell: int) -> float:
    """Bound from iterating the 1-D inequality with s = -2k, k = ell..1."""
    return float(np.prod([4.0 / (2 * i - 1) ** 2 for i in range(1, ell + 1)]))


def eghi_check(ell: int, f: Bump1D, depth: int = 12) -> tuple[float, float]:
    """(int f^2 / x^(2 ell), int (f^(ell))^2) for f supported in x > 0."""
    if ell < 1:
        raise HardyError("ell must be at least 1")
    lo, hi = f.support()
    if lo <= 0:
        raise HardyError("test function must be supported away from 0")
    grid = build_grid([(lo, hi)], depth=depth)
    lhs = integrate(grid, lambda x: f.value(x[..., 0]) ** 2 / x[..., 0] ** (2 * ell))
    rhs = integrate(grid, lambda x: f.derivative(x[..., 0], ell) ** 2)
    return lhs, rhs


# --- the region split for the inhomogeneous estimate ------------------------------------

def crs_weights(P: Polynomial, point: Sequence, delta: float, x: np.ndarray,
                width: float = profiles.DEFAULT_WIDTH) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Squared localizers (psi_C^2, psi_S^2, psi_R^2), summing to 1 exactly.

    With P0 the initial form of P at ``point``, S is where |P| << delta^2 |P0|,
    C where |P| >> delta |P0| and R the band in between.
    """
    P0 = P.initial_form(point)
    a0 = np.asarray([float(v) for v in point])
    p = np.abs(P.numeric(x))
    p0 = np.abs(P0.numeric(x - a0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(p0 > 0, p / (delta * p0), np.inf)
        tb = np.where(p0 > 0, p / (delta**2 * p0), np.inf)
    a = np.where(np.isfinite(ta), profiles.cutoff(np.where(np.isfinite(ta), ta, 0.0), width), 0.0)
    b = np.where(np.isfinite(tb), profiles.cutoff(np.where(np.isfinite(tb), tb, 0.0), width), 0.0)
    return 1.0 - a, b, a - b


def crs_split(P: Polynomial, f: TestFunction, grid: QuadratureGrid, delta: float, point: Sequence) -> dict:
    """I_C, I_S, I_R and the total of int |P|^(-2/d) f^2."""
    if not 0 < delta < 1:
        raise HardyError("delta must lie in (0, 1)")
    d = P.degree()

    def base(x):
        with np.errstate(divide="ignore"):
            w = _abs_p(P, x) ** (-2.0 / d)
        return _weighted(w, f.value(x) ** 2)

    parts = {}
    for i, name in enumerate(("C", "S", "R")):
        parts[name] = integrate(grid, lambda x, i=i: base(x) * crs_weights(P, point, delta, x)[i])
    total = integrate(grid, base)
    s = parts["C"] + parts["S"] + parts["R"]
    return {"delta": delta, "I_C": parts["C"], "I_S": parts["S"], "I_R": parts["R"], "sum": s,
            "total": total, "relative_gap": abs(s - total) / total if total else 0.0}


# --- families and constants ------------------------------------------------------

@dataclass(frozen=True)
class FamilySpec:
    """Random test-function family: centers in a box, radii and tube widths log-uniform."""

    center_box: tuple[tuple[float, float], ...]
    radius_range: tuple[float, float] = (0.2, 1.0)
    eps_range: tuple[float, float] = (1e-4, 1e-3)
    vanishing: float = 1.0
    h: int = 1
    s: float | None = None
    depth: int = 6

    def draw(self, P: Polynomial, rng: np.random.Generator) -> TestFunction:
        box = np.asarray(self.center_box, dtype=float)
        c = rng.uniform(box[:, 0], box[:, 1])
        r = math.exp(rng.uniform(math.log(self.radius_range[0]), math.log(self.radius_range[1])))
        e = math.exp(rng.uniform(math.log(self.eps_range[0]), math.log(self.eps_range[1])))
        return TestFunction(P, tuple(float(v) for v in c), float(r), float(e), vanishing=self.vanishing)

    def to_json(self) -> dict:
        out = asdict(self)
        out["center_box"] = [list(b) for b in self.center_box]
        out["radius_range"] = list(self.radius_range)
        out["eps_range"] = list(self.eps_range)
        return out


@dataclass
class QuotientReport:
    inequality: str
    family: FamilySpec
    quotients: list[float | None]
    members: list[TestFunction]
    ladder: list[dict] = field(default_factory=list)

    @property
    def valid(self) -> list[float]:
        return [q for q in self.quotients if q is not None]

    @property
    def sup(self) -> float | None:
        v = self.valid
        return max(v) if v else None

    @property
    def best_index(self) -> int | None:
        if not self.valid:
            return None
        return max((q, -i) for i, q in enumerate(self.quotients) if q is not None)[1] * -1

    @property
    def drift(self) -> float | None:
        if len(self.ladder) < 2:
            return None
        q0 = self.ladder[0]["quotient"]
        return max(abs(r["quotient"] - q0) / q0 for r in self.ladder[1:])

    def to_json(self) -> dict:
        best = self.best_index
        return {
            "inequality": self.inequality,
            "family": self.family.to_json(),
            "n_trials": len(self.quotients),
            "quotients": [None if q is None else float(f"{q:.12e}") for q in self.quotients],
            "sup": None if self.sup is None else float(f"{self.sup:.12e}"),
            "sup_is_lower_bound_on_constant": True,
            "best_index": best,
            "best_member": None if best is None else self.members[best].to_json(),
            "ladder": [{"eps": float(f"{r['eps']:.12e}"), "quotient": float(f"{r['quotient']:.12e}")}
                       for r in self.ladder],
            "drift": None if self.drift is None else float(f"{self.drift:.12e}"),
        }


def evaluate_quotient(P: Polynomial, inequality: str, f: TestFunction, family: FamilySpec,
                      eps: float | None = None) -> float:
    g = f if eps is None else f.with_eps(eps)
    grid = tube_grid(g, family.depth)
    if inequality in ("GHI1", "GHI2"):
        return quotient_ghi(P, inequality, g, family.h, grid)
    if inequality == "weighted":
        return quotient_weighted(P, family.s if family.s is not None else -2.0 / P.degree(), g, grid)
    if inequality == "inhom":
        return quotient_inhom(P, g, grid)
    if inequality == "laplacian":
        return quotient_laplacian(P, g, grid)
    raise HardyError(f"unknown inequality {inequality!r}")


def estimate_constant(P: Polynomial, inequality: str, family: FamilySpec, n_trials: int, seed: int = 0,
                      ladder_steps: int = 3, threads: int = 1) -> QuotientReport:
    """Sup of quotients over random family members, plus the tube ladder for the best one.

    The sup is an empirical lower bound on the constant, never the constant.
    Trials are drawn up front from the seed and assembled by index, so the
    report does not depend on ``threads``.
    """
    if inequality not in INEQUALITIES:
        raise HardyError(f"unknown inequality {inequality!r}")
    rng = np.random.default_rng(seed)
    members = [family.draw(P, rng) for _ in range(n_trials)]

    def run(f):
        try:
            return evaluate_quotient(P, inequality, f, family)
        except ZeroDenominator:
            return None

    if threads > 1 and n_trials > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            quotients = list(ex.map(run, members))
    else:
        quotients = [run(f) for f in members]
    report = QuotientReport(inequality, family, quotients, members)
    if n_trials and all(q is None for q in quotients):
        raise HardyError("all trials degenerate")
    best = report.best_index
    if best is not None and ladder_steps > 0:
        f = members[best]
        for step in range(ladder_steps + 1):
            eps = f.tube_eps / 2**step
            report.ladder.append({"eps": eps, "quotient": evaluate_quotient(P, inequality, f, family, eps)})
    return report


# --- proof bookkeeping -------------------------------------------------------------

def beta_budget(years: int) -> int:
    """2 * sum_{l=1..years} (l^2 + l)."""
    return 2 * sum(l * l + l for l in range(1, years + 1))


def kappa_constants(m: int, nu: int, d: int) -> tuple[Fraction, Fraction]:
    """(kappa for the first inequality, kappa for the second)."""
    k1 = Fraction(16 * d * d, d * (nu + 1) + m) ** 2
    k2 = Fraction(16 * m * m, (2 * nu + 1) ** 2)
    return k1, k2


def derivative_budget(tree: ResolutionTree, d: int | None = None) -> dict:
    """Derivative-order budgets read off a resolution tree.

    Per generation (a run of center blow-ups at constant order m) the number of
    blow-ups gives the years gamma_m, the center codimension gives nu_m, and
    beta_m = 2 sum_{l<=gamma_m} (l^2 + l).  Along each root-to-leaf path
    h1 = 1 + sum gamma_m and h2 = 1 + sum beta_m; the worst path is reported.
    """
    d = d or tree.P.degree()
    gens_by_leaf = {}
    for leaf in tree.leaves():
        path = []
        nd = leaf
        while nd.parent is not None:
            path.append(tree.nodes[nd.parent])
            nd = tree.nodes[nd.parent]
        path.reverse()
        gens: list[dict] = []
        for node in path:
            if node.gen_count == 0 or not gens:
                gens.append({"m": node.gen_mult, "nu": len(node.center) + 1, "years": 0})
            gens[-1]["years"] += 1
        gens_by_leaf[leaf.id] = gens
    h1 = h2 = 1
    worst: list[dict] = []
    for gens in gens_by_leaf.values():
        for g in gens:
            g["beta"] = beta_budget(g["years"])
            k1, k2 = kappa_constants(g["m"], g["nu"], d)
            g["kappa1"], g["kappa2"] = str(k1), str(k2)
        c1 = 1 + sum(g["years"] for g in gens)
        c2 = 1 + sum(g["beta"] for g in gens)
        if (c1, c2) > (h1, h2):
            h1, h2, worst = c1, c2, gens
    return {"h1": h1, "h2": h2, "generations": worst, "lower_bound": not tree.resolved}
